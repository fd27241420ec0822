#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "quasicrit/cli.hpp"
#include "quasicrit/errors.hpp"

using namespace qc;
using namespace qc::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("qc_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json minimal_cfg(int n = 10) {
    return {{"task", "multifractal"},
            {"model", {{"kind", "minimal"}, {"n", n}, {"V_in_J", 2.0}, {"t_v_in_J", 0.1}}},
            {"analysis", {{"windows", json::array({{{"label", "C"}, {"abs_max_in_J", 0.67}}})}}}};
}

std::string config_error_path(const std::string& task, const json& cfg) {
    try {
        run(task, cfg, scratch("err").string());
    } catch (const ConfigError& e) {
        return e.path;
    }
    return "<no error>";
}

struct Exec {
    int code = -1;
    std::string err;
};

// runs the installed binary; needs QUASICRIT_BIN
Exec exec_bin(const std::string& args, const fs::path& dir) {
    const char* bin = std::getenv("QUASICRIT_BIN");
    REQUIRE_MESSAGE(bin, "QUASICRIT_BIN not set");
    auto err = dir / "stderr.txt";
    std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>" + err.string();
    int st = std::system(cmd.c_str());
    Exec e;
    e.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    e.err = slurp(err);
    return e;
}

fs::path write_cfg(const fs::path& dir, const json& cfg) {
    auto p = dir / "config.json";
    std::ofstream(p) << cfg.dump(2);
    return p;
}

}  // namespace

TEST_CASE("strict schema names the offending key") {
    auto cfg = minimal_cfg();
    cfg["model"]["colour"] = 1;
    CHECK(config_error_path("", cfg) == "model.colour");

    cfg = minimal_cfg();
    cfg["analysis"]["windows"][0]["abs_maxx_in_J"] = 1;
    CHECK(config_error_path("", cfg).find("analysis.windows") == 0);

    cfg = minimal_cfg();
    cfg["dynamics"] = json::object();
    CHECK(config_error_path("", cfg) == "dynamics");

    cfg = minimal_cfg();
    cfg["model"]["V_in_J"] = "two";
    CHECK(config_error_path("", cfg) == "model.V_in_J");

    cfg = minimal_cfg();
    cfg["model"].erase("t_v_in_J");
    CHECK(config_error_path("", cfg) == "model.t_v_in_J");

    CHECK(config_error_path("spectrum", minimal_cfg()) == "task");
    CHECK(config_error_path("", json{{"task", "paint"}}) == "task");
}

TEST_CASE("random potential needs an explicit seed") {
    json chain = {{"potential", {{"kind", "random"}, {"V_in_J", 1.0}}}};
    json cfg = {{"task", "spectrum"}, {"model", {{"kind", "single"}, {"n", 8}, {"chain", chain}}}};
    CHECK(config_error_path("", cfg) == "model.chain.potential.seed");
    cfg["model"]["chain"]["potential"]["seed"] = 7;
    auto dir = scratch("seed");
    run("", cfg, dir.string());
    auto a = slurp(dir / "spectrum.csv");
    run("", cfg, dir.string());
    CHECK(slurp(dir / "spectrum.csv") == a);
}

TEST_CASE("binary exit codes and messages") {
    auto dir = scratch("bin");
    json cfg = {{"task", "dynamics"},
                {"model", {{"kind", "dual"}, {"n", 8}, {"J_in_J", 2.0}, {"V_in_J", 2.0}, {"t_v_in_J", 0.5}}},
                {"dynamics", {{"sigma", -1.0}}}};
    auto p = write_cfg(dir, cfg);
    auto e = exec_bin("dynamics --config " + p.string() + " --out " + (dir / "o").string(), dir);
    CHECK(e.code == 2);
    CHECK(e.err.find("dynamics.sigma") != std::string::npos);
    CHECK(e.err.find(p.string()) != std::string::npos);

    auto cfg2 = minimal_cfg();
    cfg2["analysis"]["windows"][0] = {{"label", "far"}, {"E_min_in_J", 50.0}, {"E_max_in_J", 51.0}};
    p = write_cfg(dir, cfg2);
    e = exec_bin("run --config " + p.string() + " --out " + (dir / "o").string(), dir);
    CHECK(e.code == 4);
    CHECK(e.err.find("analysis.windows[0]") != std::string::npos);

    std::ofstream(dir / "broken.json") << "{\"task\": ";
    e = exec_bin("run --config " + (dir / "broken.json").string(), dir);
    CHECK(e.code == 2);

    p = write_cfg(dir, minimal_cfg(8));
    e = exec_bin("multifractal --config " + p.string() + " --out " + (dir / "ok").string() + " --threads 2", dir);
    CHECK(e.code == 0);
    CHECK(fs::exists(dir / "ok" / "states.csv"));
}

TEST_CASE("repeat runs give identical bytes, independent of threads") {
    auto a = scratch("det_a"), b = scratch("det_b");
    auto cfg = minimal_cfg(11);
    run("", cfg, a.string(), 1);
    run("", cfg, b.string(), 3);
    for (const char* f : {"states.csv", "summary.csv", "windows.csv"}) {
        CHECK(!slurp(a / f).empty());
        CHECK(slurp(a / f) == slurp(b / f));
    }
    json sc = {{"task", "scaling"},
               {"model", {{"kind", "minimal"}, {"n", 8}, {"V_in_J", 2.0}, {"t_v_in_J", 0.1}}},
               {"analysis",
                {{"n_values", {8, 9, 10}}, {"windows", json::array({{{"label", "A"}, {"abs_min_in_J", 2.0}, {"abs_max_in_J", 100.0}}})}}}};
    run("", sc, a.string(), 1);
    run("", sc, b.string(), 3);
    CHECK(slurp(a / "scaling.csv") == slurp(b / "scaling.csv"));
    CHECK(slurp(a / "scaling_fit.csv") == slurp(b / "scaling_fit.csv"));
}

TEST_CASE("provenance hash round trip") {
    auto dir = scratch("prov");
    auto cfg = minimal_cfg();
    cfg["threads"] = 2;
    run("", cfg, dir.string());
    std::ifstream is(dir / "states.csv");
    std::string first;
    std::getline(is, first);
    auto pos = first.find("config_hash=");
    REQUIRE(pos != std::string::npos);
    auto recorded = first.substr(pos + 12, 16);
    json hashed = cfg;
    hashed.erase("threads");
    CHECK(recorded == config_hash_hex(hashed));
    CHECK(first.find("spec_version=1") != std::string::npos);
    CHECK(first.rfind("# quasicrit", 0) == 0);

    // every CSV line ends in LF only, header row after comments
    auto text = slurp(dir / "states.csv");
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.back() == '\n');
    CHECK(text.find("\nn,L,j,E,tau2,alpha_min,ipr,npr,P_2\n") != std::string::npos);

    // a different model gives a different hash
    auto other = cfg;
    other["model"]["V_in_J"] = 2.5;
    hashed = other;
    hashed.erase("threads");
    CHECK(config_hash_hex(hashed) != recorded);
}

TEST_CASE("sweeps") {
    auto dir = scratch("sweep");
    json cfg = {{"task", "sweep"},
                {"model", {{"kind", "minimal"}, {"n", 7}, {"V_in_J", 1.0}, {"t_v_in_J", 0.1}}},
                {"sweep", {{"task", "spectrum"}, {"key", "model.V_in_J"}, {"values", {2.0, 0.5, 1.0}}}}};
    auto res = run("", cfg, dir.string(), 2);
    CHECK(res.warnings.empty());
    auto text = slurp(dir / "sweep_spectrum.csv");
    std::stringstream ss(text);
    std::string line;
    std::vector<double> axis;
    bool header = false;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            CHECK(line == "model.V_in_J,j,E");
            header = true;
            continue;
        }
        axis.push_back(std::stod(line.substr(0, line.find(','))));
    }
    CHECK(axis.size() == 3 * 26);
    CHECK(std::is_sorted(axis.begin(), axis.end()));
    CHECK(axis.front() == 0.5);
    CHECK(fs::exists(dir / "point_0000" / "spectrum.csv"));

    auto empty = cfg;
    empty["sweep"]["values"] = json::array();
    auto e = run("", empty, scratch("sweep_empty").string());
    CHECK(e.files.empty());
    REQUIRE(e.warnings.size() == 1);
    CHECK(e.warnings[0].find("empty") != std::string::npos);

    auto bad = cfg;
    bad["sweep"]["key"] = "model.W_in_J";
    CHECK(config_error_path("", bad) == "sweep.key");

    auto range = cfg;
    range["sweep"].erase("values");
    range["sweep"]["range"] = {{"start", 0.5}, {"stop", 1.5}, {"step", 0.5}};
    auto r = run("", range, scratch("sweep_range").string());
    CHECK(r.files.size() == 4);
}

TEST_CASE("small task runs") {
    auto dir = scratch("tasks");
    json g = {{"task", "greens"}, {"greens", {{"E_values_in_J", {3.0}}, {"d_max", 3}, {"L", 55}}}};
    run("", g, dir.string());
    auto text = slurp(dir / "greens.csv");
    CHECK(text.find("analytic") != std::string::npos);

    json c = {{"task", "continuum"},
              {"continuum",
               {{"V1_in_ER", 8.0},
                {"V2_in_ER", 0.25},
                {"Omega_in_ER", 0.01},
                {"L_cells", 13},
                {"windows", json::array({{{"label", "band"}, {"E_min_in_ER", 2.3}, {"E_max_in_ER", 2.7}}})}}}};
    run("", c, dir.string());
    CHECK(slurp(dir / "continuum.csv").find("j,E_in_ER,tau2,window") != std::string::npos);
    CHECK(fs::exists(dir / "continuum_windows.csv"));

    json d = {{"task", "dynamics"},
              {"model", {{"kind", "dual"}, {"n", 8}, {"J_in_J", 2.0}, {"V_in_J", 2.0}, {"t_v_in_J", 0.5}}},
              {"dynamics", {{"t_max", 20.0}, {"points", 10}, {"fit_window", {2.0, 20.0}}}}};
    run("", d, dir.string());
    auto side = json::parse(slurp(dir / "trace.json"));
    CHECK(side.contains("kappa"));

    json s = {{"task", "spectrum"},
              {"model", {{"kind", "minimal"}, {"n", 6}, {"V_in_J", 2.0}, {"t_v_in_J", 0.1}}},
              {"output", {{"eigen_cache", true}}}};
    run("", s, dir.string());
    CHECK(fs::exists(dir / "eigensystem.eig"));
}

TEST_CASE("recipes and plot scripts") {
    std::set<std::string> names;
    for (const auto& r : recipes()) {
        names.insert(r.name);
        CHECK(r.config.at("task") == r.task);
    }
    for (const char* n : {"fig3a", "fig3c", "fig4b", "fig5", "fig8c", "fig9e", "fig10b", "fig14a"}) CHECK(names.count(n));
    CHECK(find_recipe("fig3c").config.at("model").at("n") == 15);
    CHECK_THROWS_AS(find_recipe("fig99"), ParameterError);

    auto s8 = emit_plot_script("fig8c", {"trace.csv"});
    CHECK(s8.find("0.43") != std::string::npos);
    CHECK(s8.find("loglog") != std::string::npos);
    CHECK(emit_plot_script("fig5", {"h.csv"}).find("subplots(3, 4") != std::string::npos);
    CHECK(!emit_plot_script("fig3a", {"sweep.csv"}).empty());
    CHECK_THROWS(emit_plot_script("fig99", {}));
}
