#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "quasicrit/cli.hpp"
#include "quasicrit/errors.hpp"
#include "quasicrit/runtime.hpp"

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace qc::cli {

namespace {

int cmd_recipes(const std::string& show, const std::string& write_dir) {
    if (!show.empty()) {
        std::cout << find_recipe(show).config.dump(2) << "\n";
        return 0;
    }
    for (const auto& r : recipes()) {
        std::printf("%-8s %-13s %s\n", r.name.c_str(), r.task.c_str(), r.description.c_str());
        if (!write_dir.empty()) {
            std::filesystem::create_directories(write_dir);
            std::ofstream os(std::filesystem::path(write_dir) / (r.name + ".json"), std::ios::binary);
            os << r.config.dump(2) << "\n";
        }
    }
    return 0;
}

int cmd_plot(const std::string& figure, const std::vector<std::string>& csvs, const std::string& out) {
    auto script = emit_plot_script(figure, csvs);
    if (out.empty()) {
        std::cout << script;
    } else {
        std::ofstream os(out, std::ios::binary);
        os << script;
    }
    return 0;
}

}  // namespace

int main_entry(int argc, char** argv) {
    // BLAS threading changes summation order; keep results bit-stable.
    if (openblas_set_num_threads) openblas_set_num_threads(1);
    reexec_if_blas_faulty(argv);

    CLI::App app{"quasicrit: coupled quasiperiodic chain toolkit"};
    app.set_version_flag("--version", std::string("quasicrit ") + kVersion);
    app.require_subcommand(1);

    std::string config, out = ".";
    int threads = 0;
    const std::vector<std::string> tasks = {"spectrum", "multifractal", "scaling", "distribution", "dynamics",
                                            "fidelity", "greens",       "continuum", "sweep",       "run"};
    std::map<CLI::App*, std::string> task_cmds;
    for (const auto& t : tasks) {
        auto* sc = app.add_subcommand(t, t == "run" ? "run the task named in the config" : "run the " + t + " task");
        sc->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
        sc->add_option("--out", out, "output directory");
        sc->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        task_cmds[sc] = t == "run" ? "" : t;
    }

    std::string show, write_dir;
    auto* rc = app.add_subcommand("recipes", "list the built-in figure recipes");
    rc->add_option("--show", show, "print one recipe config");
    rc->add_option("--write", write_dir, "write every recipe config into this directory");

    std::string figure, plot_out;
    std::vector<std::string> csvs;
    auto* pc = app.add_subcommand("plot", "emit a matplotlib script for a figure");
    pc->add_option("--figure", figure, "figure id")->required();
    pc->add_option("--out", plot_out, "script path (stdout if omitted)");
    pc->add_option("csv", csvs, "input CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (rc->parsed()) return cmd_recipes(show, write_dir);
        if (pc->parsed()) return cmd_plot(figure, csvs, plot_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    for (auto& [sc, task] : task_cmds) {
        if (!sc->parsed()) continue;
        try {
            auto res = run(task, load_config(config), out, threads);
            for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            for (const auto& f : res.files) std::printf("%s\n", f.c_str());
            return 0;
        } catch (const ConfigError& e) {
            std::fprintf(stderr, "error: %s: %s\n", config.c_str(), e.what());
            return 2;
        } catch (const ParameterError& e) {
            std::fprintf(stderr, "error: %s: %s\n", config.c_str(), e.what());
            return 2;
        } catch (const EmptyWindowError& e) {
            std::fprintf(stderr, "error: %s: empty energy window: %s\n", config.c_str(), e.what());
            return 4;
        } catch (const NumericalError& e) {
            std::fprintf(stderr, "error: %s: numerical failure: %s\n", config.c_str(), e.what());
            return 3;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s: %s\n", config.c_str(), e.what());
            return 1;
        }
    }
    return 1;
}

}  // namespace qc::cli
