#include "quasicrit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "quasicrit/continuum.hpp"
#include "quasicrit/csv.hpp"
#include "quasicrit/dynamics.hpp"
#include "quasicrit/effective.hpp"
#include "quasicrit/errors.hpp"
#include "quasicrit/hybridization.hpp"
#include "quasicrit/multifractal.hpp"
#include "quasicrit/parallel.hpp"

namespace fs = std::filesystem;

namespace qc::cli {

namespace {

const std::vector<std::string> kTasks = {"spectrum", "multifractal", "scaling", "distribution", "dynamics",
                                         "fidelity", "greens",       "continuum", "sweep"};

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

// Object view that records which keys were read; finish() rejects the rest.
class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    std::string sub(const std::string& k) const { return join(path_, k); }
    bool has(const std::string& k) const { return j_->contains(k); }

    const json& raw(const std::string& k) {
        used_.insert(k);
        if (!has(k)) throw ConfigError(sub(k), "required key missing");
        return j_->at(k);
    }
    Node child(const std::string& k) { return Node(raw(k), sub(k)); }

    double num(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_number()) throw ConfigError(sub(k), "expected a number");
        return v.get<double>();
    }
    double num(const std::string& k, double def) { return has(k) ? num(k) : def; }

    long integer(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_number_integer()) throw ConfigError(sub(k), "expected an integer");
        return v.get<long>();
    }
    long integer(const std::string& k, long def) { return has(k) ? integer(k) : def; }

    std::string str(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_string()) throw ConfigError(sub(k), "expected a string");
        return v.get<std::string>();
    }
    std::string str(const std::string& k, const std::string& def) { return has(k) ? str(k) : def; }

    bool flag(const std::string& k, bool def) {
        if (!has(k)) return def;
        const auto& v = raw(k);
        if (!v.is_boolean()) throw ConfigError(sub(k), "expected true or false");
        return v.get<bool>();
    }

    std::vector<double> nums(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_array()) throw ConfigError(sub(k), "expected an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(sub(k), "expected an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    std::vector<long> ints(const std::string& k) {
        const auto& v = raw(k);
        if (!v.is_array()) throw ConfigError(sub(k), "expected an array of integers");
        std::vector<long> out;
        for (const auto& x : v) {
            if (!x.is_number_integer()) throw ConfigError(sub(k), "expected an array of integers");
            out.push_back(x.get<long>());
        }
        return out;
    }

    void finish() const {
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(sub(it.key()), "unknown key");
    }

private:
    const json* j_;
    std::string path_;
    std::set<std::string> used_;
};

template <class F>
auto at_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const ParameterError& e) {
        throw ConfigError(path, e.what());
    }
}

// ---------------------------------------------------------------- models

struct Model {
    bool single = false;
    ChainSpec chain;
    CoupledModelSpec coupled;
    int n = 0;

    double L_total() const { return single ? double(chain.length()) : double(coupled.dimension()); }
    std::uint64_t hash() const { return single ? spec_hash(chain) : spec_hash(coupled); }
    std::string text() const { return single ? describe(chain) : describe(coupled); }
};

ChainSpec parse_chain(Node c, int n) {
    ChainSpec spec;
    spec.approximant = fibonacci_approximant(n);
    if (c.has("hopping")) {
        Node h = c.child("hopping");
        auto kind = h.str("kind", "nearest");
        if (kind == "nearest") {
            spec.hopping = hop::Nearest{h.num("hopping_in_J", 1.0), int(h.integer("sign", 1))};
        } else if (kind == "long_range") {
            spec.hopping = hop::ExponentialLongRange{h.num("J0_in_J"), h.num("p_per_site")};
        } else {
            throw ConfigError(h.sub("kind"), "unknown hopping kind '" + kind + "' (nearest, long_range)");
        }
        h.finish();
    }
    if (c.has("potential")) {
        Node p = c.child("potential");
        auto kind = p.str("kind", "none");
        if (kind == "none") {
            spec.potential = pot::None{};
        } else if (kind == "aah") {
            spec.potential = pot::AAH{p.num("V_in_J"), p.num("phi_in_rad", 0.0)};
        } else if (kind == "gaah") {
            double a = p.num("a");
            if (std::abs(a) >= 1.0) throw ConfigError(p.sub("a"), "GAAH requires |a| < 1");
            spec.potential = pot::GAAH{p.num("V_in_J"), a, p.num("phi_in_rad", 0.0)};
        } else if (kind == "mosaic") {
            spec.potential = pot::Mosaic{p.num("V_in_J"), p.num("phi_in_rad", 0.0)};
        } else if (kind == "slow") {
            spec.potential = pot::SlowVarying{p.num("lambda_in_J"), p.num("nu")};
        } else if (kind == "random") {
            if (!p.has("seed")) throw ConfigError(p.sub("seed"), "random potential requires an explicit seed");
            long seed = p.integer("seed");
            auto r = random_onsite_chain(n, p.num("V_in_J"), std::uint64_t(seed));
            spec.potential = r.potential;
        } else {
            throw ConfigError(p.sub("kind"), "unknown potential kind '" + kind + "' (none, aah, gaah, mosaic, slow, random)");
        }
        p.finish();
    }
    spec.potential_sign = int(c.integer("potential_sign", 1));
    spec.mu = c.num("mu_in_J", 0.0);
    c.finish();
    at_path(c.path(), [&] {
        validate(spec);
        return 0;
    });
    return spec;
}

CouplingKind parse_coupling_kind(const std::string& kind, double t_v, const std::string& path) {
    if (kind == "rung") return couple::Rung{t_v};
    if (kind == "rung_plus_cross") return couple::RungPlusCross{t_v};
    if (kind == "antisymmetric_cross") return couple::AntisymmetricCross{t_v};
    throw ConfigError(path, "unknown coupling '" + kind + "' (rung, rung_plus_cross, antisymmetric_cross)");
}

Model parse_model(const json& j, std::optional<int> n_override) {
    Node m(j, "model");
    Model out;
    auto kind = m.str("kind");
    long n = 0;
    if (m.has("n"))
        n = m.integer("n");
    if (n_override) n = *n_override;
    if (n == 0) throw ConfigError(m.sub("n"), "required key missing");
    at_path(m.sub("n"), [&] { return fibonacci_approximant(int(n)); });
    out.n = int(n);

    if (kind == "single") {
        out.single = true;
        out.chain = parse_chain(m.child("chain"), out.n);
    } else if (kind == "coupled") {
        ChainSpec c1 = parse_chain(m.child("chain1"), out.n);
        ChainSpec c2 = parse_chain(m.child("chain2"), out.n);
        Node c = m.child("coupling");
        auto ck = parse_coupling_kind(c.str("kind", "rung"), c.num("t_v_in_J"), c.sub("kind"));
        c.finish();
        out.coupled = {c1, c2, ck};
    } else if (kind == "minimal") {
        out.coupled = minimal_model(out.n, m.num("V_in_J"), m.num("t_v_in_J"));
        out.coupled.coupling = parse_coupling_kind(m.str("coupling", "rung"), m.num("t_v_in_J"), m.sub("coupling"));
        out.coupled.chain2.mu = m.num("mu_ext_in_J", 0.0);
    } else if (kind == "dual") {
        out.coupled = dual_coupled_model(out.n, m.num("J_in_J"), m.num("V_in_J"), m.num("t_v_in_J"));
    } else if (kind == "soc") {
        out.coupled = soc_model(out.n, m.num("V_in_J"), m.num("lambda"), m.num("t_so_in_J"));
    } else {
        throw ConfigError(m.sub("kind"), "unknown model kind '" + kind + "' (single, coupled, minimal, dual, soc)");
    }
    m.finish();
    return out;
}

struct Context {
    json cfg;
    std::string task;
    std::string out;
    int threads = 1;
    std::string cache_dir;
    std::vector<std::string> provenance;
    RunResult result;

    std::string file(const std::string& name) {
        auto p = (fs::path(out) / name).string();
        result.files.push_back(p);
        return p;
    }
};

Matrix model_matrix(const Model& m) { return m.single ? build_single_chain(m.chain) : build_hamiltonian(m.coupled); }

EigenSystem solve(const Model& m, const std::string& cache_dir) {
    char name[40];
    std::snprintf(name, sizeof name, "%016llx.eig", static_cast<unsigned long long>(m.hash()));
    if (!cache_dir.empty()) {
        auto p = fs::path(cache_dir) / name;
        if (fs::exists(p)) {
            auto es = load_eigensystem(p.string());
            if (es.tag.hash == m.hash()) return es;
        }
    }
    auto es = diagonalize(model_matrix(m), {m.hash(), m.n});
    if (!cache_dir.empty()) {
        fs::create_directories(cache_dir);
        save_eigensystem(es, (fs::path(cache_dir) / name).string());
    }
    return es;
}

// ---------------------------------------------------------------- windows

struct WindowSpec {
    EnergyWindow fixed;
    double overlap_gap = 0;  // > 0: detect the overlapped spectra from the decoupled chains
};

std::vector<WindowSpec> parse_windows(Node& a, const std::string& key, const std::string& unit) {
    const auto& arr = a.raw(key);
    const auto path = a.sub(key);
    if (!arr.is_array() || arr.empty()) throw ConfigError(path, "expected a non-empty array of windows");
    std::vector<WindowSpec> out;
    std::set<std::string> labels;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Node w(arr[i], path + "[" + std::to_string(i) + "]");
        WindowSpec s;
        s.fixed.label = w.str("label", "w" + std::to_string(i));
        if (!labels.insert(s.fixed.label).second) throw ConfigError(w.sub("label"), "duplicate window label");
        int forms = 0;
        if (w.has("E_min_in_" + unit) || w.has("E_max_in_" + unit)) {
            ++forms;
            double lo = w.num("E_min_in_" + unit), hi = w.num("E_max_in_" + unit);
            s.fixed = at_path(w.path(), [&] { return interval_window(lo, hi, s.fixed.label); });
        }
        if (w.has("abs_min_in_" + unit) || w.has("abs_max_in_" + unit)) {
            ++forms;
            double lo = w.num("abs_min_in_" + unit, 0.0), hi = w.num("abs_max_in_" + unit);
            s.fixed = at_path(w.path(), [&] { return abs_window(lo, hi, s.fixed.label); });
        }
        if (w.has("intervals_in_" + unit)) {
            ++forms;
            const auto& iv = w.raw("intervals_in_" + unit);
            if (!iv.is_array() || iv.empty()) throw ConfigError(w.sub("intervals_in_" + unit), "expected [[lo, hi], ...]");
            for (const auto& p : iv) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number() ||
                    !(p[0].get<double>() < p[1].get<double>()))
                    throw ConfigError(w.sub("intervals_in_" + unit), "each interval must be [lo, hi] with lo < hi");
                s.fixed.intervals.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
        }
        if (w.has("overlap_gap_in_" + unit)) {
            ++forms;
            s.overlap_gap = w.num("overlap_gap_in_" + unit);
            if (!(s.overlap_gap > 0)) throw ConfigError(w.sub("overlap_gap_in_" + unit), "must be positive");
        }
        if (forms != 1)
            throw ConfigError(w.path(), "give exactly one of E_min/E_max, abs_min/abs_max, intervals, overlap_gap");
        w.finish();
        out.push_back(std::move(s));
    }
    return out;
}

EnergyWindow resolve_window(const WindowSpec& w, const Model& m) {
    if (w.overlap_gap <= 0) return w.fixed;
    if (m.single) throw ConfigError("analysis.windows", "overlap detection needs a coupled model");
    auto e1 = diagonalize(m.coupled.chain1).energies;
    auto e2 = diagonalize(m.coupled.chain2).energies;
    return overlap_window(e1, e2, w.overlap_gap, w.fixed.label);
}

std::string describe_window(const EnergyWindow& w) {
    std::string s;
    for (auto [lo, hi] : w.intervals) s += (s.empty() ? "" : " ") + ("[" + fmt_num(lo) + ";" + fmt_num(hi) + "]");
    return s;
}

struct Thresholds {
    double lo = 0.2, hi = 0.8;
};

Thresholds parse_thresholds(Node& a, const std::string& key) {
    Thresholds t;
    if (!a.has(key)) return t;
    auto v = a.nums(key);
    if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError(a.sub(key), "expected [lo, hi] with lo < hi");
    t.lo = v[0];
    t.hi = v[1];
    return t;
}

std::vector<int> parse_ladder(Node& a) {
    auto v = a.ints("n_values");
    if (v.size() < 3) throw ConfigError(a.sub("n_values"), "need at least 3 Fibonacci indices");
    std::vector<int> out;
    for (long n : v) {
        at_path(a.sub("n_values"), [&] { return fibonacci_approximant(int(n)); });
        out.push_back(int(n));
    }
    return out;
}

void require_sections(const Node& root, Context& ctx, std::initializer_list<const char*> allowed) {
    static const std::set<std::string> common = {"task", "threads", "output", "cache_dir"};
    for (auto it = ctx.cfg.begin(); it != ctx.cfg.end(); ++it) {
        if (common.count(it.key())) continue;
        bool ok = false;
        for (auto* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError(it.key(), "section not used by task '" + ctx.task + "'");
    }
    (void)root;
}

// ---------------------------------------------------------------- tasks

void task_spectrum(Context& ctx) {
    require_sections(Node(ctx.cfg, ""), ctx, {"model"});
    Model m = parse_model(ctx.cfg.at("model"), std::nullopt);
    bool cache = false;
    if (ctx.cfg.contains("output")) {
        Node o(ctx.cfg.at("output"), "output");
        cache = o.flag("eigen_cache", false);
        o.finish();
    }
    auto es = solve(m, ctx.cache_dir);
    CsvWriter w(ctx.file("spectrum.csv"));
    for (const auto& p : ctx.provenance) w.comment(p);
    w.comment("model " + m.text());
    w.header({"j", "E"});
    for (Eigen::Index j = 0; j < es.size(); ++j) w.row({std::to_string(j + 1), fmt_num(es.energies(j))});
    if (cache) save_eigensystem(es, ctx.file("eigensystem.eig"));
}

void task_multifractal(Context& ctx) {
    require_sections(Node(ctx.cfg, ""), ctx, {"model", "analysis"});
    Model m = parse_model(ctx.cfg.at("model"), std::nullopt);
    std::vector<double> qs{2.0};
    std::vector<WindowSpec> windows;
    Thresholds th;
    if (ctx.cfg.contains("analysis")) {
        Node a(ctx.cfg.at("analysis"), "analysis");
        if (a.has("q")) qs = a.nums("q");
        for (double q : qs)
            if (q < 0) throw ConfigError("analysis.q", "moment orders must be non-negative");
        if (a.has("windows")) windows = parse_windows(a, "windows", "J");
        th = parse_thresholds(a, "tau2_thresholds");
        a.finish();
    }
    auto es = solve(m, ctx.cache_dir);
    auto stats = state_stats(es, qs, m.L_total(), ctx.threads);
    auto prov = ctx.provenance;
    prov.push_back("model " + m.text());
    write_state_csv(ctx.file("states.csv"), stats, m.n, m.L_total(), qs, prov);

    auto [ipr, npr] = mean_ipr_npr(es);
    CsvWriter s(ctx.file("summary.csv"));
    for (const auto& p : prov) s.comment(p);
    s.header({"key", "value"});
    s.row({"states", std::to_string(es.size())});
    s.row({"mean_ipr", fmt_num(ipr)});
    s.row({"mean_npr", fmt_num(npr)});

    if (!windows.empty()) {
        CsvWriter w(ctx.file("windows.csv"));
        for (const auto& p : prov) w.comment(p);
        w.header({"window", "intervals", "count", "mean_tau2", "mean_alpha_min", "frac_localized", "frac_critical",
                  "frac_extended"});
        for (std::size_t i = 0; i < windows.size(); ++i) {
            auto win = resolve_window(windows[i], m);
            auto sel = select(stats, win);
            if (sel.empty())
                throw EmptyWindowError("analysis.windows[" + std::to_string(i) + "]: no states in window '" + win.label +
                                       "' " + describe_window(win));
            double t2 = 0, am = 0, nl = 0, nc = 0, ne = 0;
            for (auto* st : sel) {
                t2 += st->tau2;
                am += st->alpha_min;
                if (st->tau2 < th.lo) ++nl;
                else if (st->tau2 > th.hi) ++ne;
                else ++nc;
            }
            double k = double(sel.size());
            auto f = [&](double x) { return fmt_num(x / k); };
            w.row({win.label, describe_window(win), std::to_string(sel.size()), f(t2), f(am), f(nl), f(nc), f(ne)});
        }
    }
}

StatField field_of(const std::string& name, const std::string& path) {
    return at_path(path, [&] { return parse_field(name); });
}

void task_scaling(Context& ctx) {
    require_sections(Node(ctx.cfg, ""), ctx, {"model", "analysis"});
    Node a(ctx.cfg.at("analysis"), "analysis");
    auto ns = parse_ladder(a);
    auto windows = parse_windows(a, "windows", "J");
    std::vector<std::string> fields{"alpha_min"};
    if (a.has("fields")) {
        fields.clear();
        const auto& f = a.raw("fields");
        if (!f.is_array() || f.empty()) throw ConfigError(a.sub("fields"), "expected a non-empty array of names");
        for (const auto& x : f) {
            if (!x.is_string()) throw ConfigError(a.sub("fields"), "expected a non-empty array of names");
            field_of(x.get<std::string>(), a.sub("fields"));
            fields.push_back(x.get<std::string>());
        }
    }
    a.finish();
    // Parse once up front so schema errors surface before any solve.
    parse_model(ctx.cfg.at("model"), ns.front());

    struct Point {
        double L = 0;
        std::vector<std::vector<double>> v;  // [window][field]
        std::vector<std::size_t> count;
    };
    std::vector<Point> pts(ns.size());
    parallel_for(ns.size(), ctx.threads, [&](std::size_t i) {
        Model m = parse_model(ctx.cfg.at("model"), ns[i]);
        auto es = solve(m, ctx.cache_dir);
        auto stats = state_stats(es, {}, m.L_total());
        pts[i].L = m.L_total();
        for (const auto& ws : windows) {
            auto win = resolve_window(ws, m);
            pts[i].count.push_back(select(stats, win).size());
            std::vector<double> row;
            for (const auto& f : fields) row.push_back(window_average(stats, win, parse_field(f)));
            pts[i].v.push_back(row);
        }
    });

    CsvWriter w(ctx.file("scaling.csv"));
    CsvWriter fw(ctx.file("scaling_fit.csv"));
    for (const auto& p : ctx.provenance) {
        w.comment(p);
        fw.comment(p);
    }
    w.header({"window", "field", "n", "L", "value", "count"});
    fw.header({"window", "field", "abscissa", "intercept", "slope", "residual", "samples"});
    for (std::size_t k = 0; k < windows.size(); ++k)
        for (std::size_t f = 0; f < fields.size(); ++f) {
            ScalingSeries s;
            s.quantity = fields[f];
            s.abscissa = fields[f] == "tau2" ? Abscissa::InverseLogL : Abscissa::InverseN;
            for (std::size_t i = 0; i < ns.size(); ++i) {
                s.samples.push_back({ns[i], pts[i].L, pts[i].v[k][f]});
                w.row({windows[k].fixed.label, fields[f], std::to_string(ns[i]), fmt_num(pts[i].L),
                       fmt_num(pts[i].v[k][f]), std::to_string(pts[i].count[k])});
            }
            auto fit = extrapolate(s);
            fw.row({windows[k].fixed.label, fields[f], s.abscissa == Abscissa::InverseN ? "1/n" : "1/lnL",
                    fmt_num(fit.intercept), fmt_num(fit.slope), fmt_num(fit.residual), std::to_string(fit.count)});
        }
}

void task_distribution(Context& ctx) {
    require_sections(Node(ctx.cfg, ""), ctx, {"model", "analysis"});
    Model m = parse_model(ctx.cfg.at("model"), std::nullopt);
    Node a(ctx.cfg.at("analysis"), "analysis");
    auto windows = parse_windows(a, "windows", "J");
    double width = a.num("bin_width", 0.02);
    if (!(width > 0)) throw ConfigError(a.sub("bin_width"), "must be positive");
    a.finish();
    auto es = solve(m, ctx.cache_dir);
    auto stats = state_stats(es, {}, m.L_total());
    for (const auto& ws : windows) {
        auto win = resolve_window(ws, m);
        std::vector<double> vals;
        for (auto* s : select(stats, win)) vals.push_back(s->alpha_min);
        if (vals.empty()) throw EmptyWindowError("analysis.windows: no states in window '" + win.label + "' " + describe_window(win));
        auto h = alpha_histogram(vals, width, m.L_total(), m.n);
        auto prov = ctx.provenance;
        prov.push_back("model " + m.text());
        prov.push_back("window " + win.label + " " + describe_window(win) + " states=" + std::to_string(vals.size()));
        write_histogram_csv(ctx.file("histogram_" + win.label + ".csv"), h, prov);
    }
}

void task_dynamics(Context& ctx) {
    require_sections(Node(ctx.cfg, ""), ctx, {"model", "dynamics"});
    Model m = parse_model(ctx.cfg.at("model"), std::nullopt);
    if (m.single) throw ConfigError("model.kind", "dynamics runs on coupled models (use t_v_in_J = 0 for one chain)");
    Node d(ctx.cfg.at("dynamics"), "dynamics");
    PacketSpec p;
    p.sigma = d.num("sigma", 5.0);
    if (!(p.sigma > 0)) throw ConfigError(d.sub("sigma"), "sigma must be positive");
    p.m0 = d.num("m0", -1.0);
    if (p.m0 >= double(m.coupled.chain_length())) throw ConfigError(d.sub("m0"), "packet center outside the lattice");
    auto target = d.str("target", "loc");
    if (target == "loc") p.target = ChainSel::Loc;
    else if (target == "ext") p.target = ChainSel::Ext;
    else throw ConfigError(d.sub("target"), "expected 'loc' or 'ext'");
    SpreadOptions o;
    o.t_max = d.num("t_max", 500.0);
    o.t_min = d.num("t_min", 1.0);
    o.points = int(d.integer("points", 60));
    if (!(o.t_max > o.t_min && o.t_min > 0)) throw ConfigError(d.sub("t_max"), "need t_max > t_min > 0");
    if (o.points < 3) throw ConfigError(d.sub("points"), "need at least 3 time points");
    if (d.has("fit_window")) {
        auto fw = d.nums("fit_window");
        if (fw.size() != 2 || !(fw[0] < fw[1]) || fw[0] < o.t_min || fw[1] > o.t_max)
            throw ConfigError(d.sub("fit_window"), "expected [lo, hi] inside [t_min, t_max]");
        o.fit_lo = fw[0];
        o.fit_hi = fw[1];
    }
    d.finish();
    auto es = solve(m, ctx.cache_dir);
    auto tr = spread_exponent(m.coupled, es, p, o);
    auto prov = ctx.provenance;
    prov.push_back("model " + m.text());
    write_trace_csv(ctx.file("trace.csv"), tr, prov);
    write_trace_sidecar(ctx.file("trace.json"), tr, prov);
    if (tr.reflection) ctx.result.warnings.push_back("packet width reached the ring saturation scale; fit may be biased");
}

void task_fidelity(Context& ctx) {
    require_sections(Node(ctx.cfg, ""), ctx, {"model", "analysis"});
    Node a(ctx.cfg.at("analysis"), "analysis");
    auto ns = parse_ladder(a);
    auto windows = parse_windows(a, "windows", "J");
    bool profile = a.flag("write_profiles", false);
    a.finish();
    for (const auto& w : windows)
        if (w.overlap_gap > 0) throw ConfigError("analysis.windows", "fidelity windows must be fixed energy ranges");
    Model probe = parse_model(ctx.cfg.at("model"), ns.front());
    if (probe.single) throw ConfigError("model.kind", "fidelity needs a coupled model");

    std::vector<EnergyWindow> wins;
    for (const auto& w : windows) wins.push_back(w.fixed);
    auto family = [&](int n) { return parse_model(ctx.cfg.at("model"), n).coupled; };
    auto series = fidelity_scaling(family, ns, wins, ctx.threads);

    CsvWriter fw(ctx.file("fidelity_fit.csv"));
    for (const auto& p : ctx.provenance) fw.comment(p);
    fw.header({"window", "intercept", "slope", "residual", "samples", "monotone_decreasing"});
    for (std::size_t k = 0; k < wins.size(); ++k) {
        CsvWriter w(ctx.file("fidelity_" + wins[k].label + ".csv"));
        for (const auto& p : ctx.provenance) w.comment(p);
        w.comment("window " + wins[k].label + " " + describe_window(wins[k]));
        w.header({"n", "L", "mean_max_overlap"});
        bool dec = true;
        for (std::size_t i = 0; i < series[k].samples.size(); ++i) {
            const auto& s = series[k].samples[i];
            w.row({std::to_string(s.n), fmt_num(s.L), fmt_num(s.value)});
            if (i > 0 && !(s.value < series[k].samples[i - 1].value)) dec = false;
        }
        auto fit = extrapolate(series[k]);
        fw.row({wins[k].label, fmt_num(fit.intercept), fmt_num(fit.slope), fmt_num(fit.residual),
                std::to_string(fit.count), dec ? "1" : "0"});
    }
    if (profile) {
        for (int n : ns) {
            auto spec = family(n);
            auto prof = overlap_profile(diagonalize_decoupled(spec), diagonalize(spec));
            auto prov = ctx.provenance;
            prov.push_back("model " + describe(spec));
            write_overlap_csv(ctx.file("overlap_n" + std::to_string(n) + ".csv"), prof, prov);
        }
    }
}

void task_greens(Context& ctx) {
    require_sections(Node(ctx.cfg, ""), ctx, {"greens"});
    Node g(ctx.cfg.at("greens"), "greens");
    auto Es = g.nums("E_values_in_J");
    long dmax = g.integer("d_max", 10);
    long L = g.integer("L", 987);
    double eta = g.num("eta", -1.0);
    if (dmax < 0) throw ConfigError(g.sub("d_max"), "must be non-negative");
    if (L < 2) throw ConfigError(g.sub("L"), "ring length must be at least 2");
    g.finish();
    std::vector<GreenRow> rows;
    for (double E : Es) {
        if (std::abs(std::abs(E) - 2.0) < 1e-14) throw ConfigError(g.sub("E_values_in_J"), "|E| = 2 is a branch point");
        double used_eta = eta < 0 ? (std::abs(E) < 2.0 ? 1e-3 : 0.0) : eta;
        for (long d = 0; d <= dmax; ++d) rows.push_back({E, d, green_analytic(E, d), "analytic", 0.0});
        for (long d = 0; d <= dmax; ++d) rows.push_back({E, d, green_numeric(E, d, 0, L, used_eta), "numeric", used_eta});
    }
    write_green_csv(ctx.file("greens.csv"), rows, ctx.provenance);
}

void task_continuum(Context& ctx) {
    require_sections(Node(ctx.cfg, ""), ctx, {"continuum"});
    Node c(ctx.cfg.at("continuum"), "continuum");
    ContinuumSpec s;
    s.V1 = c.num("V1_in_ER");
    s.V2 = c.num("V2_in_ER", 0.0);
    s.Omega = c.num("Omega_in_ER", 0.0);
    s.L_cells = c.integer("L_cells");
    s.dx = c.num("dx_in_a", 0.05);
    s.beta = c.num("beta", 0.0);
    long count = c.integer("states", 0);
    std::vector<WindowSpec> windows;
    if (c.has("windows")) windows = parse_windows(c, "windows", "ER");
    auto th = parse_thresholds(c, "tau2_thresholds");
    c.finish();
    for (const auto& w : windows)
        if (w.overlap_gap > 0) throw ConfigError("continuum.windows", "continuum windows must be fixed energy ranges");
    if (s.L_cells < 1) throw ConfigError("continuum.L_cells", "must be positive");
    auto warns = at_path("continuum.dx_in_a", [&] { return validate(s); });
    for (auto& wmsg : warns) ctx.result.warnings.push_back(wmsg);

    auto es = solve_continuum(s, count);
    auto band = s_band_states(es, s);
    if (!band.gap_found) ctx.result.warnings.push_back("no clear gap above the s-band (gap " + fmt_num(band.gap) + " E_R)");

    auto prov = ctx.provenance;
    prov.push_back("continuum V1=" + fmt_num(s.V1) + " V2=" + fmt_num(s.V2) + " Omega=" + fmt_num(s.Omega) +
                   " L_cells=" + std::to_string(s.L_cells) + " dx=" + fmt_num(s.dx) + " beta=" + fmt_num(s.effective_beta()));
    prov.push_back("s_band bottom=" + fmt_num(band.bottom) + " top=" + fmt_num(band.top) + " gap=" + fmt_num(band.gap));
    CsvWriter w(ctx.file("continuum.csv"));
    for (const auto& p : prov) w.comment(p);
    w.header({"j", "E_in_ER", "tau2", "window"});
    std::vector<std::vector<double>> per(windows.size());
    for (Eigen::Index j = 0; j < es.size(); ++j) {
        double E = es.energies(j);
        double t2 = continuum_tau2(es.states.col(j), s);
        std::string tag;
        for (std::size_t k = 0; k < windows.size(); ++k)
            if (windows[k].fixed.contains(E)) {
                tag = windows[k].fixed.label;
                per[k].push_back(t2);
                break;
            }
        w.row({std::to_string(j + 1), fmt_num(E), fmt_num(t2), tag});
    }
    if (!windows.empty()) {
        CsvWriter sw(ctx.file("continuum_windows.csv"));
        for (const auto& p : prov) sw.comment(p);
        sw.header({"window", "count", "mean_tau2", "frac_below", "frac_between", "frac_above"});
        for (std::size_t k = 0; k < windows.size(); ++k) {
            double lo = 0, mid = 0, hi = 0, sum = 0;
            for (double t : per[k]) {
                sum += t;
                if (t < th.lo) ++lo;
                else if (t > th.hi) ++hi;
                else ++mid;
            }
            if (per[k].empty())
                throw EmptyWindowError("continuum.windows[" + std::to_string(k) + "]: no states in window '" +
                                       windows[k].fixed.label + "'");
            double n = double(per[k].size());
            auto f = [&](double x) { return fmt_num(x / n); };
            sw.row({windows[k].fixed.label, std::to_string(per[k].size()), f(sum), f(lo), f(mid), f(hi)});
        }
    }
}

void run_task(Context& ctx);

json* find_key(json& cfg, const std::string& dotted) {
    json* cur = &cfg;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (!cur->is_object() || !cur->contains(part)) return nullptr;
        cur = &(*cur)[part];
    }
    return cur;
}

const char* primary_output(const std::string& task) {
    if (task == "spectrum") return "spectrum.csv";
    if (task == "multifractal") return "states.csv";
    if (task == "scaling") return "scaling_fit.csv";
    if (task == "dynamics") return "trace.csv";
    if (task == "fidelity") return "fidelity_fit.csv";
    if (task == "greens") return "greens.csv";
    if (task == "continuum") return "continuum.csv";
    return nullptr;
}

void task_sweep(Context& ctx) {
    Node s(ctx.cfg.at("sweep"), "sweep");
    auto sub = s.str("task");
    if (sub == "sweep" || std::find(kTasks.begin(), kTasks.end(), sub) == kTasks.end())
        throw ConfigError(s.sub("task"), "unknown or nested sweep task '" + sub + "'");
    if (!primary_output(sub)) throw ConfigError(s.sub("task"), "task '" + sub + "' cannot be swept");
    auto key = s.str("key");
    std::vector<double> values;
    if (s.has("values")) {
        values = s.nums("values");
    } else if (s.has("range")) {
        Node r = s.child("range");
        double a = r.num("start"), b = r.num("stop"), st = r.num("step");
        r.finish();
        if (!(st > 0)) throw ConfigError(s.sub("range.step"), "must be positive");
        long count = std::lround(std::floor((b - a) / st + 1e-9)) + 1;
        for (long i = 0; i < count; ++i) values.push_back(a + double(i) * st);
    } else {
        throw ConfigError(s.sub("values"), "give either values or range");
    }
    s.finish();

    json base = ctx.cfg;
    base.erase("sweep");
    base["task"] = sub;
    json* target = find_key(base, key);
    if (!target || !target->is_number()) throw ConfigError("sweep.key", "axis key '" + key + "' not found as a numeric config value");
    bool integral = target->is_number_integer();

    if (values.empty()) {
        ctx.result.warnings.push_back("sweep axis is empty; nothing to do");
        return;
    }
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });

    std::vector<std::string> dirs(values.size());
    std::vector<RunResult> results(values.size());
    parallel_for(values.size(), ctx.threads, [&](std::size_t r) {
        std::size_t i = order[r];
        json cfg = base;
        json* t = find_key(cfg, key);
        if (integral) *t = std::lround(values[i]);
        else *t = values[i];
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu", r);
        dirs[r] = (fs::path(ctx.out) / name).string();
        results[r] = run(sub, cfg, dirs[r], 1);
    });

    CsvWriter w(ctx.file(std::string("sweep_") + primary_output(sub)));
    for (const auto& p : ctx.provenance) w.comment(p);
    w.comment("axis " + key + " points=" + std::to_string(values.size()));
    bool header_done = false;
    for (std::size_t r = 0; r < values.size(); ++r) {
        for (auto& f : results[r].files) ctx.result.files.push_back(f);
        for (auto& m : results[r].warnings) ctx.result.warnings.push_back(dirs[r] + ": " + m);
        std::ifstream is(fs::path(dirs[r]) / primary_output(sub));
        std::string line;
        bool header_seen = false;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (!header_seen) {
                header_seen = true;
                if (!header_done) {
                    w.row({key, line});
                    header_done = true;
                }
                continue;
            }
            w.row({fmt_num(values[order[r]]), line});
        }
    }
}

void run_task(Context& ctx) {
    const auto& t = ctx.task;
    if (t == "spectrum") task_spectrum(ctx);
    else if (t == "multifractal") task_multifractal(ctx);
    else if (t == "scaling") task_scaling(ctx);
    else if (t == "distribution") task_distribution(ctx);
    else if (t == "dynamics") task_dynamics(ctx);
    else if (t == "fidelity") task_fidelity(ctx);
    else if (t == "greens") task_greens(ctx);
    else if (t == "continuum") task_continuum(ctx);
    else if (t == "sweep") {
        require_sections(Node(ctx.cfg, ""), ctx, {"model", "analysis", "dynamics", "greens", "continuum", "sweep"});
        task_sweep(ctx);
    } else throw ConfigError("task", "unknown task '" + t + "'");
}

}  // namespace

json load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("<file>", "cannot open config " + path);
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
    }
}

std::string config_hash_hex(const json& cfg) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.dump())));
    return buf;
}

RunResult run(const std::string& task_arg, const json& cfg, const std::string& out_dir, int threads) {
    if (!cfg.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    Context ctx;
    ctx.cfg = cfg;
    std::string task = task_arg;
    if (cfg.contains("task")) {
        if (!cfg.at("task").is_string()) throw ConfigError("task", "expected a string");
        auto named = cfg.at("task").get<std::string>();
        if (!task.empty() && task != named) throw ConfigError("task", "config is for task '" + named + "', not '" + task + "'");
        task = named;
    }
    if (task.empty()) throw ConfigError("task", "no task given");
    if (std::find(kTasks.begin(), kTasks.end(), task) == kTasks.end()) throw ConfigError("task", "unknown task '" + task + "'");
    ctx.task = task;
    ctx.threads = 1;
    if (cfg.contains("threads")) {
        if (!cfg.at("threads").is_number_integer() || cfg.at("threads").get<long>() < 1)
            throw ConfigError("threads", "expected a positive integer");
        ctx.threads = int(cfg.at("threads").get<long>());
    }
    if (threads > 0) ctx.threads = threads;
    if (cfg.contains("cache_dir")) {
        if (!cfg.at("cache_dir").is_string()) throw ConfigError("cache_dir", "expected a string");
        ctx.cache_dir = cfg.at("cache_dir").get<std::string>();
    }
    ctx.out = out_dir.empty() ? "." : out_dir;
    fs::create_directories(ctx.out);
    json hashed = cfg;
    hashed["task"] = task;
    hashed.erase("threads");
    ctx.provenance.push_back(std::string("quasicrit ") + kVersion + " task=" + task +
                             " config_hash=" + config_hash_hex(hashed) + " spec_version=" + std::to_string(kSpecVersion));
    try {
        run_task(ctx);
    } catch (const json::exception& e) {
        throw ConfigError("<root>", e.what());
    }
    return ctx.result;
}

// ---------------------------------------------------------------- recipes

const std::vector<Recipe>& recipes() {
    static const std::vector<Recipe> list = [] {
        std::vector<Recipe> r;
        json minimal = {{"kind", "minimal"}, {"n", 15}, {"V_in_J", 2.0}, {"t_v_in_J", 0.1}};
        json regimes = json::array({{{"label", "A"}, {"abs_min_in_J", 2.0}, {"abs_max_in_J", 100.0}},
                                    {{"label", "B"}, {"abs_min_in_J", 0.67}, {"abs_max_in_J", 2.0}},
                                    {{"label", "C"}, {"abs_min_in_J", 0.0}, {"abs_max_in_J", 0.67}}});
        r.push_back({"fig3a", "sweep", "tau2 of every state against V on the minimal model (t_v=0.1, n=15)",
                     {{"task", "sweep"},
                      {"model", minimal},
                      {"sweep", {{"task", "multifractal"}, {"key", "model.V_in_J"}, {"range", {{"start", 0.1}, {"stop", 3.0}, {"step", 0.1}}}}}}});
        r.push_back({"fig3c", "multifractal", "(E, tau2) of the minimal model at V=2, t_v=0.1, n=15",
                     {{"task", "multifractal"}, {"model", minimal}, {"analysis", {{"q", {2.0}}, {"windows", regimes}}}}});
        json ladder = minimal;
        ladder.erase("n");
        r.push_back({"fig4b", "scaling", "<alpha_min> per regime against 1/n, n=12..16",
                     {{"task", "scaling"},
                      {"model", ladder},
                      {"analysis", {{"n_values", {12, 13, 14, 15, 16}}, {"windows", regimes}, {"fields", {"alpha_min"}}}}}});
        json decoupled = minimal;
        decoupled["t_v_in_J"] = 0.0;
        r.push_back({"fig5", "distribution", "alpha_min histogram in |E|<0.67 at t_v=0 (bimodal reference)",
                     {{"task", "distribution"},
                      {"model", decoupled},
                      {"analysis", {{"bin_width", 0.02}, {"windows", json::array({regimes[2]})}}}}});
        r.push_back({"fig8c", "dynamics", "wave-packet width on the dual line J=V=2, t_v=0.5, n=14",
                     {{"task", "dynamics"},
                      {"model", {{"kind", "dual"}, {"n", 14}, {"J_in_J", 2.0}, {"V_in_J", 2.0}, {"t_v_in_J", 0.5}}},
                      {"dynamics", {{"sigma", 5.0}, {"target", "loc"}, {"t_max", 500.0}, {"points", 60}}}}});
        r.push_back({"fig17", "dynamics", "wave-packet width on the dual line J=V=0.8, t_v=0.5, n=14",
                     {{"task", "dynamics"},
                      {"model", {{"kind", "dual"}, {"n", 14}, {"J_in_J", 0.8}, {"V_in_J", 0.8}, {"t_v_in_J", 0.5}}},
                      {"dynamics", {{"sigma", 5.0}, {"target", "loc"}, {"t_max", 500.0}, {"points", 60}}}}});
        r.push_back({"fig9e", "fidelity", "<Max|C_j|^2> per regime against n=12..16 (V=2, t_v=0.1)",
                     {{"task", "fidelity"}, {"model", ladder}, {"analysis", {{"n_values", {12, 13, 14, 15, 16}}, {"windows", regimes}}}}});
        r.push_back({"fig10b", "continuum", "coarse-grained tau2 of the bichromatic continuum model, L=144a",
                     {{"task", "continuum"},
                      {"continuum",
                       {{"V1_in_ER", 8.0},
                        {"V2_in_ER", 0.25},
                        {"Omega_in_ER", 0.01},
                        {"L_cells", 144},
                        {"dx_in_a", 0.05},
                        {"windows", json::array({{{"label", "overlap"}, {"E_min_in_ER", 2.48}, {"E_max_in_ER", 2.60}}})},
                        {"tau2_thresholds", {0.4, 0.8}}}}}});
        r.push_back({"fig14a", "sweep", "SOC lattice model at lambda=1/3, V=2.3 swept over t_so",
                     {{"task", "sweep"},
                      {"model", {{"kind", "soc"}, {"n", 15}, {"V_in_J", 2.3}, {"lambda", 1.0 / 3.0}, {"t_so_in_J", 0.1}}},
                      {"analysis", {{"windows", json::array({{{"label", "overlap"}, {"overlap_gap_in_J", 0.05}}})}}},
                      {"sweep", {{"task", "multifractal"}, {"key", "model.t_so_in_J"}, {"values", {0.0, 0.05, 0.1, 0.2}}}}}});
        r.push_back({"greens", "greens", "analytic against eigen-sum Green's function of the free chain",
                     {{"task", "greens"}, {"greens", {{"E_values_in_J", {1.0, 2.5, 3.0, 4.0}}, {"d_max", 10}, {"L", 987}}}}});
        return r;
    }();
    return list;
}

const Recipe& find_recipe(const std::string& name) {
    for (const auto& r : recipes())
        if (r.name == name) return r;
    throw ParameterError("unknown recipe '" + name + "'");
}

// ---------------------------------------------------------------- plot scripts

std::vector<std::string> plot_figures() { return {"fig3a", "fig3c", "fig5", "fig8c", "fig9e"}; }

std::string emit_plot_script(const std::string& figure, const std::vector<std::string>& csvs) {
    std::ostringstream os;
    os << "import sys\nimport pandas as pd\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n";
    os << "files = [";
    for (std::size_t i = 0; i < csvs.size(); ++i) os << (i ? ", " : "") << json(csvs[i]).dump();
    os << "] or sys.argv[1:]\n";
    os << "def load(f):\n    return pd.read_csv(f, comment='#')\n\n";
    if (figure == "fig3a") {
        os << "d = pd.concat([load(f) for f in files])\n"
              "fig, ax = plt.subplots(figsize=(5, 4))\n"
              "sc = ax.scatter(d['model.V_in_J'], d['E'], c=d['tau2'], s=1, cmap='jet', vmin=0, vmax=1)\n"
              "fig.colorbar(sc, label=r'$\\tau_2$')\n"
              "ax.set_xlabel('V'); ax.set_ylabel('E')\n"
              "fig.savefig('fig3a.png', dpi=200, bbox_inches='tight')\n";
    } else if (figure == "fig3c") {
        os << "d = load(files[0])\n"
              "fig, ax = plt.subplots(figsize=(5, 3))\n"
              "ax.plot(d['E'], d['tau2'], '.', ms=2)\n"
              "for x in (-2, -0.67, 0.67, 2):\n    ax.axvline(x, ls='--', c='k', lw=0.8)\n"
              "ax.set_xlabel('E'); ax.set_ylabel(r'$\\tau_2(L)$')\n"
              "fig.savefig('fig3c.png', dpi=200, bbox_inches='tight')\n";
    } else if (figure == "fig5") {
        os << "fig, axes = plt.subplots(3, 4, figsize=(12, 8), sharex=True)\n"
              "for ax, f in zip(axes.flat, files):\n"
              "    d = load(f)\n"
              "    ax.bar(d['bin_left'], d['count'], width=d['bin_right'] - d['bin_left'], align='edge')\n"
              "    ax.set_title(f.split('/')[-1], fontsize=8)\n"
              "for ax in axes[-1]:\n    ax.set_xlabel(r'$\\alpha_{min}$')\n"
              "fig.savefig('fig5.png', dpi=200, bbox_inches='tight')\n";
    } else if (figure == "fig8c") {
        os << "import numpy as np\n"
              "fig, ax = plt.subplots(figsize=(5, 4))\n"
              "for f in files:\n"
              "    d = load(f)\n"
              "    d = d[d['t'] > 0]\n"
              "    ax.loglog(d['t'], d['W'], label=f.split('/')[-2] if '/' in f else f)\n"
              "t = np.logspace(0, np.log10(500), 50)\n"
              "ax.loglog(t, 0.6 * t ** 0.43, 'k--', lw=0.8)\n"
              "ax.loglog(t, 0.3 * t ** 1.0, 'k--', lw=0.8)\n"
              "ax.set_xlabel('t'); ax.set_ylabel('W(t)'); ax.legend(fontsize=7)\n"
              "fig.savefig('fig8c.png', dpi=200, bbox_inches='tight')\n";
    } else if (figure == "fig9e") {
        os << "fig, ax = plt.subplots(figsize=(5, 4))\n"
              "for f in files:\n"
              "    d = load(f)\n"
              "    ax.plot(d['n'], d['mean_max_overlap'], 'o-', label=f.split('/')[-1])\n"
              "ax.set_xlabel('n'); ax.set_ylabel(r'$\\langle Max|C_j|^2 \\rangle_E$'); ax.legend(fontsize=7)\n"
              "fig.savefig('fig9e.png', dpi=200, bbox_inches='tight')\n";
    } else {
        throw ParameterError("unknown figure id '" + figure + "'");
    }
    return os.str();
}

}  // namespace qc::cli
