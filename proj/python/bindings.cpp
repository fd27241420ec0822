#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quasicrit/cli.hpp"
#include "quasicrit/continuum.hpp"
#include "quasicrit/dynamics.hpp"
#include "quasicrit/effective.hpp"
#include "quasicrit/errors.hpp"
#include "quasicrit/hybridization.hpp"
#include "quasicrit/multifractal.hpp"
#include "quasicrit/spectral.hpp"

namespace py = pybind11;
using namespace qc;

namespace {

ChainSpec make_chain(int n, const std::string& potential, double V, double J, double a, double phi, int hopping_sign,
                     int potential_sign, double mu) {
    ChainSpec c = free_chain(n, J);
    c.hopping = hop::Nearest{J, hopping_sign};
    if (potential == "none") c.potential = pot::None{};
    else if (potential == "aah") c.potential = pot::AAH{V, phi};
    else if (potential == "gaah") c.potential = pot::GAAH{V, a, phi};
    else if (potential == "mosaic") c.potential = pot::Mosaic{V, phi};
    else throw ParameterError("unknown potential '" + potential + "' (none, aah, gaah, mosaic)");
    c.potential_sign = potential_sign;
    c.mu = mu;
    validate(c);
    return c;
}

CouplingKind make_coupling(const std::string& kind, double t_v) {
    if (kind == "rung") return couple::Rung{t_v};
    if (kind == "rung_plus_cross") return couple::RungPlusCross{t_v};
    if (kind == "antisymmetric_cross") return couple::AntisymmetricCross{t_v};
    throw ParameterError("unknown coupling '" + kind + "' (rung, rung_plus_cross, antisymmetric_cross)");
}

py::dict stats_dict(const EigenSystem& es, double L_total) {
    std::vector<StateStats> st;
    {
        py::gil_scoped_release nogil;
        st = state_stats(es, {}, L_total);
    }
    const auto n = Eigen::Index(st.size());
    Vector E(n), tau2(n), amin(n), ipr(n), npr(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& s = st[std::size_t(j)];
        E(j) = s.E;
        tau2(j) = s.tau2;
        amin(j) = s.alpha_min;
        ipr(j) = s.ipr;
        npr(j) = s.npr;
    }
    py::dict d;
    d["E"] = E;
    d["tau2"] = tau2;
    d["alpha_min"] = amin;
    d["ipr"] = ipr;
    d["npr"] = npr;
    return d;
}

template <class Spec>
EigenSystem solve(const Spec& s) {
    py::gil_scoped_release nogil;
    return diagonalize(s);
}

}  // namespace

PYBIND11_MODULE(_quasicrit, m) {
    m.doc() = "Coupled quasiperiodic chains: spectra, multifractality, dynamics, fidelity, Green's functions";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<EmptyWindowError>(m, "EmptyWindowError", PyExc_LookupError);
    py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("lapack_healthy", &lapack_healthy, "True when the linked LAPACK passes the built-in eigensolver check");
    m.def("fibonacci", [](int n) {
        auto f = fibonacci_approximant(n);
        return py::make_tuple(f.F_n, f.F_prev, f.beta);
    }, py::arg("n"), "(F_n, F_{n-1}, beta) of the n-th approximant");

    py::class_<ChainSpec>(m, "Chain")
        .def("__repr__", [](const ChainSpec& c) { return describe(c); })
        .def_property_readonly("length", &ChainSpec::length)
        .def("onsite", [](const ChainSpec& c) { return onsite_sequence(c); })
        .def("hamiltonian", [](const ChainSpec& c) { return build_single_chain(c); });

    py::class_<CoupledModelSpec>(m, "CoupledModel")
        .def("__repr__", [](const CoupledModelSpec& s) { return describe(s); })
        .def_property_readonly("chain1", [](const CoupledModelSpec& s) { return s.chain1; })
        .def_property_readonly("chain2", [](const CoupledModelSpec& s) { return s.chain2; })
        .def_property_readonly("dimension", &CoupledModelSpec::dimension)
        .def("hamiltonian", [](const CoupledModelSpec& s) { return build_hamiltonian(s); });

    m.def("chain", &make_chain, py::arg("n"), py::arg("potential") = "aah", py::arg("V") = 0.0, py::arg("J") = 1.0,
          py::arg("a") = 0.0, py::arg("phi") = 0.0, py::arg("hopping_sign") = 1, py::arg("potential_sign") = 1,
          py::arg("mu") = 0.0, "nearest-neighbour ring of F_n sites");
    m.def("coupled", [](const ChainSpec& c1, const ChainSpec& c2, const std::string& kind, double t_v) {
        CoupledModelSpec s{c1, c2, make_coupling(kind, t_v)};
        validate(s);
        return s;
    }, py::arg("chain1"), py::arg("chain2"), py::arg("coupling") = "rung", py::arg("t_v") = 0.0);
    m.def("minimal_model", &minimal_model, py::arg("n"), py::arg("V"), py::arg("t_v"));
    m.def("dual_coupled_model", &dual_coupled_model, py::arg("n"), py::arg("J"), py::arg("V"), py::arg("t_v"));
    m.def("soc_model", &soc_model, py::arg("n"), py::arg("V"), py::arg("lam"), py::arg("t_so"));

    m.def("diagonalize", [](const CoupledModelSpec& s) {
        auto es = solve(s);
        return py::make_tuple(es.energies, es.states);
    }, py::arg("model"), "(energies, eigenvectors as columns)");
    m.def("diagonalize", [](const ChainSpec& s) {
        auto es = solve(s);
        return py::make_tuple(es.energies, es.states);
    }, py::arg("chain"));
    m.def("state_stats", [](const CoupledModelSpec& s) { return stats_dict(solve(s), 0); }, py::arg("model"),
          "per-state E, tau2, alpha_min, ipr, npr");
    m.def("state_stats", [](const ChainSpec& s) { return stats_dict(solve(s), 0); }, py::arg("chain"));

    m.def("overlap_profile", [](const CoupledModelSpec& s) {
        EigenSystem es0, es;
        std::vector<OverlapEntry> prof;
        {
            py::gil_scoped_release nogil;
            es0 = diagonalize_decoupled(s);
            es = diagonalize(s);
            prof = overlap_profile(es0, es);
        }
        Vector E(Eigen::Index(prof.size())), c(Eigen::Index(prof.size()));
        for (std::size_t j = 0; j < prof.size(); ++j) {
            E(Eigen::Index(j)) = prof[j].E;
            c(Eigen::Index(j)) = prof[j].max_overlap;
        }
        return py::make_tuple(E, c);
    }, py::arg("model"), "(E_j, Max|C_j|^2) against the decoupled eigenbasis");

    m.def("spread", [](const CoupledModelSpec& s, double sigma, const std::string& target, double t_max, int points,
                       std::optional<std::pair<double, double>> fit_window) {
        PacketSpec p;
        p.sigma = sigma;
        if (target == "loc") p.target = ChainSel::Loc;
        else if (target == "ext") p.target = ChainSel::Ext;
        else throw ParameterError("target must be 'loc' or 'ext'");
        SpreadOptions o;
        o.t_max = t_max;
        o.points = points;
        if (fit_window) {
            o.fit_lo = fit_window->first;
            o.fit_hi = fit_window->second;
        }
        SpreadTrace tr;
        {
            py::gil_scoped_release nogil;
            tr = spread_exponent(s, p, o);
        }
        py::dict d;
        d["t"] = tr.t;
        d["W"] = tr.W;
        d["W0"] = tr.W0;
        d["kappa"] = tr.kappa;
        d["residual"] = tr.residual;
        d["fit_window"] = py::make_tuple(tr.fit_lo, tr.fit_hi);
        d["reflection"] = tr.reflection;
        d["max_W"] = tr.max_W;
        return d;
    }, py::arg("model"), py::arg("sigma") = 5.0, py::arg("target") = "loc", py::arg("t_max") = 500.0,
          py::arg("points") = 60, py::arg("fit_window") = py::none(), "wave-packet width W(t) and its exponent");

    m.def("green_analytic", &green_analytic, py::arg("E"), py::arg("d"));
    m.def("green_numeric", &green_numeric, py::arg("E"), py::arg("m"), py::arg("n"), py::arg("L"), py::arg("eta") = -1.0);

    m.def("continuum", [](double V1, double V2, double Omega, long L_cells, double dx, double beta, long count) {
        ContinuumSpec s;
        s.V1 = V1;
        s.V2 = V2;
        s.Omega = Omega;
        s.L_cells = L_cells;
        s.dx = dx;
        s.beta = beta;
        EigenSystem es;
        {
            py::gil_scoped_release nogil;
            es = solve_continuum(s, count);
        }
        Vector tau2(es.size());
        for (Eigen::Index j = 0; j < es.size(); ++j) tau2(j) = continuum_tau2(es.states.col(j), s);
        py::dict d;
        d["E"] = es.energies;
        d["tau2"] = tau2;
        d["warnings"] = validate(s);
        return d;
    }, py::arg("V1"), py::arg("V2") = 0.0, py::arg("Omega") = 0.0, py::arg("L_cells") = 89, py::arg("dx") = 0.05,
          py::arg("beta") = 0.0, py::arg("count") = 0, "lowest states of the two-component continuum model");

    m.def("run_config", [](const std::string& config_json, const std::string& out_dir, const std::string& task, int threads) {
        auto cfg = cli::json::parse(config_json);
        cli::RunResult r;
        {
            py::gil_scoped_release nogil;
            r = cli::run(task, cfg, out_dir, threads);
        }
        return py::make_tuple(r.files, r.warnings);
    }, py::arg("config_json"), py::arg("out_dir"), py::arg("task") = "", py::arg("threads") = 0,
          "run a JSON config; returns (files, warnings)");
    m.def("recipe", [](const std::string& name) { return cli::find_recipe(name).config.dump(); }, py::arg("name"));
    m.def("recipe_names", [] {
        std::vector<std::string> out;
        for (const auto& r : cli::recipes()) out.push_back(r.name);
        return out;
    });
}
