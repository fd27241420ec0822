#include "quasicrit/dynamics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "quasicrit/csv.hpp"
#include "quasicrit/errors.hpp"

namespace qc {

double ring_displacement(double m, double m0, std::int64_t L) {
    const double Ld = double(L);
    double d = std::fmod(m - m0, Ld);
    if (d > Ld / 2) d -= Ld;
    if (d <= -Ld / 2) d += Ld;
    return d;
}

double packet_center(const PacketSpec& spec, std::int64_t L_chain) {
    return spec.m0 < 0 ? double(L_chain / 2) : spec.m0;
}

CVector gaussian_packet(const PacketSpec& spec, const CoupledModelSpec& model) {
    if (!(spec.sigma > 0)) throw ParameterError("packet width sigma must be positive");
    const auto L = model.chain_length();
    const double m0 = packet_center(spec, L);
    if (m0 >= double(L)) throw ParameterError("packet center outside the lattice");
    CVector psi = CVector::Zero(2 * L);
    const Eigen::Index off = spec.target == ChainSel::Loc ? 0 : L;
    for (std::int64_t m = 0; m < L; ++m) {
        double d = ring_displacement(double(m), m0, L);
        psi(off + m) = std::exp(-d * d / (2.0 * spec.sigma * spec.sigma));
    }
    double nrm = psi.norm();
    if (!(nrm > 0)) throw NumericalError("packet has zero norm; is m0 a lattice site?");
    return psi / nrm;
}

double width(const CVector& psi, std::int64_t L_chain, double m0, int chains) {
    if (psi.size() != Eigen::Index(chains) * L_chain) throw ContractError("state size does not match lattice");
    double s1 = 0, s2 = 0, tot = 0;
    for (std::int64_t m = 0; m < L_chain; ++m) {
        double p = 0;
        for (int c = 0; c < chains; ++c) p += std::norm(psi(Eigen::Index(c) * L_chain + m));
        double x = ring_displacement(double(m), m0, L_chain);
        s1 += p * x;
        s2 += p * x * x;
        tot += p;
    }
    if (std::abs(tot - 1.0) > 1e-8) throw ContractError("width needs a unit-norm state");
    double var = s2 - s1 * s1;
    return std::sqrt(std::max(0.0, var));
}

LogFit loglog_fit(const std::vector<double>& t, const std::vector<double>& W, double lo, double hi) {
    if (t.empty() || lo < t.front() * (1 - 1e-12) || hi > t.back() * (1 + 1e-12) || !(lo < hi))
        throw ParameterError("fit window lies outside the time trace");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi) continue;
        if (!(W[i] > 0)) throw NumericalError("non-positive width inside the fit window");
        double x = std::log(t[i]), y = std::log(W[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++k;
    }
    if (k < 3) throw ParameterError("fit window holds fewer than 3 trace points");
    LogFit f;
    f.points = k;
    double den = double(k) * sxx - sx * sx;
    f.slope = (double(k) * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / double(k);
    double r = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi) continue;
        double e = std::log(W[i]) - (f.intercept + f.slope * std::log(t[i]));
        r += e * e;
    }
    f.residual = std::sqrt(r / double(k));
    return f;
}

SpreadTrace spread_exponent(const CoupledModelSpec& model, const EigenSystem& es, const PacketSpec& packet,
                            const SpreadOptions& opt) {
    if (!(opt.t_max > opt.t_min && opt.t_min > 0) || opt.points < 2) throw ParameterError("bad time grid");
    const auto L = model.chain_length();
    const double m0 = packet_center(packet, L);
    const Matrix H = build_hamiltonian(model);
    const CVector psi0 = gaussian_packet(packet, model);
    Propagator prop(es, psi0);
    auto energy = [&H](const CVector& psi) {
        Vector re = psi.real(), im = psi.imag();
        return re.dot(H * re) + im.dot(H * im);
    };
    const double E0 = energy(psi0);

    SpreadTrace tr;
    tr.W0 = width(psi0, L, m0);
    tr.fit_lo = opt.fit_lo < 0 ? opt.t_max / 30.0 : opt.fit_lo;
    tr.fit_hi = opt.fit_hi < 0 ? opt.t_max / 3.0 : opt.fit_hi;
    const double ratio = std::log(opt.t_max / opt.t_min) / double(opt.points - 1);
    for (int i = 0; i < opt.points; ++i) {
        double t = i == opt.points - 1 ? opt.t_max : opt.t_min * std::exp(ratio * i);
        CVector psi = prop.at(t);
        tr.norm_drift = std::max(tr.norm_drift, std::abs(psi.norm() - 1.0));
        double E = energy(psi);
        tr.energy_drift = std::max(tr.energy_drift, std::abs(E - E0));
        tr.t.push_back(t);
        tr.W.push_back(width(psi, L, m0));
    }
    for (double w : tr.W) tr.max_W = std::max(tr.max_W, w);
    tr.reflection = tr.max_W >= 0.9 * double(L) / std::sqrt(12.0);
    auto fit = loglog_fit(tr.t, tr.W, tr.fit_lo, tr.fit_hi);
    tr.kappa = fit.slope;
    tr.prefactor = std::exp(fit.intercept);
    tr.residual = fit.residual;
    tr.fit_points = fit.points;
    return tr;
}

SpreadTrace spread_exponent(const CoupledModelSpec& model, const PacketSpec& packet, const SpreadOptions& opt) {
    auto es = diagonalize(model);
    return spread_exponent(model, es, packet, opt);
}

void write_trace_csv(const std::string& path, const SpreadTrace& tr, const std::vector<std::string>& provenance) {
    CsvWriter w(path);
    for (const auto& p : provenance) w.comment(p);
    w.header({"t", "W"});
    w.row({"0", fmt_num(tr.W0)});
    for (std::size_t i = 0; i < tr.t.size(); ++i) w.row({fmt_num(tr.t[i]), fmt_num(tr.W[i])});
}

void write_trace_sidecar(const std::string& path, const SpreadTrace& tr, const std::vector<std::string>& provenance) {
    nlohmann::ordered_json j;
    j["provenance"] = provenance;
    j["kappa"] = tr.kappa;
    j["prefactor"] = tr.prefactor;
    j["fit_window"] = {tr.fit_lo, tr.fit_hi};
    j["fit_points"] = tr.fit_points;
    j["residual"] = tr.residual;
    j["reflection"] = tr.reflection;
    j["max_W"] = tr.max_W;
    j["W0"] = tr.W0;
    j["norm_drift"] = tr.norm_drift;
    j["energy_drift"] = tr.energy_drift;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParameterError("cannot open output file: " + path);
    os << j.dump(2) << '\n';
}

}  // namespace qc
