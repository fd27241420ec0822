#include "quasicrit/multifractal.hpp"

#include <cmath>
#include <limits>

#include "quasicrit/csv.hpp"
#include "quasicrit/errors.hpp"
#include "quasicrit/parallel.hpp"

namespace qc {

double moment_pq(ConstVecRef psi, double q) {
    if (q < 0) throw ParameterError("moment order q must be non-negative");
    double s = 0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        double p = psi(i) * psi(i);
        if (q == 2.0)
            s += p * p;
        else if (q == 1.0)
            s += p;
        else
            s += std::pow(p, q);
    }
    return s;
}

double fractal_dimension(ConstVecRef psi, double q, double L_total) {
    if (q == 1.0) throw ParameterError("D_q is singular at q = 1; use information_dimension");
    if (!(L_total > 1)) throw ParameterError("L_total must exceed 1");
    return -std::log(moment_pq(psi, q)) / ((q - 1.0) * std::log(L_total));
}

double information_dimension(ConstVecRef psi, double L_total) {
    if (!(L_total > 1)) throw ParameterError("L_total must exceed 1");
    double h = 0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        double p = psi(i) * psi(i);
        if (p > 0) h -= p * std::log(p);
    }
    return h / std::log(L_total);
}

std::vector<double> alpha_indices(ConstVecRef psi, double L_total) {
    const double lnL = std::log(L_total);
    std::vector<double> a(std::size_t(psi.size()));
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        double p = psi(i) * psi(i);
        a[std::size_t(i)] = p > 0 ? -std::log(p) / lnL : std::numeric_limits<double>::infinity();
    }
    return a;
}

double alpha_min(ConstVecRef psi, double L_total) {
    double pmax = psi.cwiseAbs2().maxCoeff();
    return -std::log(pmax) / std::log(L_total);
}

std::vector<StateStats> state_stats(const EigenSystem& es, const std::vector<double>& qs, double L_total, int threads) {
    const double N = double(es.dimension());
    if (L_total <= 0) L_total = N;
    std::vector<StateStats> out(std::size_t(es.size()));
    parallel_for(out.size(), threads, [&](std::size_t k) {
        auto j = Eigen::Index(k);
        auto psi = es.states.col(j);
        StateStats& s = out[k];
        s.j = j;
        s.E = es.energies(j);
        s.ipr = moment_pq(psi, 2.0);
        s.npr = 1.0 / (N * s.ipr);
        s.tau2 = -std::log(s.ipr) / std::log(L_total);
        s.alpha_min = alpha_min(psi, L_total);
        for (double q : qs) s.Pq.push_back(moment_pq(psi, q));
    });
    return out;
}

double field_value(const StateStats& s, StatField f) {
    switch (f) {
        case StatField::Tau2: return s.tau2;
        case StatField::AlphaMin: return s.alpha_min;
        case StatField::Ipr: return s.ipr;
        case StatField::Npr: return s.npr;
    }
    return 0;
}

StatField parse_field(const std::string& name) {
    if (name == "tau2") return StatField::Tau2;
    if (name == "alpha_min") return StatField::AlphaMin;
    if (name == "ipr") return StatField::Ipr;
    if (name == "npr") return StatField::Npr;
    throw ParameterError("unknown statistic '" + name + "' (tau2, alpha_min, ipr, npr)");
}

bool EnergyWindow::contains(double E) const {
    for (auto [lo, hi] : intervals)
        if (E >= lo && E <= hi) return true;
    return false;
}

EnergyWindow interval_window(double lo, double hi, std::string label) {
    if (!(lo < hi)) throw ParameterError("energy window needs Emin < Emax");
    return {std::move(label), {{lo, hi}}};
}

EnergyWindow abs_window(double lo, double hi, std::string label) {
    if (!(lo >= 0 && lo < hi)) throw ParameterError("|E| window needs 0 <= lo < hi");
    if (lo == 0) return {std::move(label), {{-hi, hi}}};
    return {std::move(label), {{-hi, -lo}, {lo, hi}}};
}

std::vector<const StateStats*> select(const std::vector<StateStats>& stats, const EnergyWindow& w) {
    std::vector<const StateStats*> out;
    for (const auto& s : stats)
        if (w.contains(s.E)) out.push_back(&s);
    return out;
}

double window_average(const std::vector<StateStats>& stats, const EnergyWindow& w, StatField field) {
    auto sel = select(stats, w);
    if (sel.empty()) throw EmptyWindowError("no states in energy window" + (w.label.empty() ? std::string{} : " '" + w.label + "'"));
    double s = 0;
    for (auto* p : sel) s += field_value(*p, field);
    return s / double(sel.size());
}

double window_average(const std::vector<StateStats>& stats, double Emin, double Emax, StatField field) {
    return window_average(stats, interval_window(Emin, Emax), field);
}

double abscissa_value(Abscissa a, const ScalingSample& s) {
    if (a == Abscissa::InverseN) return 1.0 / double(s.n);
    return 1.0 / std::log(s.L);
}

FitRecord extrapolate(const ScalingSeries& series) {
    const auto k = series.samples.size();
    if (k < 3) throw ParameterError("extrapolation of '" + series.quantity + "' needs at least 3 samples");
    double sx = 0, sy = 0;
    for (const auto& s : series.samples) {
        sx += abscissa_value(series.abscissa, s);
        sy += s.value;
    }
    const double mx = sx / double(k), my = sy / double(k);
    double sxx = 0, sxy = 0;
    for (const auto& s : series.samples) {
        double dx = abscissa_value(series.abscissa, s) - mx;
        sxx += dx * dx;
        sxy += dx * (s.value - my);
    }
    if (sxx <= 1e-300 * double(k)) throw NumericalError("degenerate abscissa in extrapolation of '" + series.quantity + "'");
    FitRecord f;
    f.count = k;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double r = 0;
    for (const auto& s : series.samples) {
        double e = s.value - (f.intercept + f.slope * abscissa_value(series.abscissa, s));
        r += e * e;
    }
    f.residual = std::sqrt(r / double(k));
    return f;
}

int count_modes(const std::vector<long>& counts, double floor_fraction) {
    long peak = 0;
    for (long c : counts) peak = std::max(peak, c);
    if (peak == 0) return 0;
    const double floor = floor_fraction * double(peak);
    int modes = 0;
    bool inside = false;
    for (long c : counts) {
        bool above = double(c) > floor;
        if (above && !inside) ++modes;
        inside = above;
    }
    return modes;
}

AlphaHistogram alpha_histogram(const std::vector<double>& values, double width, double L_total, int n) {
    if (!(width > 0)) throw ParameterError("histogram bin width must be positive");
    AlphaHistogram h;
    h.width = width;
    h.L_total = L_total;
    h.n = n;
    const auto bins = std::size_t(std::ceil((1.0 + width) / width - 1e-9));
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(double(b) * width);
    h.counts.assign(bins, 0);
    for (double v : values) {
        if (!(v >= 0) || !(v < h.edges.back())) {
            ++h.excluded;
            continue;
        }
        auto b = std::size_t(std::floor(v / width));
        if (b >= bins) b = bins - 1;
        ++h.counts[b];
    }
    h.f_L.resize(bins);
    for (std::size_t b = 0; b < bins; ++b)
        if (h.counts[b] > 0 && L_total > 1) h.f_L[b] = std::log(double(h.counts[b])) / std::log(L_total);
    h.modes = count_modes(h.counts);
    return h;
}

std::pair<double, double> mean_ipr_npr(const EigenSystem& es) {
    const double N = double(es.dimension());
    double si = 0, sn = 0;
    for (Eigen::Index j = 0; j < es.size(); ++j) {
        double ipr = moment_pq(es.states.col(j), 2.0);
        si += ipr;
        sn += 1.0 / (N * ipr);
    }
    return {si / double(es.size()), sn / double(es.size())};
}

void write_state_csv(const std::string& path, const std::vector<StateStats>& stats, int n, double L,
                     const std::vector<double>& qs, const std::vector<std::string>& provenance) {
    CsvWriter w(path);
    for (const auto& p : provenance) w.comment(p);
    std::vector<std::string> cols{"n", "L", "j", "E", "tau2", "alpha_min", "ipr", "npr"};
    for (double q : qs) cols.push_back("P_" + fmt_num(q));
    w.header(cols);
    for (const auto& s : stats) {
        // 1-based state labels
        std::vector<std::string> r{std::to_string(n), fmt_num(L), std::to_string(s.j + 1), fmt_num(s.E),
                                   fmt_num(s.tau2), fmt_num(s.alpha_min), fmt_num(s.ipr), fmt_num(s.npr)};
        for (double v : s.Pq) r.push_back(fmt_num(v));
        w.row(r);
    }
}

void write_histogram_csv(const std::string& path, const AlphaHistogram& h, const std::vector<std::string>& provenance) {
    CsvWriter w(path);
    for (const auto& p : provenance) w.comment(p);
    w.comment("modes=" + std::to_string(h.modes) + " excluded=" + std::to_string(h.excluded));
    w.header({"bin_left", "bin_right", "count", "f_L"});
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        w.row({fmt_num(h.edges[b]), fmt_num(h.edges[b + 1]), std::to_string(h.counts[b]),
               h.f_L[b] ? fmt_num(*h.f_L[b]) : std::string{}});
}

}  // namespace qc
