#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quasicrit/spectral.hpp"

namespace qc {

using ConstVecRef = Eigen::Ref<const Vector>;

double moment_pq(ConstVecRef psi, double q);
// D_q(L) = -ln P_q / ((q - 1) ln L); q = 1 is rejected, see information_dimension.
double fractal_dimension(ConstVecRef psi, double q, double L_total);
// Shannon-entropy limit q -> 1.
double information_dimension(ConstVecRef psi, double L_total);
// -ln|psi_i|^2 / ln L, +inf for exact zeros.
std::vector<double> alpha_indices(ConstVecRef psi, double L_total);
double alpha_min(ConstVecRef psi, double L_total);

struct StateStats {
    Eigen::Index j = 0;
    double E = 0;
    std::vector<double> Pq;  // one per configured q
    double tau2 = 0;
    double alpha_min = 0;
    double ipr = 0;
    double npr = 0;
};

// L_total defaults to the eigenvector length (2F_n coupled, F_n single chain).
std::vector<StateStats> state_stats(const EigenSystem& es, const std::vector<double>& qs = {}, double L_total = 0,
                                    int threads = 1);

enum class StatField { Tau2, AlphaMin, Ipr, Npr };
double field_value(const StateStats& s, StatField f);
StatField parse_field(const std::string& name);

// Union of closed energy intervals.
struct EnergyWindow {
    std::string label;
    std::vector<std::pair<double, double>> intervals;
    bool contains(double E) const;
};
EnergyWindow interval_window(double lo, double hi, std::string label = {});
// lo < |E| < hi; lo = 0 gives a single symmetric interval.
EnergyWindow abs_window(double lo, double hi, std::string label = {});

double window_average(const std::vector<StateStats>& stats, double Emin, double Emax, StatField field);
double window_average(const std::vector<StateStats>& stats, const EnergyWindow& w, StatField field);
std::vector<const StateStats*> select(const std::vector<StateStats>& stats, const EnergyWindow& w);

enum class Abscissa { InverseN, InverseLogL };

struct ScalingSample {
    int n = 0;
    double L = 0;
    double value = 0;
};

struct FitRecord {
    double intercept = 0;
    double slope = 0;
    double residual = 0;  // root-mean-square deviation of the samples from the line
    std::size_t count = 0;
};

struct ScalingSeries {
    std::string quantity;
    Abscissa abscissa = Abscissa::InverseN;
    std::vector<ScalingSample> samples;
};

double abscissa_value(Abscissa a, const ScalingSample& s);
FitRecord extrapolate(const ScalingSeries& series);

struct AlphaHistogram {
    double width = 0.02;
    double L_total = 0;
    int n = 0;
    std::vector<double> edges;  // size bins + 1
    std::vector<long> counts;
    std::vector<std::optional<double>> f_L;
    long excluded = 0;  // values outside [0, edges.back())
    int modes = 0;
};

// Mode: maximal run of bins whose count exceeds floor_fraction of the peak.
int count_modes(const std::vector<long>& counts, double floor_fraction = 0.05);
AlphaHistogram alpha_histogram(const std::vector<double>& values, double width, double L_total, int n = 0);

std::pair<double, double> mean_ipr_npr(const EigenSystem& es);

void write_state_csv(const std::string& path, const std::vector<StateStats>& stats, int n, double L,
                     const std::vector<double>& qs, const std::vector<std::string>& provenance);
void write_histogram_csv(const std::string& path, const AlphaHistogram& h, const std::vector<std::string>& provenance);

}  // namespace qc
