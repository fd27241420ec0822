#include "quasicrit/models.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "quasicrit/errors.hpp"

namespace qc {

namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::int64_t ring_distance(std::int64_t l, std::int64_t m, std::int64_t L) {
    std::int64_t d = l > m ? l - m : m - l;
    return std::min(d, L - d);
}

// Writes the chain block at offset off of H.
void fill_chain(Matrix& H, const ChainSpec& spec, Eigen::Index off) {
    const std::int64_t L = spec.length();
    const auto g = onsite_sequence(spec);
    for (std::int64_t m = 0; m < L; ++m) H(off + m, off + m) = g[m];

    std::visit(overloaded{
                   [&](const hop::Nearest& h) {
                       const double t = h.sign * h.J;
                       for (std::int64_t m = 0; m < L; ++m) {
                           std::int64_t r = (m + 1) % L;
                           if (r == m) continue;
                           H(off + m, off + r) += t;
                           H(off + r, off + m) = H(off + m, off + r);
                       }
                   },
                   [&](const hop::ExponentialLongRange& h) {
                       for (std::int64_t l = 0; l < L; ++l)
                           for (std::int64_t m = l + 1; m < L; ++m) {
                               double v = h.J0 * std::exp(-h.p * double(ring_distance(l, m, L)));
                               H(off + l, off + m) = v;
                               H(off + m, off + l) = v;
                           }
                   }},
               spec.hopping);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

FibonacciApproximant fibonacci_approximant(int n) {
    if (n < 3 || n > 30) throw ParameterError("fibonacci index n must be in [3, 30], got " + std::to_string(n));
    std::int64_t a = 1, b = 1;  // F_1, F_2
    for (int k = 3; k <= n; ++k) {
        std::int64_t c = a + b;
        a = b;
        b = c;
    }
    return {n, b, a, double(a) / double(b)};
}

FibonacciApproximant plain_ring(std::int64_t L, double beta) {
    if (L < 2) throw ParameterError("ring length must be at least 2");
    return {0, L, 0, beta};
}

double coupling_strength(const CouplingKind& c) {
    return std::visit([](const auto& k) { return k.t_v; }, c);
}

CouplingKind with_strength(const CouplingKind& c, double t_v) {
    CouplingKind out = c;
    std::visit([t_v](auto& k) { k.t_v = t_v; }, out);
    return out;
}

void validate(const ChainSpec& spec) {
    if (spec.length() < 2) throw ParameterError("chain length must be at least 2");
    if (spec.potential_sign != 1 && spec.potential_sign != -1) throw ParameterError("potential_sign must be +1 or -1");
    std::visit(overloaded{
                   [](const pot::GAAH& p) {
                       if (std::abs(p.a) >= 1.0)
                           throw ParameterError("GAAH requires |a| < 1 (unbounded potential otherwise), got a=" + num(p.a));
                   },
                   [&](const pot::Sampled& p) {
                       if (std::int64_t(p.values.size()) != spec.length())
                           throw ParameterError("sampled potential length does not match chain length");
                   },
                   [](const pot::SlowVarying& p) {
                       if (!(p.nu > 0.0 && p.nu < 1.0)) throw ParameterError("slow-varying potential needs 0 < nu < 1");
                   },
                   [](const auto&) {}},
               spec.potential);
    std::visit(overloaded{
                   [](const hop::Nearest& h) {
                       if (h.sign != 1 && h.sign != -1) throw ParameterError("hopping sign must be +1 or -1");
                   },
                   [](const hop::ExponentialLongRange& h) {
                       if (!(h.p > 0)) throw ParameterError("long-range decay p must be positive");
                   }},
               spec.hopping);
}

void validate(const CoupledModelSpec& spec) {
    validate(spec.chain1);
    validate(spec.chain2);
    const auto& a = spec.chain1.approximant;
    const auto& b = spec.chain2.approximant;
    if (a.n != b.n || a.F_n != b.F_n || a.F_prev != b.F_prev || a.beta != b.beta)
        throw ParameterError("both chains must share one approximant");
}

double potential_value(const ChainSpec& spec, std::int64_t m) {
    const double beta = spec.approximant.beta;
    const double pi = std::numbers::pi;
    double g = std::visit(overloaded{
                              [](const pot::None&) { return 0.0; },
                              [&](const pot::AAH& p) { return 2.0 * p.V * std::cos(2.0 * pi * beta * m + p.phi); },
                              [&](const pot::GAAH& p) {
                                  if (std::abs(p.a) >= 1.0) throw ParameterError("GAAH requires |a| < 1");
                                  double c = std::cos(2.0 * pi * beta * m + p.phi);
                                  return 2.0 * p.V * c / (1.0 - p.a * c);
                              },
                              [&](const pot::Mosaic& p) {
                                  if (m % 2 != 0) return 0.0;
                                  return 4.0 * p.V * std::cos(2.0 * pi * beta * m + p.phi);
                              },
                              [&](const pot::SlowVarying& p) {
                                  return p.lambda * std::cos(pi * beta * std::pow(double(m), p.nu));
                              },
                              [&](const pot::Sampled& p) { return p.values.at(std::size_t(m)); }},
                          spec.potential);
    return spec.potential_sign * g + spec.mu;
}

std::vector<double> onsite_sequence(const ChainSpec& spec) {
    std::vector<double> g(std::size_t(spec.length()));
    for (std::int64_t m = 0; m < spec.length(); ++m) g[std::size_t(m)] = potential_value(spec, m);
    return g;
}

Matrix build_single_chain(const ChainSpec& spec) {
    validate(spec);
    const auto L = Eigen::Index(spec.length());
    Matrix H = Matrix::Zero(L, L);
    fill_chain(H, spec, 0);
    return H;
}

Matrix build_hamiltonian(const CoupledModelSpec& spec) {
    validate(spec);
    const std::int64_t L = spec.chain_length();
    Matrix H = Matrix::Zero(2 * L, 2 * L);
    fill_chain(H, spec.chain1, 0);
    fill_chain(H, spec.chain2, L);

    // b_m -> index m, a_m -> index L + m
    auto add = [&](std::int64_t a_site, std::int64_t b_site, double v) {
        a_site = ((a_site % L) + L) % L;
        b_site = ((b_site % L) + L) % L;
        H(L + a_site, b_site) += v;
        H(b_site, L + a_site) = H(L + a_site, b_site);
    };
    std::visit(overloaded{
                   [&](const couple::Rung& c) {
                       for (std::int64_t m = 0; m < L; ++m) add(m, m, c.t_v);
                   },
                   [&](const couple::RungPlusCross& c) {
                       for (std::int64_t m = 0; m < L; ++m) {
                           add(m, m, c.t_v);
                           add(m + 1, m, c.t_v);
                           add(m, m + 1, c.t_v);
                       }
                   },
                   [&](const couple::AntisymmetricCross& c) {
                       for (std::int64_t m = 0; m < L; ++m) {
                           add(m, m + 1, c.t_v);
                           add(m, m - 1, -c.t_v);
                       }
                   }},
               spec.coupling);
    return H;
}

ChainSpec dual_partner(const ChainSpec& spec) {
    const auto* h = std::get_if<hop::Nearest>(&spec.hopping);
    const auto* p = std::get_if<pot::AAH>(&spec.potential);
    if (!h || !p) throw ParameterError("dual partner needs nearest-neighbour hopping and an AAH potential");
    if (p->phi != 0.0) throw ParameterError("dual partner is defined at phi = 0");
    ChainSpec out = spec;
    out.hopping = hop::Nearest{p->V, h->sign};
    out.potential = pot::AAH{h->J, 0.0};
    return out;
}

std::string describe(const ChainSpec& spec) {
    std::ostringstream os;
    os << "chain{n=" << spec.approximant.n << ",F=" << spec.approximant.F_n << ",beta=" << num(spec.approximant.beta) << ",";
    std::visit(overloaded{
                   [&](const hop::Nearest& h) { os << "nearest(J=" << num(h.J) << ",s=" << h.sign << ")"; },
                   [&](const hop::ExponentialLongRange& h) { os << "longrange(J0=" << num(h.J0) << ",p=" << num(h.p) << ")"; }},
               spec.hopping);
    os << ",";
    std::visit(overloaded{
                   [&](const pot::None&) { os << "none"; },
                   [&](const pot::AAH& p) { os << "aah(V=" << num(p.V) << ",phi=" << num(p.phi) << ")"; },
                   [&](const pot::GAAH& p) { os << "gaah(V=" << num(p.V) << ",a=" << num(p.a) << ",phi=" << num(p.phi) << ")"; },
                   [&](const pot::Mosaic& p) { os << "mosaic(V=" << num(p.V) << ",phi=" << num(p.phi) << ")"; },
                   [&](const pot::SlowVarying& p) { os << "slow(lambda=" << num(p.lambda) << ",nu=" << num(p.nu) << ")"; },
                   [&](const pot::Sampled& p) { os << "sampled(" << fnv1a64(std::string(reinterpret_cast<const char*>(p.values.data()), p.values.size() * sizeof(double))) << ")"; }},
               spec.potential);
    os << ",sign=" << spec.potential_sign << ",mu=" << num(spec.mu) << "}";
    return os.str();
}

std::string describe(const CoupledModelSpec& spec) {
    static const char* names[] = {"rung", "rung_plus_cross", "antisymmetric_cross"};
    return "coupled{" + describe(spec.chain1) + "," + describe(spec.chain2) + "," + names[spec.coupling.index()] +
           "(t_v=" + num(coupling_strength(spec.coupling)) + ")}";
}

std::uint64_t spec_hash(const CoupledModelSpec& spec) { return fnv1a64(describe(spec)); }
std::uint64_t spec_hash(const ChainSpec& spec) { return fnv1a64(describe(spec)); }

ChainSpec aah_chain(int n, double J, double V, double phi) {
    ChainSpec c;
    c.hopping = hop::Nearest{J, 1};
    c.potential = pot::AAH{V, phi};
    c.approximant = fibonacci_approximant(n);
    return c;
}

ChainSpec free_chain(int n, double J) {
    ChainSpec c;
    c.hopping = hop::Nearest{J, 1};
    c.approximant = fibonacci_approximant(n);
    return c;
}

CoupledModelSpec minimal_model(int n, double V, double t_v) {
    return {aah_chain(n, 1.0, V), free_chain(n, 1.0), couple::Rung{t_v}};
}

CoupledModelSpec dual_coupled_model(int n, double J, double V, double t_v) {
    // chain1: hopping 1 with 2V cos; chain2: hopping J with 2 cos
    return {aah_chain(n, 1.0, V), aah_chain(n, J, 1.0), couple::Rung{t_v}};
}

CoupledModelSpec soc_model(int n, double V, double lambda, double t_so) {
    // up: -t0 hopping, (1+lambda) V cos; down: +t0 hopping, -(1-lambda) V cos
    ChainSpec up = aah_chain(n, 1.0, 0.5 * (1.0 + lambda) * V);
    up.hopping = hop::Nearest{1.0, -1};
    ChainSpec down = aah_chain(n, 1.0, 0.5 * (1.0 - lambda) * V);
    down.potential_sign = -1;
    return {up, down, couple::AntisymmetricCross{t_so}};
}

double gaah_edge_sign_form(double J, double V, double a) {
    if (a == 0.0) throw ParameterError("GAAH edge undefined at a = 0");
    double s = std::abs(J) > std::abs(V) ? 1.0 : (std::abs(J) < std::abs(V) ? -1.0 : 0.0);
    return 2.0 * s / a;
}

double gaah_edge_linear_form(double V, double a) {
    if (a == 0.0) throw ParameterError("GAAH edge undefined at a = 0");
    return (2.0 - 2.0 * V) / a;
}

bool gaah_extended_linear_form(double E, double V, double a) { return a * E < 2.0 - 2.0 * V; }

double mosaic_edge(double V) {
    if (V == 0.0) throw ParameterError("mosaic edge undefined at V = 0");
    return 1.0 / (2.0 * std::abs(V));
}

bool mosaic_extended(double E, double V) { return std::abs(E) < mosaic_edge(V); }

}  // namespace qc
