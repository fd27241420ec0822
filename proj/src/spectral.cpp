#include "quasicrit/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "quasicrit/errors.hpp"

namespace qc {

namespace {

constexpr char kMagic[8] = {'Q', 'C', 'E', 'I', 'G', 'S', 'Y', 'S'};
constexpr std::uint64_t kVersion = 1;

void check_symmetric(const Matrix& H, const ModelTag& tag) {
    if (H.rows() != H.cols()) throw ContractError("hamiltonian is not square");
    double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    double asym = (H - H.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        throw ContractError("hamiltonian is not symmetric (max asymmetry " + std::to_string(asym) +
                            ", spec hash " + std::to_string(tag.hash) + ")");
}

void check_info(lapack_int info, const char* routine, const ModelTag& tag, Eigen::Index dim) {
    if (info == 0) return;
    throw NumericalError(std::string(routine) + " failed with info=" + std::to_string(info) + " (dim " +
                         std::to_string(dim) + ", spec hash " + std::to_string(tag.hash) + ", n=" +
                         std::to_string(tag.n) + ")");
}

template <class T>
void put(std::ofstream& os, T v) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw NumericalError("eigen cache truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

double self_check_residual() {
    const int n = 256;
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) A(i, j) = A(j, i) = std::sin(0.37 * i + 1.3 * j * j) + (i == j ? 0.01 * i : 0.0);
    Matrix Z = A;
    Vector w(n);
    if (LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, Z.data(), n, w.data()) != 0) return 1e300;
    return (A * Z - Z * w.asDiagonal()).cwiseAbs().maxCoeff();
}

void require_healthy() {
    if (!lapack_healthy())
        throw NumericalError("LAPACK self-check failed: the BLAS kernel picked for this CPU returns wrong "
                             "eigenvectors; set OPENBLAS_CORETYPE=Haswell (or another working core type)");
}

}  // namespace

bool lapack_healthy() {
    static const bool ok = self_check_residual() < 1e-9;
    return ok;
}

void fix_signs(Matrix& states) {
    for (Eigen::Index j = 0; j < states.cols(); ++j) {
        for (Eigen::Index i = 0; i < states.rows(); ++i) {
            if (std::abs(states(i, j)) > 1e-8) {
                if (states(i, j) < 0) states.col(j) *= -1.0;
                break;
            }
        }
    }
}

EigenSystem diagonalize(const Matrix& H, ModelTag tag) {
    check_symmetric(H, tag);
    require_healthy();
    const auto n = H.rows();
    EigenSystem es;
    es.tag = tag;
    es.states = H;
    es.energies.resize(n);
    if (n == 0) return es;
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', lapack_int(n), es.states.data(), lapack_int(n),
                                     es.energies.data());
    check_info(info, "dsyevd", tag, n);
    fix_signs(es.states);
    return es;
}

EigenSystem diagonalize_lowest(const Matrix& H, Eigen::Index count, ModelTag tag) {
    check_symmetric(H, tag);
    require_healthy();
    const auto n = H.rows();
    if (count < 1 || count > n) throw ParameterError("requested eigenpair count out of range");
    Matrix a = H;
    EigenSystem es;
    es.tag = tag;
    Vector w(n);
    es.states.resize(n, count);
    std::vector<lapack_int> isuppz(std::size_t(2 * count));
    lapack_int found = 0;
    lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', lapack_int(n), a.data(), lapack_int(n), 0.0, 0.0,
                                     1, lapack_int(count), 0.0, &found, w.data(), es.states.data(), lapack_int(n),
                                     isuppz.data());
    check_info(info, "dsyevr", tag, n);
    if (found != count) throw NumericalError("dsyevr returned fewer eigenpairs than requested");
    es.energies = w.head(count);
    fix_signs(es.states);
    return es;
}

EigenSystem diagonalize(const CoupledModelSpec& spec) {
    return diagonalize(build_hamiltonian(spec), {spec_hash(spec), spec.chain1.approximant.n});
}

EigenSystem diagonalize(const ChainSpec& spec) {
    return diagonalize(build_single_chain(spec), {spec_hash(spec), spec.approximant.n});
}

EigenSystem diagonalize_decoupled(const CoupledModelSpec& spec) {
    validate(spec);
    auto a = diagonalize(spec.chain1);
    auto b = diagonalize(spec.chain2);
    const auto L = a.size();
    std::vector<Eigen::Index> order(std::size_t(2 * L));
    std::iota(order.begin(), order.end(), 0);
    auto energy = [&](Eigen::Index k) { return k < L ? a.energies(k) : b.energies(k - L); };
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return energy(x) < energy(y); });

    CoupledModelSpec zero = spec;
    zero.coupling = with_strength(spec.coupling, 0.0);
    EigenSystem es;
    es.tag = {spec_hash(zero), spec.chain1.approximant.n};
    es.energies.resize(2 * L);
    es.states = Matrix::Zero(2 * L, 2 * L);
    for (Eigen::Index j = 0; j < 2 * L; ++j) {
        auto k = order[std::size_t(j)];
        es.energies(j) = energy(k);
        if (k < L)
            es.states.col(j).head(L) = a.states.col(k);
        else
            es.states.col(j).tail(L) = b.states.col(k - L);
    }
    return es;
}

std::vector<Eigen::Index> states_in_window(const EigenSystem& es, double Emin, double Emax) {
    if (!(Emin < Emax)) throw ParameterError("energy window needs Emin < Emax");
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < es.size(); ++j)
        if (es.energies(j) >= Emin && es.energies(j) <= Emax) out.push_back(j);
    return out;
}

double gram_deviation(const EigenSystem& es) {
    Matrix G = es.states.transpose() * es.states;
    G -= Matrix::Identity(G.rows(), G.cols());
    return G.cwiseAbs().maxCoeff();
}

Propagator::Propagator(const EigenSystem& es, const CVector& psi0) : es_(es) {
    if (psi0.size() != es.dimension()) throw ContractError("initial state has wrong dimension");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw ContractError("initial state is not normalized");
    Vector re = es.states.transpose() * psi0.real();
    Vector im = es.states.transpose() * psi0.imag();
    coeff_ = re.cast<std::complex<double>>() + std::complex<double>(0, 1) * im.cast<std::complex<double>>();
}

CVector Propagator::at(double t) const {
    Vector re(coeff_.size()), im(coeff_.size());
    for (Eigen::Index j = 0; j < coeff_.size(); ++j) {
        auto c = std::polar(1.0, -es_.energies(j) * t) * coeff_(j);
        re(j) = c.real();
        im(j) = c.imag();
    }
    Vector out_re = es_.states * re;
    Vector out_im = es_.states * im;
    CVector out(out_re.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = {out_re(i), out_im(i)};
    return out;
}

double Propagator::energy() const {
    double e = 0;
    for (Eigen::Index j = 0; j < coeff_.size(); ++j) e += std::norm(coeff_(j)) * es_.energies(j);
    return e;
}

CVector spectral_propagate(const EigenSystem& es, const CVector& psi0, double t) {
    if (t == 0.0) {
        if (std::abs(psi0.norm() - 1.0) > 1e-10) throw ContractError("initial state is not normalized");
        return psi0;
    }
    return Propagator(es, psi0).at(t);
}

void save_eigensystem(const EigenSystem& es, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParameterError("cannot open eigen cache for writing: " + path);
    os.write(kMagic, 8);
    put<std::uint64_t>(os, kVersion);
    put<std::uint64_t>(os, std::uint64_t(es.dimension()));
    put<std::uint64_t>(os, std::uint64_t(es.size()));
    put<std::uint64_t>(os, es.tag.hash);
    put<std::int64_t>(os, es.tag.n);
    for (Eigen::Index j = 0; j < es.size(); ++j) put<double>(os, es.energies(j));
    for (Eigen::Index i = 0; i < es.dimension(); ++i)
        for (Eigen::Index j = 0; j < es.size(); ++j) put<double>(os, es.states(i, j));
    if (!os) throw NumericalError("failed writing eigen cache: " + path);
}

EigenSystem load_eigensystem(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParameterError("cannot open eigen cache: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw NumericalError("not an eigen cache file: " + path);
    if (get<std::uint64_t>(is) != kVersion) throw NumericalError("unsupported eigen cache version: " + path);
    auto dim = Eigen::Index(get<std::uint64_t>(is));
    auto count = Eigen::Index(get<std::uint64_t>(is));
    EigenSystem es;
    es.tag.hash = get<std::uint64_t>(is);
    es.tag.n = int(get<std::int64_t>(is));
    es.energies.resize(count);
    es.states.resize(dim, count);
    for (Eigen::Index j = 0; j < count; ++j) es.energies(j) = get<double>(is);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < count; ++j) es.states(i, j) = get<double>(is);
    return es;
}

}  // namespace qc
