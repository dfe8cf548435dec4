#include "choquard/operators.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "choquard/parallel.hpp"

namespace choquard {

namespace {

constexpr double kPi = std::numbers::pi;

// Upper incomplete gamma Gamma(a, x) for x > 0 and any real a, via the downward recurrence
// Gamma(a, x) = (Gamma(a + 1, x) - x^a e^{-x}) / a when a <= 0.
double upper_gamma(double a, double x) {
    if (a > 0.0) return boost::math::tgamma(a, x);
    if (a == 0.0) return boost::math::expint(1, x);
    return (upper_gamma(a + 1.0, x) - std::pow(x, a) * std::exp(-x)) / a;
}

double lattice_zeta_regular(int dim, double alpha) {
    double acc = -2.0 / alpha - 2.0 / (dim - alpha);
    const int R = 6;
    Index j{0, 0, 0};
    const int span = 2 * R + 1;
    int total = 1;
    for (int d = 0; d < dim; ++d) total *= span;
    for (int flat = 0; flat < total; ++flat) {
        int rem = flat;
        long r2 = 0;
        for (int d = 0; d < dim; ++d) {
            j[d] = rem % span - R;
            rem /= span;
            r2 += static_cast<long>(j[d]) * j[d];
        }
        if (r2 == 0) continue;
        const double x = kPi * static_cast<double>(r2);
        acc += upper_gamma(0.5 * alpha, x) * std::pow(x, -0.5 * alpha);
        acc += upper_gamma(0.5 * (dim - alpha), x) * std::pow(x, -0.5 * (dim - alpha));
    }
    return acc * std::pow(kPi, 0.5 * alpha) / std::tgamma(0.5 * alpha);
}

double ball_volume(int dim) { return std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0); }

}  // namespace

double frac_laplacian_constant(int dim, double s) {
    return std::pow(4.0, s) * std::tgamma(0.5 * dim + s) / (std::pow(kPi, 0.5 * dim) * std::abs(std::tgamma(-s)));
}

double sphere_area(int dim) { return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim); }

double lattice_zeta(int dim, double alpha) {
    if (std::abs(alpha - dim) < 1e-12) throw std::domain_error("lattice zeta has a pole at alpha = N");
    // Removable singularity of the theta-function representation at alpha = 0 (Z(0) = -1).
    if (std::abs(alpha) < 1e-6) {
        const double d = 1e-4;
        return 0.5 * (lattice_zeta_regular(dim, d) + lattice_zeta_regular(dim, -d));
    }
    return lattice_zeta_regular(dim, alpha);
}

std::vector<cplx> LinearOperator::apply(std::span<const cplx> u) const {
    std::vector<cplx> out(u.size());
    apply(u, out);
    return out;
}

double LinearOperator::quadratic_form(std::span<const cplx> u) const {
    const auto Lu = apply(u);
    return inner_re(Lu, u, grid().cell_volume());
}

// ---------------------------------------------------------------------------------------------
// Quadrature operator

MagneticFractionalLaplacian::MagneticFractionalLaplacian(const GridSpec& grid, double s, MagneticFn A,
                                                         QuadratureOptions opts)
    : grid_(grid), s_(s), A_(std::move(A)) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fractional order s must lie in (0, 1)");
    grid_.check();
    const int N = grid_.dim;
    const int M = grid_.M;
    const double h = grid_.spacing();
    c_ = frac_laplacian_constant(N, s);
    periodic_ = opts.periodic;
    full_box_ = !(opts.r_cut > 0.0);
    r_cut_ = full_box_ ? std::numeric_limits<double>::infinity() : opts.r_cut;

    const double hs = std::pow(h, -2.0 * s);
    local_weight_ = -lattice_zeta(N, N + 2.0 * s - 2.0) * hs / (2.0 * N);

    // Pair weights for every in-box offset, |j_d| <= M - 1. The periodic field uses minimum-image offsets
    // and drops the antipodal ones, |j_d| = M/2, which have no symmetric partner.
    const int D = 2 * M - 1;
    std::size_t dsize = 1;
    for (int d = 0; d < N; ++d) dsize *= static_cast<std::size_t>(D);
    weights_.assign(dsize, 0.0);
    for (std::size_t flat = 0; flat < dsize; ++flat) {
        std::size_t rem = flat;
        long r2 = 0;
        bool antipodal = false;
        for (int d = N - 1; d >= 0; --d) {
            const long j = static_cast<long>(rem % D) - (M - 1);
            rem /= D;
            r2 += j * j;
            if (2 * std::abs(j) >= M) antipodal = true;
        }
        if (r2 == 0 || (periodic_ && antipodal)) continue;
        const double r = std::sqrt(static_cast<double>(r2));
        if (r * h > r_cut_ * (1.0 + 1e-12)) continue;
        double w = hs * std::pow(r, -N - 2.0 * s);
        if (r2 == 1) w += local_weight_;
        weights_[flat] = w;
    }

    if (periodic_) {
        // Constants are annihilated exactly.
        tail_ = 0.0;
        double weight_sum = 0.0;
        for (double w : weights_) weight_sum += w;
        diag_ = c_ * weight_sum;
    } else if (full_box_) {
        // Every lattice offset of the zero-extended field, summed in closed form.
        tail_ = 0.0;
        diag_ = c_ * (hs * lattice_zeta(N, N + 2.0 * s) + 2.0 * N * local_weight_);
    } else {
        // Lattice offsets inside the cutoff ball (including those that leave the box), then the far field
        // beyond the ball whose volume matches the covered cells.
        const int reach = static_cast<int>(std::floor(r_cut_ / h + 1e-9));
        const int span = 2 * reach + 1;
        std::size_t total = 1;
        for (int d = 0; d < N; ++d) total *= static_cast<std::size_t>(span);
        double weight_sum = 0.0;
        std::size_t count = 0;
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t rem = flat;
            long r2 = 0;
            for (int d = 0; d < N; ++d) {
                const long j = static_cast<long>(rem % span) - reach;
                rem /= span;
                r2 += j * j;
            }
            if (r2 == 0) continue;
            const double r = std::sqrt(static_cast<double>(r2));
            if (r * h > r_cut_ * (1.0 + 1e-12)) continue;
            weight_sum += hs * std::pow(r, -N - 2.0 * s) + (r2 == 1 ? local_weight_ : 0.0);
            ++count;
        }
        const double covered = static_cast<double>(count + 1) * grid_.cell_volume();
        const double r_eff = std::pow(covered / ball_volume(N), 1.0 / N);
        tail_ = sphere_area(N) / (2.0 * s * std::pow(r_eff, 2.0 * s));
        diag_ = c_ * (weight_sum + tail_);
    }
    const std::size_t nodes = grid_.size();
    if (A_) {
        const int H = 2 * M;
        std::size_t msize = 1;
        for (int d = 0; d < N; ++d) msize *= static_cast<std::size_t>(H);
        a_mid_.resize(msize);
        for (std::size_t k = 0; k < msize; ++k) {
            std::size_t rem = k;
            Point p{0.0, 0.0, 0.0};
            for (int d = N - 1; d >= 0; --d) {
                p[d] = -grid_.L + 0.5 * h * static_cast<double>(rem % H);
                rem /= H;
            }
            a_mid_[k] = A_(p);
        }
        if (nodes * nodes <= (std::size_t{1} << 22)) {
            phase_cache_.resize(nodes * nodes);
            for (std::size_t i = 0; i < nodes; ++i) {
                const Index xi = grid_.unravel(i);
                for (std::size_t j = 0; j < nodes; ++j) phase_cache_[i * nodes + j] = phase(xi, grid_.unravel(j));
            }
        }
    }

    // The in-box pair sum is a linear convolution, done on a zero-padded grid (circular for the periodic
    // field). It is the A == 0 fast path and also gives each node's share of the diagonal coming from
    // offsets that leave the box.
    const int P = periodic_ ? M : 2 * M;
    std::vector<int> dims(N, P);
    pad_plan_ = std::make_unique<FftPlan>(dims);
    pad_kernel_hat_.assign(pad_plan_->size(), cplx{0.0, 0.0});
    for (std::size_t flat = 0; flat < dsize; ++flat) {
        if (weights_[flat] == 0.0) continue;
        std::size_t rem = flat;
        Index j{0, 0, 0};
        for (int d = N - 1; d >= 0; --d) {
            j[d] = static_cast<int>(rem % D) - (M - 1);
            rem /= D;
        }
        std::size_t pflat = 0;
        for (int d = 0; d < N; ++d) pflat = pflat * P + static_cast<std::size_t>((j[d] + P) % P);
        pad_kernel_hat_[pflat] += weights_[flat];
    }
    pad_plan_->forward(pad_kernel_hat_);

    const std::vector<cplx> ones(nodes, cplx{1.0, 0.0});
    const auto inside = pair_sum(ones);
    outside_.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) outside_[i] = periodic_ ? 0.0 : diag_ / c_ - inside[i].real();
}

std::vector<cplx> MagneticFractionalLaplacian::pair_sum(std::span<const cplx> u) const {
    const int N = grid_.dim;
    const int P = periodic_ ? grid_.M : 2 * grid_.M;
    std::vector<cplx> buf(pad_plan_->size(), cplx{0.0, 0.0});
    auto padded_index = [&](const Index& idx) {
        std::size_t flat = 0;
        for (int d = 0; d < N; ++d) flat = flat * P + static_cast<std::size_t>(idx[d]);
        return flat;
    };
    for (std::size_t i = 0; i < u.size(); ++i) buf[padded_index(grid_.unravel(i))] = u[i];
    pad_plan_->forward(buf);
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= pad_kernel_hat_[k];
    pad_plan_->backward(buf);
    std::vector<cplx> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = buf[padded_index(grid_.unravel(i))];
    return out;
}

MagneticFractionalLaplacian::~MagneticFractionalLaplacian() = default;

int MagneticFractionalLaplacian::displacement(int from, int to) const {
    int z = to - from;
    if (periodic_) {
        const int M = grid_.M;
        z = ((z % M) + M) % M;
        if (2 * z >= M) z -= M;
    }
    return z;
}

std::size_t MagneticFractionalLaplacian::offset_index(const Index& xi, const Index& xj) const {
    const int D = 2 * grid_.M - 1;
    std::size_t k = 0;
    for (int d = 0; d < grid_.dim; ++d) k = k * D + static_cast<std::size_t>(displacement(xi[d], xj[d]) + grid_.M - 1);
    return k;
}

cplx MagneticFractionalLaplacian::phase(const Index& xi, const Index& xj) const {
    // Midpoint on the half-step grid; the periodic field wraps it into the box.
    const int H = 2 * grid_.M;
    std::size_t k = 0;
    double phi = 0.0;
    Index z{0, 0, 0};
    for (int d = 0; d < grid_.dim; ++d) {
        z[d] = displacement(xi[d], xj[d]);
        const int mid = ((2 * xi[d] + z[d]) % H + H) % H;
        k = k * H + static_cast<std::size_t>(mid);
    }
    const Point& a = a_mid_[k];
    // A((x+y)/2) . (x - y)
    for (int d = 0; d < grid_.dim; ++d) phi -= a[d] * z[d] * grid_.spacing();
    return std::polar(1.0, phi);
}

cplx MagneticFractionalLaplacian::pair_phase(std::size_t i, std::size_t j) const {
    if (!A_) return {1.0, 0.0};
    return phase(grid_.unravel(i), grid_.unravel(j));
}

double MagneticFractionalLaplacian::pair_weight(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return weights_[offset_index(grid_.unravel(i), grid_.unravel(j))];
}

void MagneticFractionalLaplacian::apply(std::span<const cplx> u, std::span<cplx> out) const {
    const std::size_t nodes = grid_.size();
    if (u.size() != nodes || out.size() != nodes) throw std::invalid_argument("field length does not match grid");
    const double dcoef = diag_ / c_;

    if (!A_) {
        const auto conv = pair_sum(u);
        for (std::size_t i = 0; i < nodes; ++i) out[i] = c_ * (dcoef * u[i] - conv[i]);
        return;
    }

    parallel_for(nodes, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Index xi = grid_.unravel(i);
            cplx acc{0.0, 0.0};
            for (std::size_t j = 0; j < nodes; ++j) {
                const Index xj = grid_.unravel(j);
                const double w = weights_[offset_index(xi, xj)];
                if (w == 0.0) continue;
                const cplx e = phase_cache_.empty() ? phase(xi, xj) : phase_cache_[i * nodes + j];
                acc += w * e * u[j];
            }
            out[i] = c_ * (dcoef * u[i] - acc);
        }
    });
}

double MagneticFractionalLaplacian::gagliardo(std::span<const cplx> u, bool magnetic) const {
    const std::size_t nodes = grid_.size();
    if (u.size() != nodes) throw std::invalid_argument("field length does not match grid");
    const bool use_phase = magnetic && static_cast<bool>(A_);
    std::vector<double> partial(nodes, 0.0);
    parallel_for(nodes, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Index xi = grid_.unravel(i);
            double pair = 0.0;
            for (std::size_t j = 0; j < nodes; ++j) {
                const Index xj = grid_.unravel(j);
                const double w = weights_[offset_index(xi, xj)];
                if (w == 0.0) continue;
                cplx v = u[j];
                if (use_phase) v *= phase_cache_.empty() ? phase(xi, xj) : phase_cache_[i * nodes + j];
                pair += w * std::norm(u[i] - v);
            }
            partial[i] = pair + 2.0 * outside_[i] * std::norm(u[i]);
        }
    });
    double acc = 0.0;
    for (double p : partial) acc += p;
    return acc * grid_.cell_volume();
}

// ---------------------------------------------------------------------------------------------
// Spectral operators

namespace {

std::vector<double> squared_wavenumbers(const GridSpec& g) {
    std::vector<double> k2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Index idx = g.unravel(i);
        double acc = 0.0;
        for (int d = 0; d < g.dim; ++d) {
            const double k = wavenumber(idx[d], g.M, 2.0 * g.L);
            acc += k * k;
        }
        k2[i] = acc;
    }
    return k2;
}

std::vector<int> axis_dims(const GridSpec& g) { return std::vector<int>(g.dim, g.M); }

}  // namespace

SpectralFractionalLaplacian::SpectralFractionalLaplacian(const GridSpec& grid, double s)
    : grid_(grid), s_(s), plan_(axis_dims(grid)) {
    if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("spectral fractional order must lie in (0, 1]");
    symbol_ = squared_wavenumbers(grid_);
    for (auto& v : symbol_) v = std::pow(v, s_);
}

void SpectralFractionalLaplacian::apply(std::span<const cplx> u, std::span<cplx> out) const {
    if (u.size() != symbol_.size() || out.size() != symbol_.size())
        throw std::invalid_argument("field length does not match grid");
    std::vector<cplx> buf(u.begin(), u.end());
    plan_.forward(buf);
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= symbol_[k];
    plan_.backward(buf);
    std::copy(buf.begin(), buf.end(), out.begin());
}

SpectralPreconditioner::SpectralPreconditioner(const GridSpec& grid, double s, double shift)
    : grid_(grid), plan_(axis_dims(grid)) {
    inv_symbol_ = squared_wavenumbers(grid_);
    for (auto& v : inv_symbol_) v = 1.0 / (shift + std::pow(v, s));
}

void SpectralPreconditioner::apply(std::span<const cplx> in, std::span<cplx> out) const {
    std::vector<cplx> buf(in.begin(), in.end());
    plan_.forward(buf);
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= inv_symbol_[k];
    plan_.backward(buf);
    std::copy(buf.begin(), buf.end(), out.begin());
}

Field magnetic_frac_laplacian(const Field& u, const MagneticFn& A, double s, QuadratureOptions opts) {
    MagneticFractionalLaplacian op(u.grid, s, A, opts);
    return Field(u.grid, op.apply(u.span()));
}

Field spectral_frac_laplacian(const Field& u, double s) {
    SpectralFractionalLaplacian op(u.grid, s);
    return Field(u.grid, op.apply(u.span()));
}

GagliardoForms gagliardo_form(const Field& u, const MagneticFn& A, double s, QuadratureOptions opts) {
    MagneticFractionalLaplacian op(u.grid, s, A, opts);
    std::vector<cplx> modulus(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) modulus[i] = std::abs(u.values[i]);
    return {op.gagliardo(u.span(), true), op.gagliardo(modulus, false)};
}

// ---------------------------------------------------------------------------------------------
// Riesz potential

HartreeCache::HartreeCache(const GridSpec& grid, double mu) : grid_(grid), mu_(mu), plan_(axis_dims(grid)) {
    grid_.check();
    const int N = grid_.dim;
    if (!(mu > 0.0) || !(mu < N)) throw std::invalid_argument("kernel not locally integrable");
    const double h = grid_.spacing();
    if (N == 1) {
        origin_avg_ = std::pow(0.5 * h, -mu) / (1.0 - mu);
    } else {
        // Mean over the ball with the cell's volume.
        const double r = std::pow(grid_.cell_volume() / ball_volume(N), 1.0 / N);
        origin_avg_ = N / (N - mu) * std::pow(r, -mu);
    }
    std::vector<cplx> buf(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        Index idx = grid_.unravel(i);
        for (int d = 0; d < N; ++d)
            if (idx[d] > grid_.M / 2) idx[d] -= grid_.M;
        buf[i] = kernel_at(idx) * grid_.cell_volume();
    }
    plan_.forward(buf);
    spectrum_.resize(buf.size());
    for (std::size_t k = 0; k < buf.size(); ++k) spectrum_[k] = buf[k].real();
}

double HartreeCache::kernel_at(const Index& offset) const {
    long r2 = 0;
    for (int d = 0; d < grid_.dim; ++d) {
        int j = ((offset[d] % grid_.M) + grid_.M) % grid_.M;
        if (j > grid_.M / 2) j -= grid_.M;
        r2 += static_cast<long>(j) * j;
    }
    if (r2 == 0) return origin_avg_;
    return std::pow(std::sqrt(static_cast<double>(r2)) * grid_.spacing(), -mu_);
}

void HartreeCache::convolve(std::span<const double> in, std::span<double> out) const {
    if (in.size() != spectrum_.size() || out.size() != spectrum_.size())
        throw std::invalid_argument("field length does not match grid");
    std::vector<cplx> buf(in.begin(), in.end());
    plan_.forward(buf);
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= spectrum_[k];
    plan_.backward(buf);
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i].real();
}

std::vector<double> riesz_convolve(std::span<const double> h, const HartreeCache& cache) {
    std::vector<double> out(h.size());
    cache.convolve(h, out);
    return out;
}

double riesz_pairing(std::span<const double> a, std::span<const double> b, const HartreeCache& cache) {
    const auto ka = riesz_convolve(a, cache);
    double acc = 0.0;
    for (std::size_t i = 0; i < ka.size(); ++i) acc += ka[i] * b[i];
    return acc * cache.grid().cell_volume();
}

}  // namespace choquard
