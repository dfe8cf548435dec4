#pragma once

// Nonlocal operators on the computational grid: the fractional magnetic Laplacian by singular
// quadrature, the periodic Fourier-multiplier fractional Laplacian, Gagliardo forms and the Riesz
// potential convolution.

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "choquard/fft.hpp"
#include "choquard/grid.hpp"

namespace choquard {

/// c_{N,s} = 4^s Gamma(N/2 + s) / (pi^{N/2} |Gamma(-s)|): the A == 0 operator has symbol |xi|^{2s}.
double frac_laplacian_constant(int dim, double s);

/// Surface measure of the unit sphere S^{N-1}.
double sphere_area(int dim);

/// Epstein zeta function of the cubic lattice, sum over j in Z^N \ {0} of |j|^{-alpha},
/// analytically continued to every alpha other than the pole alpha = N.
double lattice_zeta(int dim, double alpha);

/// Magnetic potential on the computational grid (already rescaled: A_eps(x) = A(eps x)).
/// An empty function means A == 0.
using MagneticFn = std::function<Point(const Point&)>;

class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual const GridSpec& grid() const = 0;
    virtual void apply(std::span<const cplx> u, std::span<cplx> out) const = 0;

    std::vector<cplx> apply(std::span<const cplx> u) const;
    /// Re <L u, u>_h. For the fractional Laplacian this is the normalised seminorm ||(-Delta)^{s/2} u||^2.
    double quadratic_form(std::span<const cplx> u) const;
};

struct QuadratureOptions {
    /// Interaction radius of the direct sum. <= 0 selects the full box: every pair of grid nodes
    /// interacts and the zero-extended lattice beyond the box is summed in closed form.
    double r_cut = 0.0;
    /// Treat the field as periodic (minimum-image pairs) instead of zero-extended. Constants are then
    /// annihilated exactly. A magnetic potential is sampled at the midpoint wrapped into the box.
    bool periodic = false;
};

/// Principal-value quadrature of (-Delta)^s_A on the zero-extended grid field.
///
/// Every pair of grid nodes interacts with weight |z|^{-N-2s} h^N and the midpoint phase
/// e^{i A(x+z/2).(-z)}. Lattice points outside the box contribute u(x) only, summed in closed form through
/// the lattice zeta function. Nearest neighbours carry an extra local weight from the quadratic Taylor
/// model of the phase-corrected field (lattice constant Z_N(N+2s-2)), which makes the lattice sum exact on
/// quadratics. A positive r_cut keeps only |z| <= r_cut and adds the continuum tail |S^{N-1}|/(2s R^{2s}).
/// Every piece is a symmetric pair weight, so the operator is Hermitian and its form is a nonnegative
/// double sum.
class MagneticFractionalLaplacian final : public LinearOperator {
public:
    MagneticFractionalLaplacian(const GridSpec& grid, double s, MagneticFn A = {}, QuadratureOptions opts = {});
    ~MagneticFractionalLaplacian() override;

    const GridSpec& grid() const override { return grid_; }
    void apply(std::span<const cplx> u, std::span<cplx> out) const override;
    using LinearOperator::apply;

    /// Unnormalised double-sum seminorm  [u]_A^2 = iint |u(x) - u(y) e^{i phi}|^2 / |x-y|^{N+2s}.
    /// With `magnetic == false` the phase is dropped (the real seminorm of the same samples).
    double gagliardo(std::span<const cplx> u, bool magnetic = true) const;

    /// Phase e^{i A((x_i+x_j)/2).(x_i-x_j)} attached to the pair (i, j); 1 when A == 0.
    cplx pair_phase(std::size_t i, std::size_t j) const;
    /// Pair weight of (i, j) including the local correction, unnormalised; 0 when the pair is cut.
    double pair_weight(std::size_t i, std::size_t j) const;

    double s() const { return s_; }
    double constant() const { return c_; }
    double r_cut() const { return r_cut_; }
    bool magnetic() const { return static_cast<bool>(A_); }
    bool periodic() const { return periodic_; }
    /// Coefficient of u(x) in the operator (includes the far-field tail).
    double diagonal() const { return diag_; }
    /// Unnormalised far-field tail |S^{N-1}| / (2s R_eff^{2s}); zero for the full box.
    double tail() const { return tail_; }
    /// Extra nearest-neighbour weight from the local Taylor correction, unnormalised.
    double local_weight() const { return local_weight_; }

private:
    int displacement(int from, int to) const;
    std::size_t offset_index(const Index& xi, const Index& xj) const;
    cplx phase(const Index& xi, const Index& xj) const;
    std::vector<cplx> pair_sum(std::span<const cplx> u) const;

    GridSpec grid_;
    double s_;
    MagneticFn A_;
    bool periodic_ = false;
    bool full_box_ = true;
    double c_ = 0.0;
    double r_cut_ = 0.0;
    double tail_ = 0.0;
    double local_weight_ = 0.0;
    double diag_ = 0.0;
    std::vector<double> weights_;         // pair weight per lattice offset, |j_d| <= M - 1
    std::vector<double> outside_;         // per-node weight of offsets leaving the box, plus the tail
    std::vector<Point> a_mid_;            // A on the doubled (midpoint) grid
    std::vector<cplx> phase_cache_;       // per node pair, when small enough
    std::unique_ptr<FftPlan> pad_plan_;   // zero-padded convolution grid
    std::vector<cplx> pad_kernel_hat_;
};

/// Periodic Fourier-multiplier operator with symbol |xi|^{2s}; s in (0, 1].
class SpectralFractionalLaplacian final : public LinearOperator {
public:
    SpectralFractionalLaplacian(const GridSpec& grid, double s);
    const GridSpec& grid() const override { return grid_; }
    void apply(std::span<const cplx> u, std::span<cplx> out) const override;
    using LinearOperator::apply;
    const std::vector<double>& symbol() const { return symbol_; }

private:
    GridSpec grid_;
    double s_;
    FftPlan plan_;
    std::vector<double> symbol_;
};

/// (-Delta)^s_A u by quadrature. `A` acts on grid coordinates.
Field magnetic_frac_laplacian(const Field& u, const MagneticFn& A, double s, QuadratureOptions opts = {});

/// (-Delta)^s u as the inverse transform of |xi|^{2s} u_hat with periodic wavenumbers.
Field spectral_frac_laplacian(const Field& u, double s);

/// Multiplies by the spectral preconditioner (shift + |xi|^{2s})^{-1}.
class SpectralPreconditioner {
public:
    SpectralPreconditioner(const GridSpec& grid, double s, double shift);
    void apply(std::span<const cplx> in, std::span<cplx> out) const;

private:
    GridSpec grid_;
    FftPlan plan_;
    std::vector<double> inv_symbol_;
};

struct GagliardoForms {
    double magnetic = 0.0;  ///< [u]_A^2
    double modulus = 0.0;   ///< [|u|]^2
};
GagliardoForms gagliardo_form(const Field& u, const MagneticFn& A, double s, QuadratureOptions opts = {});

/// Spectrum of the periodised, cell-averaged Riesz kernel |x|^{-mu} on a grid.
class HartreeCache {
public:
    /// Throws std::invalid_argument("kernel not locally integrable") unless 0 < mu < N.
    HartreeCache(const GridSpec& grid, double mu);

    const GridSpec& grid() const { return grid_; }
    double mu() const { return mu_; }
    const std::vector<double>& kernel_spectrum() const { return spectrum_; }
    /// Kernel value for a lattice offset (minimum image). Offset zero gives the cell average.
    double kernel_at(const Index& offset) const;
    double origin_average() const { return origin_avg_; }

    /// Circular convolution (k * h)(x) = sum_y k(x - y) h(y) h^N.
    void convolve(std::span<const double> in, std::span<double> out) const;

private:
    GridSpec grid_;
    double mu_;
    double origin_avg_ = 0.0;
    FftPlan plan_;
    std::vector<double> spectrum_;
};

std::vector<double> riesz_convolve(std::span<const double> h, const HartreeCache& cache);

/// Double integral sum_x sum_y a(x) k(x-y) b(y) h^{2N} via the fast path.
double riesz_pairing(std::span<const double> a, std::span<const double> b, const HartreeCache& cache);

}  // namespace choquard
