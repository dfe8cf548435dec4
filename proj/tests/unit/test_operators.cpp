#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "choquard/operators.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace choquard;
using testing::rel_linf;

namespace {

// (-Delta)^s exp(-|x|^2/2) = 2^s Gamma(N/2+s)/Gamma(N/2) 1F1(N/2+s; N/2; -|x|^2/2)
double gaussian_image(int N, double s, double r2) {
    const double a = 0.5 * N + s, b = 0.5 * N;
    return std::pow(2.0, s) * std::tgamma(a) / std::tgamma(b) *
           boost::math::hypergeometric_1F1(a, b, -0.5 * r2);
}

Field gaussian(const GridSpec& g) {
    Field u(g);
    for (std::size_t i = 0; i < g.size(); ++i) u.values[i] = std::exp(-0.5 * norm_sq(g.point(i), g.dim));
    return u;
}

double gaussian_error(const GridSpec& g, double s) {
    const Field u = gaussian(g);
    const Field Lu = magnetic_frac_laplacian(u, {}, s);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double exact = gaussian_image(g.dim, s, norm_sq(g.point(i), g.dim));
        err = std::max(err, std::abs(Lu.values[i] - exact));
        ref = std::max(ref, std::abs(exact));
    }
    return err / ref;
}

MagneticFn smooth_field(int dim) {
    return [dim](const Point& x) {
        Point a{0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d) a[d] = 0.7 * std::sin(0.9 * x[(d + 1) % dim] + d) + 0.2 * x[d];
        return a;
    };
}

}  // namespace

TEST_CASE("normalising constant") {
    CHECK(frac_laplacian_constant(1, 0.5) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
    for (int N = 1; N <= 3; ++N)
        for (double s : {0.2, 0.5, 0.8}) {
            const double ref =
                s * std::pow(4.0, s) * std::tgamma(0.5 * N + s) / (std::pow(std::numbers::pi, 0.5 * N) * std::tgamma(1.0 - s));
            CHECK(frac_laplacian_constant(N, s) == doctest::Approx(ref).epsilon(1e-13));
        }
    CHECK(sphere_area(1) == doctest::Approx(2.0));
    CHECK(sphere_area(2) == doctest::Approx(2.0 * std::numbers::pi));
    CHECK(sphere_area(3) == doctest::Approx(4.0 * std::numbers::pi));
}

TEST_CASE("lattice zeta against Riemann and Dirichlet beta values") {
    // Z_1 = 2 zeta, Z_2 = 4 zeta(a/2) beta(a/2); references to 20 digits.
    CHECK(lattice_zeta(1, -0.4) == doctest::Approx(-0.49433092166342965373).epsilon(1e-9));
    CHECK(lattice_zeta(1, 1.6) == doctest::Approx(4.5715313313602592717).epsilon(1e-9));
    CHECK(lattice_zeta(1, 0.5) == doctest::Approx(-2.9207090176191736258).epsilon(1e-9));
    CHECK(lattice_zeta(2, 1.0) == doctest::Approx(-3.9002649200019558828).epsilon(1e-9));
    CHECK(lattice_zeta(2, 3.0) == doctest::Approx(9.0336216831009503057).epsilon(1e-9));
    CHECK(lattice_zeta(2, 2.4) == doctest::Approx(18.363225187617983258).epsilon(1e-9));
    CHECK(lattice_zeta(3, 0.0) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK_THROWS(lattice_zeta(2, 2.0));
}

TEST_CASE("quadrature on a Gaussian matches the closed-form image") {
    for (double s : {0.3, 0.5, 0.7}) {
        const double e256 = gaussian_error({1, 20.0, 256}, s);
        const double e512 = gaussian_error({1, 20.0, 512}, s);
        CAPTURE(s);
        CHECK(e256 < 1e-3);
        CHECK(e512 < e256);
    }
    CHECK(gaussian_error({2, 10.0, 48}, 0.5) < 2e-2);
}

TEST_CASE("spectral operator is exact on grid plane waves") {
    const GridSpec g{2, 5.0, 16};
    const double k0 = wavenumber(3, g.M, 2.0 * g.L), k1 = wavenumber(14, g.M, 2.0 * g.L);
    Field u(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.point(i);
        u.values[i] = std::polar(1.0, k0 * x[0] + k1 * x[1]);
    }
    for (double s : {0.25, 0.6, 1.0}) {
        const Field Lu = spectral_frac_laplacian(u, s);
        std::vector<cplx> ref(u.values);
        for (auto& z : ref) z *= std::pow(k0 * k0 + k1 * k1, s);
        CHECK(rel_linf(Lu.values, ref) < 1e-12);
    }
}

TEST_CASE("s = 1 reduces to minus the Laplacian") {
    const GridSpec g{2, 12.0, 96};
    const Field u = gaussian(g);
    const Field Lu = spectral_frac_laplacian(u, 1.0);
    std::vector<cplx> ref(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r2 = norm_sq(g.point(i), 2);
        ref[i] = (2.0 - r2) * std::exp(-0.5 * r2);
    }
    CHECK(rel_linf(Lu.values, ref) < 1e-10);

    // Same operator against the five-point stencil, which converges at second order.
    std::vector<cplx> fd(g.size());
    const double h = g.spacing();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Index idx = g.unravel(i);
        cplx acc = 4.0 * u.values[i];
        for (int d = 0; d < 2; ++d)
            for (int sgn : {-1, 1}) {
                Index j = idx;
                j[d] = (j[d] + sgn + g.M) % g.M;
                acc -= u.values[g.ravel(j)];
            }
        fd[i] = acc / (h * h);
    }
    CHECK(rel_linf(fd, Lu.values) < h * h);
}

TEST_CASE("magnetic quadrature is Hermitian and its form is the Gagliardo double sum") {
    std::mt19937_64 rng(11);
    for (const GridSpec& g : {GridSpec{1, 6.0, 48}, GridSpec{2, 4.0, 12}}) {
        for (bool periodic : {false, true}) {
            const MagneticFractionalLaplacian op(g, 0.4, smooth_field(g.dim), {0.0, periodic});
            const auto u = testing::random_smooth(g, rng, 1.2);
            const auto v = testing::random_smooth(g, rng, 1.2);
            const cplx a = testing::dot(v, op.apply(u));
            const cplx b = std::conj(testing::dot(u, op.apply(v)));
            CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));

            const double form = op.quadratic_form(u);
            CHECK(form == doctest::Approx(0.5 * op.constant() * op.gagliardo(u)).epsilon(1e-8));
            CHECK(form > 0.0);
        }
    }
}

TEST_CASE("periodic form equals the brute-force pair sum") {
    const GridSpec g{2, 3.0, 8};
    const MagneticFractionalLaplacian op(g, 0.6, smooth_field(2), {0.0, true});
    std::mt19937_64 rng(5);
    const auto u = testing::random_smooth(g, rng, 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j)
            acc += op.pair_weight(i, j) * std::norm(u[i] - op.pair_phase(i, j) * u[j]);
    CHECK(op.gagliardo(u) == doctest::Approx(acc * g.cell_volume()).epsilon(1e-12));
}

TEST_CASE("periodic quadrature annihilates constants") {
    const GridSpec g{2, 4.0, 16};
    const MagneticFractionalLaplacian op(g, 0.5, {}, {0.0, true});
    const std::vector<cplx> one(g.size(), cplx(1.0, 0.0));
    CHECK(sup_abs(op.apply(one)) < 1e-10 * op.diagonal());
}

TEST_CASE("constant gauge shift multiplies by the matching plane wave") {
    const GridSpec g{2, 4.0, 12};
    const Point c{0.8, -0.35, 0.0};
    const MagneticFn A = smooth_field(2);
    const MagneticFn Ac = [&](const Point& x) {
        Point a = A(x);
        for (int d = 0; d < 2; ++d) a[d] += c[d];
        return a;
    };
    const MagneticFractionalLaplacian op(g, 0.45, A), op_c(g, 0.45, Ac);
    std::mt19937_64 rng(3);
    for (int n = 0; n < 5; ++n) {
        const auto u = testing::random_smooth(g, rng, 1.0);
        std::vector<cplx> w(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            const Point x = g.point(i);
            w[i] = std::polar(1.0, c[0] * x[0] + c[1] * x[1]) * u[i];
        }
        CHECK(op_c.gagliardo(w) == doctest::Approx(op.gagliardo(u)).epsilon(1e-12));
        const auto Lw = op_c.apply(w);
        auto Lu = op.apply(u);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const Point x = g.point(i);
            Lu[i] *= std::polar(1.0, c[0] * x[0] + c[1] * x[1]);
        }
        CHECK(rel_linf(Lw, Lu) < 1e-11);
    }
}

TEST_CASE("modulus never raises the seminorm") {
    const GridSpec g{1, 6.0, 64};
    const MagneticFractionalLaplacian op(g, 0.5, smooth_field(1));
    std::mt19937_64 rng(8);
    for (int n = 0; n < 5; ++n) {
        const auto u = testing::random_smooth(g, rng, 1.5);
        const auto forms = gagliardo_form(Field(g, u), smooth_field(1), 0.5);
        CHECK(forms.modulus <= forms.magnetic * (1.0 + 1e-12));
        CHECK(forms.magnetic == doctest::Approx(op.gagliardo(u)).epsilon(1e-12));
    }
}

TEST_CASE("Riesz fast path against direct summation") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const GridSpec& g : {GridSpec{1, 8.0, 64}, GridSpec{2, 4.0, 16}}) {
        for (double mu : {0.3, 0.8}) {
            const HartreeCache cache(g, mu);
            std::vector<double> h(g.size());
            for (auto& v : h) v = unit(rng);
            const auto fast = riesz_convolve(h, cache);
            double err = 0.0, ref = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Index xi = g.unravel(i);
                double acc = 0.0;
                for (std::size_t j = 0; j < g.size(); ++j) {
                    const Index xj = g.unravel(j);
                    double r2 = 0.0;
                    for (int d = 0; d < g.dim; ++d) {
                        int o = std::abs(xi[d] - xj[d]);
                        o = std::min(o, g.M - o);
                        r2 += static_cast<double>(o) * o;
                    }
                    const double k = r2 == 0.0 ? cache.origin_average() : std::pow(std::sqrt(r2) * g.spacing(), -mu);
                    acc += k * h[j];
                }
                acc *= g.cell_volume();
                err = std::max(err, std::abs(acc - fast[i]));
                ref = std::max(ref, std::abs(acc));
            }
            CHECK(err / ref < 1e-10);
            CHECK(riesz_pairing(h, fast, cache) == doctest::Approx(riesz_pairing(fast, h, cache)).epsilon(1e-12));
            if (g.dim == 1) {
                // Cell average of |x|^-mu over [-h/2, h/2].
                const double avg = std::pow(0.5 * g.spacing(), -mu) / (1.0 - mu);
                CHECK(cache.origin_average() == doctest::Approx(avg).epsilon(1e-10));
            }
        }
    }
    CHECK_THROWS_WITH(HartreeCache(GridSpec{1, 4.0, 16}, 1.0), "kernel not locally integrable");
}

TEST_CASE("preconditioner inverts the shifted symbol") {
    const GridSpec g{1, 5.0, 32};
    const SpectralPreconditioner P(g, 0.5, 2.0);
    const double k = wavenumber(5, g.M, 2.0 * g.L);
    std::vector<cplx> u(g.size()), out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = std::polar(1.0, k * g.point(i)[0]);
    P.apply(u, out);
    std::vector<cplx> ref(u);
    for (auto& z : ref) z /= 2.0 + std::pow(k * k, 0.5);
    CHECK(rel_linf(out, ref) < 1e-12);
}
