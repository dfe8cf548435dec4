#include <cmath>
#include <random>

#include "choquard/calibration.hpp"
#include "choquard/energy.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace choquard;

namespace {

struct Setup {
    ProblemConfig cfg;
    PotentialSpec pot;
    GridSpec grid{1, 8.0, 64};
};

Setup setup(bool magnetic = true) {
    Setup s;
    s.cfg.s = 0.5;
    s.cfg.mu = 0.4;
    s.cfg.q = 3.0;
    s.cfg.eps = 0.5;
    s.cfg.V0 = 1.0;
    PotentialModel pm;
    pm.type = "quadratic_capped";
    pm.cap = 4.0;
    MagneticModel mm;
    if (magnetic) {
        mm.type = "sine";
        mm.strength = 0.5;
    }
    Region lam;
    lam.shape = Region::Shape::Box;
    lam.half_widths = {1.0, 1.0, 1.0};
    s.pot = make_potential(1, 1.0, pm, mm, lam);
    return s;
}

// Direct O(n^2) pairing of |u|^q with itself against |x-y|^-mu (minimum image), origin term from the cache.
double direct_pairing(const std::vector<cplx>& u, const Problem& p) {
    const GridSpec& g = p.grid;
    const double q = p.cfg.q, mu = p.cfg.mu;
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) {
            int o = std::abs(static_cast<int>(i) - static_cast<int>(j));
            o = std::min(o, g.M - o);
            const double k = o == 0 ? p.riesz->origin_average() : std::pow(o * g.spacing(), -mu);
            acc += std::pow(std::abs(u[i]), q) * k * std::pow(std::abs(u[j]), q);
        }
    const double hN = g.cell_volume();
    return acc * hN * hN;
}

}  // namespace

TEST_CASE("gradient matches central differences of J") {
    const Setup s = setup();
    Problem p = make_penalized_problem(s.cfg, s.pot, s.grid, PenalizationParams::from_ell0(3.0, 1.0, 4.0));
    std::mt19937_64 rng(21);
    for (int n = 0; n < 10; ++n) {
        const auto u = testing::random_smooth(s.grid, rng, 1.5);
        const auto v = testing::random_smooth(s.grid, rng, 1.5);
        const auto grad = gradient(u, p);
        const double analytic = inner_re(grad, v, s.grid.cell_volume());
        const double h = 1e-5;
        std::vector<cplx> up(u), um(u);
        for (std::size_t i = 0; i < u.size(); ++i) {
            up[i] += h * v[i];
            um[i] -= h * v[i];
        }
        const double fd = (energy(up, p).J - energy(um, p).J) / (2.0 * h);
        CHECK(fd == doctest::Approx(analytic).epsilon(1e-6));
    }
}

TEST_CASE("Nehari point has the closed form for fields inside Lambda") {
    const Setup s = setup();
    Problem p = make_penalized_problem(s.cfg, s.pot, s.grid, PenalizationParams::from_ell0(3.0, 1.0, 4.0));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int n = 0; n < 5; ++n) {
        std::vector<cplx> u(s.grid.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            if (p.in_lambda[i]) u[i] = cplx(unit(rng), unit(rng));
        const double n2 = norm_eps_sq(u, p);
        const double P = direct_pairing(u, p);
        const double q = p.cfg.q;
        const double t_ref = std::pow(q * n2 / (2.0 * P), 1.0 / (2.0 * q - 2.0));
        const double t = nehari_project(u, p).t_star;
        CHECK(t == doctest::Approx(t_ref).epsilon(1e-10));

        std::vector<cplx> w(u);
        for (auto& z : w) z *= t;
        const EnergyReport e = energy(w, p);
        CHECK(std::abs(e.nehari_residual) < 1e-9 * e.norm_sq());
        CHECK(e.J == doctest::Approx(t * t * n2 * (0.5 - 0.5 / q)).epsilon(1e-9));
    }
}

TEST_CASE("ray energies agree with direct evaluation") {
    const Setup s = setup(false);
    Problem p = make_penalized_problem(s.cfg, s.pot, s.grid, PenalizationParams::from_ell0(3.0, 1.0, 4.0));
    std::mt19937_64 rng(9);
    const auto u = testing::random_smooth(s.grid, rng, 2.0);
    const std::vector<double> ts{0.1, 0.7, 1.0, 3.0, 12.0};
    const auto J = ray_energies(u, p, ts);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        std::vector<cplx> w(u);
        for (auto& z : w) z *= ts[k];
        CHECK(J[k] == doctest::Approx(energy(w, p).J).epsilon(1e-10));
    }
}

TEST_CASE("zero field has no Nehari point") {
    const Setup s = setup(false);
    Problem p = make_penalized_problem(s.cfg, s.pot, s.grid, PenalizationParams::from_ell0(3.0, 1.0, 4.0));
    const std::vector<cplx> zero(s.grid.size());
    CHECK_THROWS_AS(nehari_project(zero, p), NehariError);
}

TEST_CASE("limit problem uses the unpenalized nonlinearity everywhere") {
    Setup s = setup(false);
    s.grid = GridSpec{1, 12.0, 128};
    const Problem p = make_limit_problem(s.cfg, s.grid);
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        CHECK(p.V[i] == 1.0);
        CHECK(p.G(i, 5.0) == doctest::Approx(F_eval(5.0, 3.0)));
    }
    std::mt19937_64 rng(1);
    const auto u = testing::random_smooth(s.grid, rng, 1.5);
    const auto grad = gradient(u, p);
    const auto v = testing::random_smooth(s.grid, rng, 1.5);
    const double h = 1e-5;
    std::vector<cplx> up(u), um(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        up[i] += h * v[i];
        um[i] -= h * v[i];
    }
    const double fd = (energy(up, p).J - energy(um, p).J) / (2.0 * h);
    CHECK(fd == doctest::Approx(inner_re(grad, v, s.grid.cell_volume())).epsilon(1e-6));
}

TEST_CASE("canonical bump reaches negative energy along its ray") {
    const Setup s = setup();
    Problem p = make_penalized_problem(s.cfg, s.pot, s.grid, PenalizationParams::from_ell0(3.0, 1.0, 4.0));
    const auto u0 = canonical_bump(p);
    for (std::size_t i = 0; i < u0.size(); ++i)
        if (!p.in_lambda[i]) CHECK(u0[i] == cplx(0.0, 0.0));
    const std::vector<double> ts{64.0};
    CHECK(ray_energies(u0, p, ts)[0] < 0.0);
    CHECK(default_kappa(p) > 0.0);
}
