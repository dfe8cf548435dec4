#include <cmath>
#include <numbers>
#include <random>

#include "choquard/diagnostics.hpp"
#include "choquard/solver.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace choquard;

namespace {

ProblemConfig base_cfg() {
    ProblemConfig c;
    c.s = 0.5;
    c.mu = 0.4;
    c.q = 3.0;
    c.V0 = 1.0;
    c.eps = 0.5;
    return c;
}

PotentialSpec well(double magnetic) {
    PotentialModel pm;
    pm.type = "quadratic_capped";
    pm.cap = 4.0;
    MagneticModel mm;
    if (magnetic > 0.0) {
        mm.type = "sine";
        mm.strength = magnetic;
    }
    Region lam;
    lam.shape = Region::Shape::Box;
    lam.half_widths = {1.0, 1.0, 1.0};
    return make_potential(1, 1.0, pm, mm, lam);
}

Field algebraic_tail(const GridSpec& g, double s, double C) {
    Field u(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = std::sqrt(norm_sq(g.point(i), g.dim));
        u.values[i] = C / (1.0 + std::pow(r, g.dim + 2.0 * s));
    }
    return u;
}

}  // namespace

TEST_CASE("limit ground state") {
    const GridSpec g{1, 16.0, 128};
    const Problem p = make_limit_problem(base_cfg(), g);
    SolverOptions opts;
    opts.grad_tol = 1e-8;
    const Solution sol = solve_limit(p, opts);
    CHECK(sol.report.converged);
    CHECK(sol.report.residual < 1e-8);
    CHECK(std::abs(sol.report.nehari_residual) < 1e-6);
    CHECK(sol.report.c_eps > 0.0);
    // Peak at the centre, phase fixed to real positive there.
    CHECK(sol.report.argmax == g.size() / 2);
    CHECK(sol.u.values[sol.report.argmax].imag() == 0.0);
    CHECK(sol.u.values[sol.report.argmax].real() > 0.0);
    const CheckResult ray = check_ray(sol.u.span(), p);
    CHECK(ray.passed);
    // A perturbed start reaches the same level.
    SolverOptions pert = opts;
    pert.perturbation = 0.3;
    pert.seed = 3;
    pert.init_width = 2.0;
    CHECK(solve_limit(p, pert).report.c_eps == doctest::Approx(sol.report.c_eps).epsilon(1e-6));
}

TEST_CASE("penalized ground state concentrates inside Lambda") {
    const GridSpec g{1, 16.0, 256};
    const Problem p0 = make_penalized_problem(base_cfg(), well(0.5), g, PenalizationParams::from_ell0(3.0, 1.0, 1.0));
    Calibration cal;
    const Problem p = calibrate(p0, 7, &cal);
    CHECK(cal.samples == 64);
    CHECK(cal.pen.ell0 == doctest::Approx(4.0 * cal.C0));
    const Solution sol = solve_penalized(p, SolverOptions{});
    CHECK(sol.report.converged);
    CHECK(p.in_lambda[sol.report.argmax] == 1);
    CHECK(sol.report.outside_theory);
    CHECK(check_ray(sol.u.span(), p).passed);

    // Same seed, same calibration.
    Calibration again;
    calibrate(p0, 7, &again);
    CHECK(again.C0 == cal.C0);
    CHECK_THROWS_AS(solve_limit(p, SolverOptions{}), std::invalid_argument);
}

TEST_CASE("non-convergence carries the last iterate") {
    const GridSpec g{1, 16.0, 128};
    const Problem p = make_limit_problem(base_cfg(), g);
    SolverOptions opts;
    opts.max_iters = 2;
    opts.grad_tol = 1e-12;
    try {
        solve_limit(p, opts);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("did not converge in 2 iterations") != std::string::npos);
        CHECK(e.last().u.size() == g.size());
        CHECK(e.last().report.iterations == 2);
        CHECK_FALSE(e.last().report.converged);
    }
}

TEST_CASE("warm start moves the peak to the same original position") {
    const GridSpec g{1, 8.0, 64};
    Field u(g);
    const double x_old = 1.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.point(i)[0];
        u.values[i] = std::exp(-(x - x_old) * (x - x_old));
    }
    const auto w = warm_start(u, Point{x_old, 0.0, 0.0}, 0.5, 0.25);
    const std::size_t k = argmax_abs(w);
    CHECK(g.point(k)[0] == doctest::Approx(2.0));  // eps_old x_old / eps_new
    CHECK(std::abs(w[k]) == doctest::Approx(1.0));
}

TEST_CASE("sweep list must descend") {
    const GridSpec g{1, 16.0, 64};
    CHECK_THROWS(sweep_epsilon(base_cfg(), well(0.0), g, {0.25, 0.5}, SolverOptions{}));
    CHECK_THROWS(sweep_epsilon(base_cfg(), well(0.0), g, {0.5}, SolverOptions{}));
}

TEST_CASE("decay fit on an exact algebraic tail") {
    const GridSpec g{1, 40.0, 512};
    const Field u = algebraic_tail(g, 0.5, 0.7);
    const DecayFit fit = fit_decay(u, Point{0.0, 0.0, 0.0}, 0.5);
    CHECK(fit.C == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(0.01));
    const CheckResult r = check_decay(u, 0.5, Point{0.0, 0.0, 0.0});
    CHECK(r.status == CheckStatus::Passed);

    // Not decayed at the faces: inconclusive rather than passed or failed.
    Field flat(g, std::vector<cplx>(g.size(), cplx(1.0, 0.0)));
    CHECK(check_decay(flat, 0.5, Point{0.0, 0.0, 0.0}).status == CheckStatus::Inconclusive);
}

TEST_CASE("sharp HLS constant") {
    // Lieb's constant for r = t: pi^{mu/2} Gamma(N/2 - mu/2)/Gamma(N - mu/2) (Gamma(N/2)/Gamma(N))^{-1 + mu/N}
    for (int N : {1, 2, 3})
        for (double mu : {0.3, 0.8}) {
            const double pi = std::numbers::pi;
            const double ref = std::pow(pi, 0.5 * mu) * std::tgamma(0.5 * (N - mu)) / std::tgamma(N - 0.5 * mu) *
                               std::pow(std::tgamma(0.5 * N) / std::tgamma(N), -1.0 + mu / N);
            CHECK(hls_constant(N, mu) == doctest::Approx(ref).epsilon(1e-13));
        }
    const GridSpec g{1, 10.0, 128};
    const HartreeCache cache(g, 0.4);
    std::mt19937_64 rng(6);
    for (int n = 0; n < 5; ++n) CHECK(check_hls(testing::random_smooth(g, rng), cache, 3.0).passed);
}

TEST_CASE("diamagnetic check on random fields") {
    const GridSpec g{1, 6.0, 64};
    std::mt19937_64 rng(13);
    const MagneticFractionalLaplacian op(g, 0.5, random_magnetic(1, rng));
    for (int n = 0; n < 5; ++n) {
        const auto u = testing::random_smooth(g, rng, 1.0);
        const CheckResult r = check_diamagnetic(u, op, 100 + n, 2000);
        CHECK(r.passed);
        CHECK(r.lhs <= r.rhs);
    }
}

TEST_CASE("concentration check reads the sweep trajectory") {
    const PotentialSpec pot = well(0.0);
    SweepResult sweep;
    for (double eps : {0.5, 0.25, 0.125}) {
        SweepEntry e;
        e.eps = eps;
        e.ok = true;
        e.report.V_at_max = 1.0 + 0.01 * eps;
        e.report.c_eps = 1.0;
        e.report.valid_penalization = true;
        sweep.entries.push_back(e);
    }
    CHECK(check_concentration(sweep, pot, 1, 1.0).passed);
    CHECK(check_concentration(sweep, pot, 1, 1.0, 0.99).passed);
    CHECK_FALSE(check_concentration(sweep, pot, 1, 1.0, 0.9).passed);
    sweep.entries[2].report.V_at_max = 1.5;  // gap 0.5 against a barrier of about 1
    CHECK_FALSE(check_concentration(sweep, pot, 1, 1.0).passed);
    sweep.entries[2].report.V_at_max = 1.001;
    sweep.entries[2].ok = false;
    const CheckResult partial = check_concentration(sweep, pot, 1, 1.0);
    CHECK_FALSE(partial.passed);
    CHECK_FALSE(partial.notes.empty());
}

TEST_CASE("mountain-pass geometry and the Hartree bound") {
    const GridSpec g{1, 16.0, 128};
    Problem p = make_penalized_problem(base_cfg(), well(0.5), g, PenalizationParams::from_ell0(3.0, 1.0, 1.0));
    p = calibrate(p, 1);
    CHECK(check_mountain_pass(p, 20, 5).passed);
    CHECK(check_hartree_bound(p, sample_shell(p, 16, 99)).passed);
}
