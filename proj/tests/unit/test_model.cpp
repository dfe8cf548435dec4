#include <cmath>
#include <string>

#include "choquard/config.hpp"
#include "choquard/nonlinearity.hpp"
#include "doctest.h"

using namespace choquard;

namespace {

Region box1() {
    Region r;
    r.shape = Region::Shape::Box;
    r.half_widths = {1.0, 1.0, 1.0};
    return r;
}

PotentialSpec well(int dim, double V0) {
    PotentialModel pm;
    pm.type = "quadratic_capped";
    pm.cap = 4.0;
    return make_potential(dim, V0, pm, {}, box1());
}

bool mentions(const ValidationReport& r, const std::string& text) {
    for (const auto& v : r.violations)
        if (v.find(text) != std::string::npos) return true;
    return false;
}

double simpson(double (*fn)(double, const PenalizationParams&), double b, const PenalizationParams& p, int n) {
    const double h = b / n;
    double acc = fn(0.0, p) + fn(b, p);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * fn(i * h, p);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("standing assumptions are enforced") {
    const GridSpec g{3, 8.0, 16};
    ProblemConfig cfg;
    cfg.dim = 3;
    cfg.s = 0.75;
    cfg.mu = 1.0;
    cfg.q = 2.2;
    cfg.eps = 1.0;
    const auto pot = well(3, 1.0);
    CHECK(validate_config(cfg, pot, g).ok());
    CHECK_FALSE(validate_config(cfg, pot, g).outside_theory);

    ProblemConfig bad = cfg;
    bad.mu = 1.5;  // = 2s
    CHECK(mentions(validate_config(bad, pot, g), "μ must lie in (0, 2s)"));
    bad = cfg;
    bad.q = 2.0;
    CHECK(mentions(validate_config(bad, pot, g), "q must exceed 2"));
    bad = cfg;
    bad.q = 3.0;  // above 2(N-mu)/(N-2s) = 8/3
    CHECK(mentions(validate_config(bad, pot, g), "q must lie below"));
    bad = cfg;
    bad.s = 1.0;
    CHECK(mentions(validate_config(bad, pot, g), "s must lie in (0, 1)"));
}

TEST_CASE("potential assumptions are sampled") {
    const GridSpec g{1, 8.0, 128};
    ProblemConfig cfg;
    PotentialSpec low = well(1, 1.0);
    low.V = [](const Point& x) { return 0.5 + x[0] * x[0]; };
    CHECK(mentions(validate_config(cfg, low, g), "(V1)"));

    PotentialModel flat;
    const PotentialSpec c = make_potential(1, 1.0, flat, {}, box1());
    CHECK(mentions(validate_config(cfg, c, g), "(V2)"));

    CHECK(validate_config(cfg, well(1, 1.0), g).ok());
    CHECK(validate_config(cfg, well(1, 1.0), g).outside_theory);
}

TEST_CASE("rescaled region must fit the box") {
    ProblemConfig cfg;
    cfg.eps = 0.1;
    CHECK_THROWS_WITH(rescaled_grid(cfg, well(1, 1.0), GridSpec{1, 8.0, 64}), "penalization region leaves domain");
    cfg.eps = 0.25;
    const RescaledGrid rg = rescaled_grid(cfg, well(1, 1.0), GridSpec{1, 8.0, 64});
    std::size_t inside = 0;
    for (auto b : rg.in_lambda) inside += b;
    CHECK(inside == 31);  // |x| < 4 with h = 0.25
}

TEST_CASE("regions and exponents") {
    Region ball;
    ball.radius = 2.0;
    CHECK(ball.contains({1.0, 1.0, 1.0}, 2));
    CHECK_FALSE(ball.contains({1.5, 1.5, 0.0}, 2));
    CHECK(ball.inner_distance({1.0, 0.0, 0.0}, 2) == doctest::Approx(1.0));
    CHECK(box1().contains({0.9, -0.9, 0.0}, 2));
    CHECK_FALSE(box1().contains({1.0, 0.0, 0.0}, 2));
    CHECK(hls_exponent(3, 1.0) == doctest::Approx(1.2));
    CHECK(growth_upper_bound(3, 0.5, 1.0) == doctest::Approx(2.0));
    CHECK(std::isinf(growth_upper_bound(1, 0.5, 0.4)));
}

TEST_CASE("power nonlinearity and its primitive") {
    for (double q : {2.5, 3.0, 4.0})
        for (double t : {0.01, 0.3, 2.0}) {
            const double h = 1e-6 * t;
            const double dF = (F_eval(t + h, q) - F_eval(t - h, q)) / (2.0 * h);
            CHECK(dF == doctest::Approx(f_eval(t, q)).epsilon(1e-8));
            // f(t) t = (q/2) F(t)
            CHECK(f_eval(t, q) * t == doctest::Approx(0.5 * q * F_eval(t, q)).epsilon(1e-14));
        }
    CHECK(F_eval(0.0, 3.0) == 0.0);
    CHECK(f_eval(0.0, 3.0) == 0.0);
}

TEST_CASE("penalized nonlinearity is capped and continuous") {
    const auto p = PenalizationParams::from_ell0(3.0, 2.0, 8.0);
    CHECK(f_eval(p.a, 3.0) == doctest::Approx(p.V0 / p.ell0).epsilon(1e-14));
    CHECK(f_tilde(p.a * 0.999999, p) == doctest::Approx(f_tilde(p.a * 1.000001, p)).epsilon(1e-6));
    CHECK(f_tilde(10.0 * p.a, p) == doctest::Approx(p.cap()));
    CHECK(g_eval(true, 10.0 * p.a, p) == doctest::Approx(f_eval(10.0 * p.a, 3.0)));
    CHECK(G_eval(true, 3.0, p) == doctest::Approx(F_eval(3.0, 3.0)));

    // G outside Lambda is the primitive of the capped f, here by Simpson's rule.
    for (double t : {0.5 * p.a, 3.0 * p.a, 40.0 * p.a}) {
        const double ref = simpson([](double x, const PenalizationParams& pp) { return f_tilde(x, pp); }, t, p, 20000);
        CHECK(G_eval(false, t, p) == doctest::Approx(ref).epsilon(1e-6));
    }
    CHECK_THROWS(PenalizationParams::from_ell0(2.0, 1.0, 1.0));
}
