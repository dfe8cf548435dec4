#include "choquard/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace choquard {

std::vector<cplx> random_field(const GridSpec& grid, Rng& rng) {
    const int N = grid.dim;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Point c{0.0, 0.0, 0.0};
    for (int d = 0; d < N; ++d) c[d] = (unit(rng) - 0.5) * grid.L;
    const double wmin = std::max(2.0 * grid.spacing(), grid.L / 16.0);
    const double w = wmin + unit(rng) * (grid.L / 4.0 - wmin);

    constexpr int kModes = 4;
    std::array<Point, kModes> k{};
    std::array<cplx, kModes> amp{};
    for (int m = 0; m < kModes; ++m) {
        for (int d = 0; d < N; ++d) k[m][d] = (2.0 * unit(rng) - 1.0) * 2.0 / w;
        amp[m] = cplx(normal(rng), normal(rng)) * 0.5;
    }
    std::vector<cplx> u(grid.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Point x = grid.point(i);
        double r2 = 0.0;
        for (int d = 0; d < N; ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
        cplx v{1.0, 0.0};
        for (int m = 0; m < kModes; ++m) {
            double ph = 0.0;
            for (int d = 0; d < N; ++d) ph += k[m][d] * x[d];
            v += amp[m] * std::polar(1.0, ph);
        }
        u[i] = std::exp(-0.5 * r2 / (w * w)) * v;
    }
    return u;
}

FieldSampler band_limited_sampler(const GridSpec& grid) {
    return [grid](Rng& rng) { return random_field(grid, rng); };
}

MagneticFn random_magnetic(int dim, Rng& rng, double amplitude) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr int kModes = 3;
    struct Mode {
        Point k;
        double b, phi;
    };
    std::array<std::array<Mode, kModes>, 3> modes{};
    for (int d = 0; d < dim; ++d)
        for (auto& m : modes[d]) {
            for (int e = 0; e < dim; ++e) m.k[e] = 2.0 * unit(rng) - 1.0;
            m.b = amplitude * normal(rng) / std::sqrt(static_cast<double>(kModes));
            m.phi = 2.0 * std::numbers::pi * unit(rng);
        }
    return [modes, dim](const Point& x) {
        Point a{0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d)
            for (const auto& m : modes[d]) {
                double ph = m.phi;
                for (int e = 0; e < dim; ++e) ph += m.k[e] * x[e];
                a[d] += m.b * std::sin(ph);
            }
        return a;
    };
}

std::vector<cplx> canonical_bump(const Problem& p) {
    const GridSpec& g = p.grid;
    const int N = g.dim;
    // Largest radius whose ball around the centre stays inside Lambda_eps, capped at a few length units.
    double R = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!p.in_lambda[i]) R = std::min(R, distance(g.point(i), p.center, N));
    R = std::min(R, 4.0) - g.spacing();
    if (!(R > 2.0 * g.spacing())) throw std::runtime_error("penalization region too small for the grid");
    std::vector<cplx> u(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.point(i);
        const double r = distance(x, p.center, N);
        if (r >= R) continue;
        const double c = std::cos(0.5 * std::numbers::pi * r / R);
        double ph = 0.0;
        for (int d = 0; d < N; ++d) ph += p.A0[d] * x[d];
        u[i] = c * c * std::polar(1.0, ph);
    }
    return u;
}

double default_kappa(const Problem& p) {
    const auto u0 = canonical_bump(p);
    const double t = nehari_project(u0, p).t_star;
    std::vector<cplx> w(u0);
    for (auto& z : w) z *= t;
    return 2.0 * energy(w, p).J;
}

void scale_to_norm(std::vector<cplx>& u, const Problem& p, double target_norm_sq) {
    const double n2 = norm_eps_sq(u, p);
    if (!(n2 > 0.0)) return;
    const double f = std::sqrt(target_norm_sq / n2);
    for (auto& z : u) z *= f;
}

Calibration calibrate_ell0(const Problem& p, double kappa, const FieldSampler& sampler, int count,
                           std::uint64_t seed, bool project) {
    Calibration cal;
    cal.kappa = kappa;
    cal.seed = seed;
    const double shell = 4.0 * (kappa + 1.0);
    Rng rng(seed);
    std::vector<double> Fv(p.grid.size());
    for (int n = 0; n < count; ++n) {
        auto u = sampler(rng);
        if (project) scale_to_norm(u, p, shell);
        const double n2 = norm_eps_sq(u, p);
        if (!std::isfinite(n2) || n2 > shell * (1.0 + 1e-10)) continue;
        for (std::size_t i = 0; i < u.size(); ++i) Fv[i] = F_eval(std::norm(u[i]), p.cfg.q);
        const auto K = riesz_convolve(Fv, *p.riesz);
        double sup = 0.0;
        for (double v : K) sup = std::max(sup, std::abs(v));
        cal.C0 = std::max(cal.C0, sup);
        ++cal.samples;
    }
    if (cal.samples == 0) throw std::runtime_error("no sampled field lies inside the bounded set B");
    if (!(cal.C0 > 0.0)) throw std::runtime_error("calibration sampled only zero fields");
    cal.pen = PenalizationParams::from_ell0(p.cfg.q, p.cfg.V0, 4.0 * cal.C0);
    return cal;
}

Problem calibrate(const Problem& p, std::uint64_t seed, Calibration* out) {
    Calibration cal;
    cal.kappa = p.cfg.kappa ? *p.cfg.kappa : default_kappa(p);
    if (p.cfg.ell0) {
        cal.pen = PenalizationParams::from_ell0(p.cfg.q, p.cfg.V0, *p.cfg.ell0);
        cal.seed = seed;
    } else {
        cal = calibrate_ell0(p, cal.kappa, band_limited_sampler(p.grid), 64, seed);
    }
    Problem r = with_penalization(p, cal.pen);
    r.cfg.kappa = cal.kappa;
    if (out) *out = cal;
    return r;
}

}  // namespace choquard
