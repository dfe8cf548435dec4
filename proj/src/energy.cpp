#include "choquard/energy.hpp"

#include <cmath>
#include <limits>

namespace choquard {

double Problem::G(std::size_t i, double t) const {
    if (kind == ProblemKind::Limit) return F_eval(t, cfg.q);
    return G_eval(in_lambda[i] != 0, t, pen);
}

double Problem::g(std::size_t i, double t) const {
    if (kind == ProblemKind::Limit) return f_eval(t, cfg.q);
    return g_eval(in_lambda[i] != 0, t, pen);
}

namespace {

MagneticFn rescaled_magnetic(const PotentialSpec& pot, double eps, int dim) {
    if (pot.magnetic_free()) return {};
    auto A = pot.A;
    return [A, eps, dim](const Point& x) {
        Point y{0.0, 0.0, 0.0};
        for (int d = 0; d < dim; ++d) y[d] = eps * x[d];
        return A(y);
    };
}

}  // namespace

Problem make_penalized_problem(const ProblemConfig& cfg, const PotentialSpec& pot, const GridSpec& grid,
                               const PenalizationParams& pen, QuadratureOptions qopts) {
    const RescaledGrid rg = rescaled_grid(cfg, pot, grid);
    Problem p;
    p.kind = ProblemKind::Penalized;
    p.cfg = cfg;
    p.grid = grid;
    p.pen = pen;
    p.in_lambda = rg.in_lambda;
    p.V.resize(grid.size());
    double vbest = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        p.V[i] = pot.V(rg.original(i));
        if (p.in_lambda[i] && p.V[i] < vbest) {
            vbest = p.V[i];
            best = i;
        }
    }
    p.center = grid.point(best);
    p.A0 = pot.A0();
    p.op = std::make_shared<MagneticFractionalLaplacian>(grid, cfg.s, rescaled_magnetic(pot, cfg.eps, grid.dim),
                                                         qopts);
    p.riesz = std::make_shared<HartreeCache>(grid, cfg.mu);
    return p;
}

Problem make_limit_problem(const ProblemConfig& cfg, const GridSpec& grid, bool quadrature, QuadratureOptions qopts) {
    Problem p;
    p.kind = ProblemKind::Limit;
    p.cfg = cfg;
    p.grid = grid;
    p.V.assign(grid.size(), cfg.V0);
    p.in_lambda.assign(grid.size(), 1);
    p.center = Point{0.0, 0.0, 0.0};
    if (quadrature)
        p.op = std::make_shared<MagneticFractionalLaplacian>(grid, cfg.s, MagneticFn{}, qopts);
    else
        p.op = std::make_shared<SpectralFractionalLaplacian>(grid, cfg.s);
    p.riesz = std::make_shared<HartreeCache>(grid, cfg.mu);
    return p;
}

Problem with_penalization(const Problem& p, const PenalizationParams& pen) {
    Problem out = p;
    out.pen = pen;
    out.cfg.ell0 = pen.ell0;
    return out;
}

std::vector<double> hartree_potential(std::span<const cplx> u, const Problem& p) {
    std::vector<double> Gv(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) Gv[i] = p.G(i, std::norm(u[i]));
    return riesz_convolve(Gv, *p.riesz);
}

double norm_eps_sq(std::span<const cplx> u, const Problem& p) {
    double pot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) pot += p.V[i] * std::norm(u[i]);
    return p.op->quadratic_form(u) + pot * p.cell_volume();
}

EnergyReport energy(std::span<const cplx> u, const Problem& p) {
    EnergyReport r;
    const double hN = p.cell_volume();
    r.seminorm_sq = p.op->quadratic_form(u);
    std::vector<double> Gv(u.size());
    double pot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double t = std::norm(u[i]);
        pot += p.V[i] * t;
        Gv[i] = p.G(i, t);
    }
    r.potential_sq = pot * hN;
    const auto K = riesz_convolve(Gv, *p.riesz);
    double hartree = 0.0;
    double drive = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double t = std::norm(u[i]);
        hartree += K[i] * Gv[i];
        drive += K[i] * p.g(i, t) * t;
    }
    r.hartree = hartree * hN;
    r.J = 0.5 * r.norm_sq() - 0.25 * r.hartree;
    r.nehari_residual = r.norm_sq() - drive * hN;
    return r;
}

std::vector<cplx> gradient(std::span<const cplx> u, const Problem& p) {
    auto out = p.op->apply(u);
    const auto K = hartree_potential(u, p);
    for (std::size_t i = 0; i < u.size(); ++i) out[i] += (p.V[i] - K[i] * p.g(i, std::norm(u[i]))) * u[i];
    return out;
}

std::vector<double> ray_energies(std::span<const cplx> u, const Problem& p, std::span<const double> ts) {
    // The quadratic part scales exactly with t^2; only the Hartree term is re-evaluated.
    const double n2 = norm_eps_sq(u, p);
    const double hN = p.cell_volume();
    std::vector<double> out;
    out.reserve(ts.size());
    std::vector<double> Gv(u.size());
    for (double t : ts) {
        for (std::size_t i = 0; i < u.size(); ++i) Gv[i] = p.G(i, t * t * std::norm(u[i]));
        const auto K = riesz_convolve(Gv, *p.riesz);
        double hartree = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) hartree += K[i] * Gv[i];
        out.push_back(0.5 * t * t * n2 - 0.25 * hartree * hN);
    }
    return out;
}

NehariScalar nehari_project(std::span<const cplx> u, const Problem& p) {
    const double n2 = norm_eps_sq(u, p);
    if (!(n2 > 0.0)) throw NehariError("ray has no Nehari point");
    const double hN = p.cell_volume();
    NehariScalar res;
    std::vector<double> Gv(u.size());
    // psi(t) = <J'(tu), tu> / t^2, positive near 0 and negative past the Nehari point.
    auto psi = [&](double t) {
        ++res.evaluations;
        for (std::size_t i = 0; i < u.size(); ++i) Gv[i] = p.G(i, t * t * std::norm(u[i]));
        const auto K = riesz_convolve(Gv, *p.riesz);
        double drive = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double a = std::norm(u[i]);
            drive += K[i] * p.g(i, t * t * a) * a;
        }
        return n2 - drive * hN;
    };

    double lo = std::ldexp(1.0, -20);
    if (!(psi(lo) > 0.0)) throw NehariError("ray has no Nehari point");
    double hi = 1.0;
    int expansions = 0;
    while (!(psi(hi) < 0.0)) {
        if (++expansions > 60) throw NehariError("ray has no Nehari point");
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        const double v = psi(mid);
        if (!std::isfinite(v)) throw NehariError("ray has no Nehari point");
        if (v > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    res.t_star = 0.5 * (lo + hi);
    return res;
}

}  // namespace choquard
