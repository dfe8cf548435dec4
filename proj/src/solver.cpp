#include "choquard/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace choquard {

namespace {

bool on_face(const GridSpec& g, std::size_t flat) {
    const Index idx = g.unravel(flat);
    for (int d = 0; d < g.dim; ++d)
        if (idx[d] == 0 || idx[d] == g.M - 1) return true;
    return false;
}

void scale(std::vector<cplx>& u, double t) {
    for (auto& z : u) z *= t;
}

}  // namespace

std::vector<cplx> initial_guess(const Problem& p, const SolverOptions& opts) {
    const GridSpec& g = p.grid;
    const int N = g.dim;
    std::vector<cplx> u(g.size());
    const double w2 = opts.init_width * opts.init_width;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Point x = g.point(i);
        const double r = distance(x, p.center, N);
        double ph = 0.0;
        for (int d = 0; d < N; ++d) ph += p.A0[d] * x[d];
        u[i] = std::exp(-0.5 * r * r / w2) * std::polar(1.0, ph);
    }
    if (opts.perturbation > 0.0) {
        Rng rng(opts.seed);
        const auto noise = random_field(g, rng);
        const double scale_noise = opts.perturbation / std::max(sup_abs(noise), 1e-300);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] += scale_noise * std::abs(u[i]) * noise[i];
    }
    return u;
}

DecayFit fit_decay(const Field& u, const Point& x0, double s) {
    const GridSpec& g = u.grid;
    const double alpha = g.dim + 2.0 * s;
    const double r_lo = g.L / 4.0, r_hi = g.L / 2.0, r_env = g.L / 8.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, ue = 0.0, ee = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = distance(g.point(i), x0, g.dim);
        const double a = std::abs(u.values[i]);
        if (r >= r_env) {
            const double e = 1.0 / (1.0 + std::pow(r, alpha));
            ue += a * e;
            ee += e * e;
        }
        if (r < r_lo || r > r_hi || !(a > 0.0)) continue;
        const double lx = std::log(r), ly = std::log(a);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    DecayFit fit;
    fit.samples = n;
    fit.C = ee > 0.0 ? ue / ee : 0.0;
    if (n < 2) return fit;
    const double dn = static_cast<double>(n);
    const double den = dn * sxx - sx * sx;
    fit.slope = den != 0.0 ? (dn * sxy - sx * sy) / den : 0.0;
    return fit;
}

SolveReport describe(const Field& u, const Problem& p) {
    const GridSpec& g = p.grid;
    SolveReport r;
    r.eps = p.cfg.eps;
    r.argmax = argmax_abs(u.span());
    r.x_eps = g.point(r.argmax);
    r.V_at_max = p.V[r.argmax];
    r.sup_norm = std::abs(u.values[r.argmax]);
    double face = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double a = std::abs(u.values[i]);
        if (!p.in_lambda[i]) r.sup_outside = std::max(r.sup_outside, a);
        if (on_face(g, i)) face = std::max(face, a);
    }
    r.boundary_ratio = r.sup_norm > 0.0 ? face / r.sup_norm : 0.0;
    if (p.kind == ProblemKind::Penalized) {
        r.a = p.pen.a;
        r.ell0 = p.pen.ell0;
        r.kappa = p.cfg.kappa.value_or(0.0);
        r.valid_penalization = r.sup_outside < p.pen.a && r.sup_outside * r.sup_outside <= p.pen.a;
    }
    const DecayFit fit = fit_decay(u, r.x_eps, p.cfg.s);
    r.decay_exponent = fit.slope;
    r.Cfit = fit.C;
    const EnergyReport e = energy(u.span(), p);
    r.c_eps = e.J;
    r.nehari_residual = e.norm_sq() > 0.0 ? e.nehari_residual / e.norm_sq() : 0.0;
    r.grad_norm = l2_norm(gradient(u.span(), p), g.cell_volume());
    r.outside_theory = g.dim < 3 || g.dim <= 2.0 * p.cfg.s;
    if (r.outside_theory) r.warnings.push_back("outside theory hypotheses");
    return r;
}

Solution solve(const Problem& p, const SolverOptions& opts, const std::vector<cplx>* init) {
    if (!(opts.grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");
    const GridSpec& g = p.grid;
    const double hN = g.cell_volume();
    const SpectralPreconditioner P(g, p.cfg.s, 1.0 + p.cfg.V0);
    auto precondition = [&](const std::vector<cplx>& in) {
        if (!opts.precondition) return in;
        std::vector<cplx> out(in.size());
        P.apply(in, out);
        return out;
    };

    std::vector<cplx> u = init ? *init : initial_guess(p, opts);
    auto fail = [&](const std::string& msg, int iters, double res) {
        Solution last{Field(g, u), {}};
        try {
            last.report = describe(last.u, p);
        } catch (...) {
        }
        last.report.iterations = iters;
        last.report.residual = res;
        last.report.seed = opts.seed;
        throw SolverError(msg, std::move(last));
    };

    scale(u, nehari_project(u, p).t_star);
    double J = energy(u, p).J;
    if (!std::isfinite(J)) fail("quadrature blow-up", 0, std::numeric_limits<double>::quiet_NaN());

    std::vector<cplx> grad = gradient(u, p);
    std::vector<cplx> dir = precondition(grad);
    double res = l2_norm(dir, hN);
    double tau = 1.0;
    int it = 0;
    bool converged = res < opts.grad_tol;
    std::vector<cplx> trial(u.size());
    while (!converged && it < opts.max_iters) {
        ++it;
        const double slope = inner_re(grad, dir, hN);
        double step = tau;
        bool accepted = false;
        double J_new = J;
        for (int back = 0; back < 40; ++back) {
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] - step * dir[i];
            try {
                scale(trial, nehari_project(trial, p).t_star);
            } catch (const NehariError&) {
                step *= 0.5;
                continue;
            }
            J_new = energy(trial, p).J;
            if (!std::isfinite(J_new)) fail("quadrature blow-up", it, res);
            if (J_new <= J - opts.armijo * step * slope + 5e-13) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no descent left at working precision

        std::vector<cplx> grad_new = gradient(trial, p);
        std::vector<cplx> dir_new = precondition(grad_new);
        // Barzilai-Borwein step from the accepted displacement.
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const cplx sdiff = trial[i] - u[i];
            const cplx ydiff = dir_new[i] - dir[i];
            ss += std::norm(sdiff);
            sy += sdiff.real() * ydiff.real() + sdiff.imag() * ydiff.imag();
        }
        tau = (sy > 0.0 && std::isfinite(ss / sy)) ? std::clamp(ss / sy, 1e-6, 1e6) : 1.0;

        u.swap(trial);
        grad.swap(grad_new);
        dir.swap(dir_new);
        J = J_new;
        res = l2_norm(dir, hN);
        converged = res < opts.grad_tol;
    }
    if (!converged) {
        std::ostringstream os;
        os << "solver did not converge in " << it << " iterations (residual " << res << ")";
        fail(os.str(), it, res);
    }

    Solution sol{Field(g, std::move(u)), {}};
    align_phase(sol.u.span(), argmax_abs(sol.u.span()));
    sol.report = describe(sol.u, p);
    sol.report.iterations = it;
    sol.report.residual = res;
    sol.report.seed = opts.seed;
    sol.report.converged = true;
    return sol;
}

Solution solve_penalized(const Problem& p, const SolverOptions& opts, const std::vector<cplx>* init) {
    if (p.kind != ProblemKind::Penalized) throw std::invalid_argument("expected a penalized problem");
    return solve(p, opts, init);
}

Solution solve_limit(const Problem& p, const SolverOptions& opts, const std::vector<cplx>* init) {
    if (p.kind != ProblemKind::Limit) throw std::invalid_argument("expected a limit problem");
    return solve(p, opts, init);
}

std::vector<cplx> warm_start(const Field& u_old, const Point& x_old, double eps_old, double eps_new) {
    const GridSpec& g = u_old.grid;
    Point shift{0.0, 0.0, 0.0};
    for (int d = 0; d < g.dim; ++d) shift[d] = x_old[d] * (eps_old / eps_new - 1.0);
    std::vector<cplx> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Point x = g.point(i);
        for (int d = 0; d < g.dim; ++d) x[d] -= shift[d];
        out[i] = interpolate(u_old, x);
    }
    return out;
}

SweepResult sweep_epsilon(const ProblemConfig& base, const PotentialSpec& pot, const GridSpec& grid,
                          const std::vector<double>& eps_list, const SolverOptions& opts, QuadratureOptions qopts) {
    if (eps_list.size() < 2) throw std::invalid_argument("sweep needs at least two values of eps");
    for (std::size_t k = 1; k < eps_list.size(); ++k)
        if (!(eps_list[k] < eps_list[k - 1])) throw std::invalid_argument("eps list must be strictly descending");

    SweepResult out;
    std::optional<std::size_t> prev_idx;
    for (double eps : eps_list) {
        const SweepEntry* prev = prev_idx ? &out.entries[*prev_idx] : nullptr;
        SweepEntry e;
        e.eps = eps;
        try {
            ProblemConfig cfg = base;
            cfg.eps = eps;
            const ValidationReport vr = validate_config(cfg, pot, grid);
            if (!vr.ok()) throw std::runtime_error(vr.violations.front());
            Problem p = make_penalized_problem(cfg, pot, grid, PenalizationParams::from_ell0(cfg.q, cfg.V0, 1.0), qopts);
            p = calibrate(p, opts.seed, &e.calibration);
            std::vector<cplx> init;
            if (prev) init = warm_start(prev->u, prev->report.x_eps, prev->eps, eps);
            Solution sol = solve_penalized(p, opts, prev ? &init : nullptr);
            e.report = sol.report;
            e.u = std::move(sol.u);
            e.ok = true;
        } catch (const SolverError& err) {
            e.error = err.what();
            e.report = err.last().report;
            e.u = err.last().u;
        } catch (const std::exception& err) {
            e.error = err.what();
        }
        e.report.eps = eps;
        out.V_at_max.push_back(e.ok ? e.report.V_at_max : std::numeric_limits<double>::quiet_NaN());
        out.c_eps.push_back(e.ok ? e.report.c_eps : std::numeric_limits<double>::quiet_NaN());
        out.valid.push_back(e.ok && e.report.valid_penalization);
        out.entries.push_back(std::move(e));
        if (out.entries.back().ok) prev_idx = out.entries.size() - 1;
    }
    return out;
}

}  // namespace choquard
