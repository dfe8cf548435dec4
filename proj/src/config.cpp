#include "choquard/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace choquard {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

bool Region::contains(const Point& x, int dim) const {
    if (shape == Shape::Ball) {
        double r2 = 0.0;
        for (int d = 0; d < dim; ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
        return r2 < radius * radius;
    }
    for (int d = 0; d < dim; ++d)
        if (std::abs(x[d] - center[d]) >= half_widths[d]) return false;
    return true;
}

double Region::reach(int axis) const {
    const double half = shape == Shape::Ball ? radius : half_widths[axis];
    return std::abs(center[axis]) + half;
}

double Region::inner_distance(const Point& x, int dim) const {
    if (shape == Shape::Ball) {
        double r2 = 0.0;
        for (int d = 0; d < dim; ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
        return radius - std::sqrt(r2);
    }
    double dmin = std::numeric_limits<double>::infinity();
    for (int d = 0; d < dim; ++d) dmin = std::min(dmin, half_widths[d] - std::abs(x[d] - center[d]));
    return dmin;
}

PotentialSpec make_potential(int dim, double V0, const PotentialModel& pm, const MagneticModel& mm,
                             const Region& lambda) {
    PotentialSpec pot;
    pot.lambda = lambda;
    if (pm.type == "constant") {
        pot.V = [V0](const Point&) { return V0; };
    } else if (pm.type == "quadratic_capped") {
        const Point c = pm.center;
        const double w = pm.weight;
        const double cap = pm.cap;
        pot.V = [=](const Point& x) {
            double r2 = 0.0;
            for (int d = 0; d < dim; ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
            return V0 + std::min(w * r2, cap);
        };
    } else {
        throw std::invalid_argument("unknown potential type '" + pm.type + "'");
    }

    if (mm.type == "zero") {
        pot.A = nullptr;
    } else if (mm.type == "constant") {
        const Point v = mm.vector;
        pot.A = [v](const Point&) { return v; };
    } else if (mm.type == "linear") {
        // N = 1: A = B x.  N >= 2: symmetric gauge in the first two axes, uniform field of strength B.
        const double B = mm.strength;
        pot.A = [B, dim](const Point& x) {
            if (dim == 1) return Point{B * x[0], 0.0, 0.0};
            return Point{-0.5 * B * x[1], 0.5 * B * x[0], 0.0};
        };
    } else if (mm.type == "sine") {
        const double amp = mm.strength;
        const double k = mm.wavenumber;
        pot.A = [amp, k, dim](const Point& x) {
            Point a{0.0, 0.0, 0.0};
            for (int d = 0; d < dim; ++d) a[d] = amp * std::sin(k * x[(d + 1) % dim]);
            return a;
        };
    } else {
        throw std::invalid_argument("unknown magnetic potential type '" + mm.type + "'");
    }
    return pot;
}

double hls_exponent(int dim, double mu) { return 2.0 * dim / (2.0 * dim - mu); }

double growth_upper_bound(int dim, double s, double mu) {
    if (dim <= 2.0 * s) return std::numeric_limits<double>::infinity();
    return 2.0 * (dim - mu) / (dim - 2.0 * s);
}

ValidationReport validate_config(const ProblemConfig& cfg, const PotentialSpec& pot, const GridSpec& grid) {
    ValidationReport rep;
    auto violate = [&](std::string msg) { rep.violations.push_back(std::move(msg)); };
    const int N = cfg.dim;

    if (N < 1 || N > 3) violate("dimension N must be 1, 2 or 3");
    if (grid.dim != N) violate("grid dimension does not match problem dimension");
    if (grid.M < 8 || grid.M % 2 != 0) violate("grid points per axis must be even and >= 8");
    if (!(grid.L > 0.0)) violate("grid extent L must be positive");
    if (!(cfg.s > 0.0 && cfg.s < 1.0)) violate("s must lie in (0, 1)");
    if (!(cfg.mu > 0.0 && cfg.mu < 2.0 * cfg.s)) violate("μ must lie in (0, 2s)");
    if (!(cfg.mu < N)) violate("μ must lie below N for the Riesz kernel to be locally integrable");
    if (!(cfg.q > 2.0)) violate("q must exceed 2");
    if (!(cfg.eps > 0.0)) violate("eps must be positive");
    if (!(cfg.V0 > 0.0)) violate("V0 must be positive");
    if (cfg.ell0 && !(*cfg.ell0 > 0.0)) violate("ell0 must be positive");
    if (cfg.kappa && !(*cfg.kappa > 0.0)) violate("kappa must be positive");
    if (!pot.V) violate("potential V is not set");

    if (N < 3 || N <= 2.0 * cfg.s) {
        rep.outside_theory = true;
        rep.warnings.push_back("outside theory hypotheses: N = " + std::to_string(N) +
                               " (existence and concentration are proved for N >= 3 with N > 2s)");
    }

    if (N > 2.0 * cfg.s && cfg.s > 0.0 && cfg.s < 1.0) {
        const double qmax = growth_upper_bound(N, cfg.s, cfg.mu);
        if (!(cfg.q < qmax)) violate("q must lie below 2(N-μ)/(N-2s) = " + fmt(qmax));
        // HLS admissibility: F(|u|^2) ~ |u|^q must sit in L^t with tq in (2, 2*_s).
        const double t = hls_exponent(N, cfg.mu);
        const double crit = 2.0 * N / (N - 2.0 * cfg.s);
        const double tq = t * cfg.q;
        if (!(tq > 2.0 && tq < crit))
            violate("HLS exponent tq = " + fmt(tq) + " outside (2, 2*_s) = (2, " + fmt(crit) + ")");
    } else if (N <= 2.0 * cfg.s) {
        rep.warnings.push_back("growth upper bound 2(N-μ)/(N-2s) skipped because N <= 2s");
    }

    if (!rep.ok() || !pot.V) return rep;

    // (V1) and (V2), sampled on the computational grid mapped back to original coordinates.
    double vmin = std::numeric_limits<double>::infinity();
    Point worst{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Point x = grid.point(i);
        for (int d = 0; d < N; ++d) x[d] *= cfg.eps;
        const double v = pot.V(x);
        if (v < vmin) {
            vmin = v;
            worst = x;
        }
    }
    if (vmin < cfg.V0 * (1.0 - 1e-12))
        violate("(V1) violated: V = " + fmt(vmin) + " < V0 = " + fmt(cfg.V0) + " at x[0] = " + fmt(worst[0]));

    const LambdaSamples ls = sample_lambda(pot, grid, cfg.eps);
    if (ls.boundary_nodes == 0) {
        violate("(V2) cannot be checked: the region Λ is not resolved by the grid");
    } else if (!(ls.min_boundary > ls.min_inside)) {
        violate("(V2) violated: min of V on the boundary of Λ (" + fmt(ls.min_boundary) +
                ") does not exceed its minimum over Λ (" + fmt(ls.min_inside) + ")");
    }
    return rep;
}

Point RescaledGrid::original(std::size_t flat) const {
    Point x = grid.point(flat);
    for (int d = 0; d < grid.dim; ++d) x[d] *= eps;
    return x;
}

RescaledGrid rescaled_grid(const ProblemConfig& cfg, const PotentialSpec& pot, const GridSpec& grid) {
    grid.check();
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    for (int d = 0; d < grid.dim; ++d) {
        // Lambda_eps must sit strictly inside the sampled box [-L, L - h].
        if (!(pot.lambda.reach(d) / cfg.eps < grid.L - grid.spacing()))
            throw std::runtime_error("penalization region leaves domain");
    }
    RescaledGrid rg;
    rg.grid = grid;
    rg.eps = cfg.eps;
    rg.in_lambda.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        rg.in_lambda[i] = pot.lambda.contains(rg.original(i), grid.dim) ? 1 : 0;
    return rg;
}

LambdaSamples sample_lambda(const PotentialSpec& pot, const GridSpec& grid, double eps) {
    LambdaSamples out;
    const int N = grid.dim;
    auto original = [&](std::size_t flat) {
        Point x = grid.point(flat);
        for (int d = 0; d < N; ++d) x[d] *= eps;
        return x;
    };
    std::vector<std::uint8_t> inside(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) inside[i] = pot.lambda.contains(original(i), N) ? 1 : 0;

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point x = original(i);
        if (inside[i]) out.min_inside = std::min(out.min_inside, pot.V(x));
        const Index idx = grid.unravel(i);
        for (int d = 0; d < N; ++d) {
            Index nb = idx;
            if (++nb[d] >= grid.M) continue;
            const std::size_t j = grid.ravel(nb);
            if (inside[j] == inside[i]) continue;
            // The boundary crosses this grid edge; sample V at its midpoint.
            const Point y = original(j);
            Point mid{0.0, 0.0, 0.0};
            for (int e = 0; e < N; ++e) mid[e] = 0.5 * (x[e] + y[e]);
            out.min_boundary = std::min(out.min_boundary, pot.V(mid));
            ++out.boundary_nodes;
        }
    }
    return out;
}

LambdaSamples sample_lambda(const PotentialSpec& pot, int dim) {
    double reach = 0.0;
    for (int d = 0; d < dim; ++d) reach = std::max(reach, pot.lambda.reach(d));
    GridSpec g;
    g.dim = dim;
    g.L = 1.25 * reach;
    g.M = dim == 1 ? 2048 : (dim == 2 ? 256 : 64);
    return sample_lambda(pot, g, 1.0);
}

}  // namespace choquard
