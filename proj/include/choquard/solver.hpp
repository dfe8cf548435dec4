#pragma once

// Ground states as minimisers of J on the Nehari manifold: preconditioned Barzilai-Borwein steps, each
// projected back onto the manifold, with Armijo backtracking.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "choquard/calibration.hpp"
#include "choquard/energy.hpp"

namespace choquard {

struct SolverOptions {
    int max_iters = 3000;
    double grad_tol = 1e-7;     ///< L^2 norm of the preconditioned gradient
    std::uint64_t seed = 0;
    double init_width = 1.0;    ///< Gaussian width of the initial guess, grid units of length
    double perturbation = 0.0;  ///< relative size of a seeded complex perturbation of the initial guess
    bool precondition = true;
    double armijo = 1e-4;
};

struct SolveReport {
    double eps = 1.0;
    double c_eps = 0.0;              ///< converged energy level
    Point x_eps{0.0, 0.0, 0.0};      ///< grid argmax of |u| (rescaled coordinates)
    std::size_t argmax = 0;
    double V_at_max = 0.0;           ///< V(eps x_eps)
    bool valid_penalization = true;  ///< |u| < a and |u|^2 <= a outside Lambda_eps
    double sup_outside = 0.0;        ///< max |u| outside Lambda_eps
    double a = 0.0;
    double ell0 = 0.0;
    double kappa = 0.0;
    double decay_exponent = 0.0;     ///< slope of log|u| vs log|x - x_eps| on the shell [L/4, L/2]
    double Cfit = 0.0;               ///< C in |u| ~ C / (1 + |x - x_eps|^{N+2s}), fitted over r >= L/8
    int iterations = 0;
    double residual = 0.0;           ///< ||P grad||
    double grad_norm = 0.0;          ///< ||grad||
    double nehari_residual = 0.0;    ///< <J'(u), u> / ||u||^2
    double sup_norm = 0.0;
    double boundary_ratio = 0.0;     ///< max |u| on the box faces / max |u|
    std::uint64_t seed = 0;
    bool converged = false;
    bool outside_theory = false;
    std::vector<std::string> warnings;
};

struct Solution {
    Field u;
    SolveReport report;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, Solution last) : std::runtime_error(what), last_(std::move(last)) {}
    const Solution& last() const { return last_; }

private:
    Solution last_;
};

/// Gaussian at p.center with the plane-wave phase e^{i A(0).x}; seeded perturbation when requested.
std::vector<cplx> initial_guess(const Problem& p, const SolverOptions& opts);

/// Minimises J over the Nehari manifold starting from `init` (or initial_guess). Works for both kinds.
/// Throws SolverError carrying the last iterate on non-convergence or "quadrature blow-up" on NaN energy.
Solution solve(const Problem& p, const SolverOptions& opts, const std::vector<cplx>* init = nullptr);

Solution solve_penalized(const Problem& p, const SolverOptions& opts, const std::vector<cplx>* init = nullptr);
/// Real start, V == V0, g == f. Returns c_{V0}.
Solution solve_limit(const Problem& p, const SolverOptions& opts, const std::vector<cplx>* init = nullptr);

/// Report fields derived from a field alone (argmax, validity, decay fit, ...).
SolveReport describe(const Field& u, const Problem& p);

struct DecayFit {
    double slope = 0.0;
    double C = 0.0;
    std::size_t samples = 0;
};
/// Log-log slope by least squares on the shell L/4 <= |x - x0| <= L/2 (zero samples skipped), and C by
/// linear least squares of |u| against 1/(1 + r^{N+2s}) over r >= L/8.
DecayFit fit_decay(const Field& u, const Point& x0, double s);

struct SweepEntry {
    double eps = 0.0;
    bool ok = false;
    std::string error;
    Calibration calibration;
    SolveReport report;
    Field u;
};

struct SweepResult {
    std::vector<SweepEntry> entries;
    std::vector<double> V_at_max;
    std::vector<double> c_eps;
    std::vector<bool> valid;
};

/// Solves the penalized problem for each eps (descending), warm-starting from the previous solution with
/// the profile kept in rescaled coordinates and its peak kept at the same original-coordinate position.
/// Failures are recorded per entry and the sweep continues.
SweepResult sweep_epsilon(const ProblemConfig& base, const PotentialSpec& pot, const GridSpec& grid,
                          const std::vector<double>& eps_list, const SolverOptions& opts,
                          QuadratureOptions qopts = {});

/// Warm start: u_new(x) = u_old(x - x_old (eps_old/eps_new - 1)).
std::vector<cplx> warm_start(const Field& u_old, const Point& x_old, double eps_old, double eps_new);

}  // namespace choquard
