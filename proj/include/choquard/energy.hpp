#pragma once

// The penalized functional J_eps on the rescaled grid, its L^2 gradient, the limit functional J_0 and the
// projection of a ray onto the Nehari manifold.

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "choquard/config.hpp"
#include "choquard/nonlinearity.hpp"
#include "choquard/operators.hpp"

namespace choquard {

enum class ProblemKind { Penalized, Limit };

/// Everything needed to evaluate J on one grid. Immutable once built and cheap to copy.
struct Problem {
    ProblemKind kind = ProblemKind::Penalized;
    ProblemConfig cfg;
    GridSpec grid;
    PenalizationParams pen;              ///< unused by the limit problem
    std::vector<double> V;               ///< V(eps x) per node
    std::vector<std::uint8_t> in_lambda; ///< all ones for the limit problem
    Point center{0.0, 0.0, 0.0};         ///< node where V_eps is smallest inside Lambda_eps
    Point A0{0.0, 0.0, 0.0};
    std::shared_ptr<const LinearOperator> op;
    std::shared_ptr<const HartreeCache> riesz;

    double cell_volume() const { return grid.cell_volume(); }
    /// G(eps x, t) at node i; F(t) for the limit problem.
    double G(std::size_t i, double t) const;
    double g(std::size_t i, double t) const;
};

/// Operator and Hartree kernel are built here; `pen` may be replaced later with with_penalization.
Problem make_penalized_problem(const ProblemConfig& cfg, const PotentialSpec& pot, const GridSpec& grid,
                               const PenalizationParams& pen, QuadratureOptions qopts = {});

/// (-Delta)^s u + V0 u = (|x|^-mu * F(|u|^2)) f(|u|^2) u. The default operator is the periodic spectral one;
/// `quadrature` selects the zero-extended quadrature with A == 0 instead.
Problem make_limit_problem(const ProblemConfig& cfg, const GridSpec& grid, bool quadrature = false,
                           QuadratureOptions qopts = {});

Problem with_penalization(const Problem& p, const PenalizationParams& pen);

struct EnergyReport {
    double seminorm_sq = 0.0;     ///< <(-Delta)^s_A u, u>, the normalised seminorm
    double potential_sq = 0.0;    ///< sum V |u|^2 h^N
    double hartree = 0.0;         ///< sum (|x|^-mu * G) G h^N
    double J = 0.0;
    double nehari_residual = 0.0; ///< <J'(u), u>

    double norm_sq() const { return seminorm_sq + potential_sq; }
};

EnergyReport energy(std::span<const cplx> u, const Problem& p);
double norm_eps_sq(std::span<const cplx> u, const Problem& p);

/// (-Delta)^s_A u + V u - (|x|^-mu * G(|u|^2)) g(|u|^2) u.
std::vector<cplx> gradient(std::span<const cplx> u, const Problem& p);

/// |x|^-mu * G(eps x, |u|^2)
std::vector<double> hartree_potential(std::span<const cplx> u, const Problem& p);

class NehariError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NehariScalar {
    double t_star = 0.0;
    int evaluations = 0;
};

/// Solves <J'(t u), t u> = 0 by bisection on [2^-20, t_hi], t_hi doubling from 1.
/// Throws NehariError("ray has no Nehari point") when no sign change is found.
NehariScalar nehari_project(std::span<const cplx> u, const Problem& p);

/// J(t u) for each t.
std::vector<double> ray_energies(std::span<const cplx> u, const Problem& p, std::span<const double> ts);

}  // namespace choquard
