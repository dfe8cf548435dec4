#pragma once

// Scalar problem data, potentials, the penalization region and validation of the standing assumptions.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "choquard/grid.hpp"

namespace choquard {

/// Bounded open region Lambda where the nonlinearity is left unmodified. Ball or axis-aligned box.
struct Region {
    enum class Shape { Ball, Box };
    Shape shape = Shape::Ball;
    Point center{0.0, 0.0, 0.0};
    double radius = 1.0;                ///< ball only
    Point half_widths{1.0, 1.0, 1.0};  ///< box only

    bool contains(const Point& x, int dim) const;
    /// Largest |coordinate| reached by the closure along `axis`.
    double reach(int axis) const;
    /// Distance from `x` to the complement; non-positive outside.
    double inner_distance(const Point& x, int dim) const;
};

/// Electric and magnetic potentials in original (unscaled) coordinates.
/// `A` may be empty, meaning A == 0; operators then take the real fast path.
struct PotentialSpec {
    std::function<double(const Point&)> V;
    std::function<Point(const Point&)> A;
    Region lambda;

    bool magnetic_free() const { return !static_cast<bool>(A); }
    Point A0() const { return A ? A(Point{0.0, 0.0, 0.0}) : Point{0.0, 0.0, 0.0}; }
};

struct ProblemConfig {
    int dim = 1;
    double s = 0.5;
    double mu = 0.4;
    double q = 3.0;
    double eps = 1.0;
    double V0 = 1.0;
    std::optional<double> ell0;   ///< penalization divisor; set by calibration when absent
    std::optional<double> kappa;  ///< mountain-pass cap; set from the first ray maximum when absent
};

/// Declarative potential models used by the JSON config and the Python bindings.
struct PotentialModel {
    std::string type = "constant";  ///< "constant" | "quadratic_capped"
    Point center{0.0, 0.0, 0.0};
    double weight = 1.0;
    double cap = std::numeric_limits<double>::infinity();
};

struct MagneticModel {
    std::string type = "zero";  ///< "zero" | "constant" | "linear" | "sine"
    Point vector{0.0, 0.0, 0.0};
    double strength = 0.0;
    double wavenumber = 1.0;
};

PotentialSpec make_potential(int dim, double V0, const PotentialModel& pm, const MagneticModel& mm,
                             const Region& lambda);

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool outside_theory = false;  ///< N < 3 or N <= 2s: run is a desk-scale analog only

    bool ok() const { return violations.empty(); }
};

/// Checks every standing assumption; violations are collected, never thrown.
ValidationReport validate_config(const ProblemConfig& cfg, const PotentialSpec& pot, const GridSpec& grid);

/// Computational grid for the rescaled problem with Lambda_eps = Lambda / eps marked.
struct RescaledGrid {
    GridSpec grid;
    double eps = 1.0;
    std::vector<std::uint8_t> in_lambda;

    /// Original-coordinate position eps * x of grid node `flat`.
    Point original(std::size_t flat) const;
};

/// Throws std::runtime_error("penalization region leaves domain") when Lambda_eps does not fit.
RescaledGrid rescaled_grid(const ProblemConfig& cfg, const PotentialSpec& pot, const GridSpec& grid);

/// Minimum of V over Lambda and over the sampled boundary of Lambda. The boundary is sampled at the
/// midpoints of grid edges whose end nodes fall on different sides of the Lambda predicate.
struct LambdaSamples {
    double min_inside = std::numeric_limits<double>::infinity();
    double min_boundary = std::numeric_limits<double>::infinity();
    std::size_t boundary_nodes = 0;  ///< crossing edges sampled
};
LambdaSamples sample_lambda(const PotentialSpec& pot, const GridSpec& grid, double eps);

/// Same sampling on a dedicated fine grid around Lambda (independent of any solve grid).
LambdaSamples sample_lambda(const PotentialSpec& pot, int dim);

/// HLS exponent t = 2N / (2N - mu).
double hls_exponent(int dim, double mu);
/// Upper growth bound 2(N - mu)/(N - 2s); +inf when N <= 2s.
double growth_upper_bound(int dim, double s, double mu);

}  // namespace choquard
