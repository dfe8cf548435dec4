#pragma once

// Uniform truncated grid on [-L, L)^N and the complex field sampled on it.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace choquard {

using cplx = std::complex<double>;

/// Point in up to three space dimensions; unused trailing entries are zero.
using Point = std::array<double, 3>;
using Index = std::array<int, 3>;

struct GridSpec {
    int dim = 1;      ///< space dimension N (1..3)
    double L = 10.0;  ///< half-width of the box [-L, L)^N
    int M = 128;      ///< samples per axis

    double spacing() const { return 2.0 * L / M; }
    double cell_volume() const;
    std::size_t size() const;
    double coord(int i) const { return -L + i * spacing(); }

    Index unravel(std::size_t flat) const;
    std::size_t ravel(const Index& idx) const;
    Point point(std::size_t flat) const;

    /// Throws std::invalid_argument unless M is even and >= 8, L > 0 and 1 <= dim <= 3.
    void check() const;

    bool operator==(const GridSpec&) const = default;
};

/// Discrete element of the energy space: one complex sample per grid node, row-major.
struct Field {
    GridSpec grid;
    std::vector<cplx> values;

    Field() = default;
    explicit Field(const GridSpec& g) : grid(g), values(g.size()) {}
    Field(const GridSpec& g, std::vector<cplx> v);

    std::size_t size() const { return values.size(); }
    std::span<cplx> span() { return values; }
    std::span<const cplx> span() const { return values; }
};

double norm_sq(const Point& p, int dim);
double distance(const Point& a, const Point& b, int dim);

/// Discrete L^2 inner product Re <u, v>_h = h^N * sum Re(conj(u) v).
double inner_re(std::span<const cplx> u, std::span<const cplx> v, double cell_volume);
double l2_norm(std::span<const cplx> u, double cell_volume);
double sup_abs(std::span<const cplx> u);

/// u <- u + alpha * v
void axpy(double alpha, std::span<const cplx> v, std::span<cplx> u);

/// Flat index of max |u|; ties go to the lowest flat index.
std::size_t argmax_abs(std::span<const cplx> u);

/// Multiply by a unit complex so that the sample at `anchor` becomes real and positive.
void align_phase(std::span<cplx> u, std::size_t anchor);

/// Multilinear interpolation of `src` at `p`; zero outside the sampled box.
cplx interpolate(const Field& src, const Point& p);

}  // namespace choquard
