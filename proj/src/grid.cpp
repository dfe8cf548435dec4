#include "choquard/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace choquard {

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }

std::size_t GridSpec::size() const {
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(M);
    return n;
}

Index GridSpec::unravel(std::size_t flat) const {
    Index idx{0, 0, 0};
    for (int d = dim - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(flat % M);
        flat /= M;
    }
    return idx;
}

std::size_t GridSpec::ravel(const Index& idx) const {
    std::size_t flat = 0;
    for (int d = 0; d < dim; ++d) flat = flat * M + static_cast<std::size_t>(idx[d]);
    return flat;
}

Point GridSpec::point(std::size_t flat) const {
    const Index idx = unravel(flat);
    Point p{0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) p[d] = coord(idx[d]);
    return p;
}

void GridSpec::check() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
    if (M < 8 || M % 2 != 0)
        throw std::invalid_argument("grid points per axis must be even and >= 8 (got " + std::to_string(M) + ")");
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("grid extent L must be positive");
}

Field::Field(const GridSpec& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw std::invalid_argument("field length does not match grid");
}

double norm_sq(const Point& p, int dim) {
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) r2 += p[d] * p[d];
    return r2;
}

double distance(const Point& a, const Point& b, int dim) {
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) r2 += (a[d] - b[d]) * (a[d] - b[d]);
    return std::sqrt(r2);
}

double inner_re(std::span<const cplx> u, std::span<const cplx> v, double cell_volume) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i].real() * v[i].real() + u[i].imag() * v[i].imag();
    return acc * cell_volume;
}

double l2_norm(std::span<const cplx> u, double cell_volume) { return std::sqrt(inner_re(u, u, cell_volume)); }

double sup_abs(std::span<const cplx> u) {
    double m = 0.0;
    for (const auto& z : u) m = std::max(m, std::abs(z));
    return m;
}

void axpy(double alpha, std::span<const cplx> v, std::span<cplx> u) {
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += alpha * v[i];
}

std::size_t argmax_abs(std::span<const cplx> u) {
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = std::norm(u[i]);
        if (a > best_val) {
            best_val = a;
            best = i;
        }
    }
    return best;
}

void align_phase(std::span<cplx> u, std::size_t anchor) {
    const double mag = std::abs(u[anchor]);
    if (mag == 0.0) return;
    const cplx rot = std::conj(u[anchor]) / mag;
    for (auto& z : u) z *= rot;
    u[anchor] = {mag, 0.0};
}

cplx interpolate(const Field& src, const Point& p) {
    const GridSpec& g = src.grid;
    const double h = g.spacing();
    Index base{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    for (int d = 0; d < g.dim; ++d) {
        const double t = (p[d] + g.L) / h;
        const double fl = std::floor(t);
        if (fl < 0.0 || fl > g.M - 1) return {0.0, 0.0};
        base[d] = static_cast<int>(fl);
        frac[d] = t - fl;
    }
    cplx acc{0.0, 0.0};
    const int corners = 1 << g.dim;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        Index idx = base;
        bool inside = true;
        for (int d = 0; d < g.dim; ++d) {
            const int bit = (c >> d) & 1;
            idx[d] += bit;
            w *= bit ? frac[d] : 1.0 - frac[d];
            if (idx[d] >= g.M) inside = false;
        }
        if (inside && w != 0.0) acc += w * src.values[g.ravel(idx)];
    }
    return acc;
}

}  // namespace choquard
