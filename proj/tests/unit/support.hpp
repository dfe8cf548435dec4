#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "choquard/grid.hpp"

namespace testing {

using choquard::cplx;

inline std::vector<cplx> random_smooth(const choquard::GridSpec& g, std::mt19937_64& rng, double width = 2.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    choquard::Point c{0.0, 0.0, 0.0};
    for (int d = 0; d < g.dim; ++d) c[d] = 0.3 * g.L * u(rng);
    const cplx a(n(rng), n(rng)), b(n(rng), n(rng));
    choquard::Point k{0.0, 0.0, 0.0};
    for (int d = 0; d < g.dim; ++d) k[d] = 1.5 * u(rng);
    std::vector<cplx> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const choquard::Point x = g.point(i);
        double r2 = 0.0, ph = 0.0;
        for (int d = 0; d < g.dim; ++d) {
            r2 += (x[d] - c[d]) * (x[d] - c[d]);
            ph += k[d] * x[d];
        }
        out[i] = std::exp(-0.5 * r2 / (width * width)) * (a + b * std::polar(1.0, ph));
    }
    return out;
}

inline double rel_linf(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / den;
}

inline cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

}  // namespace testing
