#pragma once

// Random fields, the canonical bump, and calibration of the penalization divisor ell0 and the cap kappa.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "choquard/energy.hpp"

namespace choquard {

using Rng = std::mt19937_64;
using FieldSampler = std::function<std::vector<cplx>(Rng&)>;

/// Smooth random complex field: a Gaussian window at a random centre (inside the middle half of the box)
/// times a few random low-frequency plane waves.
std::vector<cplx> random_field(const GridSpec& grid, Rng& rng);
FieldSampler band_limited_sampler(const GridSpec& grid);

/// Random smooth magnetic potential: a few sine modes per component.
MagneticFn random_magnetic(int dim, Rng& rng, double amplitude = 1.0);

/// cos^2 bump centred at p.center, supported inside Lambda_eps, times the plane wave e^{i A(0).x}.
std::vector<cplx> canonical_bump(const Problem& p);

/// kappa = 2 max_t J(t u0) on the canonical bump (independent of ell0: the bump lives in Lambda_eps).
double default_kappa(const Problem& p);

/// Scale u to a given value of ||u||_eps^2 (returns u unchanged if it is zero).
void scale_to_norm(std::vector<cplx>& u, const Problem& p, double target_norm_sq);

struct Calibration {
    PenalizationParams pen;
    double kappa = 0.0;
    double C0 = 0.0;        ///< max sampled sup |x|^-mu * F(|u|^2)
    int samples = 0;        ///< fields inside B that entered the maximum
    std::uint64_t seed = 0;
};

/// Samples >= `count` fields on the shell ||u||_eps^2 = 4(kappa+1) (when `project`), keeps those inside B,
/// C0 = max ||K*F(|u|^2)||_inf, ell0 = 4 C0, a = (V0/ell0)^{2/(q-2)}.
/// Throws std::runtime_error when no sampled field lies inside B.
Calibration calibrate_ell0(const Problem& p, double kappa, const FieldSampler& sampler, int count,
                           std::uint64_t seed, bool project = true);

/// kappa (config value or default_kappa), then calibrate_ell0 with 64 band-limited samples unless the config
/// fixes ell0. Returns the problem carrying the calibrated penalization.
Problem calibrate(const Problem& p, std::uint64_t seed, Calibration* out = nullptr);

}  // namespace choquard
