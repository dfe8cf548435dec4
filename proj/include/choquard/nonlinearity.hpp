#pragma once

// Power-law model nonlinearity f(t) = t^{(q-2)/2}, its primitive, and the penalized pair (g, G).
// Arguments t are values of |u|^2.

#include "choquard/grid.hpp"

namespace choquard {

struct Region;

double f_eval(double t, double q);
/// F(t) = int_0^t f = (2/q) t^{q/2}
double F_eval(double t, double q);

/// Threshold data of the penalization: f(a) = V0 / ell0 and f is capped at that value outside Lambda.
struct PenalizationParams {
    double q = 3.0;
    double V0 = 1.0;
    double ell0 = 1.0;
    double a = 1.0;

    double cap() const { return V0 / ell0; }

    /// a = (V0/ell0)^{2/(q-2)}, the unique root of f(a) = V0/ell0.
    static PenalizationParams from_ell0(double q, double V0, double ell0);
};

/// f truncated at level V0/ell0 above t = a.
double f_tilde(double t, const PenalizationParams& p);

double g_eval(bool in_lambda, double t, const PenalizationParams& p);
double G_eval(bool in_lambda, double t, const PenalizationParams& p);

/// Same as above with Lambda membership of the original-coordinate point `x` decided by `lambda`.
double g_eval(const Point& x, int dim, const Region& lambda, double t, const PenalizationParams& p);
double G_eval(const Point& x, int dim, const Region& lambda, double t, const PenalizationParams& p);

}  // namespace choquard
