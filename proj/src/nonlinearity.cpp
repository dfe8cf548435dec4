#include "choquard/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

#include "choquard/config.hpp"

namespace choquard {

double f_eval(double t, double q) {
    if (t <= 0.0) return 0.0;
    return std::pow(t, 0.5 * (q - 2.0));
}

double F_eval(double t, double q) {
    if (t <= 0.0) return 0.0;
    return (2.0 / q) * std::pow(t, 0.5 * q);
}

PenalizationParams PenalizationParams::from_ell0(double q, double V0, double ell0) {
    if (!(q > 2.0)) throw std::invalid_argument("q must exceed 2");
    if (!(V0 > 0.0) || !(ell0 > 0.0)) throw std::invalid_argument("V0 and ell0 must be positive");
    PenalizationParams p;
    p.q = q;
    p.V0 = V0;
    p.ell0 = ell0;
    p.a = std::pow(V0 / ell0, 2.0 / (q - 2.0));
    return p;
}

double f_tilde(double t, const PenalizationParams& p) { return t <= p.a ? f_eval(t, p.q) : p.cap(); }

double g_eval(bool in_lambda, double t, const PenalizationParams& p) {
    return in_lambda ? f_eval(t, p.q) : f_tilde(t, p);
}

double G_eval(bool in_lambda, double t, const PenalizationParams& p) {
    if (in_lambda || t <= p.a) return F_eval(t, p.q);
    return F_eval(p.a, p.q) + p.cap() * (t - p.a);
}

double g_eval(const Point& x, int dim, const Region& lambda, double t, const PenalizationParams& p) {
    return g_eval(lambda.contains(x, dim), t, p);
}

double G_eval(const Point& x, int dim, const Region& lambda, double t, const PenalizationParams& p) {
    return G_eval(lambda.contains(x, dim), t, p);
}

}  // namespace choquard
