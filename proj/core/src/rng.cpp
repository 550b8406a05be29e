#include "cyborg/rng.hpp"

#include <cmath>
#include <numbers>

namespace cyborg {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double Rng::von_mises(double mu, double kappa) {
    constexpr double pi = std::numbers::pi;
    if (!(kappa > 1e-8)) {
        return std::remainder(mu + uniform(-pi, pi), 2.0 * pi);
    }
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    double f;
    for (;;) {
        const double u1 = uniform();
        const double z = std::cos(pi * u1);
        f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        const double u2 = uniform();
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            break;
        }
    }
    const double theta = uniform() < 0.5 ? -std::acos(f) : std::acos(f);
    double out = std::remainder(mu + theta, 2.0 * pi);
    if (out <= -pi) out += 2.0 * pi;
    return out;
}

double Rng::lognormal(double log_mean, double log_sd) {
    return std::exp(normal(log_mean, log_sd));
}

}  // namespace cyborg
