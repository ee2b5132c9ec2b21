#include "censreg/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace censreg {

double calibrate_b(const LossFunction& loss, double target_bdp) {
    if (!(target_bdp >= 0.0 && target_bdp < 1.0))
        throw std::invalid_argument("breakdown target must lie in [0, 1)");
    if (!loss.bounded())
        throw std::invalid_argument("breakdown calibration requires a bounded loss");
    return target_bdp * loss.sup();
}

namespace {

// Simpson's rule on [0, hi]; the integrand rho(u/s)*phi(u) is smooth except
// at the bisquare clamp, so a fine fixed grid is plenty for 1e-12 accuracy.
double half_normal_integral(const LossFunction& loss, double scale, double hi, int steps) {
    const double h = hi / steps;
    auto f = [&](double u) {
        const double phi = std::exp(-0.5 * u * u) / 2.5066282746310005024;
        return loss.rho(u / scale) * phi;
    };
    double acc = f(0.0) + f(hi);
    for (int k = 1; k < steps; ++k) acc += f(k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

double normal_expected_rho(const LossFunction& loss, double scale) {
    if (!(scale > 0)) throw std::invalid_argument("scale must be positive");
    // Split at the saturation point so the kink sits on a panel boundary.
    double hi = 10.0;
    if (loss.kind() == LossKind::bisquare) hi = std::max(10.0, loss.tuning() * scale);
    double total = 2.0 * half_normal_integral(loss, scale, hi, 4096);
    if (loss.bounded()) {
        // Saturated tail beyond the integration window.
        const double tail = std::erfc(hi / std::sqrt(2.0));
        total += loss.rho(hi / scale) * tail;
    }
    return total;
}

double normal_expected_rho(const LossFunction& loss) {
    return normal_expected_rho(loss, 1.0);
}

double bisquare_tuning_for_bdp(double target) {
    if (!(target > 0.0 && target < 1.0))
        throw std::invalid_argument("target ratio must lie in (0, 1)");
    // E_Phi[rho_c]/sup is decreasing in c: larger c saturates less mass.
    double lo = 1e-3, hi = 1e3;
    auto ratio = [](double c) {
        const LossFunction f = LossFunction::bisquare(c);
        return normal_expected_rho(f) / f.sup();
    };
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (ratio(mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace censreg
