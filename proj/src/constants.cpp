#include "critlab/constants.hpp"

#include "critlab/errors.hpp"

#include <cmath>
#include <string>

namespace critlab {

double sphere_volume(int n) {
    if (n < 0) throw ConfigError("sphere_volume: dimension must be non-negative");
    // omega_0 = 2 (two points), omega_1 = 2 pi, omega_n = 2 pi omega_{n-2} / (n-1).
    const double pi = M_PI;
    if (n == 0) return 2.0;
    if (n == 1) return 2.0 * pi;
    double even = 2.0;       // omega_0
    double odd = 2.0 * pi;   // omega_1
    for (int d = 2; d <= n; ++d) {
        if (d % 2 == 0) {
            even = even * 2.0 * pi / (d - 1);
        } else {
            odd = odd * 2.0 * pi / (d - 1);
        }
    }
    return (n % 2 == 0) ? even : odd;
}

double critical_exponent(int n) {
    if (n < 3) throw ConfigError("critical_exponent: needs dimension >= 3");
    return 2.0 * n / (n - 2.0);
}

double best_sobolev_K2(int n) {
    if (n < 3) throw ConfigError("best_sobolev_K2: needs dimension >= 3");
    const double om = sphere_volume(n);
    return 4.0 / (n * (n - 2.0) * std::pow(om, 2.0 / n));
}

double threshold(int n, double sup_f) {
    if (sup_f <= 0.0)
        throw ConfigError("threshold: sup f must be positive, got " + std::to_string(sup_f));
    return 1.0 / (best_sobolev_K2(n) * std::pow(sup_f, (n - 2.0) / n));
}

SharpConstants SharpConstants::make(int n) {
    return SharpConstants{n, sphere_volume(n), best_sobolev_K2(n), critical_exponent(n)};
}

}  // namespace critlab
