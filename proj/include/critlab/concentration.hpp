#pragma once

#include "critlab/functional.hpp"
#include "critlab/solver.hpp"

#include <vector>

namespace critlab {

/// Concentration diagnostics of a single normalized solution.
struct ConcentrationSample {
    double param = 0.0;     ///< family parameter (q, t, or nominal mu)
    double sup_u = 0.0;
    double mu = 0.0;        ///< (sup u)^{-2/(n-2)}
    Index peak = 0;         ///< argmax of u (smallest radius on plateaus)
    double peak_r = 0.0;
    double mass_in_ball = 0.0;  ///< int_{B(x0, delta)} f |u|^q
    double l2_ratio = 0.0;      ///< int_{B(x0, delta)} u^2 / int_M u^2
    double weak_sup = 0.0;      ///< sup d(x, peak)^{(n-2)/2} u
    double strong_sup = 0.0;    ///< sup d^{n-2-nu} mu^{-(n-2)/2+nu} u
    double bubble_err = 0.0;    ///< sup_{d <= 5 mu} |u - B| / B
    double speed_ratio = 0.0;   ///< d(peak, x0) / mu
};

struct ConcentrationTrace {
    std::vector<ConcentrationSample> samples;
    Index x0 = 0;
    double delta = 0.0;
    double R = 0.0;
};

/// Compute every diagnostic for one solve; x0 is the designated concentration
/// point (argmax of f). delta must exceed the local grid spacing.
ConcentrationSample analyze(const ProblemSpec& spec, const SolveResult& result, Index x0,
                            double delta, double R, double nu);

/// B(x) = mu^{-(n-2)/2} (1 + lambda f0 / (n(n-2)) d(center,x)^2 / mu^2)^{-(n-2)/2}
ScalarField standard_bubble(const ManifoldPtr& m, Index center, double mu, double lambda,
                            double f0);

/// sup over d(center, x) <= window of |u - B| / B.
double bubble_fit_error(const ScalarField& u, const ScalarField& bubble, Index center,
                        double window_radius);

/// 1D rescaled profile u~(x) = mu^{(n-2)/2} u(at distance mu x from peak),
/// cubic interpolation at m samples of x in [0, R].
struct RescaledProfile {
    std::vector<double> x;
    std::vector<double> value;
};
RescaledProfile blow_up_rescale(const ScalarField& u, Index peak, double mu, double R, int m);

/// Exact extremal family on the radial sphere:
///   u = a (b - cos d(x_t, .))^{-(n-2)/2},  b = 1 + mu_f^2,
/// with mu_f chosen so that the measured mu equals the requested one and a
/// normalized on the centred profile (the same a serves every offset, as a
/// rotation would on the round sphere).
struct SyntheticFamily {
    std::vector<ScalarField> fields;
    std::vector<double> a_values;   ///< recorded normalization constants
    std::vector<double> b_values;
    std::vector<Index> peaks;
};
SyntheticFamily synthetic_family(const ManifoldPtr& sphere, const std::vector<double>& mu_list,
                                 const std::vector<double>& offsets);

}  // namespace critlab
