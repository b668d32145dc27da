#pragma once

#include "critlab/manifold.hpp"
#include "critlab/types.hpp"

namespace critlab {

/// One variational problem: minimize I over { u : int f |u|^q = 1 } with
/// I(u) = <Delta u, u> + int h u^2 and exponent q in (2, 2*].
struct ProblemSpec {
    ManifoldPtr manifold;
    ScalarField h;
    ScalarField f;
    double q = 0.0;

    void validate() const;
    double two_star() const;
};

double energy_I(const ProblemSpec& spec, const ScalarField& u);
double energy_I(const ProblemSpec& spec, const Vector& u);

/// int f |u|^q
double constraint_value(const ProblemSpec& spec, const ScalarField& u);
double constraint_value(const ProblemSpec& spec, const Vector& u);

/// I(u) / (int f |u|^q)^{2/q}; throws NotAdmissible when the denominator
/// is not positive.
double quotient_J(const ProblemSpec& spec, const ScalarField& u);
double quotient_J(const ProblemSpec& spec, const Vector& u);

struct CoercivityOptions {
    int max_iterations = 400;
    double tolerance = 1e-11;
    std::uint64_t rng_seed = 12345;
};

/// Smallest eigenvalue of Delta + h in the quadrature inner product, by
/// shifted inverse power iteration. Positive iff the operator is coercive.
double coercivity_margin(const Manifold& m, const Vector& h,
                         const CoercivityOptions& opt = {});
double coercivity_margin(const Manifold& m, const ScalarField& h,
                         const CoercivityOptions& opt = {});

}  // namespace critlab
