#pragma once

#include "critlab/manifold.hpp"

namespace critlab {

/// Conformal factor u > 0 with its induced integral weights. The conformal
/// metric itself is never materialized; u^{2*} reweights volumes and u^2
/// reweights the Dirichlet term, which is all the covariance identity needs.
struct ConformalFactor {
    ScalarField u;
    Vector volume_weight;  ///< u^{2*}
    Vector energy_weight;  ///< u^2

    static ConformalFactor make(const ScalarField& u);
};

/// h' = (Delta u + h u) / u^{(n+2)/(n-2)}
ScalarField conformal_h(const ManifoldPtr& m, const ScalarField& h, const ConformalFactor& factor);

/// |J'(w) - J(u w)| where J' realizes the transformed quotient through
/// integral weights:
///   Dirichlet'  = <Delta w, u^2 w> - 1/2 <Delta(u^2), w^2>
///   zero-order  = int (Delta u + h u) u w^2
///   denominator = (int f |u w|^{2*})^{(n-2)/n}.
/// The continuum identity is exact; the discrete defect is O(grid^2).
double covariance_residual(const ManifoldPtr& m, const ScalarField& h, const ScalarField& f,
                           const ConformalFactor& factor, const ScalarField& w);

/// Minimum of the transformed quadratic form over a probe set of smooth
/// fields (normalized in the u^{2*}-weighted L^2); positive when coercivity
/// transports.
double transformed_form_min_probe(const ManifoldPtr& m, const ScalarField& h,
                                  const ConformalFactor& factor, int probes = 8,
                                  std::uint64_t seed = 7);

}  // namespace critlab
