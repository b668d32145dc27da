#pragma once

#include "critlab/types.hpp"

#include <functional>

namespace critlab {

/// Radial function on [0, pi] given in closed form.
using RadialFunction = std::function<double(double)>;

/// Green function of Delta + h on S^3, radial about the pole, through the
/// substitution w = G sin r. The substitution turns the singular problem
/// into the regular two-point BVP
///     -w'' + (h - 1) w = 0,   w(0) = 1/(4 pi),   w(pi) = 0,
/// the pole normalization G ~ 1/(4 pi r) becoming the Dirichlet datum and
/// the mass (the constant term of G at the pole) becoming w'(0).
struct GreenProfile {
    Vector r;       ///< uniform grid 0..pi, boundaries included
    Vector w;       ///< w = G sin r
    Vector G;       ///< G on interior nodes' positions; endpoints via limits
    double mass;    ///< w'(0), one-sided 3-point stencil
};

/// Solve the BVP on n_nodes+1 grid points. Requires Delta + h coercive on the
/// radial sector, checked through the equivalent 1D Dirichlet form
/// int |w'|^2 + (h-1) w^2.
GreenProfile green_radial(const RadialFunction& h, int n_nodes);

double green_mass(const GreenProfile& profile);

/// Bisection for the constant shift B with mass(h + B) = 0; requires
/// mass(h + b_lo) > 0 > mass(h + b_hi).
double find_mass_zero_offset(const RadialFunction& h, double b_lo, double b_hi,
                             double tol, int n_nodes = 4096);

}  // namespace critlab
