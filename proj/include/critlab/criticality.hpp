#pragma once

#include "critlab/solver.hpp"

#include <utility>
#include <vector>

namespace critlab {

enum class Criticality { Subcritical, WeaklyCritical, Indeterminate };

const char* to_string(Criticality c);

struct CriticalityReport {
    double lambda = 0.0;
    double threshold = 0.0;
    double margin = 0.0;  ///< threshold - lambda
    Criticality classification = Criticality::Indeterminate;
    std::vector<std::pair<Index, double>> prop1_gaps;  ///< (max point of f, gap)
    bool coercive = false;
    SolveResult best;
};

/// Solve at q = 2* (multistart unless the config says otherwise) and compare
/// the Rayleigh value against the sharp threshold:
///   margin >  tol_class  -> subcritical
///   |margin| <= max(tol_class, rel slack) -> weakly critical
/// Solver failure or a margin below the Aubin bound leaves Indeterminate.
CriticalityReport classify(const ProblemSpec& spec, const SolverConfig& cfg, double tol_class);

/// At each discrete maximum point P of f (dim >= 4):
///   gap = 4(n-1)/(n-2) h(P) - S(P) + (n-4)/2 * (Delta f)(P)/f(P),
/// the Delta f term dropped in dimension 4. Nonnegative gaps are necessary
/// at weakly critical data.
std::vector<std::pair<Index, double>> prop1_gap(const Manifold& m, const ScalarField& h,
                                                const ScalarField& f);

/// Nodes within 1e-9 of max f (the discrete Max f set, plateau aware).
std::vector<Index> max_points(const Manifold& m, const Vector& f);

/// Bisection on t for the transition of classify(h - t) from weakly critical
/// (t small) to subcritical (t large). Requires a bracket:
/// classify(h) weakly critical, classify(h - t_max) subcritical.
double find_critical_offset(const ProblemSpec& spec, double t_max, double tol_t,
                            double tol_class, const SolverConfig& cfg);

/// psi_k(Q) = (1/k + r^2)^{-(n-2)/2} - (1/k + delta^2)^{-(n-2)/2} for
/// r = d(P, Q) < delta, zero outside.
ScalarField aubin_test_function(const ManifoldPtr& m, Index P, int k, double delta);

struct AubinSeries {
    std::vector<int> k_list;
    std::vector<double> J_values;
    std::vector<double> y_values;  ///< J * K^2 (sup f)^{(n-2)/n} - 1
    double fitted_slope = 0.0;     ///< c1 in y ~ c1/k
    double fit_residual = 0.0;     ///< weighted RMS misfit of k*y against c1 + c2/k
    double delta = 0.0;
};

/// Evaluate J(psi_k) over k_list (needs dim >= 5) and extract the 1/k
/// coefficient. The scaled series z_k = k y_k is fit affinely against 1/k
/// with weights k, which removes the leading o(1/k) bias that a raw one-term
/// fit picks up at moderate k.
AubinSeries aubin_slope(const ManifoldPtr& m, const ScalarField& h, const ScalarField& f,
                        Index P, const std::vector<int>& k_list, double delta);

struct B0Options {
    double start_factor = 1.2;   ///< start from h = start_factor * n(n-2)/4
    double tol_class = 0.02;
    double tol_t = 0.005;
};

/// Sphere estimate of the second sharp constant: K^2 * c0 where c0 is the
/// critical constant located by bisection from a weakly critical start
/// (f == 1).
double estimate_B0_sphere(const ManifoldPtr& sphere, const SolverConfig& cfg,
                          const B0Options& opt = {});

}  // namespace critlab
