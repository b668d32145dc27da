#pragma once

#include "critlab/functional.hpp"
#include "critlab/manifold.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace critlab {

/// Initial iterate for the constrained minimization.
struct SolverInit {
    enum class Kind { Constant, Bubble, Field, Multistart };
    Kind kind = Kind::Multistart;

    // Bubble
    Index center = 0;
    double mu = 0.1;

    // Field
    std::optional<ScalarField> field;

    // Multistart: constant + one bubble per local maximum of f, at each of
    // these concentration scales.
    std::vector<double> multistart_mus = {0.1, 0.05, 0.02};

    static SolverInit constant() {
        SolverInit s;
        s.kind = Kind::Constant;
        return s;
    }
    static SolverInit bubble(Index center, double mu) {
        SolverInit s;
        s.kind = Kind::Bubble;
        s.center = center;
        s.mu = mu;
        return s;
    }
    static SolverInit from_field(ScalarField f) {
        SolverInit s;
        s.kind = Kind::Field;
        s.field = std::move(f);
        return s;
    }
    static SolverInit multistart() { return {}; }
};

struct SolverConfig {
    double tau = 0.5;              ///< semi-implicit step
    int max_iter = 20000;          ///< flow iteration budget
    double tol_residual = 1e-8;    ///< relative sup-norm Euler residual
    SolverInit init;
    std::uint64_t rng_seed = 0;

    int newton_max_iter = 30;      ///< polish steps per round
    double newton_threshold = 1e-4;///< flow residual at which polish starts

    // Continuation: re-cluster grid when concentration outruns it.
    bool adapt_grid = true;
    int min_nodes_per_mu = 30;
    double max_clustering = 6.0;
    std::optional<ProfileSpec> h_profile;  ///< exact resampling on regrid
    std::optional<ProfileSpec> f_profile;
};

struct SolveResult {
    ScalarField u;      ///< nonnegative minimizer, int f u^q = 1
    double lambda = 0;  ///< energy I(u) = Rayleigh value
    double residual = 0;///< sup |Delta u + h u - lambda f u^{q-1}| / sup |lambda f u^{q-1}|
    int iters = 0;
    double q = 0;
    bool converged = false;
};

/// Minimize J over the admissible cone by normalized semi-implicit gradient
/// flow with a bordered-Newton polish; returns the best iterate found.
///
/// Flow step: solve (W + tau (K + W h_+)) v = W (u + tau (lambda f u^{q-1} + h_- u)),
/// then v <- |v| rescaled onto the constraint; lambda is frozen at I(u)
/// within the step. Steps that raise the Rayleigh value are rejected with the
/// step halved, so accepted energies are non-increasing.
SolveResult minimize(const ProblemSpec& spec, const SolverConfig& cfg);

/// Warm-started continuation along an ascending exponent list q -> 2*.
/// When the solution concentrates below grid resolution (fewer than
/// cfg.min_nodes_per_mu nodes inside radius mu) the sphere grid is rebuilt
/// with a stronger clustering exponent and the state is transplanted.
/// Results may therefore live on different manifolds; each carries its own.
std::vector<SolveResult> continuation_in_q(const ProblemSpec& spec,
                                           const std::vector<double>& q_list,
                                           const SolverConfig& cfg);

/// Nodewise Delta u + h u - lambda f u^{q-1}.
ScalarField euler_residual(const ProblemSpec& spec, const ScalarField& u, double lambda);

/// Relative sup-norm of the Euler residual as used by the stopping test.
double euler_residual_rel(const ProblemSpec& spec, const Vector& u, double lambda);

/// Bubble-shaped seed field centred at a node: the exact extremal shape
/// (1 + mu^2 - cos d)^{-(n-2)/2} on the sphere, (mu^2 + d^2)^{-(n-2)/2} on
/// the torus.
ScalarField bubble_seed(const ManifoldPtr& m, Index center, double mu);

/// Discrete local maxima of f (plateau-deduplicated, strongest first).
std::vector<Index> local_maxima(const Manifold& m, const Vector& f);

}  // namespace critlab
