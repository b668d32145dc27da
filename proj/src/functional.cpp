#include "critlab/functional.hpp"

#include "critlab/constants.hpp"
#include "critlab/errors.hpp"
#include "sparse_util.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>

namespace critlab {

void ProblemSpec::validate() const {
    if (!manifold) throw ConfigError("ProblemSpec: null manifold");
    require_same_manifold(*manifold, h, "ProblemSpec.h");
    require_same_manifold(*manifold, f, "ProblemSpec.f");
    if (f.max() <= 0.0) throw ConfigError("ProblemSpec: sup f must be positive");
    if (!(q > 2.0))
        throw PreconditionError("ProblemSpec: exponent must exceed 2, got " + std::to_string(q));
    const double ts = two_star();
    if (q > ts * (1.0 + 1e-12))
        throw PreconditionError("ProblemSpec: exponent " + std::to_string(q) +
                                " exceeds 2* = " + std::to_string(ts));
}

double ProblemSpec::two_star() const {
    return critical_exponent(manifold->dim());
}

double energy_I(const ProblemSpec& spec, const Vector& u) {
    const Manifold& m = *spec.manifold;
    if (u.size() != m.node_count()) throw ConfigError("energy_I: length mismatch");
    return m.dirichlet_energy(u) + m.weights().dot(spec.h.values.cwiseProduct(u.cwiseAbs2()));
}

double energy_I(const ProblemSpec& spec, const ScalarField& u) {
    require_same_manifold(*spec.manifold, u, "energy_I");
    return energy_I(spec, u.values);
}

double constraint_value(const ProblemSpec& spec, const Vector& u) {
    const Manifold& m = *spec.manifold;
    if (u.size() != m.node_count()) throw ConfigError("constraint_value: length mismatch");
    const Vector uq = u.array().abs().pow(spec.q).matrix();
    return m.weights().dot(spec.f.values.cwiseProduct(uq));
}

double constraint_value(const ProblemSpec& spec, const ScalarField& u) {
    require_same_manifold(*spec.manifold, u, "constraint_value");
    return constraint_value(spec, u.values);
}

double quotient_J(const ProblemSpec& spec, const Vector& u) {
    const double c = constraint_value(spec, u);
    if (c <= 0.0)
        throw PreconditionError("quotient_J: not admissible, int f |u|^q = " + std::to_string(c));
    return energy_I(spec, u) / std::pow(c, 2.0 / spec.q);
}

double quotient_J(const ProblemSpec& spec, const ScalarField& u) {
    require_same_manifold(*spec.manifold, u, "quotient_J");
    return quotient_J(spec, u.values);
}

double coercivity_margin(const Manifold& m, const Vector& h, const CoercivityOptions& opt) {
    if (h.size() != m.node_count()) throw ConfigError("coercivity_margin: length mismatch");
    const Index N = m.node_count();
    const Vector& w = m.weights();

    // Generalized symmetric problem (K + W H) x = lambda W x. All eigenvalues
    // lie above sigma = min h - 1 because K is PSD, so inverse iteration with
    // that shift converges to the smallest one.
    const double sigma = h.minCoeff() - 1.0;
    SparseMatrix A = m.stiffness() + diagonal_sparse(Vector((h.array() - sigma) * w.array()));

    Eigen::SimplicialLDLT<SparseMatrix> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
        throw NumericError("coercivity_margin: factorization failed");

    std::mt19937_64 rng(opt.rng_seed);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    Vector x(N);
    for (Index i = 0; i < N; ++i) x[i] = unif(rng);
    x /= std::sqrt(inner(m, x, x));

    double lambda_prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_iterations; ++it) {
        Vector y = solver.solve(w.cwiseProduct(x));
        if (solver.info() != Eigen::Success)
            throw NumericError("coercivity_margin: solve failed");
        y /= std::sqrt(inner(m, y, y));
        const double rayleigh =
            (m.dirichlet_energy(y) + inner(m, Vector(h.cwiseProduct(y)), y)) / inner(m, y, y);
        x = y;
        if (std::abs(rayleigh - lambda_prev) <= opt.tolerance * (1.0 + std::abs(rayleigh)))
            return rayleigh;
        lambda_prev = rayleigh;
    }
    throw NumericError("coercivity_margin: inverse iteration did not converge");
}

double coercivity_margin(const Manifold& m, const ScalarField& h, const CoercivityOptions& opt) {
    require_same_manifold(m, h, "coercivity_margin");
    return coercivity_margin(m, h.values, opt);
}

}  // namespace critlab
