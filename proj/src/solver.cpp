#include "critlab/solver.hpp"

#include "critlab/constants.hpp"
#include "critlab/errors.hpp"
#include "sparse_util.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace critlab {

namespace {

Vector pow_q(const Vector& u, double e) { return u.array().abs().pow(e).matrix(); }

double rescale_to_constraint(const ProblemSpec& spec, Vector& u) {
    const double c = constraint_value(spec, u);
    if (!(c > 0.0))
        throw PreconditionError("solver: iterate left the admissible cone (int f |u|^q = " +
                                std::to_string(c) + ")");
    u *= std::pow(c, -1.0 / spec.q);
    return c;
}

struct BestIterate {
    Vector u;
    double lambda = 0.0;
    double residual = std::numeric_limits<double>::infinity();

    void offer(const Vector& cand, double lam, double res) {
        if (res < residual) {
            u = cand;
            lambda = lam;
            residual = res;
        }
    }
};

// One semi-implicit flow phase. Returns iterations spent.
int run_flow(const ProblemSpec& spec, const SolverConfig& cfg, Vector& u, double& lambda,
             double stop_rel, int iter_budget, BestIterate& best) {
    const Manifold& m = *spec.manifold;
    const Vector& w = m.weights();
    const Vector hp = spec.h.values.cwiseMax(0.0);
    const Vector hm = (-spec.h.values).cwiseMax(0.0);
    const double q = spec.q;

    double tau = cfg.tau;
    Eigen::SimplicialLDLT<SparseMatrix> solver;
    auto factor = [&](double t) {
        SparseMatrix A = diagonal_sparse(Vector(w.array() * (1.0 + t * hp.array())));
        A += t * m.stiffness();
        solver.compute(A);
        if (solver.info() != Eigen::Success)
            throw NumericError("solver: factorization of the implicit step failed");
    };
    factor(tau);

    double rel = euler_residual_rel(spec, u, lambda);
    best.offer(u, lambda, rel);

    int it = 0;
    const double tau_floor = cfg.tau * 1e-6;
    while (it < iter_budget && rel > stop_rel) {
        Vector rhs =
            w.cwiseProduct(u + tau * (lambda * spec.f.values.cwiseProduct(pow_q(u, q - 1.0)) +
                                      hm.cwiseProduct(u)));
        Vector v = solver.solve(rhs).cwiseAbs();
        rescale_to_constraint(spec, v);
        const double lam_v = energy_I(spec, v);
        ++it;
        if (lam_v > lambda + 1e-12 * std::max(1.0, std::abs(lambda))) {
            // reject ascent; shrink the step
            if (tau <= tau_floor) break;
            tau = 0.5 * tau;
            factor(tau);
            continue;
        }
        u = v;
        lambda = lam_v;
        rel = euler_residual_rel(spec, u, lambda);
        best.offer(u, lambda, rel);
    }
    return it;
}

// Bordered Newton polish on the Euler system, symmetric diagonal scaling,
// step accepted only when the relative residual improves.
void run_newton(const ProblemSpec& spec, const SolverConfig& cfg, Vector& u, double& lambda,
                BestIterate& best) {
    const Manifold& m = *spec.manifold;
    const Vector& w = m.weights();
    const double q = spec.q;
    const Vector d = w.cwiseSqrt();
    const Vector dinv = d.cwiseInverse();

    double rel = euler_residual_rel(spec, u, lambda);
    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        if (rel <= 1e-13) break;
        const Vector g = spec.f.values.cwiseProduct(pow_q(u, q - 1.0));
        const Vector R = m.stiffness() * u + w.cwiseProduct(spec.h.values.cwiseProduct(u) - lambda * g);
        const double c = constraint_value(spec, u) - 1.0;

        Vector jac_diag =
            w.cwiseProduct(spec.h.values - lambda * (q - 1.0) * spec.f.values.cwiseProduct(pow_q(u, q - 2.0)));
        SparseMatrix A = m.stiffness() + diagonal_sparse(jac_diag);
        // scale: Ahat = D^-1 A D^-1
        SparseMatrix Ahat = dinv.asDiagonal() * A * dinv.asDiagonal();
        Eigen::SparseLU<SparseMatrix> lu;
        lu.compute(Ahat);
        if (lu.info() != Eigen::Success) break;

        const Vector b = w.cwiseProduct(g);
        const Vector x1 = dinv.cwiseProduct(lu.solve(Vector(-dinv.cwiseProduct(R))));
        const Vector x2 = dinv.cwiseProduct(lu.solve(Vector(dinv.cwiseProduct(b))));
        const Vector grad = q * b;
        const double denom = grad.dot(x2);
        if (denom == 0.0 || !std::isfinite(denom)) break;
        const double dlam = -(c + grad.dot(x1)) / denom;
        const Vector du = x1 + dlam * x2;

        bool stepped = false;
        for (double s : {1.0, 0.5, 0.25, 0.1}) {
            Vector un = (u + s * du).cwiseAbs();
            const double cv = constraint_value(spec, un);
            if (!(cv > 0.0)) continue;
            un *= std::pow(cv, -1.0 / q);
            const double lam_n = energy_I(spec, un);
            const double rel_n = euler_residual_rel(spec, un, lam_n);
            if (rel_n < rel) {
                u = un;
                lambda = lam_n;
                rel = rel_n;
                best.offer(u, lambda, rel);
                stepped = true;
                break;
            }
        }
        if (!stepped) break;
    }
}

SolveResult run_single(const ProblemSpec& spec, const SolverConfig& cfg, Vector u0) {
    const double q = spec.q;
    rescale_to_constraint(spec, u0);
    double lambda = energy_I(spec, u0);

    BestIterate best;
    Vector u = u0;
    int spent = 0;
    const double switch_rel = std::max(cfg.tol_residual, cfg.newton_threshold);
    for (int round = 0; round < 2 && spent < cfg.max_iter; ++round) {
        const double stop = (round == 0) ? switch_rel : cfg.tol_residual;
        spent += run_flow(spec, cfg, u, lambda, stop, cfg.max_iter - spent, best);
        run_newton(spec, cfg, u, lambda, best);
        if (best.residual <= cfg.tol_residual) break;
    }

    Vector uf = best.u;
    rescale_to_constraint(spec, uf);
    SolveResult res;
    res.lambda = energy_I(spec, uf);
    res.residual = euler_residual_rel(spec, uf, res.lambda);
    res.u = make_field(spec.manifold, std::move(uf));
    res.iters = spent;
    res.q = q;
    res.converged = res.residual <= cfg.tol_residual;
    return res;
}

double peak_radius(const SolveResult& r) {
    Index ipk = 0;
    r.u.values.maxCoeff(&ipk);
    return r.u.manifold->node_radius()[ipk];
}

// Grid-trust check: a minimizer whose constraint mass piles onto a single
// node is a sub-resolution artifact of the quadrature (the discrete energy
// underprices it), not an approximation of a continuum state.
bool grid_resolved(const ProblemSpec& spec, const SolveResult& r) {
    const Vector& w = spec.manifold->weights();
    double top = 0.0, total = 0.0;
    for (Index i = 0; i < w.size(); ++i) {
        const double mi = w[i] * std::abs(spec.f.values[i]) *
                          std::pow(std::abs(r.u.values[i]), spec.q);
        top = std::max(top, mi);
        total += mi;
    }
    return total <= 0.0 || top <= 0.2 * total;
}

}  // namespace

double euler_residual_rel(const ProblemSpec& spec, const Vector& u, double lambda) {
    const Manifold& m = *spec.manifold;
    const Vector g = lambda * spec.f.values.cwiseProduct(pow_q(u, spec.q - 1.0));
    const Vector res = m.laplacian_apply(u) + spec.h.values.cwiseProduct(u) - g;
    const double denom = g.cwiseAbs().maxCoeff();
    if (denom <= 0.0) return res.cwiseAbs().maxCoeff();
    return res.cwiseAbs().maxCoeff() / denom;
}

ScalarField euler_residual(const ProblemSpec& spec, const ScalarField& u, double lambda) {
    spec.validate();
    require_same_manifold(*spec.manifold, u, "euler_residual");
    const Manifold& m = *spec.manifold;
    Vector res = m.laplacian_apply(u.values) +
                 spec.h.values.cwiseProduct(u.values) -
                 lambda * spec.f.values.cwiseProduct(pow_q(u.values, spec.q - 1.0));
    return make_field(spec.manifold, std::move(res));
}

ScalarField bubble_seed(const ManifoldPtr& m, Index center, double mu) {
    if (!m) throw ConfigError("bubble_seed: null manifold");
    if (!(mu > 0.0)) throw ConfigError("bubble_seed: mu must be positive");
    const Index N = m->node_count();
    const double e = (m->dim() - 2.0) / 2.0;
    Vector v(N);
    if (m->kind() == ManifoldKind::RadialSphere) {
        const double b = 1.0 + mu * mu;
        const double rc = m->node_radius()[center];
        for (Index i = 0; i < N; ++i)
            v[i] = std::pow(b - std::cos(m->node_radius()[i] - rc), -e);
    } else {
        for (Index i = 0; i < N; ++i) {
            const double dist = m->distance(center, i);
            v[i] = std::pow(mu * mu + dist * dist, -e);
        }
    }
    return make_field(m, std::move(v));
}

std::vector<Index> local_maxima(const Manifold& m, const Vector& f) {
    const Index N = m.node_count();
    if (f.maxCoeff() == f.minCoeff()) return {0};  // global plateau
    std::vector<Index> out;
    if (m.kind() == ManifoldKind::RadialSphere) {
        // Plateau runs of equal value; a run is a maximum when no existing
        // neighbour value exceeds it. Represent each run by its first node.
        Index i = 0;
        while (i < N) {
            Index j = i;
            while (j + 1 < N && f[j + 1] == f[i]) ++j;
            const bool left_ok = (i == 0) || f[i - 1] < f[i];
            const bool right_ok = (j == N - 1) || f[j + 1] < f[i];
            if (left_ok && right_ok) out.push_back(i);
            i = j + 1;
        }
        if (out.empty()) out.push_back(0);
    } else {
        // torus: compare against the 2n stencil neighbours through the stiffness pattern
        const SparseMatrix& K = m.stiffness();
        for (Index i = 0; i < N; ++i) {
            bool is_max = true;
            for (SparseMatrix::InnerIterator it(K, i); it; ++it) {
                if (it.row() != i && f[it.row()] > f[i]) {
                    is_max = false;
                    break;
                }
            }
            if (is_max) out.push_back(i);
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [&](Index a, Index b) { return f[a] > f[b]; });
    if (out.size() > 8) out.resize(8);
    return out;
}

SolveResult minimize(const ProblemSpec& spec, const SolverConfig& cfg) {
    spec.validate();
    if (!(cfg.tau > 0.0)) throw ConfigError("minimize: tau must be positive");
    if (!(cfg.tol_residual > 0.0)) throw ConfigError("minimize: tol_residual must be positive");

    CoercivityOptions copt;
    copt.rng_seed = cfg.rng_seed + 12345;
    const double margin = coercivity_margin(*spec.manifold, spec.h.values, copt);
    if (margin <= 0.0)
        throw PreconditionError("minimize: Delta + h is not coercive (margin " +
                                std::to_string(margin) + ")");

    const Index N = spec.manifold->node_count();
    std::vector<Vector> seeds;
    switch (cfg.init.kind) {
        case SolverInit::Kind::Constant:
            seeds.push_back(Vector::Ones(N));
            break;
        case SolverInit::Kind::Bubble:
            seeds.push_back(bubble_seed(spec.manifold, cfg.init.center, cfg.init.mu).values);
            break;
        case SolverInit::Kind::Field: {
            if (!cfg.init.field) throw ConfigError("minimize: init field missing");
            require_same_manifold(*spec.manifold, *cfg.init.field, "minimize init");
            seeds.push_back(cfg.init.field->values);
            break;
        }
        case SolverInit::Kind::Multistart: {
            seeds.push_back(Vector::Ones(N));
            for (Index c : local_maxima(*spec.manifold, spec.f.values))
                for (double mu : cfg.init.multistart_mus)
                    seeds.push_back(bubble_seed(spec.manifold, c, mu).values);
            break;
        }
    }

    std::optional<SolveResult> best;
    bool best_trusted = false;
    std::string first_error;
    for (const Vector& s : seeds) {
        try {
            SolveResult r = run_single(spec, cfg, s);
            const bool trusted = grid_resolved(spec, r);
            if (!trusted) r.converged = false;
            if (!best) {
                best = std::move(r);
                best_trusted = trusted;
                continue;
            }
            if (best_trusted && !trusted) continue;
            const double tol = 1e-9 * (1.0 + std::abs(best->lambda));
            const bool better = r.lambda < best->lambda - tol ||
                                (std::abs(r.lambda - best->lambda) <= tol &&
                                 peak_radius(r) < peak_radius(*best));
            if ((trusted && !best_trusted) || better) {
                best = std::move(r);
                best_trusted = trusted;
            }
        } catch (const PreconditionError& e) {
            if (first_error.empty()) first_error = e.what();
        }
    }
    if (!best)
        throw PreconditionError(first_error.empty() ? "minimize: no admissible start" : first_error);
    return *best;
}

namespace {

// Cubic Hermite resample of radial nodal data onto new radii.
Vector resample_radial(const Vector& r_old, const Vector& v_old, const Vector& r_new) {
    const Index n = r_old.size();
    Vector slope(n);
    for (Index i = 0; i < n; ++i) {
        if (i == 0)
            slope[i] = (v_old[1] - v_old[0]) / (r_old[1] - r_old[0]);
        else if (i == n - 1)
            slope[i] = (v_old[n - 1] - v_old[n - 2]) / (r_old[n - 1] - r_old[n - 2]);
        else
            slope[i] = (v_old[i + 1] - v_old[i - 1]) / (r_old[i + 1] - r_old[i - 1]);
    }
    Vector out(r_new.size());
    Index j = 0;
    for (Index i = 0; i < r_new.size(); ++i) {
        const double r = std::clamp(r_new[i], r_old[0], r_old[n - 1]);
        while (j + 2 < n && r_old[j + 1] < r) ++j;
        const double hseg = r_old[j + 1] - r_old[j];
        const double t = (r - r_old[j]) / hseg;
        const double t2 = t * t, t3 = t2 * t;
        out[i] = (2 * t3 - 3 * t2 + 1) * v_old[j] + (t3 - 2 * t2 + t) * hseg * slope[j] +
                 (-2 * t3 + 3 * t2) * v_old[j + 1] + (t3 - t2) * hseg * slope[j + 1];
    }
    return out;
}

Index nodes_within_radius(const Manifold& m, double radius) {
    Index count = 0;
    for (Index i = 0; i < m.node_count(); ++i)
        if (m.node_radius()[i] <= radius) ++count;
    return count;
}

}  // namespace

std::vector<SolveResult> continuation_in_q(const ProblemSpec& spec,
                                           const std::vector<double>& q_list,
                                           const SolverConfig& cfg) {
    if (q_list.empty()) throw ConfigError("continuation_in_q: empty exponent list");
    for (std::size_t i = 1; i < q_list.size(); ++i)
        if (!(q_list[i] > q_list[i - 1]))
            throw PreconditionError("continuation_in_q: exponent list must be ascending");

    ProblemSpec cur = spec;
    cur.q = q_list.front();
    cur.validate();
    if (q_list.back() > cur.two_star() * (1.0 + 1e-12))
        throw PreconditionError("continuation_in_q: exponents exceed 2*");

    std::vector<SolveResult> out;
    SolverConfig c = cfg;
    for (std::size_t step = 0; step < q_list.size(); ++step) {
        cur.q = q_list[step];
        SolveResult r = minimize(cur, c);

        if (cfg.adapt_grid && cur.manifold->kind() == ManifoldKind::RadialSphere) {
            const double mu = std::pow(r.u.values.maxCoeff(), -2.0 / (cur.manifold->dim() - 2.0));
            if (nodes_within_radius(*cur.manifold, mu) < cfg.min_nodes_per_mu) {
                // Rebuild with a clustering exponent strong enough to put
                // min_nodes_per_mu nodes inside radius mu/2, then re-solve.
                const Manifold& old = *cur.manifold;
                const Index N = old.node_count();
                const double xi = double(cfg.min_nodes_per_mu + 1) / double(N);
                double p_needed = std::log(0.5 * mu / M_PI) / std::log(xi);
                const double p_new =
                    std::clamp(std::max(p_needed, old.clustering() + 0.5), 1.0, cfg.max_clustering);
                double alpha_new = std::min(
                    old.pole_uniform_fraction(),
                    0.5 * mu * double(N) / (double(cfg.min_nodes_per_mu + 1) * M_PI));
                ManifoldPtr fine = build_radial_sphere(old.dim(), N, p_new, alpha_new);

                ScalarField h2 = cfg.h_profile
                                     ? make_profile(fine, *cfg.h_profile)
                                     : make_field(fine, resample_radial(old.node_radius(),
                                                                        cur.h.values,
                                                                        fine->node_radius()));
                ScalarField f2 = cfg.f_profile
                                     ? make_profile(fine, *cfg.f_profile)
                                     : make_field(fine, resample_radial(old.node_radius(),
                                                                        cur.f.values,
                                                                        fine->node_radius()));
                Vector u2 = resample_radial(old.node_radius(), r.u.values, fine->node_radius());
                u2 = u2.cwiseMax(0.0);
                cur = ProblemSpec{fine, h2, f2, cur.q};
                SolverConfig c2 = c;
                c2.init = SolverInit::from_field(make_field(fine, u2));
                r = minimize(cur, c2);
            }
        }

        out.push_back(r);
        c.init = SolverInit::from_field(r.u);
    }
    return out;
}

}  // namespace critlab
