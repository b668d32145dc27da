#include "critlab/criticality.hpp"

#include "critlab/constants.hpp"
#include "critlab/errors.hpp"

#include <cmath>

namespace critlab {

const char* to_string(Criticality c) {
    switch (c) {
        case Criticality::Subcritical: return "subcritical";
        case Criticality::WeaklyCritical: return "weakly_critical";
        case Criticality::Indeterminate: return "indeterminate";
    }
    return "?";
}

std::vector<Index> max_points(const Manifold&, const Vector& f) {
    const double fmax = f.maxCoeff();
    std::vector<Index> out;
    for (Index i = 0; i < f.size(); ++i)
        if (f[i] >= fmax - 1e-9) out.push_back(i);
    return out;
}

namespace {

// Delta f at a node of the radial sphere by a local quadratic fit
// f ~ f0 + b (r - r_P) + c (r - r_P)^2, giving -2c - (n-1) cot(r_P) b.
// The graded pole cells make the discrete stencil only first-order accurate
// exactly where the maxima of radial profiles sit, while smooth radial data
// is quadratic there to fourth order.
double radial_laplacian_at(const Manifold& m, const Vector& f, Index p) {
    const auto& r = m.node_radius();
    const Index N = m.node_count();
    const Index lo = std::max<Index>(0, std::min(p - 6, N - 13));
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    for (Index i = lo; i < lo + 13 && i < N; ++i) {
        const double x = r[i] - r[p];
        const double y = f[i];
        s0 += 1;
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
        t0 += y;
        t1 += y * x;
        t2 += y * x * x;
    }
    // solve the 3x3 normal equations for (f0, b, c)
    Eigen::Matrix3d A;
    A << s0, s1, s2, s1, s2, s3, s2, s3, s4;
    Eigen::Vector3d rhs(t0, t1, t2);
    const Eigen::Vector3d coef = A.fullPivLu().solve(rhs);
    const double cot = std::cos(r[p]) / std::sin(r[p]);
    return -2.0 * coef[2] - (m.dim() - 1.0) * cot * coef[1];
}

}  // namespace

std::vector<std::pair<Index, double>> prop1_gap(const Manifold& m, const ScalarField& h,
                                                const ScalarField& f) {
    require_same_manifold(m, h, "prop1_gap.h");
    require_same_manifold(m, f, "prop1_gap.f");
    const int n = m.dim();
    if (n < 4)
        throw PreconditionError("prop1_gap: needs dimension >= 4, got " + std::to_string(n));

    const Vector lap_f = m.laplacian_apply(f.values);
    std::vector<std::pair<Index, double>> out;
    for (Index p : max_points(m, f.values)) {
        if (f.values[p] <= 0.0)
            throw ConfigError("prop1_gap: f is not positive at its maximum");
        double gap = (4.0 * (n - 1) / (n - 2.0)) * h.values[p] - m.scalar_curvature()[p];
        if (n > 4) {
            const double lap = (m.kind() == ManifoldKind::RadialSphere)
                                   ? radial_laplacian_at(m, f.values, p)
                                   : lap_f[p];
            gap += ((n - 4.0) / 2.0) * lap / f.values[p];
        }
        out.emplace_back(p, gap);
    }
    return out;
}

CriticalityReport classify(const ProblemSpec& spec, const SolverConfig& cfg, double tol_class) {
    spec.validate();
    if (std::abs(spec.q - spec.two_star()) > 1e-12)
        throw ConfigError("classify: exponent must be the critical one");
    if (!(tol_class > 0.0)) throw ConfigError("classify: tol_class must be positive");

    CriticalityReport rep;
    rep.threshold = threshold(spec.manifold->dim(), spec.f.max());

    const double margin_h = coercivity_margin(*spec.manifold, spec.h.values);
    rep.coercive = margin_h > 0.0;
    if (!rep.coercive) {
        rep.classification = Criticality::Indeterminate;
        return rep;
    }

    if (spec.manifold->dim() >= 4) rep.prop1_gaps = prop1_gap(*spec.manifold, spec.h, spec.f);

    try {
        rep.best = minimize(spec, cfg);
    } catch (const Error&) {
        rep.classification = Criticality::Indeterminate;
        return rep;
    }
    rep.lambda = rep.best.lambda;
    rep.margin = rep.threshold - rep.lambda;

    // lambda can only sit above the threshold by solver slack, never in exact
    // arithmetic; anything beyond the slack is a failed minimization.
    const double over_slack = std::max(tol_class, 1e-3 * rep.threshold);
    if (rep.margin > tol_class)
        rep.classification = Criticality::Subcritical;
    else if (rep.margin >= -over_slack)
        rep.classification = Criticality::WeaklyCritical;
    else
        rep.classification = Criticality::Indeterminate;
    return rep;
}

double find_critical_offset(const ProblemSpec& spec, double t_max, double tol_t,
                            double tol_class, const SolverConfig& cfg) {
    spec.validate();
    if (!(t_max > 0.0)) throw ConfigError("find_critical_offset: t_max must be positive");
    if (!(tol_t > 0.0)) throw ConfigError("find_critical_offset: tol_t must be positive");

    auto classify_at = [&](double t) {
        ProblemSpec s = spec;
        s.h = make_field(spec.manifold, Vector(spec.h.values.array() - t));
        return classify(s, cfg, tol_class).classification;
    };

    const Criticality at0 = classify_at(0.0);
    if (at0 == Criticality::Subcritical)
        throw PreconditionError("find_critical_offset: h is already subcritical, no crossing");
    if (at0 == Criticality::Indeterminate)
        throw NumericError("find_critical_offset: classification at t = 0 failed");
    if (classify_at(t_max) != Criticality::Subcritical)
        throw PreconditionError(
            "find_critical_offset: h - t_max is not subcritical, no bracket on [0, t_max]");

    double lo = 0.0, hi = t_max;  // classify(lo) weakly critical, classify(hi) subcritical
    while (hi - lo > tol_t) {
        const double mid = 0.5 * (lo + hi);
        const Criticality c = classify_at(mid);
        if (c == Criticality::Indeterminate)
            throw NumericError("find_critical_offset: classification failed at t = " +
                               std::to_string(mid));
        if (c == Criticality::Subcritical)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

ScalarField aubin_test_function(const ManifoldPtr& m, Index P, int k, double delta) {
    if (!m) throw ConfigError("aubin_test_function: null manifold");
    if (k < 1) throw ConfigError("aubin_test_function: k must be >= 1");
    const double dmax = (m->kind() == ManifoldKind::RadialSphere) ? M_PI : m->side_length() / 2.0;
    if (!(delta > 0.0) || delta >= dmax)
        throw ConfigError("aubin_test_function: delta out of range (0, " + std::to_string(dmax) + ")");

    const double e = (m->dim() - 2.0) / 2.0;
    const double eps = 1.0 / k;
    const double cut = std::pow(eps + delta * delta, -e);
    const Index N = m->node_count();
    Vector v = Vector::Zero(N);
    for (Index i = 0; i < N; ++i) {
        const double r = m->distance(P, i);
        if (r < delta) v[i] = std::pow(eps + r * r, -e) - cut;
    }
    return make_field(m, std::move(v));
}

AubinSeries aubin_slope(const ManifoldPtr& m, const ScalarField& h, const ScalarField& f,
                        Index P, const std::vector<int>& k_list, double delta) {
    if (!m) throw ConfigError("aubin_slope: null manifold");
    if (m->dim() <= 4)
        throw PreconditionError("aubin_slope: expansion coefficient needs dimension >= 5");
    if (k_list.size() < 2) throw ConfigError("aubin_slope: need at least two k values");
    for (std::size_t i = 1; i < k_list.size(); ++i)
        if (k_list[i] <= k_list[i - 1])
            throw ConfigError("aubin_slope: k_list must be strictly increasing");
    require_same_manifold(*m, h, "aubin_slope.h");
    require_same_manifold(*m, f, "aubin_slope.f");

    const double supf = f.max();
    if (f.values[P] < supf - 1e-9)
        throw PreconditionError("aubin_slope: P is not a maximum point of f");

    const double K2 = best_sobolev_K2(m->dim());
    const double scale = K2 * std::pow(supf, (m->dim() - 2.0) / m->dim());

    AubinSeries series;
    series.k_list = k_list;
    series.delta = delta;
    ProblemSpec spec{m, h, f, critical_exponent(m->dim())};
    for (int k : k_list) {
        const ScalarField psi = aubin_test_function(m, P, k, delta);
        const double J = quotient_J(spec, psi);
        series.J_values.push_back(J);
        series.y_values.push_back(J * scale - 1.0);
    }

    // Fit z_k = k y_k ~ c1 + c2/k, weights k.
    double A11 = 0, A12 = 0, A22 = 0, b1 = 0, b2 = 0;
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        const double k = k_list[i], wgt = k, x = 1.0 / k;
        const double z = k * series.y_values[i];
        A11 += wgt;
        A12 += wgt * x;
        A22 += wgt * x * x;
        b1 += wgt * z;
        b2 += wgt * z * x;
    }
    const double det = A11 * A22 - A12 * A12;
    if (det == 0.0) throw NumericError("aubin_slope: degenerate fit");
    const double c1 = (b1 * A22 - b2 * A12) / det;
    const double c2 = (A11 * b2 - A12 * b1) / det;
    series.fitted_slope = c1;

    double ss = 0, sw = 0;
    for (std::size_t i = 0; i < k_list.size(); ++i) {
        const double k = k_list[i];
        const double zr = k * series.y_values[i] - (c1 + c2 / k);
        ss += k * zr * zr;
        sw += k;
    }
    series.fit_residual = std::sqrt(ss / sw);
    return series;
}

double estimate_B0_sphere(const ManifoldPtr& sphere, const SolverConfig& cfg,
                          const B0Options& opt) {
    if (!sphere || sphere->kind() != ManifoldKind::RadialSphere)
        throw PreconditionError("estimate_B0_sphere: sphere manifolds only");
    const int n = sphere->dim();
    const double h0 = opt.start_factor * n * (n - 2.0) / 4.0;

    ProblemSpec spec{sphere, constant_field(sphere, h0), constant_field(sphere, 1.0),
                     critical_exponent(n)};
    const double t0 =
        find_critical_offset(spec, h0 * 0.9, opt.tol_t, opt.tol_class, cfg);
    return best_sobolev_K2(n) * (h0 - t0);
}

}  // namespace critlab
