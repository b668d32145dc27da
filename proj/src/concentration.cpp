#include "critlab/concentration.hpp"

#include "critlab/constants.hpp"
#include "critlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace critlab {

namespace {

Index argmax_smallest_radius(const Manifold& m, const Vector& u) {
    const double umax = u.maxCoeff();
    Index best = -1;
    for (Index i = 0; i < u.size(); ++i) {
        if (u[i] >= umax * (1.0 - 1e-12)) {
            if (best < 0 || m.node_radius()[i] < m.node_radius()[best]) best = i;
        }
    }
    return best;
}

double min_spacing_near(const Manifold& m, Index at) {
    if (m.kind() == ManifoldKind::PeriodicTorus) return m.side_length() / m.nodes_per_axis();
    const Index i = at;
    const auto& r = m.node_radius();
    double d = std::numeric_limits<double>::infinity();
    if (i > 0) d = std::min(d, r[i] - r[i - 1]);
    if (i + 1 < r.size()) d = std::min(d, r[i + 1] - r[i]);
    return d;
}

}  // namespace

ConcentrationSample analyze(const ProblemSpec& spec, const SolveResult& result, Index x0,
                            double delta, double R, double nu) {
    const Manifold& m = *spec.manifold;
    require_same_manifold(m, result.u, "analyze");
    const int n = m.dim();
    if (!(nu > 0.0 && nu < n - 2.0))
        throw ConfigError("analyze: nu must lie in (0, n-2)");
    if (delta <= min_spacing_near(m, x0))
        throw ConfigError("analyze: ball radius does not exceed the local grid spacing");

    const Vector& u = result.u.values;
    const Vector& w = m.weights();

    ConcentrationSample s;
    s.param = result.q;
    s.sup_u = u.maxCoeff();
    if (!(s.sup_u > 0.0)) throw ConfigError("analyze: field is not positive anywhere");
    s.mu = std::pow(s.sup_u, -2.0 / (n - 2.0));
    s.peak = argmax_smallest_radius(m, u);
    s.peak_r = m.node_radius()[s.peak];

    const double q = result.q > 0.0 ? result.q : spec.q;
    double mass = 0.0, l2_in = 0.0, l2_all = 0.0;
    double weak = 0.0, strong = 0.0;
    const double strong_scale = std::pow(s.mu, -(n - 2.0) / 2.0 + nu);
    for (Index i = 0; i < u.size(); ++i) {
        const double d0 = m.distance(x0, i);
        const double dp = m.distance(s.peak, i);
        const double u2 = u[i] * u[i];
        l2_all += w[i] * u2;
        if (d0 <= delta) {
            mass += w[i] * spec.f.values[i] * std::pow(std::abs(u[i]), q);
            l2_in += w[i] * u2;
        }
        weak = std::max(weak, std::pow(dp, (n - 2.0) / 2.0) * u[i]);
        strong = std::max(strong, std::pow(dp, n - 2.0 - nu) * strong_scale * u[i]);
    }
    s.mass_in_ball = mass;
    s.l2_ratio = l2_all > 0.0 ? l2_in / l2_all : 0.0;
    s.weak_sup = weak;
    s.strong_sup = strong;
    s.speed_ratio = m.distance(s.peak, x0) / s.mu;

    // bubble fit over the blow-up window R * mu
    const double f0 = spec.f.values[x0];
    const double lambda = result.lambda;
    if (lambda * f0 > 0.0 && R > 0.0) {
        const ScalarField B = standard_bubble(spec.manifold, s.peak, s.mu, lambda, f0);
        s.bubble_err = bubble_fit_error(result.u, B, s.peak, R * s.mu);
    } else {
        s.bubble_err = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
}

ScalarField standard_bubble(const ManifoldPtr& m, Index center, double mu, double lambda,
                            double f0) {
    if (!m) throw ConfigError("standard_bubble: null manifold");
    if (!(mu > 0.0)) throw ConfigError("standard_bubble: mu must be positive");
    if (!(lambda * f0 > 0.0)) throw ConfigError("standard_bubble: lambda * f0 must be positive");
    const int n = m->dim();
    const double e = (n - 2.0) / 2.0;
    const double coef = lambda * f0 / (n * (n - 2.0));
    Vector v(m->node_count());
    for (Index i = 0; i < v.size(); ++i) {
        const double d = m->distance(center, i);
        v[i] = std::pow(mu, -e) * std::pow(1.0 + coef * d * d / (mu * mu), -e);
    }
    return make_field(m, std::move(v));
}

double bubble_fit_error(const ScalarField& u, const ScalarField& bubble, Index center,
                        double window_radius) {
    const Manifold& m = *u.manifold;
    require_same_manifold(m, bubble, "bubble_fit_error");
    if (!(window_radius > 0.0)) throw ConfigError("bubble_fit_error: window must be positive");
    double err = -1.0;
    for (Index i = 0; i < u.size(); ++i) {
        if (m.distance(center, i) > window_radius) continue;
        if (bubble.values[i] == 0.0) continue;
        err = std::max(err, std::abs(u.values[i] - bubble.values[i]) / bubble.values[i]);
    }
    if (err < 0.0) throw ConfigError("bubble_fit_error: empty window");
    return err;
}

RescaledProfile blow_up_rescale(const ScalarField& u, Index peak, double mu, double R, int m_samples) {
    const Manifold& m = *u.manifold;
    if (m.kind() != ManifoldKind::RadialSphere)
        throw ConfigError("blow_up_rescale: radial sphere only");
    if (m_samples < 2) throw ConfigError("blow_up_rescale: need at least two samples");
    const double r_peak = m.node_radius()[peak];
    if (r_peak + R * mu > M_PI)
        throw ConfigError("blow_up_rescale: window R*mu leaves the chart");

    const auto& r = m.node_radius();
    const Vector& v = u.values;
    const double scale = std::pow(mu, (m.dim() - 2.0) / 2.0);

    // cubic Hermite interpolation along the radius
    auto interp = [&](double x) {
        if (x <= r[0]) return v[0];
        if (x >= r[r.size() - 1]) return v[v.size() - 1];
        Index j = std::upper_bound(r.data(), r.data() + r.size(), x) - r.data() - 1;
        j = std::min<Index>(std::max<Index>(j, 0), r.size() - 2);
        auto slope = [&](Index i) {
            if (i == 0) return (v[1] - v[0]) / (r[1] - r[0]);
            if (i == r.size() - 1) return (v[i] - v[i - 1]) / (r[i] - r[i - 1]);
            return (v[i + 1] - v[i - 1]) / (r[i + 1] - r[i - 1]);
        };
        const double hseg = r[j + 1] - r[j];
        const double t = (x - r[j]) / hseg;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * v[j] + (t3 - 2 * t2 + t) * hseg * slope(j) +
               (-2 * t3 + 3 * t2) * v[j + 1] + (t3 - t2) * hseg * slope(j + 1);
    };

    RescaledProfile prof;
    prof.x.resize(m_samples);
    prof.value.resize(m_samples);
    for (int i = 0; i < m_samples; ++i) {
        const double x = R * double(i) / double(m_samples - 1);
        prof.x[i] = x;
        prof.value[i] = scale * interp(r_peak + mu * x);
    }
    return prof;
}

SyntheticFamily synthetic_family(const ManifoldPtr& sphere, const std::vector<double>& mu_list,
                                 const std::vector<double>& offsets) {
    if (!sphere || sphere->kind() != ManifoldKind::RadialSphere)
        throw ConfigError("synthetic_family: radial sphere only");
    if (offsets.size() != mu_list.size())
        throw ConfigError("synthetic_family: offsets and mu_list must have equal length");
    const int n = sphere->dim();
    const double e = (n - 2.0) / 2.0;
    const double omn = sphere_volume(n);
    const double two_star = critical_exponent(n);
    const auto& r = sphere->node_radius();

    SyntheticFamily fam;
    for (std::size_t t = 0; t < mu_list.size(); ++t) {
        const double mu = mu_list[t];
        if (!(mu > 0.0)) throw ConfigError("synthetic_family: mu must be positive");
        Index inside = 0;
        for (Index i = 0; i < r.size(); ++i)
            if (r[i] <= mu) ++inside;
        if (inside < 10)
            throw ConfigError("synthetic_family: mu = " + std::to_string(mu) +
                              " unresolved (fewer than 10 nodes inside radius mu)");

        // Measured mu of the normalized family is omn^{1/n} mu_f / sqrt(2 + mu_f^2);
        // invert so the sample's measured value is the requested one.
        const double c = std::pow(omn, 1.0 / n);
        if (mu >= c) throw ConfigError("synthetic_family: mu too large for this sphere");
        const double mu_f = std::sqrt(2.0 * mu * mu / (c * c - mu * mu));
        const double b = 1.0 + mu_f * mu_f;

        // Normalize the centred profile on the grid; displaced copies reuse a.
        Vector centred(r.size());
        for (Index i = 0; i < r.size(); ++i) centred[i] = std::pow(b - std::cos(r[i]), -e);
        double cst = 0.0;
        for (Index i = 0; i < r.size(); ++i)
            cst += sphere->weights()[i] * std::pow(centred[i], two_star);
        const double a = std::pow(cst, -1.0 / two_star);

        const double off = offsets[t];
        Vector v(r.size());
        for (Index i = 0; i < r.size(); ++i)
            v[i] = a * std::pow(b - std::cos(r[i] - off), -e);
        fam.fields.push_back(make_field(sphere, std::move(v)));
        fam.a_values.push_back(a);
        fam.b_values.push_back(b);
        Index pk = 0;
        fam.fields.back().values.maxCoeff(&pk);
        fam.peaks.push_back(pk);
    }
    return fam;
}

}  // namespace critlab
