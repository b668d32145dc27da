#include "critlab/constants.hpp"
#include "critlab/errors.hpp"
#include "critlab/manifold.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace critlab;

namespace {

// Independent quadrature oracle for radial integrals on S^n:
// int_0^pi g(r) omega_{n-1} sin^{n-1} r dr by composite Simpson.
double radial_integral_oracle(int n, const std::function<double(double)>& g, int panels = 200000) {
    const double omn1 = sphere_volume(n - 1);
    auto f = [&](double r) { return g(r) * omn1 * std::pow(std::sin(r), n - 1); };
    double s = 0.0;
    const double h = M_PI / panels;
    for (int i = 0; i < panels; ++i) {
        const double a = i * h;
        s += h / 6.0 * (f(a) + 4.0 * f(a + h / 2) + f(a + h));
    }
    return s;
}

Vector sample_radial(const Manifold& m, const std::function<double(double)>& g) {
    Vector v(m.node_count());
    for (Index i = 0; i < v.size(); ++i) v[i] = g(m.node_radius()[i]);
    return v;
}

}  // namespace

TEST_CASE("sphere quadrature: volume and moments") {
    for (int n : {3, 4, 6}) {
        auto m = build_radial_sphere(n, 2048, 2.0);
        CHECK(m->weights().minCoeff() > 0.0);
        CHECK(m->volume() == doctest::Approx(sphere_volume(n)).epsilon(1e-9));
    }
    auto s3 = build_radial_sphere(3, 2048, 1.0);
    CHECK(integrate(*s3, Vector::Ones(s3->node_count())) ==
          doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-6));

    // odd harmonic integrates to zero
    const Vector cosr = sample_radial(*s3, [](double r) { return std::cos(r); });
    CHECK(std::abs(integrate(*s3, cosr)) < 1e-8);

    // cos^2 against the closed form pi^2/2 and the Simpson oracle
    const Vector cos2 = sample_radial(*s3, [](double r) { return std::cos(r) * std::cos(r); });
    const double oracle = radial_integral_oracle(3, [](double r) { return std::cos(r) * std::cos(r); });
    CHECK(oracle == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-10));
    CHECK(integrate(*s3, cos2) == doctest::Approx(M_PI * M_PI / 2.0).epsilon(1e-4));
}

TEST_CASE("sphere quadrature error decays at second order") {
    auto moment = [](Index N) {
        auto m = build_radial_sphere(3, N, 2.0);
        Vector cos2(m->node_count());
        for (Index i = 0; i < cos2.size(); ++i) {
            const double c = std::cos(m->node_radius()[i]);
            cos2[i] = c * c;
        }
        return std::abs(integrate(*m, cos2) - M_PI * M_PI / 2.0);
    };
    const double e1 = moment(256), e2 = moment(512);
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 / e2 < 5.5);
}

TEST_CASE("sphere Laplacian: constants, eigenfunction, self-adjointness") {
    auto m = build_radial_sphere(3, 2048, 1.0);
    const Index N = m->node_count();

    // constants are annihilated (exactly, by the flux-difference evaluation)
    const Vector lap1 = m->laplacian_apply(Vector::Ones(N));
    CHECK(lap1.cwiseAbs().maxCoeff() == 0.0);

    // degree-1 harmonic: Delta cos r = n cos r
    const Vector cosr = sample_radial(*m, [](double r) { return std::cos(r); });
    const Vector lap = m->laplacian_apply(cosr);
    double err = 0.0;
    for (Index i = 0; i < N; ++i) err = std::max(err, std::abs(lap[i] - 3.0 * cosr[i]));
    CHECK(err < 1e-4);

    // clustered grid: the graded first cell is only first-order consistent
    // pointwise; away from it the eigenfunction identity still holds tightly
    auto mc = build_radial_sphere(3, 2048, 2.0);
    const Vector cosc = sample_radial(*mc, [](double r) { return std::cos(r); });
    const Vector lapc = mc->laplacian_apply(cosc);
    CHECK(mc->laplacian_apply(Vector::Ones(N)).cwiseAbs().maxCoeff() == 0.0);
    double err_tail = 0.0;
    for (Index i = 32; i < N; ++i) err_tail = std::max(err_tail, std::abs(lapc[i] - 3.0 * cosc[i]));
    CHECK(err_tail < 5e-4);
    CHECK(std::abs(lapc[0] - 3.0 * cosc[0]) < 0.05);

    // self-adjointness and positivity in the quadrature inner product
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
        Vector u(N), v(N);
        for (Index i = 0; i < N; ++i) {
            u[i] = unif(rng);
            v[i] = unif(rng);
        }
        const double a = inner(*m, m->laplacian_apply(u), v);
        const double b = inner(*m, u, m->laplacian_apply(v));
        CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a)));
        CHECK(m->dirichlet_energy(u) >= -1e-10 * u.squaredNorm());
    }
}

TEST_CASE("sphere Laplacian converges at order 2") {
    auto sup_err = [](Index N) {
        auto m = build_radial_sphere(4, N, 1.0);
        Vector f(m->node_count()), expect(m->node_count());
        for (Index i = 0; i < f.size(); ++i) {
            const double r = m->node_radius()[i];
            f[i] = std::cos(r);
            expect[i] = 4.0 * std::cos(r);  // eigenvalue l(l+n-1) = n
        }
        return (m->laplacian_apply(f) - expect).cwiseAbs().maxCoeff();
    };
    const double e1 = sup_err(512), e2 = sup_err(1024);
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 / e2 < 5.0);
}

TEST_CASE("sphere grid clustering resolves the pole") {
    auto m = build_radial_sphere(6, 4096, 2.0);
    // >= 30 nodes inside radius 1e-3, >= 10 inside 3e-4 by construction
    Index in_mu = 0, in_small = 0;
    for (Index i = 0; i < m->node_count(); ++i) {
        if (m->node_radius()[i] <= 1e-3) ++in_mu;
        if (m->node_radius()[i] <= 3.2e-4) ++in_small;
    }
    CHECK(in_mu >= 30);
    CHECK(in_small >= 10);
    CHECK(m->volume() == doctest::Approx(sphere_volume(6)).epsilon(1e-9));
}

TEST_CASE("geodesic distance") {
    auto m = build_radial_sphere(3, 256, 1.0);
    CHECK(m->distance(5, 5) == 0.0);
    // near-pole to near-antipode approaches pi
    CHECK(m->distance(0, m->node_count() - 1) == doctest::Approx(M_PI).epsilon(1e-2));

    auto t = build_periodic_torus(3, 1.0, 20);
    CHECK(t->distance(0, 0) == 0.0);
    // x = (0.9, 0, 0), y = (0.05, 0, 0): wraparound 0.15
    const Index a = 18 * 20 * 20;  // (0.9, 0, 0)
    const Index b = 1 * 20 * 20;   // (0.05, 0, 0)
    CHECK(t->distance(a, b) == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("torus: weights, Laplacian eigenfunction, self-adjointness") {
    const int n = 3, mm = 10;
    const double L = 2.0;
    auto t = build_periodic_torus(n, L, mm);
    CHECK(t->node_count() == 1000);
    CHECK(t->volume() == doctest::Approx(std::pow(L, n)).epsilon(1e-13));

    const Vector lap1 = t->laplacian_apply(Vector::Ones(t->node_count()));
    CHECK(lap1.cwiseAbs().maxCoeff() < 1e-12);

    // discrete Fourier mode: exact eigenvalue (2 sin(pi/m) m / L)^2
    Vector s(t->node_count());
    {
        Index idx = 0;
        for (int i1 = 0; i1 < mm; ++i1)
            for (int i2 = 0; i2 < mm; ++i2)
                for (int i3 = 0; i3 < mm; ++i3)
                    s[idx++] = std::sin(2.0 * M_PI * i1 / mm);
    }
    const double ev = std::pow(2.0 * std::sin(M_PI / mm) * mm / L, 2);
    const Vector lap_s = t->laplacian_apply(s);
    CHECK((lap_s - ev * s).cwiseAbs().maxCoeff() < 1e-11);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector u(t->node_count()), v(t->node_count());
    for (Index i = 0; i < u.size(); ++i) {
        u[i] = unif(rng);
        v[i] = unif(rng);
    }
    CHECK(std::abs(inner(*t, t->laplacian_apply(u), v) - inner(*t, u, t->laplacian_apply(v))) <
          1e-10 * (1 + u.norm() * v.norm()));
    CHECK(t->dirichlet_energy(u) >= 0.0);
}

TEST_CASE("builder guards") {
    CHECK_THROWS_AS(build_radial_sphere(2, 256), ConfigError);
    CHECK_THROWS_AS(build_radial_sphere(3, 8), ConfigError);
    CHECK_THROWS_AS(build_periodic_torus(3, 1.0, 4), ConfigError);
    CHECK_THROWS_AS(build_periodic_torus(3, -1.0, 16), ConfigError);
    CHECK_THROWS_AS(build_periodic_torus(3, 1.0, 512), ResourceError);  // 512^3 over cap
}

TEST_CASE("profiles") {
    auto m = build_radial_sphere(6, 1024, 2.0);

    const ScalarField ones = make_profile(m, ProfileSpec::parse("const(1)"));
    CHECK(ones.values.minCoeff() == 1.0);
    CHECK(ones.values.maxCoeff() == 1.0);

    const ScalarField bump = make_profile(m, ProfileSpec::parse("bump(0.3)"));
    CHECK(bump.values[0] == doctest::Approx(1.0).epsilon(1e-6));
    for (Index i = 0; i < m->node_count(); ++i)
        if (m->node_radius()[i] >= 0.3) CHECK(bump.values[i] == 0.0);
    // C^2 at the boundary: finite-difference Laplacian stays bounded there
    const Vector lap_b = m->laplacian_apply(bump.values);
    CHECK(lap_b.cwiseAbs().maxCoeff() < 1e4);
    // |Delta P_t(0)| grows like 1/t^2
    const ScalarField bump_half = make_profile(m, ProfileSpec::parse("bump(0.15)"));
    const Vector lap_bh = m->laplacian_apply(bump_half.values);
    CHECK(std::abs(lap_bh[0]) > 2.0 * std::abs(lap_b[0]));

    const ScalarField cp = make_profile(m, ProfileSpec::parse("cos_poly(0.5, 0.5)"));
    CHECK(cp.values[0] == doctest::Approx(0.5 * (1 + std::cos(m->node_radius()[0]))));
    CHECK(cp.values.maxCoeff() <= 1.0);
    CHECK(cp.values[0] == doctest::Approx(cp.values.maxCoeff()));

    CHECK_THROWS_AS(ProfileSpec::parse("wavelet(1)"), ConfigError);
    CHECK_THROWS_AS(ProfileSpec::parse("const()"), ConfigError);
}

TEST_CASE("profile from_file roundtrip and mismatch") {
    auto m = build_radial_sphere(3, 64, 1.0);
    const std::string path = "test_profile_tmp.txt";
    {
        std::ofstream out(path);
        for (Index i = 0; i < m->node_count(); ++i) out << 0.5 * double(i) << "\n";
    }
    ProfileSpec spec = ProfileSpec::parse("from_file(" + path + ")");
    const ScalarField f = make_profile(m, spec);
    CHECK(f.values[3] == doctest::Approx(1.5));

    auto m2 = build_radial_sphere(3, 128, 1.0);
    CHECK_THROWS_AS(make_profile(m2, spec), ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("field and manifold mismatch is rejected") {
    auto a = build_radial_sphere(3, 64, 1.0);
    auto b = build_radial_sphere(3, 64, 1.0);
    const ScalarField f = constant_field(a, 1.0);
    CHECK_THROWS_AS(integrate(*b, f.values.head(32)), ConfigError);
    CHECK_THROWS_AS(require_same_manifold(*b, f, "test"), ConfigError);
}
