#include "critlab/green3.hpp"

#include "critlab/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace critlab {

namespace {

// Solve tridiagonal system in place (Thomas). diag/lower/upper sized N, N-1, N-1.
Vector solve_tridiag(std::vector<double> lower, std::vector<double> diag,
                     std::vector<double> upper, Vector rhs) {
    const Index N = Index(diag.size());
    for (Index i = 1; i < N; ++i) {
        if (diag[i - 1] == 0.0) throw NumericError("green_radial: singular tridiagonal system");
        const double m = lower[i - 1] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    Vector x = Vector::Zero(N);
    if (diag[N - 1] == 0.0) throw NumericError("green_radial: singular tridiagonal system");
    x[N - 1] = rhs[N - 1] / diag[N - 1];
    for (Index i = N - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

// Smallest eigenvalue of the Dirichlet form int |w'|^2 + (h-1) w^2 on (0, pi),
// estimated with inverse power iteration on the uniform FD discretization.
// Radial coercivity of Delta + h on S^3 is equivalent to its positivity
// (w = u sin r is an isometry between the two quadratic forms).
double dirichlet_form_min_eig(const RadialFunction& h, int n) {
    const double dr = M_PI / n;
    const Index N = n - 1;
    std::vector<double> diag(N), off(N - 1, -1.0 / (dr * dr));
    for (Index i = 0; i < N; ++i) {
        const double r = (double(i) + 1.0) * dr;
        diag[i] = 2.0 / (dr * dr) + (h(r) - 1.0);
    }
    // shift below the spectrum: eigenvalues >= min(h) - 1 since -d^2/dr^2 is PSD
    double hmin = diag[0];
    for (Index i = 0; i < N; ++i) hmin = std::min(hmin, diag[i] - 2.0 / (dr * dr));
    const double sigma = hmin - 1.0;

    Vector x = Vector::Ones(N);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        std::vector<double> d = diag;
        for (auto& v : d) v -= sigma;
        x = solve_tridiag(std::vector<double>(off), std::move(d), std::vector<double>(off), x);
        x /= x.norm();
        double num = 0.0;
        for (Index i = 0; i < N; ++i) {
            const double left = (i > 0) ? x[i - 1] : 0.0;
            const double right = (i + 1 < N) ? x[i + 1] : 0.0;
            num += x[i] * (diag[i] * x[i] + (-1.0 / (dr * dr)) * (left + right));
        }
        if (std::abs(num - prev) < 1e-10 * (1.0 + std::abs(num))) return num;
        prev = num;
    }
    return prev;
}

}  // namespace

GreenProfile green_radial(const RadialFunction& h, int n_nodes) {
    if (n_nodes < 32) throw ConfigError("green_radial: need at least 32 nodes");
    if (!h) throw ConfigError("green_radial: null radial function");

    const double margin = dirichlet_form_min_eig(h, std::min(n_nodes, 2048));
    if (margin <= 0.0)
        throw PreconditionError("green_radial: Delta + h is not coercive (margin " +
                                std::to_string(margin) + ")");

    const int n = n_nodes;
    const double dr = M_PI / n;
    const double w0 = 1.0 / (4.0 * M_PI);

    // Interior unknowns w_1..w_{n-1}: -(w_{i+1} - 2 w_i + w_{i-1})/dr^2 + (h_i - 1) w_i = 0.
    const Index N = n - 1;
    std::vector<double> diag(N), off(N - 1, -1.0 / (dr * dr));
    Vector rhs = Vector::Zero(N);
    for (Index i = 0; i < N; ++i) {
        const double r = (double(i) + 1.0) * dr;
        diag[i] = 2.0 / (dr * dr) + (h(r) - 1.0);
    }
    rhs[0] = w0 / (dr * dr);  // w(0) datum; w(pi) = 0 adds nothing

    Vector interior = solve_tridiag(std::move(off), std::move(diag),
                                    std::vector<double>(N - 1, -1.0 / (dr * dr)), rhs);

    GreenProfile p;
    p.r.resize(n + 1);
    p.w.resize(n + 1);
    p.G.resize(n + 1);
    for (int i = 0; i <= n; ++i) p.r[i] = i * dr;
    p.w[0] = w0;
    p.w[n] = 0.0;
    for (Index i = 0; i < N; ++i) p.w[i + 1] = interior[i];

    p.mass = (-3.0 * p.w[0] + 4.0 * p.w[1] - p.w[2]) / (2.0 * dr);

    for (int i = 1; i < n; ++i) p.G[i] = p.w[i] / std::sin(p.r[i]);
    // Endpoint limits: G sin r -> w, so G(0) is the 1/(4 pi r) blow-up; report
    // the finite antipodal limit w'(pi)/sin'(pi) = -w'(pi) and leave G[0] at
    // the nearest interior sample for plotting.
    p.G[0] = p.G[1];
    p.G[n] = -(3.0 * p.w[n] - 4.0 * p.w[n - 1] + p.w[n - 2]) / (2.0 * dr);
    return p;
}

double green_mass(const GreenProfile& profile) { return profile.mass; }

double find_mass_zero_offset(const RadialFunction& h, double b_lo, double b_hi,
                             double tol, int n_nodes) {
    if (!(b_lo < b_hi)) throw ConfigError("find_mass_zero_offset: need b_lo < b_hi");
    if (tol <= 0.0) throw ConfigError("find_mass_zero_offset: tol must be positive");
    auto mass_at = [&](double b) {
        return green_radial([&](double r) { return h(r) + b; }, n_nodes).mass;
    };
    double m_lo = mass_at(b_lo);
    double m_hi = mass_at(b_hi);
    if (!(m_lo > 0.0 && m_hi < 0.0))
        throw PreconditionError("find_mass_zero_offset: no sign change on [" +
                                std::to_string(b_lo) + ", " + std::to_string(b_hi) +
                                "] (mass " + std::to_string(m_lo) + " .. " +
                                std::to_string(m_hi) + ")");
    // Mass is strictly decreasing in the shift, so plain bisection on the sign.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (b_lo + b_hi);
        const double m = mass_at(mid);
        if (std::abs(m) <= tol || 0.5 * (b_hi - b_lo) < 1e-14) return mid;
        if (m > 0.0)
            b_lo = mid;
        else
            b_hi = mid;
    }
    return 0.5 * (b_lo + b_hi);
}

}  // namespace critlab
