#pragma once

namespace critlab {

/// Volume of the unit n-sphere, omega_n = 2 pi^{(n+1)/2} / Gamma((n+1)/2),
/// evaluated by the exact two-step recurrence omega_n = 2 pi omega_{n-2} / (n-1).
double sphere_volume(int n);

/// Critical Sobolev exponent 2n/(n-2).
double critical_exponent(int n);

/// Sharp first constant K(n,2)^2 = 4 / (n (n-2) omega_n^{2/n}) of the
/// H_1^2 -> L^{2n/(n-2)} embedding.
double best_sobolev_K2(int n);

/// Energy threshold 1 / (K(n,2)^2 (sup f)^{(n-2)/n}). The constrained
/// infimum never exceeds it, and strict inequality yields minimizers.
double threshold(int n, double sup_f);

struct SharpConstants {
    int n;
    double omega_n;
    double K2;
    double two_star;

    static SharpConstants make(int n);
};

}  // namespace critlab
