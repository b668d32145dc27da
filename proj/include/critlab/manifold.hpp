#pragma once

#include "critlab/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace critlab {

enum class ManifoldKind { RadialSphere, PeriodicTorus };

/// Discrete model manifold: either the round unit sphere S^n reduced to its
/// radial coordinate r in (0, pi), or the flat periodic torus [0, L)^n.
///
/// The sphere grid is a cell decomposition of [0, pi]. Cell edges follow
/// e_j = pi ((1-alpha) xi^p + alpha xi), xi = j/N, where p is the clustering
/// exponent (p = 1 gives the uniform grid) and alpha keeps the smallest cell
/// bounded away from zero so that the pointwise Laplacian stays well
/// conditioned. Nodes are cell midpoints, weights are exact cell volumes
/// omega_{n-1} int_cell sin^{n-1} r dr (5-point Gauss-Legendre per cell).
///
/// The Laplacian uses the sign convention Delta = -div grad (positive
/// spectrum) and is assembled in flux form through a symmetric stiffness
/// matrix K: Delta u = W^{-1} K u with W = diag(weights). This makes
/// <Delta u, v> = u^T K v exactly symmetric, positive semidefinite, and zero
/// on constants, so summation by parts holds at machine precision.
class Manifold {
public:
    ManifoldKind kind() const { return kind_; }
    int dim() const { return dim_; }
    Index node_count() const { return weights_.size(); }
    double volume() const { return weights_.sum(); }

    const Vector& weights() const { return weights_; }
    const SparseMatrix& stiffness() const { return stiffness_; }
    const Vector& scalar_curvature() const { return scalar_curvature_; }

    /// Geodesic radius of each node from the distinguished base point
    /// (sphere: the pole; torus: the origin node, by minimum image).
    const Vector& node_radius() const { return node_radius_; }

    /// Apply Delta = W^{-1} K, evaluated in flux-difference form
    /// (Delta u)_i = sum_edges c (u_i - u_nb) / w_i so that constants are
    /// annihilated exactly and no cancellation noise is amplified by small
    /// pole weights.
    Vector laplacian_apply(const Vector& u) const;

    /// Dirichlet energy <Delta u, u> = sum_edges c (u_a - u_b)^2 (>= 0
    /// exactly).
    double dirichlet_energy(const Vector& u) const;

    /// Flux edges (a, b, coupling) defining K.
    struct Edge {
        Index a, b;
        double c;
    };
    const std::vector<Edge>& edges() const { return edges_; }

    /// Geodesic distance between two nodes. Sphere: |r_x - r_y| along the
    /// meridian (radial model). Torus: minimum-image Euclidean distance.
    double distance(Index a, Index b) const;

    // Sphere-only accessors (grid construction parameters).
    double clustering() const { return clustering_; }
    double pole_uniform_fraction() const { return alpha_; }
    const Vector& cell_edges() const { return cell_edges_; }

    // Torus-only accessors.
    double side_length() const { return side_length_; }
    int nodes_per_axis() const { return nodes_per_axis_; }

private:
    friend std::shared_ptr<const Manifold> build_radial_sphere(int, Index, double, double);
    friend std::shared_ptr<const Manifold> build_periodic_torus(int, double, int, std::size_t);
    Manifold() = default;

    ManifoldKind kind_ = ManifoldKind::RadialSphere;
    int dim_ = 0;
    Vector node_radius_;
    Vector weights_;
    SparseMatrix stiffness_;
    std::vector<Edge> edges_;
    Vector scalar_curvature_;

    double clustering_ = 1.0;
    double alpha_ = 0.0;
    Vector cell_edges_;

    double side_length_ = 0.0;
    int nodes_per_axis_ = 0;
    Matrix torus_coords_;  // node -> coordinates, row-major ordering
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// Radial round sphere S^n. clustering = 1 is the uniform r-grid, larger
/// exponents cluster nodes near the pole to resolve concentrating profiles.
ManifoldPtr build_radial_sphere(int n, Index node_count, double clustering = 2.0,
                                double pole_uniform_fraction = 0.03);

/// Flat periodic torus [0, L)^n with m nodes per axis (2n+1-point Laplacian).
ManifoldPtr build_periodic_torus(int n, double side_length, int nodes_per_axis,
                                 std::size_t node_cap = std::size_t(1) << 22);

/// Values of a function at the manifold's nodes.
struct ScalarField {
    ManifoldPtr manifold;
    Vector values;

    Index size() const { return values.size(); }
    double max() const { return values.maxCoeff(); }
    double min() const { return values.minCoeff(); }
};

ScalarField make_field(const ManifoldPtr& m, Vector values);
ScalarField constant_field(const ManifoldPtr& m, double c);

/// Analytic radial profile descriptor. Parsed from strings of the form
///   const(c) | cos_poly(c0, c1, ...) | bump(t) | from_file(path)
/// cos_poly(c0..ck) samples sum_j c_j cos^j(r); bump(t) is the C^2 bump
/// (1 - (r/t)^2)^3 supported in r < t.
struct ProfileSpec {
    enum class Kind { Const, CosPoly, Bump, FromFile };
    Kind kind = Kind::Const;
    double value = 0.0;                // Const
    std::vector<double> coefficients;  // CosPoly
    double support = 0.0;              // Bump
    std::string path;                  // FromFile

    static ProfileSpec parse(const std::string& text);
    std::string to_string() const;

    /// Evaluate at geodesic radius r (not available for FromFile).
    double eval_radial(double r) const;
};

/// Sample a profile at the manifold's nodes. from_file expects one value per
/// line in node order (sphere: radius-ascending, torus: row-major).
ScalarField make_profile(const ManifoldPtr& m, const ProfileSpec& spec);

// ---- quadrature / operator helpers -----------------------------------------

/// sum_i w_i phi_i
double integrate(const Manifold& m, const Vector& phi);
double integrate(const ScalarField& phi);

/// Quadrature inner product <u, v> = sum_i w_i u_i v_i.
double inner(const Manifold& m, const Vector& u, const Vector& v);

ScalarField laplacian_apply(const ScalarField& u);

/// Throws on fields not owned by m.
void require_same_manifold(const Manifold& m, const ScalarField& phi, const char* where);

}  // namespace critlab
