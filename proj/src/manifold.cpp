#include "critlab/manifold.hpp"

#include "critlab/constants.hpp"
#include "critlab/errors.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace critlab {

namespace {

// 5-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGx[5] = {-0.9061798459386639928, -0.5384693101056830910, 0.0,
                           0.5384693101056830910, 0.9061798459386639928};
constexpr double kGw[5] = {0.2369268850561890875, 0.4786286704993664680,
                           0.5688888888888888889, 0.4786286704993664680,
                           0.2369268850561890875};

double cell_volume_sphere(double a, double b, int n, double omn1) {
    double s = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double t = 0.5 * (b - a) * kGx[k] + 0.5 * (a + b);
        s += kGw[k] * std::pow(std::sin(t), n - 1);
    }
    return 0.5 * (b - a) * s * omn1;
}

SparseMatrix stiffness_from_edges(const std::vector<Manifold::Edge>& edges, Index N) {
    std::vector<Triplet> trips;
    trips.reserve(edges.size() * 4);
    for (const auto& e : edges) {
        trips.emplace_back(e.a, e.a, e.c);
        trips.emplace_back(e.b, e.b, e.c);
        trips.emplace_back(e.a, e.b, -e.c);
        trips.emplace_back(e.b, e.a, -e.c);
    }
    SparseMatrix K(N, N);
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
}

}  // namespace

ManifoldPtr build_radial_sphere(int n, Index node_count, double clustering,
                                double pole_uniform_fraction) {
    if (n < 3) throw ConfigError("build_radial_sphere: dimension must be >= 3");
    if (node_count < 16) throw ConfigError("build_radial_sphere: need at least 16 nodes");
    if (clustering < 1.0) throw ConfigError("build_radial_sphere: clustering exponent must be >= 1");
    const double alpha = (clustering == 1.0) ? 0.0 : pole_uniform_fraction;
    if (alpha < 0.0 || alpha >= 1.0)
        throw ConfigError("build_radial_sphere: pole_uniform_fraction must be in [0, 1)");

    const Index N = node_count;
    std::shared_ptr<Manifold> m(new Manifold());
    m->kind_ = ManifoldKind::RadialSphere;
    m->dim_ = n;
    m->clustering_ = clustering;
    m->alpha_ = alpha;

    Vector edges(N + 1);
    for (Index j = 0; j <= N; ++j) {
        const double xi = double(j) / double(N);
        edges[j] = M_PI * ((1.0 - alpha) * std::pow(xi, clustering) + alpha * xi);
    }
    m->cell_edges_ = edges;

    Vector r(N), w(N);
    const double omn1 = sphere_volume(n - 1);
    for (Index i = 0; i < N; ++i) {
        r[i] = 0.5 * (edges[i] + edges[i + 1]);
        w[i] = cell_volume_sphere(edges[i], edges[i + 1], n, omn1);
    }
    m->node_radius_ = r;
    m->weights_ = w;

    // Flux-form stiffness through the interior cell edges: coupling
    //   omega_{n-1} sin^{n-1}(e_j) / (r_{j+1} - r_j).
    // Edge fluxes vanish at r = 0 and r = pi (Neumann; sin^{n-1} = 0 there too).
    m->edges_.reserve(N - 1);
    for (Index j = 1; j < N; ++j) {
        const double c = omn1 * std::pow(std::sin(edges[j]), n - 1) / (r[j] - r[j - 1]);
        m->edges_.push_back({j - 1, j, c});
    }
    m->stiffness_ = stiffness_from_edges(m->edges_, N);

    m->scalar_curvature_ = Vector::Constant(N, double(n) * (n - 1));
    return m;
}

ManifoldPtr build_periodic_torus(int n, double side_length, int nodes_per_axis,
                                 std::size_t node_cap) {
    if (n < 3) throw ConfigError("build_periodic_torus: dimension must be >= 3");
    if (side_length <= 0.0) throw ConfigError("build_periodic_torus: side length must be positive");
    if (nodes_per_axis < 8) throw ConfigError("build_periodic_torus: need at least 8 nodes per axis");

    double total = 1.0;
    for (int a = 0; a < n; ++a) total *= nodes_per_axis;
    if (total > double(node_cap))
        throw ResourceError("build_periodic_torus: node count " + std::to_string(total) +
                            " exceeds cap " + std::to_string(node_cap));
    const Index N = Index(total);

    std::shared_ptr<Manifold> m(new Manifold());
    m->kind_ = ManifoldKind::PeriodicTorus;
    m->dim_ = n;
    m->side_length_ = side_length;
    m->nodes_per_axis_ = nodes_per_axis;

    const double dx = side_length / nodes_per_axis;
    m->weights_ = Vector::Constant(N, std::pow(dx, n));

    // Row-major coordinates: node index = ((i_1 m + i_2) m + i_3) ..., x_a = i_a dx.
    Matrix coords(N, n);
    {
        std::vector<int> idx(n, 0);
        for (Index node = 0; node < N; ++node) {
            for (int a = 0; a < n; ++a) coords(node, a) = idx[a] * dx;
            for (int a = n - 1; a >= 0; --a) {
                if (++idx[a] < nodes_per_axis) break;
                idx[a] = 0;
            }
        }
    }
    m->torus_coords_ = coords;

    Vector radius(N);
    for (Index node = 0; node < N; ++node) {
        double s = 0.0;
        for (int a = 0; a < n; ++a) {
            double d = std::abs(coords(node, a));
            d = std::min(d, side_length - d);
            s += d * d;
        }
        radius[node] = std::sqrt(s);
    }
    m->node_radius_ = radius;

    // 2n+1-point stencil as W * Delta: one edge of coupling w / dx^2 per
    // axis-neighbour pair (each pair once, in the +axis direction).
    const double c = std::pow(dx, n) / (dx * dx);
    m->edges_.reserve(std::size_t(N) * n);
    std::vector<Index> strides(n);
    strides[n - 1] = 1;
    for (int a = n - 2; a >= 0; --a) strides[a] = strides[a + 1] * nodes_per_axis;
    std::vector<int> idx(n, 0);
    for (Index node = 0; node < N; ++node) {
        for (int a = 0; a < n; ++a) {
            const int up = (idx[a] + 1) % nodes_per_axis;
            const Index nb_up = node + (up - idx[a]) * strides[a];
            m->edges_.push_back({node, nb_up, c});
        }
        for (int a = n - 1; a >= 0; --a) {
            if (++idx[a] < nodes_per_axis) break;
            idx[a] = 0;
        }
    }
    m->stiffness_ = stiffness_from_edges(m->edges_, N);

    m->scalar_curvature_ = Vector::Zero(N);
    return m;
}

Vector Manifold::laplacian_apply(const Vector& u) const {
    if (u.size() != node_count())
        throw ConfigError("laplacian_apply: field length does not match node count");
    Vector out = Vector::Zero(u.size());
    for (const auto& e : edges_) {
        const double flux = e.c * (u[e.a] - u[e.b]);
        out[e.a] += flux;
        out[e.b] -= flux;
    }
    return out.cwiseQuotient(weights_);
}

double Manifold::dirichlet_energy(const Vector& u) const {
    if (u.size() != node_count())
        throw ConfigError("dirichlet_energy: field length does not match node count");
    double s = 0.0;
    for (const auto& e : edges_) {
        const double d = u[e.a] - u[e.b];
        s += e.c * d * d;
    }
    return s;
}

double Manifold::distance(Index a, Index b) const {
    if (a < 0 || b < 0 || a >= node_count() || b >= node_count())
        throw ConfigError("distance: node index out of range");
    if (kind_ == ManifoldKind::RadialSphere)
        return std::abs(node_radius_[a] - node_radius_[b]);
    double s = 0.0;
    for (int ax = 0; ax < dim_; ++ax) {
        double d = std::abs(torus_coords_(a, ax) - torus_coords_(b, ax));
        d = std::min(d, side_length_ - d);
        s += d * d;
    }
    return std::sqrt(s);
}

ScalarField make_field(const ManifoldPtr& m, Vector values) {
    if (!m) throw ConfigError("make_field: null manifold");
    if (values.size() != m->node_count())
        throw ConfigError("make_field: length mismatch");
    if (!values.allFinite()) throw ConfigError("make_field: non-finite values");
    return ScalarField{m, std::move(values)};
}

ScalarField constant_field(const ManifoldPtr& m, double c) {
    return make_field(m, Vector::Constant(m->node_count(), c));
}

namespace {

std::vector<double> parse_number_list(const std::string& args, const std::string& ctx) {
    std::vector<double> out;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            double v = std::stod(tok, &pos);
            while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError(ctx + ": cannot parse number '" + tok + "'");
        }
    }
    return out;
}

}  // namespace

ProfileSpec ProfileSpec::parse(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')')
        throw ConfigError("profile: expected name(args), got '" + text + "'");
    const std::string name = s.substr(0, open);
    const std::string args = s.substr(open + 1, s.size() - open - 2);

    ProfileSpec p;
    if (name == "const") {
        p.kind = Kind::Const;
        auto v = parse_number_list(args, "const");
        if (v.size() != 1) throw ConfigError("profile const: expected one value");
        p.value = v[0];
    } else if (name == "cos_poly") {
        p.kind = Kind::CosPoly;
        p.coefficients = parse_number_list(args, "cos_poly");
        if (p.coefficients.empty()) throw ConfigError("profile cos_poly: expected coefficients");
    } else if (name == "bump") {
        p.kind = Kind::Bump;
        auto v = parse_number_list(args, "bump");
        if (v.size() != 1 || v[0] <= 0.0) throw ConfigError("profile bump: expected one positive radius");
        p.support = v[0];
    } else if (name == "from_file") {
        p.kind = Kind::FromFile;
        p.path = args;
        if (p.path.empty()) throw ConfigError("profile from_file: empty path");
    } else {
        throw ConfigError("profile: unknown descriptor '" + name + "'");
    }
    return p;
}

std::string ProfileSpec::to_string() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind) {
        case Kind::Const:
            os << "const(" << value << ")";
            break;
        case Kind::CosPoly: {
            os << "cos_poly(";
            for (std::size_t i = 0; i < coefficients.size(); ++i)
                os << (i ? ", " : "") << coefficients[i];
            os << ")";
            break;
        }
        case Kind::Bump:
            os << "bump(" << support << ")";
            break;
        case Kind::FromFile:
            os << "from_file(" << path << ")";
            break;
    }
    return os.str();
}

double ProfileSpec::eval_radial(double r) const {
    switch (kind) {
        case Kind::Const:
            return value;
        case Kind::CosPoly: {
            const double c = std::cos(r);
            double acc = 0.0, p = 1.0;
            for (double coef : coefficients) {
                acc += coef * p;
                p *= c;
            }
            return acc;
        }
        case Kind::Bump: {
            if (r >= support) return 0.0;
            const double x = r / support;
            const double q = 1.0 - x * x;
            return q * q * q;
        }
        case Kind::FromFile:
            throw ConfigError("from_file profiles have no radial closed form");
    }
    return 0.0;
}

ScalarField make_profile(const ManifoldPtr& m, const ProfileSpec& spec) {
    if (!m) throw ConfigError("make_profile: null manifold");
    const Index N = m->node_count();
    if (spec.kind == ProfileSpec::Kind::FromFile) {
        std::ifstream in(spec.path);
        if (!in) throw ConfigError("make_profile: cannot open '" + spec.path + "'");
        Vector v(N);
        Index i = 0;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (i >= N) throw ConfigError("make_profile: file '" + spec.path + "' has too many values");
            try {
                v[i++] = std::stod(line);
            } catch (const std::exception&) {
                throw ConfigError("make_profile: bad number '" + line + "' in " + spec.path);
            }
        }
        if (i != N)
            throw ConfigError("make_profile: file '" + spec.path + "' has " + std::to_string(i) +
                              " values, manifold has " + std::to_string(N) + " nodes");
        return make_field(m, std::move(v));
    }
    Vector v(N);
    for (Index i = 0; i < N; ++i) v[i] = spec.eval_radial(m->node_radius()[i]);
    return make_field(m, std::move(v));
}

double integrate(const Manifold& m, const Vector& phi) {
    if (phi.size() != m.node_count()) throw ConfigError("integrate: length mismatch");
    return m.weights().dot(phi);
}

double integrate(const ScalarField& phi) {
    require_same_manifold(*phi.manifold, phi, "integrate");
    return phi.manifold->weights().dot(phi.values);
}

double inner(const Manifold& m, const Vector& u, const Vector& v) {
    if (u.size() != m.node_count() || v.size() != m.node_count())
        throw ConfigError("inner: length mismatch");
    return u.dot(m.weights().cwiseProduct(v));
}

ScalarField laplacian_apply(const ScalarField& u) {
    return ScalarField{u.manifold, u.manifold->laplacian_apply(u.values)};
}

void require_same_manifold(const Manifold& m, const ScalarField& phi, const char* where) {
    if (phi.manifold.get() != &m)
        throw ConfigError(std::string(where) + ": field belongs to a different manifold");
    if (phi.values.size() != m.node_count())
        throw ConfigError(std::string(where) + ": field length mismatch");
}

}  // namespace critlab
