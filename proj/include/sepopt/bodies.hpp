#pragma once

// Convex bodies given by their linear-optimization (support) oracle, plus a
// brute-force distance oracle used as ground truth by the tests and the
// comparison harness.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "core.hpp"

namespace sepopt {

struct BodySpec;

struct VertexPolytope {
    std::vector<Vector> vertices;
};

struct Ball {
    Vector center;
    double radius = 1.0;
};

/// x -> matrix * x + shift applied to a base body.
struct AffineImage {
    std::shared_ptr<const BodySpec> base;
    Matrix matrix;
    Vector shift;
};

/// Full-dimensional convex body K with B(0, inner_radius) ⊆ K ⊆ B(0, outer_radius).
struct BodySpec {
    int dimension = 0;
    std::variant<VertexPolytope, Ball, AffineImage> shape;
    double outer_radius = 1.0;
    double inner_radius = 0.0;
};

struct SupportResult {
    Vector maximizer;
    double value = 0.0;
};

namespace detail {

inline void validate_shape(const BodySpec& body) {
    const int n = body.dimension;
    if (n <= 0) throw Error(ErrorCode::InvalidBody, "dimension must be positive");
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, VertexPolytope>) {
                if (s.vertices.empty()) throw Error(ErrorCode::InvalidBody, "polytope has no vertices");
                for (const auto& v : s.vertices) require_dimension(n, v.size(), "vertex");
            } else if constexpr (std::is_same_v<T, Ball>) {
                require_dimension(n, s.center.size(), "ball center");
                if (!(s.radius > 0.0)) throw Error(ErrorCode::InvalidBody, "ball radius must be positive");
            } else {
                if (!s.base) throw Error(ErrorCode::InvalidBody, "affine image without base body");
                validate_shape(*s.base);
                require_dimension(n, s.base->dimension, "affine base");
                require_dimension(n, s.matrix.rows(), "affine matrix rows");
                require_dimension(n, s.matrix.cols(), "affine matrix cols");
                require_dimension(n, s.shift.size(), "affine shift");
            }
        },
        body.shape);
}

}  // namespace detail

/// Checks the structural invariants of a body: consistent dimensions,
/// non-empty vertex list, 0 < r0 <= R and every vertex (or ball) inside B(0, R).
inline void validate(const BodySpec& body) {
    detail::validate_shape(body);
    if (!(body.outer_radius > 0.0)) throw Error(ErrorCode::InvalidBody, "outer radius must be positive");
    if (!(body.inner_radius >= 0.0) || body.inner_radius > body.outer_radius)
        throw Error(ErrorCode::InvalidBody, "inner radius must lie in [0, outer radius]");
    const double slack = body.outer_radius * (1.0 + 1e-9);
    if (const auto* poly = std::get_if<VertexPolytope>(&body.shape)) {
        for (const auto& v : poly->vertices)
            if (v.norm() > slack) throw Error(ErrorCode::InvalidBody, "vertex outside the outer ball");
    } else if (const auto* ball = std::get_if<Ball>(&body.shape)) {
        if (ball->center.norm() + ball->radius > slack)
            throw Error(ErrorCode::InvalidBody, "ball outside the outer ball");
    }
}

/// Maximizes c^T x over the body. Vertex-polytope ties go to the lowest index.
inline SupportResult support(const BodySpec& body, const Vector& c) {
    require_dimension(body.dimension, c.size(), "support direction");
    if (c.norm() < tol::zero) throw Error(ErrorCode::ZeroDirection, "support direction is zero");
    return std::visit(
        [&](const auto& s) -> SupportResult {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, VertexPolytope>) {
                std::size_t best = 0;
                double best_value = c.dot(s.vertices[0]);
                for (std::size_t i = 1; i < s.vertices.size(); ++i) {
                    const double v = c.dot(s.vertices[i]);
                    if (v > best_value) {
                        best_value = v;
                        best = i;
                    }
                }
                return {s.vertices[best], best_value};
            } else if constexpr (std::is_same_v<T, Ball>) {
                Vector k = s.center + (s.radius / c.norm()) * c;
                return {k, c.dot(s.center) + s.radius * c.norm()};
            } else {
                // max c^T (A y + t) = max (A^T c)^T y + c^T t
                const SupportResult inner = support(*s.base, s.matrix.transpose() * c);
                Vector k = s.matrix * inner.maximizer + s.shift;
                return {k, inner.value + c.dot(s.shift)};
            }
        },
        body.shape);
}

enum class PolarAnswer { Inside, Outside };

struct PolarMembership {
    PolarAnswer answer = PolarAnswer::Inside;
    std::optional<Vector> separator;  // maximizer k with k^T c > 1 when Outside
};

/// Tests c ∈ K* = {c : c^T x <= 1 for all x in K}.
inline PolarMembership polar_membership(const BodySpec& body, const Vector& c) {
    require_dimension(body.dimension, c.size(), "polar query");
    if (c.norm() < tol::zero) return {};
    SupportResult s = support(body, c);
    if (s.value <= 1.0 + tol::polar) return {};
    return {PolarAnswer::Outside, std::move(s.maximizer)};
}

struct DistanceResult {
    double distance = 0.0;
    Vector witness;
    int iterations = 0;
};

/// Euclidean distance from p to K using Wolfe's minimum-norm-point method
/// driven only by support(). The corral of atoms stays affinely independent
/// so it never exceeds n + 1 points. Stops once the duality gap certifies
/// the distance to within `tolerance`; distances at or below the tolerance
/// are reported as exactly 0.
inline DistanceResult distance_to_body(const BodySpec& body, const Vector& p, double tolerance = 1e-10,
                                       int max_iterations = 10000) {
    require_dimension(body.dimension, p.size(), "query point");
    const Eigen::Index n = p.size();

    // Work in coordinates translated by -p: minimize ||z|| over conv(atoms).
    std::vector<Vector> atoms;
    std::vector<double> weights;
    Vector start_dir = -p;
    if (start_dir.norm() < tol::zero) start_dir = Vector::Unit(n, 0);
    atoms.push_back(support(body, start_dir).maximizer - p);
    weights.push_back(1.0);
    Vector x = atoms.front();

    auto finish = [&](int iter) {
        DistanceResult r;
        const double norm = x.norm();
        r.distance = norm <= tolerance ? 0.0 : norm;
        r.witness = x + p;
        r.iterations = iter;
        return r;
    };

    for (int iter = 0; iter < max_iterations; ++iter) {
        const double norm = x.norm();
        if (norm <= tolerance) return finish(iter);

        const Vector k = support(body, -x).maximizer - p;
        // dist >= ||x|| - gap / ||x||  (support inequality along x / ||x||)
        const double gap = x.squaredNorm() - x.dot(k);
        if (gap / norm <= tolerance) return finish(iter);

        bool duplicate = false;
        for (const auto& a : atoms)
            if ((a - k).norm() <= 1e-14 * (1.0 + a.norm())) duplicate = true;
        if (duplicate) return finish(iter);  // numerically converged
        atoms.push_back(k);
        weights.push_back(0.0);

        // Minor cycles: move to the affine minimizer of the corral, clipping
        // toward it while it leaves the simplex.
        for (int minor = 0; minor <= static_cast<int>(n) + 2; ++minor) {
            const auto m = static_cast<Eigen::Index>(atoms.size());
            Matrix z(n, m);
            for (Eigen::Index j = 0; j < m; ++j) z.col(j) = atoms[static_cast<std::size_t>(j)];
            // argmin ||Z a|| s.t. 1^T a = 1  <=>  solve (Z^T Z + 1 1^T) a' = 1, a = a' / sum(a')
            Matrix gram = z.transpose() * z + Matrix::Ones(m, m);
            Vector alpha = gram.completeOrthogonalDecomposition().solve(Vector::Ones(m));
            alpha /= alpha.sum();

            if (alpha.minCoeff() > 1e-15) {
                for (Eigen::Index j = 0; j < m; ++j) weights[static_cast<std::size_t>(j)] = alpha[j];
                x = z * alpha;
                break;
            }
            double theta = 1.0;
            for (Eigen::Index j = 0; j < m; ++j) {
                const double w = weights[static_cast<std::size_t>(j)];
                if (alpha[j] <= 1e-15 && w - alpha[j] > 0.0) theta = std::min(theta, w / (w - alpha[j]));
            }
            for (Eigen::Index j = 0; j < m; ++j) {
                auto& w = weights[static_cast<std::size_t>(j)];
                w = theta * alpha[j] + (1.0 - theta) * w;
            }
            // Drop atoms whose weight vanished.
            std::vector<Vector> kept_atoms;
            std::vector<double> kept_weights;
            for (std::size_t j = 0; j < atoms.size(); ++j) {
                if (weights[j] > 1e-15) {
                    kept_atoms.push_back(atoms[j]);
                    kept_weights.push_back(weights[j]);
                }
            }
            if (kept_atoms.empty()) {
                kept_atoms.push_back(k);
                kept_weights.push_back(1.0);
            }
            atoms = std::move(kept_atoms);
            weights = std::move(kept_weights);
            const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
            x = Vector::Zero(n);
            for (std::size_t j = 0; j < atoms.size(); ++j) {
                weights[j] /= total;
                x += weights[j] * atoms[j];
            }
        }
    }
    throw Error(ErrorCode::NoConvergence, "distance oracle exceeded iteration budget",
                static_cast<std::size_t>(max_iterations));
}

/// Halfspace {x : normal^T x <= offset} with a unit normal.
struct Facet {
    Vector normal;
    double offset = 0.0;
};

/// Facet hyperplanes of conv(vertices) by brute-force enumeration of
/// n-subsets. Returns nullopt if the subset count exceeds `max_subsets`.
/// Duplicates are possible when more than n vertices share a facet.
inline std::optional<std::vector<Facet>> polytope_facets(const std::vector<Vector>& vertices,
                                                         std::size_t max_subsets = 2'000'000) {
    if (vertices.empty()) return std::vector<Facet>{};
    const auto n = static_cast<std::size_t>(vertices.front().size());
    const std::size_t m = vertices.size();
    if (m < n) return std::vector<Facet>{};

    double count = 1.0;
    for (std::size_t i = 0; i < n; ++i) count = count * static_cast<double>(m - i) / static_cast<double>(i + 1);
    if (count > static_cast<double>(max_subsets)) return std::nullopt;

    double scale = 0.0;
    for (const auto& v : vertices) scale = std::max(scale, v.norm());
    const double eps = 1e-10 * (1.0 + scale);

    std::vector<Facet> facets;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const auto ni = static_cast<Eigen::Index>(n);
    while (true) {
        Matrix d(ni - 1, ni);
        for (std::size_t r = 1; r < n; ++r)
            d.row(static_cast<Eigen::Index>(r - 1)) = (vertices[idx[r]] - vertices[idx[0]]).transpose();
        Vector normal;
        if (n == 1) {
            normal = Vector::Ones(1);
        } else {
            Eigen::JacobiSVD<Matrix> svd(d, Eigen::ComputeFullV);
            const Vector sv = svd.singularValues();
            if (sv.size() == ni - 1 && sv[ni - 2] > 1e-9 * (1.0 + sv[0])) normal = svd.matrixV().col(ni - 1);
        }
        if (normal.size() == ni) {
            const double offset = normal.dot(vertices[idx[0]]);
            bool above = false, below = false;
            for (const auto& v : vertices) {
                const double s = normal.dot(v) - offset;
                if (s > eps) above = true;
                if (s < -eps) below = true;
            }
            if (!(above && below)) {
                if (above) facets.push_back({-normal, -offset});
                else facets.push_back({normal, offset});
            }
        }
        // next combination
        std::size_t i = n;
        while (i > 0 && idx[i - 1] == m - n + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < n; ++j) idx[j] = idx[j - 1] + 1;
    }
    return facets;
}

/// Radius of the largest ball around `p` contained in the body, negative when
/// p is outside. Exact for balls and (via facet enumeration) vertex
/// polytopes; nullopt for other shapes or polytopes too large to enumerate.
inline std::optional<double> inner_margin(const BodySpec& body, const Vector& p) {
    require_dimension(body.dimension, p.size(), "query point");
    if (const auto* ball = std::get_if<Ball>(&body.shape)) return ball->radius - (p - ball->center).norm();
    if (const auto* poly = std::get_if<VertexPolytope>(&body.shape)) {
        const auto facets = polytope_facets(poly->vertices);
        if (!facets || facets->empty()) return std::nullopt;
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& f : *facets) margin = std::min(margin, f.offset - f.normal.dot(p));
        return margin;
    }
    return std::nullopt;
}

enum class QuerySide { Inside, Outside };

struct QueryPlacement {
    QuerySide side = QuerySide::Outside;
    double margin = 0.1;
};

struct RandomInstance {
    BodySpec body;
    Vector query;
};

/// Random full-dimensional vertex polytope centred at its vertex centroid,
/// with r0 computed exactly from the facets, and a query point placed
/// outside at distance >= margin or inside with a margin-ball around it.
/// Deterministic in `seed`.
inline RandomInstance random_instance(int n, int num_vertices, std::uint64_t seed, QueryPlacement place) {
    if (n < 2) throw Error(ErrorCode::DegenerateInstance, "dimension must be at least 2");
    if (num_vertices < n + 1) throw Error(ErrorCode::DegenerateInstance, "need at least n + 1 vertices");
    if (!(place.margin >= 0.0)) throw Error(ErrorCode::DegenerateInstance, "margin must be nonnegative");

    Rng rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<Vector> vertices;
        Vector centroid = Vector::Zero(n);
        for (int i = 0; i < num_vertices; ++i) {
            vertices.push_back(rng.unit_vector(n) * rng.uniform(0.6, 1.0));
            centroid += vertices.back();
        }
        centroid /= num_vertices;
        double outer = 0.0;
        for (auto& v : vertices) {
            v -= centroid;
            outer = std::max(outer, v.norm());
        }
        const auto facets = polytope_facets(vertices);
        if (!facets || facets->empty()) throw Error(ErrorCode::DegenerateInstance, "too many vertices to enumerate");
        double inner = std::numeric_limits<double>::infinity();
        for (const auto& f : *facets) inner = std::min(inner, f.offset);
        if (inner < 0.05 * outer) continue;
        if (place.side == QuerySide::Inside && inner <= 1.01 * place.margin) continue;

        BodySpec body{n, VertexPolytope{vertices}, outer, inner * (1.0 - 1e-9)};

        // random point of K as a Dirichlet(1,...,1) combination of vertices
        Vector x = Vector::Zero(n);
        double total = 0.0;
        for (const auto& v : vertices) {
            const double w = -std::log(1.0 - rng.uniform());
            x += w * v;
            total += w;
        }
        x /= total;

        if (place.side == QuerySide::Inside) {
            double s_max = 1.0;
            for (const auto& f : *facets) {
                const double ax = f.normal.dot(x);
                if (ax > 0.0) s_max = std::min(s_max, (f.offset - place.margin) / ax);
            }
            Vector p = rng.uniform(0.0, 1.0) * s_max * x;
            const auto margin = inner_margin(body, p);
            if (!margin || *margin < place.margin) continue;
            return {std::move(body), std::move(p)};
        }

        // Outside: walk from x along a random direction until the distance
        // reaches a target in [1.05, 2] * margin.
        const Vector w = rng.unit_vector(n);
        const double target = place.margin * rng.uniform(1.05, 2.0);
        double lo = 0.0;
        double hi = support(body, w).value - w.dot(x) + target + 1e-9;
        for (int it = 0; it < 60 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (distance_to_body(body, x + mid * w, 1e-12).distance >= target) hi = mid;
            else lo = mid;
        }
        Vector p = x + hi * w;
        if (distance_to_body(body, p, 1e-12).distance < place.margin) continue;
        return {std::move(body), std::move(p)};
    }
    throw Error(ErrorCode::DegenerateInstance, "could not generate a well-conditioned instance");
}

}  // namespace sepopt
