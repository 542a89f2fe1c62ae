#pragma once

// Outer approximations P = B(0, R) ∩ {x : a_i^T x >= b_i} and their analytic
// centers, i.e. minimizers of the log barrier
//
//   F(x) = -sum_i log(a_i^T x - b_i) - log(R^2 - x^T x).
//
// At the minimizer the gradient vanishes, which rearranges to
//
//   x = sum_i lambda_i a_i,   lambda_i = (R^2 - x^T x) / (2 (a_i^T x - b_i)) > 0,
//
// so the center is a conic combination of the cut normals. The reductions
// rely on that certificate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"

namespace sepopt {

enum class CutKind { Deep, Central, Shallow };

inline constexpr std::string_view to_string(CutKind kind) {
    switch (kind) {
        case CutKind::Deep: return "deep";
        case CutKind::Central: return "central";
        case CutKind::Shallow: return "shallow";
    }
    return "unknown";
}

/// Halfspace {x : normal^T x >= offset} with a unit normal.
struct Cut {
    Vector normal;
    double offset = 0.0;
    CutKind kind = CutKind::Central;
    bool pinned = false;  // never removed by drop_least_binding
};

/// Builds a cut, rescaling (a, b) so that the normal has unit length.
inline Cut make_cut(const Vector& a, double b, bool pinned = false) {
    const double norm = a.norm();
    if (norm < tol::zero) throw Error(ErrorCode::ZeroDirection, "cut normal is zero");
    return Cut{a / norm, b / norm, CutKind::Central, pinned};
}

/// Deep/central/shallow relative to a center, for cuts of the form a^T x >= b:
/// the cut is deep when it excludes the center (b > a^T center).
inline CutKind classify(const Cut& cut, const Vector& center) {
    const double at = cut.normal.dot(center);
    const double eps = 1e-12 * (1.0 + std::abs(at));
    if (cut.offset > at + eps) return CutKind::Deep;
    if (cut.offset < at - eps) return CutKind::Shallow;
    return CutKind::Central;
}

struct OuterApprox {
    int dimension = 0;
    double ball_radius = 1.0;
    std::vector<Cut> cuts;
    std::optional<Vector> center;
    std::optional<Vector> lambda;

    OuterApprox() = default;
    OuterApprox(int n, double radius) : dimension(n), ball_radius(radius) {
        if (n <= 0) throw Error(ErrorCode::DimensionMismatch, "outer approximation needs n >= 1");
        if (!(radius > 0.0)) throw Error(ErrorCode::InvalidBody, "ball radius must be positive");
    }

    std::size_t size() const { return cuts.size(); }

    void invalidate() {
        center.reset();
        lambda.reset();
    }
};

/// Slack of the ball constraint, R^2 - x^T x.
inline double ball_slack(const OuterApprox& outer, const Vector& x) {
    return outer.ball_radius * outer.ball_radius - x.squaredNorm();
}

inline Vector cut_slacks(const OuterApprox& outer, const Vector& x) {
    Vector s(static_cast<Eigen::Index>(outer.cuts.size()));
    for (std::size_t i = 0; i < outer.cuts.size(); ++i)
        s[static_cast<Eigen::Index>(i)] = outer.cuts[i].normal.dot(x) - outer.cuts[i].offset;
    return s;
}

inline bool is_interior(const OuterApprox& outer, const Vector& x) {
    if (x.size() != outer.dimension || !x.allFinite()) return false;
    if (!(ball_slack(outer, x) > 0.0)) return false;
    for (const auto& c : outer.cuts)
        if (!(c.normal.dot(x) - c.offset > 0.0)) return false;
    return true;
}

/// F(x). Throws NotInterior with the violated constraint index; the ball
/// constraint reports index == number of cuts.
inline double barrier_value(const OuterApprox& outer, const Vector& x) {
    require_dimension(outer.dimension, x.size(), "barrier point");
    double value = 0.0;
    for (std::size_t i = 0; i < outer.cuts.size(); ++i) {
        const double s = outer.cuts[i].normal.dot(x) - outer.cuts[i].offset;
        if (!(s > 0.0)) throw Error(ErrorCode::NotInterior, "cut " + std::to_string(i) + " violated", i);
        value -= std::log(s);
    }
    const double q = ball_slack(outer, x);
    if (!(q > 0.0)) throw Error(ErrorCode::NotInterior, "outside the ball", outer.cuts.size());
    return value - std::log(q);
}

inline Vector barrier_gradient(const OuterApprox& outer, const Vector& x) {
    require_dimension(outer.dimension, x.size(), "barrier point");
    const double q = ball_slack(outer, x);
    Vector g = (2.0 / q) * x;
    for (const auto& c : outer.cuts) g -= c.normal / (c.normal.dot(x) - c.offset);
    return g;
}

inline Matrix barrier_hessian(const OuterApprox& outer, const Vector& x) {
    require_dimension(outer.dimension, x.size(), "barrier point");
    const double q = ball_slack(outer, x);
    const Eigen::Index n = x.size();
    Matrix h = (2.0 / q) * Matrix::Identity(n, n) + (4.0 / (q * q)) * x * x.transpose();
    for (const auto& c : outer.cuts) {
        const double s = c.normal.dot(x) - c.offset;
        h += (c.normal * c.normal.transpose()) / (s * s);
    }
    return h;
}

/// Conic coefficients lambda_i = (R^2 - x^T x) / (2 (a_i^T x - b_i)).
inline Vector conic_coefficients(const OuterApprox& outer, const Vector& x) {
    const double q = ball_slack(outer, x);
    Vector s = cut_slacks(outer, x);
    return (q / 2.0) * s.cwiseInverse();
}

/// ||x - sum_i lambda_i a_i||; zero exactly at the analytic center.
inline double conic_residual(const OuterApprox& outer, const Vector& x, const Vector& lambda) {
    Vector r = x;
    for (std::size_t i = 0; i < outer.cuts.size(); ++i) r -= lambda[static_cast<Eigen::Index>(i)] * outer.cuts[i].normal;
    return r.norm();
}

/// Conic coefficients at a computed center, corrected by the minimum-norm
/// change that makes x = sum_i lambda_i a_i hold to rounding. Near the
/// optimum the formula is off by (q/2) grad F, and with stiff slacks the
/// gradient cannot be pushed below H * ulp(x). Falls back to the formula if
/// the correction would make a coefficient negative.
inline Vector certified_coefficients(const OuterApprox& outer, const Vector& x) {
    Vector lambda = conic_coefficients(outer, x);
    if (outer.cuts.empty()) return lambda;
    Matrix a(x.size(), static_cast<Eigen::Index>(outer.cuts.size()));
    for (std::size_t i = 0; i < outer.cuts.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = outer.cuts[i].normal;
    const Vector r = x - a * lambda;
    const Vector corrected = lambda + a.completeOrthogonalDecomposition().solve(r);
    if (corrected.allFinite() && corrected.minCoeff() >= 0.0 && (x - a * corrected).norm() < r.norm())
        return corrected;
    return lambda;
}

struct NewtonOptions {
    int max_iterations = 200;
    double gradient_tolerance = tol::newton;
    double armijo = 0.01;
};

struct CenterResult {
    Vector center;
    Vector lambda;
    int newton_iterations = 0;
    int phase1_iterations = 0;
    double gradient_norm = 0.0;
    bool hessians_positive_definite = true;  // every Newton system factored by Cholesky
};

namespace detail {

// Maximizes the smallest slack t over (x, t):
//   a_i^T x - b_i - t > 0,  ||x|| < R - t,
// by a short-step barrier path, stopping as soon as t > 0.
inline Vector phase_one(const OuterApprox& outer, const Vector& hint, CenterResult& stats) {
    const Eigen::Index n = outer.dimension;
    const double radius = outer.ball_radius;
    const auto h = outer.cuts.size();

    Vector x = hint;
    if (x.size() != n || !x.allFinite() || x.norm() >= radius) x = Vector::Zero(n);
    double t = radius - x.norm();
    for (const auto& c : outer.cuts) t = std::min(t, c.normal.dot(x) - c.offset);
    if (t > 0.0) return x;
    t -= 1.0;

    Vector z(n + 1);
    z << x, t;

    auto feasible = [&](const Vector& w) {
        const auto xs = w.head(n);
        const double ts = w[n];
        if (!(radius - ts > 0.0)) return false;
        if (!((radius - ts) * (radius - ts) - xs.squaredNorm() > 0.0)) return false;
        for (const auto& c : outer.cuts)
            if (!(c.normal.dot(xs) - c.offset - ts > 0.0)) return false;
        return true;
    };
    auto objective = [&](const Vector& w, double kappa) {
        const auto xs = w.head(n);
        const double ts = w[n];
        double v = -kappa * ts - std::log((radius - ts) * (radius - ts) - xs.squaredNorm());
        for (const auto& c : outer.cuts) v -= std::log(c.normal.dot(xs) - c.offset - ts);
        return v;
    };

    const double nu = static_cast<double>(h) + 2.0;
    const double empty_floor = 1e-13 * (1.0 + radius);
    double kappa = 1.0;
    for (int round = 0; round < 80; ++round) {
        for (int it = 0; it < 100; ++it) {
            ++stats.phase1_iterations;
            const auto xs = z.head(n);
            const double ts = z[n];
            const double u = (radius - ts) * (radius - ts) - xs.squaredNorm();
            Vector du(n + 1);
            du << -2.0 * xs, -2.0 * (radius - ts);
            Vector g = -du / u;
            g[n] -= kappa;
            Matrix hess = du * du.transpose() / (u * u);
            hess.topLeftCorner(n, n) += (2.0 / u) * Matrix::Identity(n, n);
            hess(n, n) -= 2.0 / u;
            for (const auto& c : outer.cuts) {
                Vector e(n + 1);
                e << c.normal, -1.0;
                const double s = c.normal.dot(xs) - c.offset - ts;
                g -= e / s;
                hess += e * e.transpose() / (s * s);
            }
            Eigen::LLT<Matrix> llt(hess);
            Vector step;
            if (llt.info() == Eigen::Success) {
                step = -llt.solve(g);
            } else {
                stats.hessians_positive_definite = false;
                step = -hess.completeOrthogonalDecomposition().solve(g);
            }
            const double decrement2 = -g.dot(step);
            if (!(decrement2 > 1e-18)) break;

            double alpha = 1.0;
            const double f0 = objective(z, kappa);
            while (alpha > 1e-20 && !feasible(z + alpha * step)) alpha *= 0.5;
            while (alpha > 1e-20 && objective(z + alpha * step, kappa) > f0 - 0.01 * alpha * decrement2) alpha *= 0.5;
            if (alpha <= 1e-20) break;
            z += alpha * step;
            if (z[n] > 0.0) return Vector(z.head(n));
            if (decrement2 < 1e-10) break;
        }
        if (z[n] + nu / kappa <= empty_floor) break;
        kappa *= 8.0;
    }
    throw Error(ErrorCode::EmptyInterior, "outer approximation has empty interior");
}

}  // namespace detail

/// Analytic center by damped Newton from `warm_start` (or a phase-one point
/// when the warm start is missing or not strictly interior). Full Newton
/// steps are taken once the Newton decrement drops below 1/4, where they
/// stay interior for self-concordant barriers.
inline CenterResult analytic_center(const OuterApprox& outer, const std::optional<Vector>& warm_start = std::nullopt,
                                    const NewtonOptions& options = {}) {
    CenterResult result;
    const Eigen::Index n = outer.dimension;
    for (const auto& c : outer.cuts) require_dimension(n, c.normal.size(), "cut normal");

    Vector x;
    if (warm_start && is_interior(outer, *warm_start)) {
        x = *warm_start;
    } else if (is_interior(outer, Vector::Zero(n))) {
        x = Vector::Zero(n);
    } else {
        x = detail::phase_one(outer, warm_start.value_or(Vector::Zero(n)), result);
        if (!is_interior(outer, x)) throw Error(ErrorCode::EmptyInterior, "phase one returned a boundary point");
    }

    double previous_gradient = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= options.max_iterations; ++it) {
        const Vector g = barrier_gradient(outer, x);
        result.gradient_norm = g.norm();
        if (result.gradient_norm <= options.gradient_tolerance) {
            result.center = x;
            result.lambda = certified_coefficients(outer, x);
            result.newton_iterations = it;
            return result;
        }
        if (it == options.max_iterations) break;

        const Matrix hess = barrier_hessian(outer, x);
        Eigen::LLT<Matrix> llt(hess);
        Vector step;
        if (llt.info() == Eigen::Success) {
            step = -llt.solve(g);
        } else {
            result.hessians_positive_definite = false;
            step = -g;
        }
        const double decrement2 = -g.dot(step);
        // Machine-precision floor: the step no longer moves x, or the local
        // norm has converged and the gradient stopped shrinking. With tiny
        // slacks ||grad|| can sit above the tolerance at ulp level.
        const double tol2 = options.gradient_tolerance * options.gradient_tolerance;
        const bool stalled = decrement2 < tol2 && result.gradient_norm > 0.5 * previous_gradient;
        previous_gradient = result.gradient_norm;
        if (stalled || step.norm() <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + x.norm())) {
            result.center = x;
            result.lambda = certified_coefficients(outer, x);
            result.newton_iterations = it;
            return result;
        }

        double alpha = 1.0;
        if (std::sqrt(decrement2) >= 0.25) {
            const double f0 = barrier_value(outer, x);
            while (alpha > 1e-20 && !is_interior(outer, x + alpha * step)) alpha *= 0.5;
            while (alpha > 1e-20 &&
                   barrier_value(outer, x + alpha * step) > f0 - options.armijo * alpha * decrement2)
                alpha *= 0.5;
        } else {
            while (alpha > 1e-20 && !is_interior(outer, x + alpha * step)) alpha *= 0.5;
        }
        if (alpha <= 1e-20) break;
        x += alpha * step;
    }
    throw Error(ErrorCode::NoConvergence, "analytic center Newton iteration did not converge",
                static_cast<std::size_t>(options.max_iterations));
}

/// Computes and stores the center and conic coefficients of `outer`.
inline CenterResult recenter(OuterApprox& outer, const std::optional<Vector>& warm_start = std::nullopt,
                             const NewtonOptions& options = {}) {
    CenterResult r = analytic_center(outer, warm_start, options);
    outer.center = r.center;
    outer.lambda = r.lambda;
    return r;
}

/// Appends a cut (normalized on entry) and invalidates the center. The kind
/// is classified against the pre-cut center when one is known.
inline OuterApprox add_cut(OuterApprox outer, Cut cut) {
    require_dimension(outer.dimension, cut.normal.size(), "cut normal");
    const double norm = cut.normal.norm();
    if (norm < tol::zero) throw Error(ErrorCode::ZeroDirection, "cut normal is zero");
    cut.normal /= norm;
    cut.offset /= norm;
    cut.kind = outer.center ? classify(cut, *outer.center) : CutKind::Central;
    outer.cuts.push_back(std::move(cut));
    outer.invalidate();
    return outer;
}

/// min(min_i slack_i(center), R - ||center||): the radius of a ball around
/// the center that fits inside P. It is a lower bound on the inscribed
/// radius; the true inradius is at most sqrt(n) * (h + 1) times larger.
inline double inscribed_radius_estimate(const OuterApprox& outer) {
    if (!outer.center) throw std::logic_error("inscribed_radius_estimate: center not computed");
    const Vector& w = *outer.center;
    double rho = outer.ball_radius - w.norm();
    for (const auto& c : outer.cuts) rho = std::min(rho, c.normal.dot(w) - c.offset);
    return std::max(rho, 0.0);
}

inline double inradius_factor(int n, std::size_t h) {
    return std::sqrt(static_cast<double>(n)) * (static_cast<double>(h) + 1.0);
}

/// Removes unpinned cuts with the smallest conic coefficient (the least
/// binding ones) until at most `max_cuts` remain, recentering after each.
inline OuterApprox drop_least_binding(OuterApprox outer, std::size_t max_cuts, const NewtonOptions& options = {}) {
    if (outer.cuts.size() <= max_cuts) return outer;
    if (!outer.center || !outer.lambda) throw std::logic_error("drop_least_binding: center not computed");
    while (outer.cuts.size() > max_cuts) {
        if (outer.cuts.size() <= 1) throw Error(ErrorCode::CannotDrop, "cannot drop below one cut");
        std::optional<std::size_t> victim;
        for (std::size_t i = 0; i < outer.cuts.size(); ++i) {
            if (outer.cuts[i].pinned) continue;
            if (!victim || (*outer.lambda)[static_cast<Eigen::Index>(i)] < (*outer.lambda)[static_cast<Eigen::Index>(*victim)])
                victim = i;
        }
        if (!victim) throw Error(ErrorCode::CannotDrop, "only pinned cuts remain");
        outer.cuts.erase(outer.cuts.begin() + static_cast<std::ptrdiff_t>(*victim));
        const Vector previous = *outer.center;
        outer.invalidate();
        recenter(outer, previous, options);
    }
    return outer;
}

}  // namespace sepopt
