#pragma once

// Separation from optimization, two ways.
//
// Direction search ("ours"): look for a unit c with c^T k_c < c^T p, where
// k_c maximizes c^T x over K. The search runs the analytic-center engine in
// direction space, starting from the hemisphere {c : p^T c >= 0}. A failed
// test direction c yields the cut normal
//
//   a = (p - k_c) - (c^T (p - k_c)) c,
//
// which every separating direction m with m^T c >= 0 satisfies strictly
// (m^T a > 0). Because the analytic center is a conic combination of the cut
// normals, every later query keeps m^T c >= 0, so the cuts stay valid.
//
// Polar route ("standard"): search Q_p = K* ∩ {y : p^T y >= 1}; a point y of
// Q_p gives the separating plane {x : y^T x = 1}.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "bodies.hpp"
#include "cutting_plane.hpp"

namespace sepopt {

struct ReductionConfig {
    double cut_depth = 0.0;
    std::optional<std::size_t> max_cuts;
    std::optional<double> r_min;  // overrides the delta-derived default
    int max_iterations = 0;       // 0: 64 n log2(R' / r_min)
    std::uint64_t seed = 0;       // perturbation stream for degenerate cuts
    int degenerate_retries = 5;
    NewtonOptions newton;
};

enum class Verdict { InBody, Separated };

inline constexpr std::string_view to_string(Verdict v) {
    return v == Verdict::Separated ? "separated" : "in_body";
}

struct SeparationVerdict {
    Verdict verdict = Verdict::InBody;
    Vector separator;  // ||separator||_inf = 1 when Separated
    double margin = 0.0;  // separator^T p - support(separator)
    double delta = 0.0;
    double r_min = 0.0;
    int oracle_calls = 0;
    int iterations = 0;
    EmptyReason reason = EmptyReason::None;
    std::optional<Vector> feasible_point;  // raw point found by the engine
    FeasibilityOutcome run;
};

/// Halfspace through the origin whose normal is p - k_c with its component
/// along c removed. Requires c^T (p - k_c) <= 0 (c does not separate).
inline Cut direction_cut(const Vector& c, const Vector& p, const Vector& k, double depth = 0.0) {
    require_dimension(c.size(), p.size(), "cut point");
    require_dimension(c.size(), k.size(), "cut maximizer");
    const Vector diff = p - k;
    const double along = c.dot(diff);
    if (along > 1e-9 * (1.0 + diff.norm()))
        throw std::invalid_argument("direction_cut: direction already separates (c^T (p - k) > 0)");
    const Vector a = diff - along * c;
    const double norm = a.norm();
    if (norm < tol::zero) throw Error(ErrorCode::DegenerateCut, "p - k_c is parallel to the test direction");
    return Cut{a / norm, depth, CutKind::Central, false};
}

/// Polar oracle answer in "set ⊆ {x : normal^T x >= offset}" form, plus the
/// separating vector in the classical "q^T x <= bound" form.
struct SetSeparation {
    bool member = false;
    Vector normal;
    double offset = 0.0;
    Vector separating_vector;
    double support_value = 0.0;  // y^T k_y when a support call was made
    int support_calls = 0;
};

/// y ∈ K* iff max_{x in K} y^T x <= 1; otherwise the maximizer k separates
/// (k^T y > 1 >= k^T q for every q in K*).
inline SetSeparation ssep_polar(const BodySpec& body, const Vector& y) {
    require_dimension(body.dimension, y.size(), "polar query");
    SetSeparation out;
    if (y.norm() < tol::zero) {
        out.member = true;
        return out;
    }
    const SupportResult s = support(body, y);
    out.support_calls = 1;
    out.support_value = s.value;
    if (s.value <= 1.0) {
        out.member = true;
        out.separating_vector = s.maximizer;
        return out;
    }
    const double norm = s.maximizer.norm();
    out.normal = -s.maximizer / norm;
    out.offset = -1.0 / norm;
    out.separating_vector = s.maximizer;
    return out;
}

/// Separation for Q_p = K* ∩ {y : p^T y >= 1}: the cheap halfspace test
/// first, then the polar oracle.
inline SetSeparation ssep_Qp(const BodySpec& body, const Vector& p, const Vector& y) {
    require_dimension(body.dimension, p.size(), "query point");
    require_dimension(body.dimension, y.size(), "polar query");
    if (p.dot(y) < 1.0) {
        const double norm = p.norm();
        if (norm < tol::zero) throw Error(ErrorCode::ZeroDirection, "Q_p is empty for p = 0");
        SetSeparation out;
        out.normal = p / norm;
        out.offset = 1.0 / norm;
        out.separating_vector = -p;
        return out;
    }
    return ssep_polar(body, y);
}

/// delta / (4 R sqrt(n)): the size floor used on the direction sphere.
inline double default_direction_r_min(const BodySpec& body, double delta) {
    return delta / (4.0 * body.outer_radius * std::sqrt(static_cast<double>(body.dimension)));
}

/// delta / (4 R max(R, ||p||) sqrt(n)): the size floor used for Q_p.
inline double default_polar_r_min(const BodySpec& body, const Vector& p, double delta) {
    const double scale = std::max(body.outer_radius, p.norm());
    return delta / (4.0 * body.outer_radius * scale * std::sqrt(static_cast<double>(body.dimension)));
}

namespace detail {

inline SeparationVerdict finish_separated(SeparationVerdict v, const Vector& direction, const Vector& p,
                                          const Vector& maximizer) {
    const double inf = direction.cwiseAbs().maxCoeff();
    v.verdict = Verdict::Separated;
    v.separator = direction / inf;
    v.margin = v.separator.dot(p) - v.separator.dot(maximizer);
    return v;
}

inline SeparationVerdict direction_search(const BodySpec& body, const Vector& p, double delta,
                                          const ReductionConfig& cfg, double first_offset) {
    const int n = body.dimension;
    SeparationVerdict v;
    v.delta = delta;
    v.r_min = cfg.r_min.value_or(default_direction_r_min(body, delta));

    Rng rng(cfg.seed);
    Vector last_maximizer;

    FeasibilityProblem problem;
    problem.dimension = n;
    problem.initial_radius = 1.0;
    problem.r_min = v.r_min;
    problem.cut_depth = cfg.cut_depth;
    problem.max_cuts = cfg.max_cuts;
    problem.max_iterations = cfg.max_iterations;
    problem.newton = cfg.newton;
    problem.initial_cuts.push_back(make_cut(p, first_offset, true));
    problem.oracle = [&](const Vector& center) {
        const double norm = center.norm();
        if (norm < tol::zero) throw Error(ErrorCode::CenterOriginFailure, "analytic center at the origin");
        Vector c = center / norm;
        int calls = 0;
        for (int attempt = 0;; ++attempt) {
            const SupportResult k = support(body, c);
            ++calls;
            const double d = c.dot(k.maximizer) - c.dot(p);
            if (d < 0.0) {
                last_maximizer = k.maximizer;
                return OracleAnswer::accept(c, calls);
            }
            try {
                const Cut cut = direction_cut(c, p, k.maximizer);
                return OracleAnswer::reject(c, cut.normal, 0.0, calls);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::DegenerateCut || attempt >= cfg.degenerate_retries) throw;
            }
            // Nudge c off the degenerate line and ask again.
            Vector u = rng.normal_vector(n);
            u -= u.dot(c) * c;
            if (u.norm() < tol::zero) u = Vector::Unit(n, (attempt + 1) % n);
            c = (c + 1e-8 * u.normalized()).normalized();
        }
    };

    v.run = solve_feasibility(problem);
    v.oracle_calls = v.run.support_calls;
    v.iterations = v.run.iterations;
    v.reason = v.run.reason;
    if (v.run.verdict == FeasibilityVerdict::Feasible) {
        const Vector point = *v.run.point;
        v.feasible_point = point;
        return finish_separated(std::move(v), point, p, last_maximizer);
    }
    return v;
}

}  // namespace detail

/// Separation by direction search over the cone of separating directions.
inline SeparationVerdict heuristic_reduction(const BodySpec& body, const Vector& p, double delta,
                                             const ReductionConfig& cfg = {}) {
    require_dimension(body.dimension, p.size(), "query point");
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidInstance, "delta must be positive");
    if (p.norm() < tol::zero) {
        SeparationVerdict v;
        v.delta = delta;
        return v;  // the origin is interior to K
    }
    const double first = std::min(cfg.cut_depth, 0.0);
    try {
        return detail::direction_search(body, p, delta, cfg, first);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::CenterOriginFailure) throw;
    }
    // One retry with a shallow first cut; a second failure propagates.
    return detail::direction_search(body, p, delta, cfg, std::min(first, -1e-6));
}

/// Separation by feasibility over Q_p inside the ball of radius 1 / r0,
/// which contains K*.
inline SeparationVerdict standard_reduction(const BodySpec& body, const Vector& p, double delta,
                                            const ReductionConfig& cfg = {}) {
    require_dimension(body.dimension, p.size(), "query point");
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidInstance, "delta must be positive");
    if (!(body.inner_radius > 0.0)) throw Error(ErrorCode::InvalidBody, "polar route needs inner radius r0 > 0");

    SeparationVerdict v;
    v.delta = delta;
    if (p.norm() < tol::zero) return v;
    v.r_min = cfg.r_min.value_or(default_polar_r_min(body, p, delta));

    Vector last_maximizer;
    FeasibilityProblem problem;
    problem.dimension = body.dimension;
    problem.initial_radius = 1.0 / body.inner_radius;
    problem.r_min = v.r_min;
    problem.cut_depth = cfg.cut_depth;
    problem.max_cuts = cfg.max_cuts;
    problem.max_iterations = cfg.max_iterations;
    problem.newton = cfg.newton;
    problem.oracle = [&](const Vector& y) {
        SetSeparation s = ssep_Qp(body, p, y);
        if (s.member && s.support_calls > 0 && p.dot(y) - s.support_value > 0.0) {
            last_maximizer = s.separating_vector;
            return OracleAnswer::accept(y, s.support_calls);
        }
        if (s.member) {
            // Boundary point of Q_p (zero margin, or y = 0): cut on the polar side.
            if (s.support_calls == 0) return OracleAnswer::reject(y, p, 1.0, 0);
            return OracleAnswer::reject(y, -s.separating_vector, -1.0, s.support_calls);
        }
        return OracleAnswer::reject(y, s.normal, s.offset, s.support_calls);
    };

    v.run = solve_feasibility(problem);
    v.oracle_calls = v.run.support_calls;
    v.iterations = v.run.iterations;
    v.reason = v.run.reason;
    if (v.run.verdict == FeasibilityVerdict::Feasible) {
        const Vector point = *v.run.point;
        v.feasible_point = point;
        return detail::finish_separated(std::move(v), point, p, last_maximizer);
    }
    return v;
}

}  // namespace sepopt
