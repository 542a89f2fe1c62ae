#pragma once

// Analytic-center cutting-plane engine for the feasibility problem "find a
// point of K' or conclude it is too small", given a separation oracle for K'.
// The search region starts as a ball and each non-member answer adds a cut
// placed at the current center (shifted by the cut depth).

#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "analytic_center.hpp"

namespace sepopt {

/// Oracle reply. A cut certifies K' ⊆ {x : normal^T x >= offset}; the engine
/// may relax the offset but never tightens it past the oracle's value.
struct OracleAnswer {
    bool member = false;
    Vector query;  // point actually tested (defaults to the center)
    Vector normal;
    double offset = 0.0;
    int support_calls = 0;

    static OracleAnswer accept(Vector query, int calls = 0) {
        OracleAnswer a;
        a.member = true;
        a.query = std::move(query);
        a.support_calls = calls;
        return a;
    }
    static OracleAnswer reject(Vector query, Vector normal, double offset, int calls = 0) {
        OracleAnswer a;
        a.query = std::move(query);
        a.normal = std::move(normal);
        a.offset = offset;
        a.support_calls = calls;
        return a;
    }
};

using SeparationOracle = std::function<OracleAnswer(const Vector& center)>;

struct FeasibilityProblem {
    int dimension = 0;
    double initial_radius = 1.0;
    SeparationOracle oracle;
    double r_min = 1e-6;
    double cut_depth = 0.0;  // beta <= 0; negative values give shallow cuts
    std::optional<std::size_t> max_cuts;
    int max_iterations = 0;  // 0 selects default_max_iterations()
    std::vector<Cut> initial_cuts;
    NewtonOptions newton;
};

/// 64 n log2(R' / r_min), at least 1.
inline int default_max_iterations(int n, double initial_radius, double r_min) {
    const double v = 64.0 * n * std::log2(initial_radius / r_min);
    return std::max(1, static_cast<int>(std::ceil(v)));
}

struct FeasibilityRow {
    int iteration = 0;
    Vector center;
    Vector lambda;
    double inradius = 0.0;  // smallest slack at the center, ball included
    Vector query;
    bool member = false;
    int support_calls = 0;
    std::optional<Cut> cut;
    int newton_iterations = 0;
    double gradient_norm = 0.0;
    bool hessians_positive_definite = true;
    std::vector<Vector> normals;  // cut normals the center was computed against
};

enum class FeasibilityVerdict { Feasible, DeclaredEmpty };
enum class EmptyReason { None, SizeFloor, Budget, EmptyInterior };

inline constexpr std::string_view to_string(EmptyReason r) {
    switch (r) {
        case EmptyReason::None: return "none";
        case EmptyReason::SizeFloor: return "size_floor";
        case EmptyReason::Budget: return "budget";
        case EmptyReason::EmptyInterior: return "empty_interior";
    }
    return "unknown";
}

struct FeasibilityOutcome {
    FeasibilityVerdict verdict = FeasibilityVerdict::DeclaredEmpty;
    std::optional<Vector> point;
    EmptyReason reason = EmptyReason::None;
    int iterations = 0;
    int support_calls = 0;
    std::vector<FeasibilityRow> trace;
    OuterApprox region;
};

inline FeasibilityOutcome solve_feasibility(const FeasibilityProblem& problem) {
    if (!problem.oracle) throw Error(ErrorCode::OracleFailure, "no oracle supplied");
    if (!(problem.r_min > 0.0)) throw Error(ErrorCode::InvalidInstance, "r_min must be positive");
    if (problem.cut_depth > 0.0) throw Error(ErrorCode::InvalidInstance, "cut depth must be <= 0");
    if (problem.initial_radius < problem.r_min) throw Error(ErrorCode::InvalidInstance, "initial radius below r_min");

    const int n = problem.dimension;
    const int budget = problem.max_iterations > 0
                           ? problem.max_iterations
                           : default_max_iterations(n, problem.initial_radius, problem.r_min);

    FeasibilityOutcome out;
    OuterApprox region(n, problem.initial_radius);
    for (const auto& c : problem.initial_cuts) region = add_cut(std::move(region), c);

    std::optional<Vector> warm;
    for (int iter = 0; iter < budget; ++iter) {
        CenterResult stats;
        try {
            stats = recenter(region, warm, problem.newton);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyInterior) throw;
            out.reason = EmptyReason::EmptyInterior;
            out.region = std::move(region);
            return out;
        }
        const Vector center = *region.center;
        const double rho = inscribed_radius_estimate(region);
        if (rho < problem.r_min) {
            out.reason = EmptyReason::SizeFloor;
            out.region = std::move(region);
            return out;
        }

        OracleAnswer answer;
        try {
            answer = problem.oracle(center);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::OracleFailure, e.what());
        }
        if (answer.query.size() == 0) answer.query = center;
        out.support_calls += answer.support_calls;
        ++out.iterations;

        FeasibilityRow row;
        row.iteration = iter;
        row.center = center;
        row.lambda = *region.lambda;
        row.inradius = rho;
        row.query = answer.query;
        row.member = answer.member;
        row.support_calls = answer.support_calls;
        row.newton_iterations = stats.newton_iterations + stats.phase1_iterations;
        row.gradient_norm = stats.gradient_norm;
        row.hessians_positive_definite = stats.hessians_positive_definite;
        row.normals.reserve(region.cuts.size());
        for (const auto& c : region.cuts) row.normals.push_back(c.normal);

        if (answer.member) {
            out.trace.push_back(std::move(row));
            out.verdict = FeasibilityVerdict::Feasible;
            out.point = answer.query;
            out.region = std::move(region);
            return out;
        }

        require_dimension(n, answer.normal.size(), "oracle cut normal");
        const double norm = answer.normal.norm();
        if (norm < tol::zero) throw Error(ErrorCode::OracleFailure, "oracle returned a zero cut normal");
        const Vector a = answer.normal / norm;
        const double offset = std::min(answer.offset / norm, a.dot(center)) + problem.cut_depth;
        Cut cut{a, offset, CutKind::Central, false};
        region = add_cut(std::move(region), cut);
        row.cut = region.cuts.back();
        out.trace.push_back(std::move(row));

        // Interior restart point: slide from the old center along the new
        // normal, keeping every old slack positive.
        const double new_slack = a.dot(center) - offset;
        warm.reset();
        if (new_slack >= rho) warm = center;
        else if (-new_slack < rho) warm = Vector(center + 0.5 * (rho - new_slack) * a);

        if (problem.max_cuts && region.cuts.size() > *problem.max_cuts) {
            try {
                recenter(region, warm, problem.newton);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::EmptyInterior) throw;
                out.reason = EmptyReason::EmptyInterior;
                out.region = std::move(region);
                return out;
            }
            region = drop_least_binding(std::move(region), *problem.max_cuts, problem.newton);
            warm = region.center;
        }
    }
    out.reason = EmptyReason::Budget;
    out.region = std::move(region);
    return out;
}

}  // namespace sepopt
