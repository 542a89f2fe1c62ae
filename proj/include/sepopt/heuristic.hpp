#pragma once

// Correction heuristic for separation from optimization: start from
// c = p / ||p|| and, while the maximizer k_c is not beaten by p along c,
// tilt c toward p - k_c and renormalize.

#include <optional>
#include <vector>

#include "bodies.hpp"

namespace sepopt {

struct HeuristicConfig {
    int max_iterations = 100;
    bool normalize_each_step = true;
};

struct HeuristicStep {
    Vector direction;  // c (unit length)
    Vector maximizer;  // k_c
    double gap = 0.0;  // d = c^T k_c - c^T p
};

struct HeuristicOutcome {
    std::optional<Vector> separator;  // unit c with c^T k_c < c^T p; empty means inconclusive
    int iterations = 0;
    std::vector<HeuristicStep> trace;

    bool inconclusive() const { return !separator; }
};

inline HeuristicOutcome run_heuristic(const BodySpec& body, const Vector& p, const HeuristicConfig& cfg = {}) {
    require_dimension(body.dimension, p.size(), "query point");
    if (cfg.max_iterations < 1) throw Error(ErrorCode::InvalidInstance, "heuristic needs max_iterations >= 1");
    if (p.norm() < tol::zero) throw Error(ErrorCode::ZeroDirection, "query point is the origin, which lies inside K");

    HeuristicOutcome out;
    Vector c = p / p.norm();
    int i = 0;
    while (i < cfg.max_iterations) {
        SupportResult k = support(body, c);
        const double d = c.dot(k.maximizer) - c.dot(p);
        out.trace.push_back({c, k.maximizer, d});
        if (d < 0.0) {
            out.separator = c;
            out.iterations = i + 1;
            return out;
        }
        const Vector diff = p - k.maximizer;
        const double len = diff.norm();
        if (len < tol::zero) throw Error(ErrorCode::DegenerateUpdate, "query point coincides with the maximizer");
        c += d * diff / len;
        if (c.norm() < tol::zero) throw Error(ErrorCode::DegenerateUpdate, "update cancelled the direction");
        if (cfg.normalize_each_step) c /= c.norm();
        ++i;
    }
    out.iterations = i;
    return out;
}

}  // namespace sepopt
