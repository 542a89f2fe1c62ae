#pragma once

// Instance files, result documents, run traces and the 2D trace CSV.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heuristic.hpp"
#include "reductions.hpp"

namespace sepopt {

using Json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

struct Instance {
    BodySpec body;
    Vector query;
    double delta = 1e-3;
};

enum class Mode { Heuristic, HeuristicReduction, StandardReduction };

inline constexpr std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::Heuristic: return "heuristic";
        case Mode::HeuristicReduction: return "heuristic_reduction";
        case Mode::StandardReduction: return "standard_reduction";
    }
    return "unknown";
}

/// Accepts the canonical names plus the CLI aliases "ours" and "standard".
inline std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "heuristic") return Mode::Heuristic;
    if (s == "ours" || s == "heuristic_reduction") return Mode::HeuristicReduction;
    if (s == "standard" || s == "standard_reduction") return Mode::StandardReduction;
    return std::nullopt;
}

inline Json to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

namespace detail {

[[noreturn]] inline void bad_instance(const std::string& what) { throw Error(ErrorCode::InvalidInstance, what); }

inline void check_keys(const Json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) bad_instance(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) bad_instance("unknown field '" + key + "' in " + where);
    }
    for (auto a : allowed)
        if (!j.contains(std::string(a))) bad_instance("missing field '" + std::string(a) + "' in " + where);
}

inline double number(const Json& j, const std::string& what) {
    if (!j.is_number()) bad_instance(what + " must be a number");
    return j.get<double>();
}

inline Vector vector(const Json& j, int n, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        bad_instance(what + " must be an array of " + std::to_string(n) + " numbers");
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = number(j[static_cast<std::size_t>(i)], what);
    return v;
}

}  // namespace detail

/// Parses and validates an instance document. Every field is required and
/// unknown fields are rejected. Throws InvalidInstance.
inline Instance parse_instance(const Json& j) {
    using namespace detail;
    check_keys(j, {"dimension", "body", "outer_radius", "inner_radius", "query_point", "delta"}, "instance");
    const Json& dim = j["dimension"];
    if (!dim.is_number_integer() || dim.get<long long>() < 1) bad_instance("dimension must be a positive integer");
    if (dim.get<long long>() > 4096) bad_instance("dimension too large");
    const int n = dim.get<int>();

    Instance inst;
    inst.body.dimension = n;
    const Json& body = j["body"];
    if (!body.is_object() || !body.contains("type") || !body["type"].is_string())
        bad_instance("body must be an object with a string 'type'");
    const std::string type = body["type"].get<std::string>();
    if (type == "vertex_polytope") {
        check_keys(body, {"type", "vertices"}, "body");
        const Json& vs = body["vertices"];
        if (!vs.is_array() || vs.empty()) bad_instance("vertices must be a non-empty array");
        VertexPolytope poly;
        for (std::size_t i = 0; i < vs.size(); ++i) poly.vertices.push_back(vector(vs[i], n, "vertex " + std::to_string(i)));
        inst.body.shape = std::move(poly);
    } else if (type == "ball") {
        check_keys(body, {"type", "center", "radius"}, "body");
        inst.body.shape = Ball{vector(body["center"], n, "center"), number(body["radius"], "radius")};
    } else {
        bad_instance("unknown body type '" + type + "'");
    }
    inst.body.outer_radius = number(j["outer_radius"], "outer_radius");
    inst.body.inner_radius = number(j["inner_radius"], "inner_radius");
    inst.query = vector(j["query_point"], n, "query_point");
    inst.delta = number(j["delta"], "delta");
    if (!(inst.delta > 0.0) || !std::isfinite(inst.delta)) bad_instance("delta must be positive");
    if (!(inst.body.inner_radius > 0.0)) bad_instance("inner_radius must be positive");
    if (!inst.query.allFinite()) bad_instance("query_point must be finite");
    try {
        validate(inst.body);
    } catch (const Error& e) {
        bad_instance(e.message());
    }
    return inst;
}

inline Instance parse_instance(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        detail::bad_instance(std::string("not valid JSON: ") + e.what());
    }
    return parse_instance(j);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Instance load_instance(const std::string& path) { return parse_instance(read_file(path)); }

/// Canonical form: fields in schema order, shortest round-trip floats.
inline Json instance_to_json(const Instance& inst) {
    Json body;
    if (const auto* poly = std::get_if<VertexPolytope>(&inst.body.shape)) {
        body["type"] = "vertex_polytope";
        body["vertices"] = Json::array();
        for (const auto& v : poly->vertices) body["vertices"].push_back(to_json(v));
    } else if (const auto* ball = std::get_if<Ball>(&inst.body.shape)) {
        body["type"] = "ball";
        body["center"] = to_json(ball->center);
        body["radius"] = ball->radius;
    } else {
        throw Error(ErrorCode::InvalidInstance, "affine images have no file representation");
    }
    Json j;
    j["dimension"] = inst.body.dimension;
    j["body"] = std::move(body);
    j["outer_radius"] = inst.body.outer_radius;
    j["inner_radius"] = inst.body.inner_radius;
    j["query_point"] = to_json(inst.query);
    j["delta"] = inst.delta;
    return j;
}

inline std::string dump_instance(const Instance& inst) { return instance_to_json(inst).dump(2) + "\n"; }

inline Json tolerances_json() {
    Json t;
    t["zero"] = tol::zero;
    t["support"] = tol::support;
    t["polar"] = tol::polar;
    t["newton"] = tol::newton;
    return t;
}

// ---------------------------------------------------------------------------
// Run traces

struct TraceRow {
    int iter = 0;
    Vector center;           // analytic center, or the heuristic's direction
    Vector query_direction;  // point handed to the oracle
    std::string oracle_answer;
    std::optional<Cut> cut;
    std::optional<double> inradius_estimate;
    int support_calls = 0;
};

struct RunTrace {
    Mode mode = Mode::HeuristicReduction;
    std::vector<TraceRow> rows;
    std::string verdict;
    int oracle_calls = 0;
    double wall_time = 0.0;  // seconds
};

inline RunTrace make_trace(Mode mode, const SeparationVerdict& v, double wall_time) {
    RunTrace t;
    t.mode = mode;
    t.verdict = std::string(to_string(v.verdict));
    t.oracle_calls = v.oracle_calls;
    t.wall_time = wall_time;
    for (const auto& r : v.run.trace) {
        TraceRow row;
        row.iter = r.iteration;
        row.center = r.center;
        row.query_direction = r.query;
        row.oracle_answer = r.member ? "member" : "cut";
        row.cut = r.cut;
        row.inradius_estimate = r.inradius;
        row.support_calls = r.support_calls;
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline RunTrace make_trace(const HeuristicOutcome& h, double wall_time) {
    RunTrace t;
    t.mode = Mode::Heuristic;
    t.verdict = h.inconclusive() ? "inconclusive" : "separated";
    t.oracle_calls = static_cast<int>(h.trace.size());
    t.wall_time = wall_time;
    for (std::size_t i = 0; i < h.trace.size(); ++i) {
        TraceRow row;
        row.iter = static_cast<int>(i);
        row.center = h.trace[i].direction;
        row.query_direction = h.trace[i].direction;
        row.oracle_answer = h.trace[i].gap < 0.0 ? "separator" : "update";
        row.support_calls = 1;
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Json trace_to_json(const RunTrace& t) {
    Json j;
    j["mode"] = to_string(t.mode);
    j["rows"] = Json::array();
    for (const auto& r : t.rows) {
        Json row;
        row["iter"] = r.iter;
        row["center"] = to_json(r.center);
        row["query_direction"] = to_json(r.query_direction);
        row["oracle_answer"] = r.oracle_answer;
        if (r.cut) {
            Json c;
            c["a"] = to_json(r.cut->normal);
            c["b"] = r.cut->offset;
            c["kind"] = to_string(r.cut->kind);
            row["cut"] = std::move(c);
        } else {
            row["cut"] = nullptr;
        }
        row["inradius_estimate"] = r.inradius_estimate ? Json(*r.inradius_estimate) : Json(nullptr);
        row["support_calls"] = r.support_calls;
        j["rows"].push_back(std::move(row));
    }
    j["verdict"] = t.verdict;
    j["oracle_calls"] = t.oracle_calls;
    j["wall_time"] = t.wall_time;
    return j;
}

/// CSV with columns iteration,center_x,center_y,cut_ax,cut_ay,cut_b; the cut
/// columns are empty on rows without a cut. 17 significant digits.
inline std::string trace_to_csv2d(const RunTrace& t) {
    std::string out = "iteration,center_x,center_y,cut_ax,cut_ay,cut_b\n";
    char buf[256];
    for (const auto& r : t.rows) {
        if (r.center.size() != 2) throw Error(ErrorCode::DimensionNot2D, "trace is not two-dimensional");
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,", r.iter, r.center[0], r.center[1]);
        out += buf;
        if (r.cut) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", r.cut->normal[0], r.cut->normal[1], r.cut->offset);
            out += buf;
        } else {
            out += ",,";
        }
        out += '\n';
    }
    return out;
}

}  // namespace sepopt
