#pragma once

// Command implementations behind the sepopt executable. Each returns the
// process exit code and the JSON document to print on stdout.
//
//   0  separated          1  in body        2  inconclusive (heuristic)
//   64 malformed input    66 unreadable input
//   70 solver error       73 cannot write output

#include <filesystem>
#include <fstream>

#include "compare.hpp"

namespace sepopt {

namespace exit_code {
inline constexpr int separated = 0;
inline constexpr int in_body = 1;
inline constexpr int inconclusive = 2;
inline constexpr int usage = 64;
inline constexpr int no_input = 66;
inline constexpr int software = 70;
inline constexpr int cant_create = 73;
}  // namespace exit_code

struct CommandResult {
    int exit_code = 0;
    Json document;
};

struct SeparateOptions {
    std::string instance_path;
    Mode mode = Mode::HeuristicReduction;
    std::optional<double> delta;
    std::optional<double> cut_depth;
    std::optional<std::size_t> max_cuts;
    std::optional<int> max_iterations;
    std::uint64_t seed = 0;
    std::optional<std::string> trace_path;
};

inline RunOptions run_options(const SeparateOptions& o) {
    RunOptions r;
    if (o.cut_depth) r.reduction.cut_depth = *o.cut_depth;
    r.reduction.max_cuts = o.max_cuts;
    r.reduction.seed = o.seed;
    if (o.max_iterations) {
        r.reduction.max_iterations = *o.max_iterations;
        r.heuristic.max_iterations = *o.max_iterations;
    }
    return r;
}

namespace detail {

inline CommandResult failure(int code, std::string_view kind, const std::string& message, std::optional<Mode> mode = {}) {
    CommandResult r;
    r.exit_code = code;
    r.document["schema_version"] = schema_version;
    if (mode) r.document["mode"] = to_string(*mode);
    r.document["error"] = {{"code", kind}, {"message", message}};
    return r;
}

inline CommandResult from_error(const Error& e, std::optional<Mode> mode) {
    const bool input = e.code() == ErrorCode::InvalidInstance || e.code() == ErrorCode::DimensionMismatch ||
                       e.code() == ErrorCode::DimensionNot2D;
    return failure(input ? exit_code::usage : exit_code::software, to_string(e.code()), e.message(), mode);
}

/// Loads an instance, mapping failures to exit codes.
inline std::variant<Instance, CommandResult> load_for_command(const std::string& path, std::optional<Mode> mode) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        return failure(exit_code::no_input, "NoInput", e.what(), mode);
    }
    try {
        return parse_instance(text);
    } catch (const Error& e) {
        return from_error(e, mode);
    }
}

inline bool write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

inline int outcome_exit_code(Outcome o) {
    switch (o) {
        case Outcome::Separated: return exit_code::separated;
        case Outcome::InBody: return exit_code::in_body;
        case Outcome::Inconclusive: return exit_code::inconclusive;
    }
    return exit_code::software;
}

}  // namespace detail

inline Json result_to_json(const RunResult& r, double delta, const std::optional<std::string>& trace_path) {
    Json j;
    j["schema_version"] = schema_version;
    j["mode"] = to_string(r.mode);
    j["verdict"] = to_string(r.outcome);
    if (r.outcome == Outcome::Separated) {
        j["separator"] = to_json(r.separator);
        j["margin"] = r.margin;
    }
    j["delta"] = delta;
    j["oracle_calls"] = r.oracle_calls;
    j["iterations"] = r.iterations;
    j["r_min"] = r.r_min ? Json(*r.r_min) : Json(nullptr);
    j["stop_reason"] = r.stop_reason;
    if (trace_path) j["trace_path"] = *trace_path;
    j["tolerances"] = tolerances_json();
    return j;
}

inline CommandResult cmd_separate(const SeparateOptions& o) {
    auto loaded = detail::load_for_command(o.instance_path, o.mode);
    if (auto* fail = std::get_if<CommandResult>(&loaded)) return *fail;
    Instance inst = std::get<Instance>(std::move(loaded));
    if (o.delta) {
        if (!(*o.delta > 0.0)) return detail::failure(exit_code::usage, "InvalidInstance", "delta must be positive", o.mode);
        inst.delta = *o.delta;
    }
    RunResult r;
    try {
        r = run_mode(inst, o.mode, run_options(o));
    } catch (const Error& e) {
        return detail::from_error(e, o.mode);
    } catch (const std::exception& e) {
        return detail::failure(exit_code::software, "Internal", e.what(), o.mode);
    }
    if (o.trace_path && !detail::write_text(*o.trace_path, trace_to_json(r.trace).dump(2) + "\n"))
        return detail::failure(exit_code::cant_create, "CannotWrite", "cannot write " + *o.trace_path, o.mode);
    return {detail::outcome_exit_code(r.outcome), result_to_json(r, inst.delta, o.trace_path)};
}

struct Trace2dOptions {
    std::string instance_path;
    Mode mode = Mode::HeuristicReduction;
    std::string out_path;
    std::uint64_t seed = 0;
};

/// Writes the 2D trace CSV. The exit code follows the verdict, as for
/// `separate`.
inline CommandResult cmd_trace2d(const Trace2dOptions& o) {
    auto loaded = detail::load_for_command(o.instance_path, o.mode);
    if (auto* fail = std::get_if<CommandResult>(&loaded)) return *fail;
    const Instance inst = std::get<Instance>(std::move(loaded));
    if (inst.body.dimension != 2)
        return detail::from_error(Error(ErrorCode::DimensionNot2D, "trace2d needs a two-dimensional instance"), o.mode);
    SeparateOptions so;
    so.seed = o.seed;
    RunResult r;
    std::string csv;
    try {
        r = run_mode(inst, o.mode, run_options(so));
        csv = trace_to_csv2d(r.trace);
    } catch (const Error& e) {
        return detail::from_error(e, o.mode);
    }
    if (!detail::write_text(o.out_path, csv))
        return detail::failure(exit_code::cant_create, "CannotWrite", "cannot write " + o.out_path, o.mode);
    Json j = result_to_json(r, inst.delta, std::nullopt);
    j["csv_path"] = o.out_path;
    j["rows"] = r.trace.rows.size();
    return {detail::outcome_exit_code(r.outcome), std::move(j)};
}

struct CompareCommand {
    std::optional<std::string> corpus_dir;  // otherwise a generated corpus
    CorpusSpec generate;
    std::string out_path;  // JSON report; the CSV goes next to it
    CompareOptions options;
};

inline CommandResult cmd_compare(const CompareCommand& c) {
    std::vector<CorpusEntry> corpus;
    if (c.corpus_dir) {
        std::error_code ec;
        if (!std::filesystem::is_directory(*c.corpus_dir, ec))
            return detail::failure(exit_code::no_input, "NoInput", "not a directory: " + *c.corpus_dir);
        corpus = load_corpus(*c.corpus_dir);
    } else {
        corpus = generate_corpus(c.generate);
    }
    const ComparisonReport report = run_comparison(corpus, c.options);
    Json j = report_to_json(report);
    std::filesystem::path csv = c.out_path;
    csv.replace_extension(".csv");
    if (!detail::write_text(c.out_path, j.dump(2) + "\n") || !detail::write_text(csv, report_to_csv(report)))
        return detail::failure(exit_code::cant_create, "CannotWrite", "cannot write " + c.out_path);

    Json summary;
    summary["schema_version"] = schema_version;
    summary["instances"] = report.rows.size();
    summary["disagreements"] = report.disagreements;
    summary["flagged"] = report.flagged;
    summary["oracle_calls"] = j["oracle_calls"];
    summary["report"] = c.out_path;
    summary["csv"] = csv.string();
    return {0, std::move(summary)};
}

struct GenerateCommand {
    CorpusSpec spec;
    std::string out_dir;
};

/// Writes a random corpus as instance files, one per entry.
inline CommandResult cmd_generate(const GenerateCommand& g) {
    std::error_code ec;
    std::filesystem::create_directories(g.out_dir, ec);
    Json j;
    j["schema_version"] = schema_version;
    j["files"] = Json::array();
    for (const auto& e : generate_corpus(g.spec)) {
        if (!e.instance) return detail::failure(exit_code::software, "DegenerateInstance", e.error);
        const auto path = std::filesystem::path(g.out_dir) / (e.id + ".json");
        if (!detail::write_text(path, dump_instance(*e.instance)))
            return detail::failure(exit_code::cant_create, "CannotWrite", "cannot write " + path.string());
        j["files"].push_back(path.string());
    }
    return {0, std::move(j)};
}

}  // namespace sepopt
