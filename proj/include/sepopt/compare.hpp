#pragma once

// Runs every mode on a corpus of instances and checks the verdicts against
// the distance oracle.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <numeric>
#include <thread>

#include "io.hpp"

namespace sepopt {

struct RunOptions {
    ReductionConfig reduction;
    HeuristicConfig heuristic;
};

enum class Outcome { Separated, InBody, Inconclusive };

inline constexpr std::string_view to_string(Outcome o) {
    switch (o) {
        case Outcome::Separated: return "separated";
        case Outcome::InBody: return "in_body";
        case Outcome::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

struct RunResult {
    Mode mode = Mode::HeuristicReduction;
    Outcome outcome = Outcome::InBody;
    Vector separator;  // ||.||_inf = 1 when separated
    double margin = 0.0;
    int oracle_calls = 0;
    int iterations = 0;
    std::optional<double> r_min;
    std::string stop_reason;
    RunTrace trace;
};

inline RunResult run_mode(const Instance& inst, Mode mode, const RunOptions& options = {}) {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    RunResult r;
    r.mode = mode;
    if (mode == Mode::Heuristic) {
        if (inst.query.norm() < tol::zero) {
            r.outcome = Outcome::InBody;  // the origin is interior to K
            r.stop_reason = "origin";
            r.trace = make_trace(HeuristicOutcome{}, elapsed());
            r.trace.verdict = "in_body";
            return r;
        }
        const HeuristicOutcome h = run_heuristic(inst.body, inst.query, options.heuristic);
        r.iterations = h.iterations;
        r.oracle_calls = static_cast<int>(h.trace.size());
        if (h.inconclusive()) {
            r.outcome = Outcome::Inconclusive;
            r.stop_reason = "iteration_limit";
        } else {
            const double inf = h.separator->cwiseAbs().maxCoeff();
            r.outcome = Outcome::Separated;
            r.separator = *h.separator / inf;
            r.margin = -h.trace.back().gap / inf;
            r.stop_reason = "separator";
        }
        r.trace = make_trace(h, elapsed());
        return r;
    }
    const SeparationVerdict v = mode == Mode::HeuristicReduction
                                    ? heuristic_reduction(inst.body, inst.query, inst.delta, options.reduction)
                                    : standard_reduction(inst.body, inst.query, inst.delta, options.reduction);
    r.outcome = v.verdict == Verdict::Separated ? Outcome::Separated : Outcome::InBody;
    if (v.verdict == Verdict::Separated) {
        r.separator = v.separator;
        r.margin = v.margin;
    }
    r.oracle_calls = v.oracle_calls;
    r.iterations = v.iterations;
    r.r_min = v.r_min;
    r.stop_reason = v.verdict == Verdict::Separated ? "feasible" : std::string(to_string(v.reason));
    r.trace = make_trace(mode, v, elapsed());
    return r;
}

// ---------------------------------------------------------------------------
// Corpus

struct CorpusEntry {
    std::string id;
    std::optional<Instance> instance;
    std::string error;  // set when the file could not be loaded
};

/// Every *.json file of `dir`, sorted by name. Malformed files become
/// entries carrying the parse error.
inline std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<CorpusEntry> out;
    for (const auto& f : files) {
        CorpusEntry entry;
        entry.id = f.stem().string();
        try {
            entry.instance = load_instance(f.string());
        } catch (const std::exception& e) {
            entry.error = e.what();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

struct CorpusSpec {
    int count = 100;
    std::uint64_t seed = 1;
    int min_dimension = 2;
    int max_dimension = 6;
    double delta = 1e-3;
};

/// Random instances alternating outside/inside with margins between 2 delta
/// and 10 delta. Deterministic in the spec.
inline std::vector<CorpusEntry> generate_corpus(const CorpusSpec& spec) {
    std::vector<CorpusEntry> out;
    const int span = spec.max_dimension - spec.min_dimension + 1;
    for (int i = 0; i < spec.count; ++i) {
        const int n = spec.min_dimension + i % span;
        const std::uint64_t seed = spec.seed * 1000003ULL + static_cast<std::uint64_t>(i);
        Rng rng(seed);
        const int vertices = n + 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(2 * n));
        const double margin = spec.delta * rng.uniform(2.0, 10.0);
        const QuerySide side = i % 2 == 0 ? QuerySide::Outside : QuerySide::Inside;
        CorpusEntry entry;
        char id[64];
        std::snprintf(id, sizeof id, "rand_%03d_n%d_%s", i, n, side == QuerySide::Outside ? "out" : "in");
        entry.id = id;
        try {
            const auto inst = random_instance(n, vertices, seed, {side, margin});
            entry.instance = Instance{inst.body, inst.query, spec.delta};
        } catch (const std::exception& e) {
            entry.error = e.what();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report

struct ModeRun {
    std::string verdict;  // outcome name, or "error"
    int oracle_calls = 0;
    bool separator_verified = true;  // c^T p - support(c) > 0 and c^T p > 0
    std::string error;
};

struct ComparisonRow {
    std::string id;
    int n = 0;
    std::string true_status;  // "outside" / "inside" / "unknown"
    double distance = 0.0;
    std::optional<double> inner_margin;
    bool margin_ok = false;  // clear margin of 2 delta on the true side
    ModeRun heuristic, ours, standard;
    bool agreement = false;
    std::string error;
};

struct CallStats {
    int count = 0;
    double mean = 0.0;
    double median = 0.0;
};

struct BudgetRow {
    int n = 0;
    double t = 0.0;
    int iterations = 0;
    double cap = 0.0;  // 64 n log2(1/t)
    bool feasible = false;
    bool within_cap = false;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    int disagreements = 0;  // clear-margin rows where a reduction missed or failed
    int flagged = 0;        // rows with load or solver errors
    // mode -> side ("outside" / "inside" / "all") -> stats
    std::vector<std::tuple<std::string, std::string, CallStats>> call_stats;
    std::vector<BudgetRow> budget;
};

inline CallStats call_stats(std::vector<int> calls) {
    CallStats s;
    s.count = static_cast<int>(calls.size());
    if (calls.empty()) return s;
    std::sort(calls.begin(), calls.end());
    s.mean = std::accumulate(calls.begin(), calls.end(), 0.0) / static_cast<double>(calls.size());
    const std::size_t m = calls.size() / 2;
    s.median = calls.size() % 2 ? calls[m] : 0.5 * (calls[m - 1] + calls[m]);
    return s;
}

/// Iterations of the cutting-plane engine on {x in B_n : x_1 >= 1 - t} with
/// an exact separation oracle and r_min = t / 4.
inline std::vector<BudgetRow> cap_family_budget(const std::vector<int>& dims = {2, 4, 8},
                                                const std::vector<double>& ts = {1e-1, 1e-2, 1e-3}) {
    std::vector<BudgetRow> out;
    for (int n : dims)
        for (double t : ts) {
            FeasibilityProblem problem;
            problem.dimension = n;
            problem.initial_radius = 1.0;
            problem.r_min = t / 4.0;
            problem.oracle = [n, t](const Vector& x) {
                if (x[0] >= 1.0 - t) return OracleAnswer::accept(x, 0);
                Vector e = Vector::Zero(n);
                e[0] = 1.0;
                return OracleAnswer::reject(x, e, 1.0 - t, 0);
            };
            const auto outcome = solve_feasibility(problem);
            BudgetRow row;
            row.n = n;
            row.t = t;
            row.iterations = outcome.iterations;
            row.cap = 64.0 * n * std::log2(1.0 / t);
            row.feasible = outcome.verdict == FeasibilityVerdict::Feasible;
            row.within_cap = row.feasible && row.iterations <= row.cap;
            out.push_back(row);
        }
    return out;
}

namespace detail {

inline ModeRun run_checked(const Instance& inst, Mode mode, const RunOptions& options) {
    ModeRun m;
    try {
        const RunResult r = run_mode(inst, mode, options);
        m.verdict = std::string(to_string(r.outcome));
        m.oracle_calls = r.oracle_calls;
        if (r.outcome == Outcome::Separated) {
            const double sp = r.separator.dot(inst.query);
            m.separator_verified = sp - support(inst.body, r.separator).value > 0.0 && sp > 0.0;
        }
    } catch (const std::exception& e) {
        m.verdict = "error";
        m.error = e.what();
        m.separator_verified = false;
    }
    return m;
}

inline ComparisonRow compare_one(const CorpusEntry& entry, const RunOptions& options) {
    ComparisonRow row;
    row.id = entry.id;
    if (!entry.instance) {
        row.true_status = "unknown";
        row.error = entry.error;
        return row;
    }
    const Instance& inst = *entry.instance;
    row.n = inst.body.dimension;
    try {
        const auto dist = distance_to_body(inst.body, inst.query, 1e-10);
        row.distance = dist.distance;
        row.true_status = dist.distance > 0.0 ? "outside" : "inside";
        if (row.true_status == "outside") {
            row.margin_ok = dist.distance >= 2.0 * inst.delta;
        } else {
            row.inner_margin = inner_margin(inst.body, inst.query);
            row.margin_ok = row.inner_margin && *row.inner_margin >= 2.0 * inst.delta;
        }
    } catch (const std::exception& e) {
        row.true_status = "unknown";
        row.error = e.what();
        return row;
    }
    row.heuristic = run_checked(inst, Mode::Heuristic, options);
    row.ours = run_checked(inst, Mode::HeuristicReduction, options);
    row.standard = run_checked(inst, Mode::StandardReduction, options);
    const std::string expected = row.true_status == "outside" ? "separated" : "in_body";
    row.agreement = row.ours.verdict == expected && row.standard.verdict == expected &&
                    row.ours.separator_verified && row.standard.separator_verified &&
                    row.heuristic.separator_verified;
    for (const ModeRun* m : {&row.heuristic, &row.ours, &row.standard})
        if (!m->error.empty() && row.error.empty()) row.error = m->error;
    return row;
}

}  // namespace detail

struct CompareOptions {
    RunOptions run;
    unsigned threads = 0;  // 0: hardware concurrency
    bool budget_family = true;
};

inline ComparisonReport run_comparison(const std::vector<CorpusEntry>& corpus, const CompareOptions& options = {}) {
    ComparisonReport report;
    report.rows.resize(corpus.size());
    unsigned workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(corpus.size(), 1)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < corpus.size(); i = next++)
            report.rows[i] = detail::compare_one(corpus[i], options.run);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    std::vector<int> calls[3][2];
    for (const auto& row : report.rows) {
        if (!row.error.empty()) ++report.flagged;
        if (row.margin_ok && !row.agreement) ++report.disagreements;
        if (row.true_status == "unknown") continue;
        const int side = row.true_status == "outside" ? 0 : 1;
        int m = 0;
        for (const ModeRun* run : {&row.heuristic, &row.ours, &row.standard}) {
            if (run->verdict != "error") calls[m][side].push_back(run->oracle_calls);
            ++m;
        }
    }
    const char* names[3] = {"heuristic", "heuristic_reduction", "standard_reduction"};
    for (int m = 0; m < 3; ++m) {
        std::vector<int> all = calls[m][0];
        all.insert(all.end(), calls[m][1].begin(), calls[m][1].end());
        report.call_stats.emplace_back(names[m], "outside", call_stats(calls[m][0]));
        report.call_stats.emplace_back(names[m], "inside", call_stats(calls[m][1]));
        report.call_stats.emplace_back(names[m], "all", call_stats(all));
    }
    if (options.budget_family) report.budget = cap_family_budget();
    return report;
}

inline Json report_to_json(const ComparisonReport& report) {
    auto mode_json = [](const ModeRun& m) {
        Json j;
        j["verdict"] = m.verdict;
        j["oracle_calls"] = m.oracle_calls;
        j["separator_verified"] = m.separator_verified;
        if (!m.error.empty()) j["error"] = m.error;
        return j;
    };
    Json j;
    j["schema_version"] = schema_version;
    j["instances"] = report.rows.size();
    j["disagreements"] = report.disagreements;
    j["flagged"] = report.flagged;
    j["rows"] = Json::array();
    for (const auto& r : report.rows) {
        Json row;
        row["id"] = r.id;
        row["n"] = r.n;
        row["true_status"] = r.true_status;
        row["distance"] = r.distance;
        row["inner_margin"] = r.inner_margin ? Json(*r.inner_margin) : Json(nullptr);
        row["margin_ok"] = r.margin_ok;
        row["heuristic"] = mode_json(r.heuristic);
        row["heuristic_reduction"] = mode_json(r.ours);
        row["standard_reduction"] = mode_json(r.standard);
        row["agreement"] = r.agreement;
        row["error"] = r.error.empty() ? Json(nullptr) : Json(r.error);
        j["rows"].push_back(std::move(row));
    }
    Json stats = Json::object();
    for (const auto& [mode, side, s] : report.call_stats) {
        Json e;
        e["count"] = s.count;
        e["mean"] = s.mean;
        e["median"] = s.median;
        stats[mode][side] = std::move(e);
    }
    j["oracle_calls"] = std::move(stats);
    j["budget_family"] = Json::array();
    for (const auto& b : report.budget) {
        Json e;
        e["n"] = b.n;
        e["t"] = b.t;
        e["iterations"] = b.iterations;
        e["cap"] = b.cap;
        e["feasible"] = b.feasible;
        e["within_cap"] = b.within_cap;
        j["budget_family"].push_back(std::move(e));
    }
    return j;
}

inline std::string report_to_csv(const ComparisonReport& report) {
    std::string out =
        "id,n,true_status,distance,inner_margin,margin_ok,heuristic_verdict,heuristic_calls,"
        "ours_verdict,ours_calls,standard_verdict,standard_calls,agreement,error\n";
    char buf[128];
    for (const auto& r : report.rows) {
        std::string error = r.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        out += r.id + "," + std::to_string(r.n) + "," + r.true_status + ",";
        std::snprintf(buf, sizeof buf, "%.17g,", r.distance);
        out += buf;
        if (r.inner_margin) {
            std::snprintf(buf, sizeof buf, "%.17g", *r.inner_margin);
            out += buf;
        }
        out += std::string(",") + (r.margin_ok ? "true" : "false") + ",";
        for (const ModeRun* m : {&r.heuristic, &r.ours, &r.standard})
            out += m->verdict + "," + std::to_string(m->oracle_calls) + ",";
        out += std::string(r.agreement ? "true" : "false") + "," + error + "\n";
    }
    return out;
}

}  // namespace sepopt
