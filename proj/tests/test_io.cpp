#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "sepopt/cli.hpp"
#include "test_support.hpp"

using namespace sepopt;
using sepopt::testing::vec;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& name) { return std::string(SEPOPT_TEST_DATA) + "/" + name; }

Json quad_json() { return Json::parse(read_file(data("quad_outside.json"))); }

void expect_invalid(const Json& j) {
    try {
        parse_instance(j);
        FAIL() << j.dump();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidInstance) << j.dump();
    }
}

class ScratchDir {
public:
    explicit ScratchDir(const std::string& name)
        : path_(fs::temp_directory_path() / ("sepopt_" + name + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

}  // namespace

TEST(Instance, ParsesQuadFile) {
    const Instance inst = load_instance(data("quad_outside.json"));
    EXPECT_EQ(inst.body.dimension, 2);
    const auto& vs = std::get<VertexPolytope>(inst.body.shape).vertices;
    ASSERT_EQ(vs.size(), 4u);
    EXPECT_EQ(vs[3], vec({1, -2}));
    EXPECT_EQ(inst.query, vec({-0.875, -0.75}));
    EXPECT_EQ(inst.delta, 1e-3);
    EXPECT_DOUBLE_EQ(inst.body.inner_radius, 1.0 / std::sqrt(10.0));
}

TEST(Instance, RejectsMalformedDocuments) {
    Json j = quad_json();
    j["dimension"] = 0;
    expect_invalid(j);
    j["dimension"] = "2";
    expect_invalid(j);
    j = quad_json();
    j["comment"] = "extra";
    expect_invalid(j);
    j = quad_json();
    j["body"]["radius"] = 1.0;
    expect_invalid(j);
    j = quad_json();
    j.erase("delta");
    expect_invalid(j);
    j = quad_json();
    j["delta"] = -1.0;
    expect_invalid(j);
    j = quad_json();
    j["query_point"] = Json::array({1.0, 2.0, 3.0});
    expect_invalid(j);
    j = quad_json();
    j["body"]["type"] = "simplex";
    expect_invalid(j);
    j = quad_json();
    j["body"]["vertices"] = Json::array();
    expect_invalid(j);
    j = quad_json();
    j["outer_radius"] = 1.0;  // vertex (1,-2) lies outside
    expect_invalid(j);
    j = quad_json();
    j["inner_radius"] = 0.0;
    expect_invalid(j);
    EXPECT_THROW(parse_instance(std::string("{not json")), Error);
}

TEST(Instance, RoundTripIsIdempotent) {
    const std::string golden = read_file(data("random_2_3_0_outside.json"));
    EXPECT_EQ(dump_instance(parse_instance(golden)), golden);

    // The quadrilateral file uses a non-canonical layout; one pass canonicalizes it.
    const std::string once = dump_instance(load_instance(data("quad_outside.json")));
    EXPECT_EQ(dump_instance(parse_instance(once)), once);

    Instance ball{sepopt::testing::unit_ball(3), vec({0.1, 1.0 / 3.0, -2.5e-17}), 1e-6};
    const std::string text = dump_instance(ball);
    const Instance back = parse_instance(text);
    EXPECT_EQ(back.query, ball.query);
    EXPECT_EQ(std::get<Ball>(back.body.shape).radius, 1.0);
    EXPECT_EQ(dump_instance(back), text);
}

TEST(Instance, GoldenRandomFixtureIsReproducible) {
    const Instance golden = load_instance(data("random_2_3_0_outside.json"));
    const auto fresh = random_instance(2, 3, 0, {QuerySide::Outside, 0.5});
    const auto& a = std::get<VertexPolytope>(golden.body.shape).vertices;
    const auto& b = std::get<VertexPolytope>(fresh.body.shape).vertices;
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR((a[i] - b[i]).norm(), 0.0, 1e-12);
    EXPECT_NEAR((golden.query - fresh.query).norm(), 0.0, 1e-12);
    EXPECT_NEAR(golden.body.inner_radius, fresh.body.inner_radius, 1e-12);
    EXPECT_GE(sepopt::testing::reference_distance(a, golden.query), 0.5 - 1e-9);
}

TEST(Separate, QuadResultDocument) {
    SeparateOptions o;
    o.instance_path = data("quad_outside.json");
    o.mode = Mode::HeuristicReduction;
    const CommandResult r = cmd_separate(o);
    EXPECT_EQ(r.exit_code, 0);
    const Json& j = r.document;
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"schema_version", "mode", "verdict", "separator", "margin", "delta",
                                              "oracle_calls", "iterations", "r_min", "stop_reason", "tolerances"}));
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["mode"], "heuristic_reduction");
    EXPECT_EQ(j["verdict"], "separated");
    EXPECT_EQ(j["separator"][0].get<double>(), -1.0);
    EXPECT_NEAR(j["separator"][1].get<double>(), -6.0 / 7.0, 1e-15);
    // margin = (7/8 + 6/7 * 3/4) - max vertex value 1
    EXPECT_NEAR(j["margin"].get<double>(), 7.0 / 8.0 + 9.0 / 14.0 - 1.0, 1e-15);
    EXPECT_EQ(j["oracle_calls"], 1);
    EXPECT_EQ(j["tolerances"]["polar"].get<double>(), 1e-9);
}

TEST(Separate, ExitCodesFollowVerdicts) {
    SeparateOptions o;
    o.instance_path = data("quad_inside.json");
    o.mode = Mode::StandardReduction;
    EXPECT_EQ(cmd_separate(o).exit_code, 1);
    o.mode = Mode::HeuristicReduction;
    EXPECT_EQ(cmd_separate(o).exit_code, 1);

    o.mode = Mode::Heuristic;
    o.max_iterations = 50;
    const auto inconclusive = cmd_separate(o);
    EXPECT_EQ(inconclusive.exit_code, 2);
    EXPECT_EQ(inconclusive.document["verdict"], "inconclusive");
    EXPECT_EQ(inconclusive.document["oracle_calls"], 50);

    o.instance_path = data("quad_outside.json");
    const auto separated = cmd_separate(o);
    EXPECT_EQ(separated.exit_code, 0);
    EXPECT_EQ(separated.document["oracle_calls"], 1);
    EXPECT_NEAR(separated.document["separator"][1].get<double>(), -6.0 / 7.0, 1e-15);
}

TEST(Separate, InputErrors) {
    SeparateOptions o;
    o.instance_path = data("bad_dimension.json");
    auto r = cmd_separate(o);
    EXPECT_EQ(r.exit_code, 64);
    EXPECT_EQ(r.document["error"]["code"], "InvalidInstance");

    o.instance_path = data("does_not_exist.json");
    r = cmd_separate(o);
    EXPECT_EQ(r.exit_code, 66);

    o.instance_path = data("quad_outside.json");
    o.delta = -1.0;
    EXPECT_EQ(cmd_separate(o).exit_code, 64);
}

TEST(Separate, SolverErrorsCarryCodes) {
    // p = (0,1) is a vertex picked by the first query: the heuristic update
    // degenerates.
    ScratchDir dir("solver_error");
    Json j = quad_json();
    j["query_point"] = Json::array({0.0, 1.0});
    write(dir.file("vertex.json"), j.dump());
    SeparateOptions o;
    o.instance_path = dir.file("vertex.json");
    o.mode = Mode::Heuristic;
    const auto r = cmd_separate(o);
    EXPECT_EQ(r.exit_code, 70);
    EXPECT_EQ(r.document["error"]["code"], "DegenerateUpdate");
}

TEST(Separate, TraceFileIsConsistent) {
    ScratchDir dir("trace");
    for (Mode mode : {Mode::Heuristic, Mode::HeuristicReduction, Mode::StandardReduction}) {
        SeparateOptions o;
        o.instance_path = data("quad_inside.json");
        o.mode = mode;
        o.trace_path = dir.file("trace.json");
        const auto r = cmd_separate(o);
        ASSERT_LT(r.exit_code, 3);
        EXPECT_EQ(r.document["trace_path"], *o.trace_path);
        const Json t = Json::parse(read_file(*o.trace_path));
        EXPECT_EQ(t["mode"], to_string(mode));
        EXPECT_EQ(t["verdict"], r.document["verdict"]);
        int calls = 0, expected_iter = 0;
        for (const auto& row : t["rows"]) {
            EXPECT_EQ(row["iter"], expected_iter++);
            calls += row["support_calls"].get<int>();
            EXPECT_EQ(row["center"].size(), 2u);
            if (!row["cut"].is_null()) {
                EXPECT_EQ(row["cut"]["a"].size(), 2u);
                EXPECT_TRUE(row["cut"]["kind"] == "central" || row["cut"]["kind"] == "deep" ||
                            row["cut"]["kind"] == "shallow");
            }
        }
        EXPECT_EQ(t["oracle_calls"], calls);
        EXPECT_EQ(r.document["oracle_calls"], calls);
        EXPECT_GE(t["wall_time"].get<double>(), 0.0);
    }
}

TEST(Trace2d, QuadSingleRow) {
    ScratchDir dir("trace2d");
    Trace2dOptions o;
    o.instance_path = data("quad_outside.json");
    o.mode = Mode::HeuristicReduction;
    o.out_path = dir.file("quad.csv");
    EXPECT_EQ(cmd_trace2d(o).exit_code, 0);
    const auto lines = lines_of(read_file(o.out_path));
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], "iteration,center_x,center_y,cut_ax,cut_ay,cut_b");
    EXPECT_EQ(lines[1].substr(0, 2), "0,");
    EXPECT_EQ(lines[1].substr(lines[1].size() - 2), ",,");  // member row: no cut
}

TEST(Trace2d, InteriorRunsToSizeFloor) {
    ScratchDir dir("trace2d_inside");
    Trace2dOptions o;
    o.instance_path = data("quad_inside.json");
    o.mode = Mode::StandardReduction;
    o.out_path = dir.file("inside.csv");
    const auto r = cmd_trace2d(o);
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_EQ(r.document["stop_reason"], "size_floor");
    const auto lines = lines_of(read_file(o.out_path));
    EXPECT_EQ(lines.size(), r.document["rows"].get<std::size_t>() + 1);
    EXPECT_GT(lines.size(), 3u);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream in(lines[i]);
        std::vector<double> cols;
        for (std::string cell; std::getline(in, cell, ',');) cols.push_back(std::stod(cell));
        ASSERT_EQ(cols.size(), 6u);
        EXPECT_EQ(cols[0], static_cast<double>(i - 1));
        EXPECT_NEAR(cols[3] * cols[3] + cols[4] * cols[4], 1.0, 1e-12);
    }
}

TEST(Trace2d, RejectsOtherDimensions) {
    ScratchDir dir("trace2d_3d");
    Instance inst{sepopt::testing::unit_ball(3), vec({0, 0, 2}), 1e-3};
    write(dir.file("ball3.json"), dump_instance(inst));
    Trace2dOptions o;
    o.instance_path = dir.file("ball3.json");
    o.out_path = dir.file("out.csv");
    const auto r = cmd_trace2d(o);
    EXPECT_EQ(r.exit_code, 64);
    EXPECT_EQ(r.document["error"]["code"], "DimensionNot2D");
}

TEST(Compare, EmptyCorpus) {
    ScratchDir dir("compare_empty");
    fs::create_directories(dir.path() / "corpus");
    CompareCommand c;
    c.corpus_dir = (dir.path() / "corpus").string();
    c.out_path = dir.file("report.json");
    c.options.budget_family = false;
    const auto r = cmd_compare(c);
    EXPECT_EQ(r.exit_code, 0);
    const Json report = Json::parse(read_file(c.out_path));
    EXPECT_EQ(report["instances"], 0);
    EXPECT_EQ(report["rows"].size(), 0u);
    EXPECT_EQ(report["disagreements"], 0);
    EXPECT_EQ(lines_of(read_file(dir.file("report.csv"))).size(), 1u);
}

TEST(Compare, MalformedFileIsFlagged) {
    ScratchDir dir("compare_mixed");
    const fs::path corpus = dir.path() / "corpus";
    fs::create_directories(corpus);
    fs::copy_file(data("quad_outside.json"), corpus / "a_outside.json");
    fs::copy_file(data("quad_inside.json"), corpus / "b_inside.json");
    fs::copy_file(data("bad_dimension.json"), corpus / "c_bad.json");
    write((corpus / "notes.txt").string(), "ignored");
    CompareCommand c;
    c.corpus_dir = corpus.string();
    c.out_path = dir.file("report.json");
    c.options.budget_family = false;
    ASSERT_EQ(cmd_compare(c).exit_code, 0);
    const Json report = Json::parse(read_file(c.out_path));
    ASSERT_EQ(report["rows"].size(), 3u);
    EXPECT_EQ(report["flagged"], 1);
    EXPECT_EQ(report["disagreements"], 0);
    EXPECT_EQ(report["rows"][0]["true_status"], "outside");
    EXPECT_TRUE(report["rows"][0]["agreement"].get<bool>());
    EXPECT_EQ(report["rows"][0]["heuristic_reduction"]["oracle_calls"], 1);
    EXPECT_EQ(report["rows"][1]["true_status"], "inside");
    EXPECT_TRUE(report["rows"][1]["agreement"].get<bool>());
    EXPECT_NEAR(report["rows"][1]["inner_margin"].get<double>(), 0.5, 1e-12);
    EXPECT_EQ(report["rows"][2]["true_status"], "unknown");
    EXPECT_FALSE(report["rows"][2]["error"].is_null());
    EXPECT_EQ(lines_of(read_file(dir.file("report.csv"))).size(), 4u);
}

TEST(Compare, GeneratedCorpusIsDeterministicAcrossThreadCounts) {
    CorpusSpec spec;
    spec.count = 12;
    spec.seed = 5;
    const auto corpus = generate_corpus(spec);
    CompareOptions one;
    one.threads = 1;
    one.budget_family = false;
    CompareOptions three = one;
    three.threads = 3;
    const auto a = run_comparison(corpus, one);
    const auto b = run_comparison(corpus, three);
    EXPECT_EQ(a.disagreements, 0);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_TRUE(a.rows[i].margin_ok) << a.rows[i].id;
        EXPECT_TRUE(a.rows[i].agreement) << a.rows[i].id;
        EXPECT_EQ(a.rows[i].ours.oracle_calls, b.rows[i].ours.oracle_calls);
        EXPECT_EQ(a.rows[i].standard.oracle_calls, b.rows[i].standard.oracle_calls);
        EXPECT_EQ(a.rows[i].heuristic.verdict, b.rows[i].heuristic.verdict);
    }
    EXPECT_EQ(report_to_json(a)["rows"], report_to_json(b)["rows"]);
}

TEST(Compare, CallStatistics) {
    const auto s = call_stats({5, 1, 3, 100});
    EXPECT_EQ(s.count, 4);
    EXPECT_DOUBLE_EQ(s.mean, 27.25);
    EXPECT_DOUBLE_EQ(s.median, 4.0);
    EXPECT_EQ(call_stats({}).count, 0);
    EXPECT_DOUBLE_EQ(call_stats({7, 2, 9}).median, 7.0);
}
