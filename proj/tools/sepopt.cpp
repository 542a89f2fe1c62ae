// sepopt: separation from an optimization oracle.
//
//   sepopt separate --instance F --mode {heuristic|ours|standard} [--delta X]
//                   [--cut-depth B] [--max-cuts H] [--seed S] [--trace F2]
//   sepopt compare  (--corpus D | --random N [--seed S]) --out F
//   sepopt trace2d  --instance F --mode M --out F
//   sepopt generate --count N --seed S --out D
//
// SEPOPT_LOG sets the log level (trace, debug, info, warn, error, off).

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sepopt/cli.hpp"

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("sepopt");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("SEPOPT_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

sepopt::Mode to_mode(const std::string& s) {
    // validated by CLI11's IsMember check
    return *sepopt::parse_mode(s);
}

const std::vector<std::string> mode_names = {"heuristic", "ours", "standard", "heuristic_reduction",
                                             "standard_reduction"};

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Convex separation from a linear optimization oracle"};
    app.require_subcommand(1);

    sepopt::SeparateOptions sep;
    std::string sep_mode = "ours";
    double delta = 0.0, cut_depth = 0.0;
    std::size_t max_cuts = 0;
    int max_iterations = 0;
    std::string trace_path;
    auto* separate = app.add_subcommand("separate", "Separate a query point from a body");
    separate->add_option("--instance", sep.instance_path, "Instance JSON file")->required();
    separate->add_option("--mode", sep_mode, "heuristic, ours or standard")->check(CLI::IsMember(mode_names));
    auto* delta_opt = separate->add_option("--delta", delta, "Override the instance tolerance");
    auto* depth_opt = separate->add_option("--cut-depth", cut_depth, "Cut depth beta <= 0");
    auto* cuts_opt = separate->add_option("--max-cuts", max_cuts, "Keep at most H cuts");
    auto* iter_opt = separate->add_option("--max-iterations", max_iterations, "Iteration cap");
    separate->add_option("--seed", sep.seed, "Seed for degenerate-cut perturbations");
    auto* trace_opt = separate->add_option("--trace", trace_path, "Write the run trace JSON here");

    sepopt::CompareCommand cmp;
    std::string corpus_dir;
    auto* compare = app.add_subcommand("compare", "Run every mode on a corpus and check against the distance oracle");
    auto* corpus_opt = compare->add_option("--corpus", corpus_dir, "Directory of instance files");
    auto* random_opt = compare->add_option("--random", cmp.generate.count, "Generate N random instances instead");
    compare->add_option("--seed", cmp.generate.seed, "Seed for --random");
    compare->add_option("--delta", cmp.generate.delta, "Tolerance for --random instances");
    compare->add_option("--threads", cmp.options.threads, "Worker threads (0: all cores)");
    compare->add_option("--out", cmp.out_path, "Report JSON path; the CSV is written next to it")->required();
    corpus_opt->excludes(random_opt);

    sepopt::Trace2dOptions t2;
    std::string t2_mode = "ours";
    auto* trace2d = app.add_subcommand("trace2d", "Write the centers and cuts of a 2D run as CSV");
    trace2d->add_option("--instance", t2.instance_path, "Instance JSON file")->required();
    trace2d->add_option("--mode", t2_mode, "heuristic, ours or standard")->check(CLI::IsMember(mode_names));
    trace2d->add_option("--out", t2.out_path, "CSV path")->required();
    trace2d->add_option("--seed", t2.seed, "Seed for degenerate-cut perturbations");

    sepopt::GenerateCommand gen;
    auto* generate = app.add_subcommand("generate", "Write a random instance corpus");
    generate->add_option("--count", gen.spec.count, "Number of instances");
    generate->add_option("--seed", gen.spec.seed, "Seed");
    generate->add_option("--delta", gen.spec.delta, "Tolerance stored in each instance");
    generate->add_option("--out", gen.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return sepopt::exit_code::usage;
    }

    sepopt::CommandResult result;
    if (separate->parsed()) {
        sep.mode = to_mode(sep_mode);
        if (*delta_opt) sep.delta = delta;
        if (*depth_opt) sep.cut_depth = cut_depth;
        if (*cuts_opt) sep.max_cuts = max_cuts;
        if (*iter_opt) sep.max_iterations = max_iterations;
        if (*trace_opt) sep.trace_path = trace_path;
        spdlog::info("separate {} mode={}", sep.instance_path, sepopt::to_string(sep.mode));
        result = sepopt::cmd_separate(sep);
    } else if (compare->parsed()) {
        if (*corpus_opt) cmp.corpus_dir = corpus_dir;
        spdlog::info("compare corpus={} out={}", cmp.corpus_dir.value_or("<random>"), cmp.out_path);
        result = sepopt::cmd_compare(cmp);
    } else if (trace2d->parsed()) {
        t2.mode = to_mode(t2_mode);
        spdlog::info("trace2d {} mode={}", t2.instance_path, sepopt::to_string(t2.mode));
        result = sepopt::cmd_trace2d(t2);
    } else {
        result = sepopt::cmd_generate(gen);
    }

    if (result.document.contains("error"))
        spdlog::error("{}: {}", result.document["error"]["code"].get<std::string>(),
                      result.document["error"]["message"].get<std::string>());
    else
        spdlog::info("exit {}", result.exit_code);
    std::cout << result.document.dump(2) << std::endl;
    return result.exit_code;
}
