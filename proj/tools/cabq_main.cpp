#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"
#include "cabq/metrics.hpp"
#include "cabq/pipeline.hpp"
#include "cabq/renderer.hpp"

namespace {

int run_command(const cabq::PipelineConfig& config, const std::string& questions_path) {
    const auto questions = cabq::load_questions_file(questions_path);
    cabq::Pipeline pipeline(config);
    const auto outcome = pipeline.run_benchmark(questions);

    const auto& agg = outcome.report["aggregate"];
    const auto& lat = outcome.report["latency"];
    std::cout << "questions: " << questions.size() << " (ok " << outcome.ok << ", degenerate "
              << outcome.degenerate << ", failed " << outcome.failed << ")\n";
    std::cout << "aggregate: EM " << agg["em"].get<double>() << "  P " << agg["p"].get<double>()
              << "  R " << agg["r"].get<double>() << "  F1 " << agg["f1"].get<double>() << "\n";
    std::cout << "generation latency: P50 " << lat["p50_ms"].get<double>() << " ms, P95 "
              << lat["p95_ms"].get<double>() << " ms\n";
    std::cout << "execution latency:  P50 " << lat["execution"]["p50_ms"].get<double>()
              << " ms, P95 " << lat["execution"]["p95_ms"].get<double>() << " ms\n";
    if (!config.out_dir.empty()) {
        std::cout << "report written to " << config.out_dir << "/report.json\n";
    }

    if (!questions.empty() && outcome.failed == static_cast<int>(questions.size())) return 3;
    return 0;
}

int render_command(const std::string& plan_path, const std::string& dialect_name,
                   const std::string& id_style, const std::string& mapping_file) {
    std::ifstream in(plan_path);
    if (!in) throw cabq::ConfigError("cannot open plan file '" + plan_path + "'");
    nlohmann::json j;
    in >> j;
    const cabq::QueryPlan plan = cabq::QueryPlan::from_json(j);

    cabq::RenderDialect dialect;
    if (!mapping_file.empty()) {
        dialect = cabq::RenderDialect::load_file(mapping_file);
    } else {
        const auto style = id_style == "url" ? cabq::RenderDialect::IdStyle::UrlBacktick
                                             : cabq::RenderDialect::IdStyle::Plain;
        dialect = dialect_name == "sparql" ? cabq::RenderDialect::sparql(style)
                                           : cabq::RenderDialect::cypher(style);
    }
    std::cout << cabq::render(plan, dialect).text << "\n";
    return 0;
}

std::set<std::string> read_answer_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cabq::ConfigError("cannot open answers file '" + path + "'");
    nlohmann::json j;
    in >> j;
    std::vector<std::string> answers;
    if (j.is_array()) answers = j.get<std::vector<std::string>>();
    else answers = j.at("answers").get<std::vector<std::string>>();
    return cabq::normalize_answers(answers);
}

int eval_command(const std::string& pred_path, const std::string& gold_path) {
    const auto predicted = read_answer_file(pred_path);
    const auto gold = read_answer_file(gold_path);
    const auto scores = cabq::score_answers(predicted, gold);
    nlohmann::json j{{"em", scores.em},
                     {"precision", scores.precision},
                     {"recall", scores.recall},
                     {"f1", scores.f1}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constraint-guided graph query generation"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run the generation pipeline over a questions file");
    cabq::PipelineConfig config;
    std::string questions_path;
    run->add_option("--graph", config.graph_path, "graph file")->required();
    run->add_option("--questions", questions_path, "questions JSONL file")->required();
    run->add_option("--dict", config.dict_path, "mention dictionary JSON");
    run->add_option("--oracle", config.oracle_kind, "exact|fixture|http")
        ->check(CLI::IsMember({"exact", "fixture", "http"}));
    run->add_option("--oracle-fixture", config.oracle_fixture_path, "fixture oracle recordings");
    run->add_option("--record", config.record_path, "record oracle traffic to this file");
    run->add_option("--alpha", config.search.alpha, "beam score weighting factor");
    run->add_option("--beam-width", config.search.beam_width, "beam width");
    run->add_option("--max-depth", config.search.max_depth, "beam iterations per phase");
    run->add_option("--score-threshold", config.search.score_threshold, "termination threshold");
    run->add_option("--match-cap", config.match_cap, "support-count cap for scoring");
    run->add_option("--k", config.hops, "k-hop neighborhood radius");
    run->add_option("--dialect", config.dialect, "cypher|sparql")
        ->check(CLI::IsMember({"cypher", "sparql"}));
    run->add_option("--id-style", config.id_style, "plain|url")
        ->check(CLI::IsMember({"plain", "url"}));
    run->add_option("--mappings", config.mapping_file, "dialect mapping-set file");
    run->add_option("--suggester-fixture", config.suggester_fixture, "scripted suggester file");
    run->add_option("--cache-dir", config.cache_dir, "cache directory");
    bool no_cache = false;
    run->add_flag("--no-cache", no_cache, "disable the cache");
    bool no_adaptive = false;
    run->add_flag("--no-adaptive-depth", no_adaptive, "disable adaptive depth bounds");
    bool parallel_candidates = false;
    run->add_flag("--parallel-candidates", parallel_candidates,
                  "execute beam candidates concurrently");
    run->add_option("--jobs", config.jobs, "question-level worker count");
    run->add_option("--timeout-ms", config.timeout_ms, "per-question timeout");
    run->add_option("--oracle-budget", config.oracle_call_budget,
                    "halve beam width once total oracle calls exceed this");
    run->add_option("--out", config.out_dir, "output directory");

    // render
    auto* render_cmd = app.add_subcommand("render", "Render a plan file to query text");
    std::string plan_path, render_dialect = "cypher", render_style = "plain", render_mappings;
    render_cmd->add_option("--plan", plan_path, "plan JSON file")->required();
    render_cmd->add_option("--dialect", render_dialect, "cypher|sparql")
        ->check(CLI::IsMember({"cypher", "sparql"}));
    render_cmd->add_option("--id-style", render_style, "plain|url")
        ->check(CLI::IsMember({"plain", "url"}));
    render_cmd->add_option("--mappings", render_mappings, "dialect mapping-set file");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Score predicted answers against gold answers");
    std::string pred_path, gold_path;
    eval_cmd->add_option("--pred", pred_path, "predicted answers JSON")->required();
    eval_cmd->add_option("--gold", gold_path, "gold answers JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            config.cache_enabled = !no_cache;
            config.search.adaptive_depth = !no_adaptive;
            config.search.parallel_candidates = parallel_candidates;
            if (config.cache_dir.empty() && !config.out_dir.empty() && !no_cache) {
                config.cache_dir = config.out_dir + "/cache";
            }
            return run_command(config, questions_path);
        }
        if (render_cmd->parsed()) {
            return render_command(plan_path, render_dialect, render_style, render_mappings);
        }
        if (eval_cmd->parsed()) {
            return eval_command(pred_path, gold_path);
        }
    } catch (const cabq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cabq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
