#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cabq/cache.hpp"
#include "cabq/engine.hpp"
#include "cabq/renderer.hpp"

namespace cabq {

struct PipelineConfig {
    std::string graph_path;
    std::string dict_path;

    std::string oracle_kind = "exact"; // exact | fixture | http
    std::string oracle_fixture_path;   // recordings for the fixture oracle
    std::string record_path;           // when set, record oracle traffic here

    SearchConfig search;
    std::string dialect = "cypher"; // cypher | sparql
    std::string id_style = "plain"; // plain | url
    std::string mapping_file;       // optional dialect mapping-set override

    int hops = 2;
    long long match_cap = 10000;
    std::string suggester_fixture; // scripted suggester; empty = token-overlap

    std::string cache_dir;
    bool cache_enabled = true;

    int jobs = 1;
    int timeout_ms = 60000;
    long oracle_call_budget = 0; // > 0: halve beam width once exceeded

    std::string out_dir;
};

struct QuestionRecord {
    std::string id;
    std::string text;
    std::optional<std::vector<std::string>> entity_hints;
    std::optional<std::vector<std::string>> gold_answers;
};

/// Questions JSONL: {"id", "question", "entities"?: [ids], "answers"?: [strings]}.
std::vector<QuestionRecord> load_questions_file(const std::string& path);

/// Deferred non-monotone constraints applied to an evaluated answer set:
/// negation filters bindings, at-most truncates after ordering, exactly-k
/// fails to empty, order/limit sorts by a bound property, count aggregates.
AnswerSet apply_post_constraints(const AnswerSet& answers, const std::vector<Constraint>& deferred,
                                 const Graph& g);

/// Projected values as display strings: an entity's `name` property when
/// present, otherwise its id; literals print lexically.
std::vector<std::string> answer_strings(const Graph& g, const AnswerSet& answers);

struct RunOutcome {
    nlohmann::json report;
    int ok = 0;
    int degenerate = 0;
    int failed = 0;
};

class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);
    ~Pipeline();

    nlohmann::json run_question(const QuestionRecord& q, int beam_width_override = 0);

    /// Runs every question (respecting the configured worker count), writes
    /// report.json and per-question traces under out_dir, and returns the
    /// report.
    RunOutcome run_benchmark(const std::vector<QuestionRecord>& questions);

    const Graph& graph() const;
    long total_reference_calls() const;
    long total_evaluate_calls() const;

private:
    struct State;
    std::unique_ptr<State> state_;
};

} // namespace cabq
