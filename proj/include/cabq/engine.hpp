#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cabq/oracle.hpp"
#include "cabq/query_eval.hpp"

namespace cabq {

struct SearchConfig {
    double alpha = 0.5;           // weight between constraint specificity and parent performance
    int beam_width = 5;
    int max_depth = 5;            // beam iterations per phase
    double score_threshold = 0.99; // terminate once an eligible candidate reaches this p
    bool completeness_gate = true;
    bool adaptive_depth = true;   // halve the remaining depth budget at the first gate pass
    bool parallel_candidates = false;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Child priority when one constraint is removed (chase) or added
/// (backchase): alpha * (1 - u(delta)) + (1 - alpha) * parent p.
double beam_score(const ScoredConstraint& delta, double parent_performance, double alpha);

enum class Phase { Chase, Backchase };

/// One evaluated search-tree node; the JSON-lines trace serializes these.
struct TraceRecord {
    Phase phase = Phase::Chase;
    int iteration = 0;
    int candidate = 0;       // unique within a phase
    int parent = -1;         // candidate id of the spawning node, -1 for roots
    int delta_id = -1;       // constraint removed (chase) / added (backchase), -1 for roots
    std::vector<ConstraintId> constraint_ids;
    std::size_t answer_count = 0;
    double parent_performance = 0.0;
    double performance = 0.0; // p, assigned by the evaluator
    double score = 0.0;       // s, beam priority
    bool gate_passed = false; // completeness: grounded(A) within the projection
    bool sound = false;       // projection within grounded(A)

    nlohmann::json to_json() const;
};

struct PhaseOutcome {
    QueryPlan plan;
    AnswerSet answers;
    double performance = 0.0;
    bool gate_satisfied = false;      // some candidate passed the hard gate
    bool threshold_reached = false;   // terminated via p >= score_threshold
    bool timed_out = false;           // deadline hit; plan is best-so-far
    int iterations = 0;
    long evaluate_requests = 0;       // batched oracle calls issued (== iterations)
    long graph_executions = 0;
    double execution_ms = 0.0;        // time spent evaluating plans on the graph
    std::vector<TraceRecord> trace;
};

/// Shape applied to every candidate plan generated from a constraint subset.
struct PlanTemplate {
    std::string answer_var = "x0";
    std::optional<std::string> answer_type;
    std::optional<std::string> return_property;

    QueryPlan instantiate(const CTable& table) const;
};

/// Relaxation phase: beam search over subsets of the scored table, removing
/// one constraint at a time.  A candidate is acceptable once the reference
/// grounding is contained in its projection; the best acceptable candidate is
/// returned (flagged via gate_satisfied=false when none ever passed).
PhaseOutcome chase(const NLQuery& q, const CTable& scored_table, const Graph& g, Oracle& oracle,
                   const SearchConfig& cfg, const PlanTemplate& shape,
                   const ReferenceSet& reference);

/// Tightening phase: grows single-constraint subqueries back toward the pool
/// (the full scored table the universal plan was refined from), keeping
/// coverage of the reference grounding as the hard gate and terminating once
/// a candidate's performance reaches the threshold.
PhaseOutcome backchase(const NLQuery& q, const QueryPlan& universal, const CTable& pool,
                       const Graph& g, Oracle& oracle, const SearchConfig& cfg,
                       const PlanTemplate& shape, const ReferenceSet& reference);

struct RefinementResult {
    PhaseOutcome universal;
    PhaseOutcome minimal;
    std::string optimal; // "universal" | "minimal"
    double universal_performance = 0.0;
    double minimal_performance = 0.0;
    long select_evaluate_requests = 0;
};

/// Chase, then backchase, then a final batched evaluation picking the better
/// plan (ties prefer minimal).
RefinementResult refine(const NLQuery& q, const CTable& scored_table, const Graph& g, Oracle& oracle,
                        const SearchConfig& cfg, const PlanTemplate& shape);

std::string phase_name(Phase p);

} // namespace cabq
