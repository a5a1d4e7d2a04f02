#include "cabq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"

namespace cabq {

double beam_score(const ScoredConstraint& delta, double parent_performance, double alpha) {
    return alpha * (1.0 - delta.uncertainty) + (1.0 - alpha) * parent_performance;
}

std::string phase_name(Phase p) { return p == Phase::Chase ? "chase" : "backchase"; }

nlohmann::json TraceRecord::to_json() const {
    nlohmann::json j;
    j["phase"] = phase_name(phase);
    j["iteration"] = iteration;
    j["candidate"] = candidate;
    j["parent"] = parent;
    j["delta_id"] = delta_id;
    j["constraint_ids"] = constraint_ids;
    j["answers"] = answer_count;
    j["parent_p"] = parent_performance;
    j["p"] = performance;
    j["s"] = score;
    j["gate"] = gate_passed;
    j["sound"] = sound;
    return j;
}

QueryPlan PlanTemplate::instantiate(const CTable& table) const {
    QueryPlan plan;
    plan.table = table;
    plan.answer_var = answer_var;
    plan.answer_type = answer_type;
    plan.return_vars = {answer_var};
    plan.return_property = return_property;
    return plan;
}

namespace {

/// Restriction of a table to a subset of its constraint ids.  Chase keeps
/// branches that become empty (they evaluate as match-all, preserving the
/// rule that removal only enlarges answers); backchase subqueries drop them.
CTable subset_table(const CTable& pool, const std::set<ConstraintId>& keep, bool drop_empty_branches) {
    std::vector<ScoredConstraint> constraints;
    for (const auto& sc : pool.constraints()) {
        if (keep.count(sc.id)) constraints.push_back(sc);
    }
    std::vector<std::vector<ConstraintId>> branches;
    for (const auto& branch : pool.branches()) {
        std::vector<ConstraintId> ids;
        for (ConstraintId id : branch) {
            if (keep.count(id)) ids.push_back(id);
        }
        if (!ids.empty() || !drop_empty_branches) branches.push_back(std::move(ids));
    }
    return CTable(std::move(constraints), std::move(branches), pool.deferred(), pool.normalizer());
}

struct PendingCandidate {
    std::vector<ConstraintId> ids; // sorted
    double score = 0.0;
    int parent = -1;
    int delta_id = -1;
    double parent_performance = 0.0;
};

struct EvaluatedCandidate {
    PendingCandidate seed;
    int candidate_id = 0;
    CTable table;
    AnswerSet answers;
    std::set<std::string> projected_text;
    double performance = 0.0;
    bool gate_passed = false;
    bool sound = false;
};

// (p desc, size tiebreak, ids asc); larger subsets win ties in the chase
// (maximal universal plans), smaller ones in the backchase (minimal plans).
bool better_candidate(const EvaluatedCandidate& a, const EvaluatedCandidate& b, Phase phase) {
    if (a.performance != b.performance) return a.performance > b.performance;
    if (a.seed.ids.size() != b.seed.ids.size()) {
        return phase == Phase::Chase ? a.seed.ids.size() > b.seed.ids.size()
                                     : a.seed.ids.size() < b.seed.ids.size();
    }
    return a.seed.ids < b.seed.ids;
}

bool better_pending(const PendingCandidate& a, const PendingCandidate& b, Phase phase) {
    if (a.score != b.score) return a.score > b.score;
    if (a.ids.size() != b.ids.size()) {
        return phase == Phase::Chase ? a.ids.size() > b.ids.size() : a.ids.size() < b.ids.size();
    }
    return a.ids < b.ids;
}

PhaseOutcome run_phase(Phase phase, const NLQuery& q, const CTable& pool,
                       std::vector<PendingCandidate> beam, const Graph& g, Oracle& oracle,
                       const SearchConfig& cfg, const PlanTemplate& shape,
                       const std::set<std::string>& grounded) {
    PhaseOutcome outcome;
    std::set<std::vector<ConstraintId>> visited;
    std::optional<EvaluatedCandidate> best_eligible;
    std::optional<EvaluatedCandidate> best_any;
    const bool drop_empty = phase == Phase::Backchase;

    int next_candidate = 0;
    int effective_depth = cfg.max_depth;

    while (!beam.empty() && outcome.iterations < effective_depth) {
        if (cfg.deadline && outcome.iterations > 0 &&
            std::chrono::steady_clock::now() > *cfg.deadline) {
            outcome.timed_out = true;
            break;
        }
        ++outcome.iterations;

        // Generate and execute every candidate of this beam step.
        std::vector<EvaluatedCandidate> level;
        level.reserve(beam.size());
        for (auto& pending : beam) {
            visited.insert(pending.ids);
            EvaluatedCandidate ec;
            ec.seed = std::move(pending);
            ec.candidate_id = next_candidate++;
            ec.table = subset_table(pool, {ec.seed.ids.begin(), ec.seed.ids.end()}, drop_empty);
            level.push_back(std::move(ec));
        }
        auto execute = [&](EvaluatedCandidate& ec) {
            const QueryPlan plan = shape.instantiate(ec.table);
            ec.answers = evaluate(g, plan);
            for (const auto& v : ec.answers.projected) ec.projected_text.insert(value_text(v));
            ec.gate_passed = std::all_of(grounded.begin(), grounded.end(), [&](const std::string& id) {
                return ec.projected_text.count(id) > 0;
            });
            ec.sound = std::all_of(ec.projected_text.begin(), ec.projected_text.end(),
                                   [&](const std::string& id) { return grounded.count(id) > 0; });
        };
        const auto exec_start = std::chrono::steady_clock::now();
        if (cfg.parallel_candidates && level.size() > 1) {
            std::vector<std::future<void>> futures;
            futures.reserve(level.size());
            for (auto& ec : level) {
                futures.push_back(std::async(std::launch::async, [&execute, &ec] { execute(ec); }));
            }
            for (auto& f : futures) f.get();
        } else {
            for (auto& ec : level) execute(ec);
        }
        outcome.execution_ms +=
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - exec_start)
                .count();
        outcome.graph_executions += static_cast<long>(level.size());

        // Single batched evaluator call per beam step.
        EvalRequest request;
        request.question = q;
        for (const auto& ec : level) {
            request.candidates.emplace_back(
                ec.candidate_id, std::vector<std::string>(ec.projected_text.begin(),
                                                          ec.projected_text.end()));
        }
        const EvalResponse response = oracle.evaluate(request);
        ++outcome.evaluate_requests;
        if (response.per_candidate.size() != level.size()) {
            throw MalformedResponse("evaluator returned " +
                                    std::to_string(response.per_candidate.size()) + " scores for " +
                                    std::to_string(level.size()) + " candidates");
        }

        const bool had_gate_pass = best_eligible.has_value();
        for (std::size_t i = 0; i < level.size(); ++i) {
            level[i].performance = response.per_candidate[i].second;

            TraceRecord rec;
            rec.phase = phase;
            rec.iteration = outcome.iterations;
            rec.candidate = level[i].candidate_id;
            rec.parent = level[i].seed.parent;
            rec.delta_id = level[i].seed.delta_id;
            rec.constraint_ids = level[i].seed.ids;
            rec.answer_count = level[i].answers.projected.size();
            rec.parent_performance = level[i].seed.parent_performance;
            rec.performance = level[i].performance;
            rec.score = level[i].seed.score;
            rec.gate_passed = level[i].gate_passed;
            rec.sound = level[i].sound;
            outcome.trace.push_back(std::move(rec));

            if (!best_any || better_candidate(level[i], *best_any, phase)) best_any = level[i];
            const bool eligible = !cfg.completeness_gate || level[i].gate_passed;
            if (eligible && (!best_eligible || better_candidate(level[i], *best_eligible, phase))) {
                best_eligible = level[i];
            }
        }

        if (best_eligible && best_eligible->performance >= cfg.score_threshold) {
            outcome.threshold_reached = true;
            break;
        }

        // Early completeness signal: shrink the remaining depth budget.
        if (!had_gate_pass && best_eligible && cfg.adaptive_depth) {
            const int remaining = effective_depth - outcome.iterations;
            effective_depth = outcome.iterations + (remaining + 1) / 2;
        }

        // Spawn children, one constraint away from each evaluated candidate.
        std::map<std::vector<ConstraintId>, PendingCandidate> children;
        auto offer = [&](PendingCandidate&& child) {
            if (visited.count(child.ids)) return;
            auto it = children.find(child.ids);
            if (it == children.end()) {
                children.emplace(child.ids, std::move(child));
            } else if (child.score > it->second.score) {
                it->second = std::move(child);
            }
        };
        for (const auto& ec : level) {
            if (phase == Phase::Backchase && ec.answers.projected.empty()) {
                continue; // adding constraints cannot revive an empty subquery
            }
            if (phase == Phase::Chase) {
                for (ConstraintId id : ec.seed.ids) {
                    PendingCandidate child;
                    child.ids = ec.seed.ids;
                    child.ids.erase(std::remove(child.ids.begin(), child.ids.end(), id),
                                    child.ids.end());
                    child.score = beam_score(pool.get(id), ec.performance, cfg.alpha);
                    child.parent = ec.candidate_id;
                    child.delta_id = id;
                    child.parent_performance = ec.performance;
                    offer(std::move(child));
                }
            } else {
                for (ConstraintId id : pool.ids()) {
                    if (std::binary_search(ec.seed.ids.begin(), ec.seed.ids.end(), id)) continue;
                    PendingCandidate child;
                    child.ids = ec.seed.ids;
                    child.ids.insert(std::upper_bound(child.ids.begin(), child.ids.end(), id), id);
                    child.score = beam_score(pool.get(id), ec.performance, cfg.alpha);
                    child.parent = ec.candidate_id;
                    child.delta_id = id;
                    child.parent_performance = ec.performance;
                    offer(std::move(child));
                }
            }
        }

        std::vector<PendingCandidate> next;
        next.reserve(children.size());
        for (auto& [ids, child] : children) next.push_back(std::move(child));
        std::sort(next.begin(), next.end(), [&](const PendingCandidate& a, const PendingCandidate& b) {
            return better_pending(a, b, phase);
        });
        if (static_cast<int>(next.size()) > cfg.beam_width) next.resize(cfg.beam_width);
        beam = std::move(next);
    }

    const EvaluatedCandidate* chosen = nullptr;
    if (best_eligible) {
        chosen = &*best_eligible;
        outcome.gate_satisfied = true;
    } else if (best_any) {
        chosen = &*best_any;
        outcome.gate_satisfied = false;
    } else {
        throw Error("beam search produced no candidates");
    }
    outcome.plan = shape.instantiate(chosen->table);
    outcome.answers = chosen->answers;
    outcome.performance = chosen->performance;
    return outcome;
}

} // namespace

PhaseOutcome chase(const NLQuery& q, const CTable& scored_table, const Graph& g, Oracle& oracle,
                   const SearchConfig& cfg, const PlanTemplate& shape,
                   const ReferenceSet& reference) {
    PendingCandidate root;
    root.ids = scored_table.ids();
    root.score = 0.0;
    return run_phase(Phase::Chase, q, scored_table, {root}, g, oracle, cfg, shape,
                     reference.grounded);
}

PhaseOutcome backchase(const NLQuery& q, const QueryPlan& universal, const CTable& pool,
                       const Graph& g, Oracle& oracle, const SearchConfig& cfg,
                       const PlanTemplate& shape, const ReferenceSet& reference) {
    (void)universal; // the universal plan fixes the shape; subqueries grow from the pool
    std::vector<PendingCandidate> roots;
    for (ConstraintId id : pool.ids()) {
        PendingCandidate root;
        root.ids = {id};
        root.score = 0.0;
        roots.push_back(std::move(root));
    }
    return run_phase(Phase::Backchase, q, pool, std::move(roots), g, oracle, cfg, shape,
                     reference.grounded);
}

RefinementResult refine(const NLQuery& q, const CTable& scored_table, const Graph& g, Oracle& oracle,
                        const SearchConfig& cfg, const PlanTemplate& shape) {
    const ReferenceSet reference = oracle.reference(q);

    RefinementResult result;
    result.universal = chase(q, scored_table, g, oracle, cfg, shape, reference);
    result.minimal = backchase(q, result.universal.plan, scored_table, g, oracle, cfg, shape,
                               reference);

    EvalRequest request;
    request.question = q;
    request.candidates.emplace_back(0, result.universal.answers.projected_text());
    request.candidates.emplace_back(1, result.minimal.answers.projected_text());
    const EvalResponse response = oracle.evaluate(request);
    result.select_evaluate_requests = 1;
    if (response.per_candidate.size() != 2) {
        throw MalformedResponse("optimal selection expected 2 scores");
    }
    result.universal_performance = response.per_candidate[0].second;
    result.minimal_performance = response.per_candidate[1].second;
    result.optimal = result.minimal_performance >= result.universal_performance ? "minimal"
                                                                                : "universal";
    return result;
}

} // namespace cabq
