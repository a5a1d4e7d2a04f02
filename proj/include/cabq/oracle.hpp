#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cabq/extraction.hpp"
#include "cabq/graph.hpp"

namespace cabq {

/// Reference answers for a question, grounded against the active graph.
struct ReferenceSet {
    std::set<std::string> answers;          // raw answer strings
    std::set<std::string> grounded;         // entity ids resolved via the dictionary
    std::vector<std::string> unresolved;    // answers with no grounding
    std::string source = "exact";           // exact | fixture | http | aggregated
    bool uncertain = false;                 // provider signalled low confidence
};

/// Entity grounding: case-insensitive exact match of each answer against the
/// mention dictionary.  Unresolvable answers stay in `answers` only.
ReferenceSet ground_reference(const std::set<std::string>& answers, const Graph& g,
                              const MentionDictionary& dict, std::string source);

/// All candidates of one beam step travel in a single request.
struct EvalRequest {
    NLQuery question;
    std::vector<std::pair<int, std::vector<std::string>>> candidates; // index -> projected answers

    std::string canonical_text() const;
    std::uint64_t content_hash() const;
};

struct EvalResponse {
    // (raw score on the 0-20 rubric, normalized p = raw/20)
    std::vector<std::pair<double, double>> per_candidate;
    std::optional<ReferenceSet> reference;
};

class Oracle {
public:
    virtual ~Oracle() = default;
    virtual ReferenceSet reference(const NLQuery& q) = 0;
    virtual EvalResponse evaluate(const EvalRequest& request) = 0;
};

/// Deterministic oracle built from known reference sets; candidates score
/// p = F1 against the grounding, raw = 20 * p.
class ExactOracle : public Oracle {
public:
    explicit ExactOracle(ReferenceSet ground_truth);
    explicit ExactOracle(std::map<std::string, ReferenceSet> per_question);

    ReferenceSet reference(const NLQuery& q) override;
    EvalResponse evaluate(const EvalRequest& request) override;

private:
    const ReferenceSet& truth_for(const std::string& qid) const;
    std::map<std::string, ReferenceSet> per_question_;
    std::optional<ReferenceSet> single_;
};

/// Replays recorded responses from a fixture file.  Strict: any key that was
/// never recorded raises MissingRecording.
class FixtureOracle : public Oracle {
public:
    explicit FixtureOracle(const std::string& path);

    ReferenceSet reference(const NLQuery& q) override;
    EvalResponse evaluate(const EvalRequest& request) override;

private:
    std::map<std::string, ReferenceSet> references_;
    std::map<std::string, EvalResponse> evaluations_;
};

/// Wraps an oracle and records every response into a fixture file usable by
/// FixtureOracle; flushes on destruction or explicit save().
class RecordingOracle : public Oracle {
public:
    RecordingOracle(std::shared_ptr<Oracle> inner, std::string path);
    ~RecordingOracle() override;

    ReferenceSet reference(const NLQuery& q) override;
    EvalResponse evaluate(const EvalRequest& request) override;
    void save();

private:
    std::shared_ptr<Oracle> inner_;
    std::string path_;
    std::mutex mutex_;
    std::map<std::string, ReferenceSet> references_;
    std::map<std::string, EvalResponse> evaluations_;
};

struct HttpOracleConfig {
    std::string url;      // http://host:port/path
    std::string api_key;  // sent as a bearer token when non-empty
    int timeout_ms = 60000;
    int max_tokens = 512;

    /// Environment defaults: CAB_ORACLE_URL, CAB_ORACLE_KEY, CAB_ORACLE_TIMEOUT_MS.
    static HttpOracleConfig from_environment();
};

/// Live endpoint adapter.  Sends {"prompt","max_tokens"} JSON and parses
/// plain-text responses: a semicolon-separated entity list for references
/// (the token UNKNOWN yields an empty, uncertain set) and one 0-20 score per
/// candidate for evaluations.  One retry on transport failure, then
/// OracleUnavailable.
class HttpOracle : public Oracle {
public:
    HttpOracle(HttpOracleConfig config, const Graph& g, MentionDictionary dict);

    ReferenceSet reference(const NLQuery& q) override;
    EvalResponse evaluate(const EvalRequest& request) override;

private:
    std::string post_prompt(const std::string& prompt);
    HttpOracleConfig config_;
    const Graph& graph_;
    MentionDictionary dict_;
};

/// Counts calls that actually reach the wrapped oracle.
class CountingOracle : public Oracle {
public:
    explicit CountingOracle(std::shared_ptr<Oracle> inner) : inner_(std::move(inner)) {}

    ReferenceSet reference(const NLQuery& q) override {
        ++reference_calls;
        return inner_->reference(q);
    }
    EvalResponse evaluate(const EvalRequest& request) override {
        ++evaluate_calls;
        return inner_->evaluate(request);
    }

    std::atomic<long> reference_calls{0};
    std::atomic<long> evaluate_calls{0};

private:
    std::shared_ptr<Oracle> inner_;
};

// ---- reference aggregation (multi-run consensus strategies) ----

struct MajorityVote { int runs; };
struct Intersection {};
struct MixtureOfExperts {
    // runs = [recall-expert set, precision-expert set]; optional verifier
    // keep-list applied after the intersection-then-union fallback.
    std::optional<std::set<std::string>> verifier_keep;
};
using AggregationStrategy = std::variant<MajorityVote, Intersection, MixtureOfExperts>;

/// Combine reference runs into one set.  Throws EmptyAggregate when the
/// strategy eliminates every answer.
ReferenceSet aggregate_references(const std::vector<ReferenceSet>& runs,
                                  const AggregationStrategy& strategy);

/// Reference-list wire format: semicolon-separated entities.
std::set<std::string> parse_answer_list(const std::string& text);

// JSON forms shared by fixtures, recordings and the cache layer.
nlohmann::json reference_to_json(const ReferenceSet& r);
ReferenceSet reference_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const EvalResponse& r);
EvalResponse response_from_json(const nlohmann::json& j);

} // namespace cabq
