#include "cabq/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"
#include "cabq/metrics.hpp"

namespace cabq {

ReferenceSet ground_reference(const std::set<std::string>& answers, const Graph& g,
                              const MentionDictionary& dict, std::string source) {
    ReferenceSet ref;
    ref.answers = answers;
    ref.source = std::move(source);
    for (const auto& answer : answers) {
        const std::string key = normalize_answer(answer);
        auto it = dict.find(key);
        if (it != dict.end() && g.has_entity(it->second)) {
            ref.grounded.insert(it->second);
        } else {
            ref.unresolved.push_back(answer);
        }
    }
    return ref;
}

std::string EvalRequest::canonical_text() const {
    std::ostringstream ss;
    ss << question.id << '\n' << question.text << '\n';
    for (const auto& [idx, answers] : candidates) {
        ss << idx << ':';
        for (const auto& a : answers) ss << a << ';';
        ss << '\n';
    }
    return ss.str();
}

std::uint64_t EvalRequest::content_hash() const {
    return fnv1a(canonical_text());
}

nlohmann::json reference_to_json(const ReferenceSet& r) {
    nlohmann::json j;
    j["answers"] = std::vector<std::string>(r.answers.begin(), r.answers.end());
    j["grounded"] = std::vector<std::string>(r.grounded.begin(), r.grounded.end());
    j["unresolved"] = r.unresolved;
    j["source"] = r.source;
    j["uncertain"] = r.uncertain;
    return j;
}

ReferenceSet reference_from_json(const nlohmann::json& j) {
    ReferenceSet r;
    for (const auto& a : j.value("answers", std::vector<std::string>{})) r.answers.insert(a);
    for (const auto& gnd : j.value("grounded", std::vector<std::string>{})) r.grounded.insert(gnd);
    r.unresolved = j.value("unresolved", std::vector<std::string>{});
    r.source = j.value("source", std::string("fixture"));
    r.uncertain = j.value("uncertain", false);
    return r;
}

nlohmann::json response_to_json(const EvalResponse& r) {
    nlohmann::json j;
    auto scores = nlohmann::json::array();
    for (const auto& [raw, p] : r.per_candidate) scores.push_back({raw, p});
    j["per_candidate"] = std::move(scores);
    if (r.reference) j["reference"] = reference_to_json(*r.reference);
    return j;
}

EvalResponse response_from_json(const nlohmann::json& j) {
    EvalResponse r;
    for (const auto& pair : j.at("per_candidate")) {
        r.per_candidate.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
    if (j.contains("reference")) r.reference = reference_from_json(j.at("reference"));
    return r;
}

namespace {

std::string eval_key(const EvalRequest& request) {
    return std::to_string(request.content_hash());
}

} // namespace

// ---- ExactOracle ----

ExactOracle::ExactOracle(ReferenceSet ground_truth) : single_(std::move(ground_truth)) {}

ExactOracle::ExactOracle(std::map<std::string, ReferenceSet> per_question)
    : per_question_(std::move(per_question)) {}

const ReferenceSet& ExactOracle::truth_for(const std::string& qid) const {
    if (single_) return *single_;
    auto it = per_question_.find(qid);
    if (it == per_question_.end()) throw MissingRecording(qid);
    return it->second;
}

ReferenceSet ExactOracle::reference(const NLQuery& q) {
    return truth_for(q.id);
}

EvalResponse ExactOracle::evaluate(const EvalRequest& request) {
    const ReferenceSet& truth = truth_for(request.question.id);
    const auto gold = normalize_answers(
        std::vector<std::string>(truth.grounded.begin(), truth.grounded.end()));
    EvalResponse response;
    for (const auto& [idx, answers] : request.candidates) {
        (void)idx;
        const auto predicted = normalize_answers(answers);
        const double p = score_answers(predicted, gold).f1;
        response.per_candidate.emplace_back(20.0 * p, p);
    }
    response.reference = truth;
    return response;
}

// ---- FixtureOracle ----

FixtureOracle::FixtureOracle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open oracle fixture '" + path + "'");
    nlohmann::json j;
    in >> j;
    if (j.contains("references")) {
        for (auto it = j["references"].begin(); it != j["references"].end(); ++it) {
            references_[it.key()] = reference_from_json(it.value());
        }
    }
    if (j.contains("evaluations")) {
        for (auto it = j["evaluations"].begin(); it != j["evaluations"].end(); ++it) {
            evaluations_[it.key()] = response_from_json(it.value());
        }
    }
}

ReferenceSet FixtureOracle::reference(const NLQuery& q) {
    auto it = references_.find(q.id);
    if (it == references_.end()) throw MissingRecording("reference:" + q.id);
    return it->second;
}

EvalResponse FixtureOracle::evaluate(const EvalRequest& request) {
    auto it = evaluations_.find(eval_key(request));
    if (it == evaluations_.end()) throw MissingRecording("evaluation:" + eval_key(request));
    return it->second;
}

// ---- RecordingOracle ----

RecordingOracle::RecordingOracle(std::shared_ptr<Oracle> inner, std::string path)
    : inner_(std::move(inner)), path_(std::move(path)) {}

RecordingOracle::~RecordingOracle() {
    try {
        save();
    } catch (...) {
        // destructor must not throw; an unsaved recording surfaces as a
        // MissingRecording on replay
    }
}

ReferenceSet RecordingOracle::reference(const NLQuery& q) {
    ReferenceSet r = inner_->reference(q);
    std::lock_guard<std::mutex> lock(mutex_);
    references_[q.id] = r;
    return r;
}

EvalResponse RecordingOracle::evaluate(const EvalRequest& request) {
    EvalResponse r = inner_->evaluate(request);
    std::lock_guard<std::mutex> lock(mutex_);
    evaluations_[eval_key(request)] = r;
    return r;
}

void RecordingOracle::save() {
    std::lock_guard<std::mutex> lock(mutex_);
    nlohmann::json j;
    j["references"] = nlohmann::json::object();
    for (const auto& [qid, ref] : references_) j["references"][qid] = reference_to_json(ref);
    j["evaluations"] = nlohmann::json::object();
    for (const auto& [key, resp] : evaluations_) j["evaluations"][key] = response_to_json(resp);
    std::ofstream out(path_);
    if (!out) throw ConfigError("cannot write oracle recording '" + path_ + "'");
    out << j.dump(2) << '\n';
}

// ---- HttpOracle ----

HttpOracleConfig HttpOracleConfig::from_environment() {
    HttpOracleConfig cfg;
    if (const char* url = std::getenv("CAB_ORACLE_URL")) cfg.url = url;
    if (const char* key = std::getenv("CAB_ORACLE_KEY")) cfg.api_key = key;
    if (const char* timeout = std::getenv("CAB_ORACLE_TIMEOUT_MS")) cfg.timeout_ms = std::atoi(timeout);
    return cfg;
}

HttpOracle::HttpOracle(HttpOracleConfig config, const Graph& g, MentionDictionary dict)
    : config_(std::move(config)), graph_(g), dict_(std::move(dict)) {
    if (config_.url.empty()) throw ConfigError("oracle endpoint URL is not configured");
}

namespace {

struct ParsedUrl {
    std::string host_port; // scheme://host:port
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

std::string HttpOracle::post_prompt(const std::string& prompt) {
    const auto parsed = split_url(config_.url);
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        httplib::Client client(parsed.host_port);
        client.set_connection_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        httplib::Headers headers;
        if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
        nlohmann::json payload{{"prompt", prompt}, {"max_tokens", config_.max_tokens}};
        auto res = client.Post(parsed.path, headers, payload.dump(), "application/json");
        if (res && res->status >= 200 && res->status < 300) return res->body;
        last_error = res ? "status " + std::to_string(res->status) : "transport failure";
    }
    throw OracleUnavailable(last_error);
}

std::set<std::string> parse_answer_list(const std::string& text) {
    std::set<std::string> out;
    std::stringstream ss(text);
    std::string segment;
    while (std::getline(ss, segment, ';')) {
        std::size_t b = 0, e = segment.size();
        while (b < e && std::isspace(static_cast<unsigned char>(segment[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(segment[e - 1]))) --e;
        if (e > b) out.insert(segment.substr(b, e - b));
    }
    return out;
}

ReferenceSet HttpOracle::reference(const NLQuery& q) {
    std::ostringstream prompt;
    prompt << "Question: " << q.text << "\n"
           << "List the answer entities as one semicolon-separated line. "
           << "Only include entities you are confident exist in the knowledge graph. "
           << "If you are not confident, output UNKNOWN. No explanations.";
    const std::string body = post_prompt(prompt.str());

    std::string first_line = body.substr(0, body.find('\n'));
    if (normalize_answer(first_line) == "unknown") {
        ReferenceSet ref;
        ref.source = "http";
        ref.uncertain = true;
        return ref;
    }
    auto answers = parse_answer_list(first_line);
    if (answers.empty()) throw MalformedResponse(body.substr(0, 120));
    ReferenceSet ref = ground_reference(answers, graph_, dict_, "http");
    return ref;
}

EvalResponse HttpOracle::evaluate(const EvalRequest& request) {
    std::ostringstream prompt;
    prompt << "You are scoring candidate answer sets for a question over a knowledge graph.\n"
           << "Question: " << request.question.text << "\n"
           << "Candidates:\n";
    for (const auto& [idx, answers] : request.candidates) {
        prompt << idx << ": ";
        bool first = true;
        for (const auto& a : answers) {
            if (!first) prompt << "; ";
            prompt << a;
            first = false;
        }
        prompt << "\n";
    }
    prompt << "Assign each candidate a score from 0 to 20 (0 = irrelevant or incorrect, "
           << "20 = highly relevant and likely correct; use the full range; score empty "
           << "candidates 0; identical candidates get identical scores).\n"
           << "Reply with one line per candidate: <index>: <score>";

    const std::string body = post_prompt(prompt.str());

    EvalResponse response;
    std::map<int, double> scores;
    std::stringstream ss(body);
    std::string line;
    while (std::getline(ss, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        if (normalize_answer(line.substr(0, colon)) == "reference") {
            auto answers = parse_answer_list(line.substr(colon + 1));
            response.reference = ground_reference(answers, graph_, dict_, "http");
            continue;
        }
        try {
            const int idx = std::stoi(line.substr(0, colon));
            const double raw = std::stod(line.substr(colon + 1));
            scores[idx] = raw;
        } catch (const std::exception&) {
            // tolerate chatter lines
        }
    }
    for (const auto& [idx, answers] : request.candidates) {
        (void)answers;
        auto it = scores.find(idx);
        if (it == scores.end()) throw MalformedResponse(body.substr(0, 120));
        const double raw = std::min(20.0, std::max(0.0, it->second));
        response.per_candidate.emplace_back(raw, raw / 20.0);
    }
    return response;
}

// ---- aggregation ----

ReferenceSet aggregate_references(const std::vector<ReferenceSet>& runs,
                                  const AggregationStrategy& strategy) {
    if (runs.empty()) throw EmptyAggregate();

    auto union_of = [](const std::vector<ReferenceSet>& rs) {
        std::set<std::string> u;
        for (const auto& r : rs) u.insert(r.answers.begin(), r.answers.end());
        return u;
    };
    auto intersection_of = [](const std::vector<ReferenceSet>& rs) {
        std::set<std::string> inter = rs.front().answers;
        for (std::size_t i = 1; i < rs.size(); ++i) {
            std::set<std::string> next;
            for (const auto& a : inter) {
                if (rs[i].answers.count(a)) next.insert(a);
            }
            inter = std::move(next);
        }
        return inter;
    };

    std::set<std::string> result;
    if (const auto* majority = std::get_if<MajorityVote>(&strategy)) {
        const int needed = (majority->runs + 1) / 2;
        std::map<std::string, int> votes;
        for (const auto& r : runs) {
            for (const auto& a : r.answers) ++votes[a];
        }
        for (const auto& [answer, count] : votes) {
            if (count >= needed) result.insert(answer);
        }
    } else if (std::holds_alternative<Intersection>(strategy)) {
        result = intersection_of(runs);
    } else {
        const auto& moe = std::get<MixtureOfExperts>(strategy);
        result = intersection_of(runs);
        if (result.empty()) result = union_of(runs);
        if (moe.verifier_keep) {
            std::set<std::string> kept;
            for (const auto& a : result) {
                if (moe.verifier_keep->count(a)) kept.insert(a);
            }
            result = std::move(kept);
        }
    }

    if (result.empty()) throw EmptyAggregate();
    ReferenceSet out;
    out.answers = std::move(result);
    out.source = "aggregated";
    // Callers re-ground the surviving answers; per-run groundings cannot be
    // attributed back to individual answers here.
    return out;
}

} // namespace cabq
