#include "cabq/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cabq/errors.hpp"
#include "cabq/metrics.hpp"

namespace fs = std::filesystem;

namespace cabq {

std::vector<QuestionRecord> load_questions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open questions file '" + path + "'");
    std::vector<QuestionRecord> out;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw ParseError(lineno, e.what());
        }
        QuestionRecord q;
        q.id = j.at("id").get<std::string>();
        q.text = j.at("question").get<std::string>();
        if (j.contains("entities")) q.entity_hints = j.at("entities").get<std::vector<std::string>>();
        if (j.contains("answers")) q.gold_answers = j.at("answers").get<std::vector<std::string>>();
        if (!seen.insert(q.id).second) throw ParseError(lineno, "duplicate question id '" + q.id + "'");
        out.push_back(std::move(q));
    }
    return out;
}

namespace {

AnswerSet filter_bindings(const AnswerSet& in, const std::vector<Binding>& keep,
                          const std::string& answer_var) {
    AnswerSet out;
    out.bindings = keep;
    for (const auto& b : out.bindings) {
        auto it = b.find(answer_var);
        if (it != b.end()) out.projected.insert(it->second);
    }
    return out;
}

// The answer variable of an answer set is implicit; post-validation recovers
// it from the bindings that actually project.
std::string infer_answer_var(const AnswerSet& answers) {
    if (answers.bindings.empty()) return {};
    for (const auto& [var, value] : answers.bindings.front()) {
        if (answers.projected.count(value)) return var;
    }
    return answers.bindings.front().begin()->first;
}

} // namespace

AnswerSet apply_post_constraints(const AnswerSet& answers, const std::vector<Constraint>& deferred,
                                 const Graph& g) {
    AnswerSet current = answers;
    const std::string answer_var = infer_answer_var(answers);

    for (const auto& d : deferred) {
        if (const auto* n = d.get_if<Negation>()) {
            std::vector<Binding> keep;
            for (const auto& b : current.bindings) {
                if (!binding_satisfies(g, b, n->inner.at(0))) keep.push_back(b);
            }
            current = filter_bindings(current, keep, answer_var);
        } else if (const auto* card = d.get_if<CardinalityLimit>()) {
            if (card->mode == CardinalityLimit::Mode::Exactly) {
                if (static_cast<int>(current.projected.size()) != card->k) {
                    current = AnswerSet{};
                }
            } else {
                // at-most k: keep the first k projected values in order
                std::set<Value> kept;
                for (const auto& v : current.projected) {
                    if (static_cast<int>(kept.size()) >= card->k) break;
                    kept.insert(v);
                }
                std::vector<Binding> keep;
                for (const auto& b : current.bindings) {
                    auto it = b.find(answer_var);
                    if (it != b.end() && kept.count(it->second)) keep.push_back(b);
                }
                current = filter_bindings(current, keep, answer_var);
            }
        } else if (const auto* ol = d.get_if<OrderLimitSpec>()) {
            std::vector<Binding> sorted = current.bindings;
            auto sort_key = [&](const Binding& b) -> std::optional<Literal> {
                auto it = b.find(ol->variable.name);
                if (it == b.end() || it->second.index() != 0) return std::nullopt;
                const Entity* e = g.find(std::get<std::string>(it->second));
                if (!e) return std::nullopt;
                auto pit = e->properties.find(ol->property);
                if (pit == e->properties.end()) return std::nullopt;
                return pit->second;
            };
            std::stable_sort(sorted.begin(), sorted.end(), [&](const Binding& a, const Binding& b) {
                const auto ka = sort_key(a), kb = sort_key(b);
                if (ka.has_value() != kb.has_value()) return ka.has_value(); // missing keys last
                if (!ka) return false;
                if (*ka == *kb) return false;
                const bool less = *ka < *kb;
                return ol->descending ? !less : less;
            });
            std::set<Value> kept;
            std::vector<Binding> keep;
            for (const auto& b : sorted) {
                auto it = b.find(answer_var);
                if (it == b.end()) continue;
                if (!kept.count(it->second) && static_cast<int>(kept.size()) >= ol->limit) continue;
                kept.insert(it->second);
                keep.push_back(b);
            }
            current = filter_bindings(current, keep, answer_var);
        } else if (const auto* agg = d.get_if<AggregateSpec>()) {
            if (agg->function != "count") throw UnsupportedAggregate(agg->function);
            AnswerSet counted;
            counted.bindings = current.bindings;
            counted.projected.insert(Value{Literal::integer(static_cast<std::int64_t>(
                current.projected.size()))});
            current = std::move(counted);
        }
    }
    return current;
}

std::vector<std::string> answer_strings(const Graph& g, const AnswerSet& answers) {
    std::vector<std::string> out;
    for (const auto& v : answers.projected) {
        if (v.index() == 0) {
            const std::string& id = std::get<std::string>(v);
            const Entity* e = g.find(id);
            if (e) {
                auto it = e->properties.find("name");
                if (it != e->properties.end() && it->second.kind() == LiteralKind::String) {
                    out.push_back(it->second.as_string());
                    continue;
                }
            }
            out.push_back(id);
        } else {
            out.push_back(std::get<Literal>(v).lexical());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---- pipeline internals ----

namespace {

/// Shared recording sink; serializes in the fixture-oracle file format.
struct RecordSink {
    std::mutex mutex;
    std::map<std::string, ReferenceSet> references;
    std::map<std::string, EvalResponse> evaluations;

    void save(const std::string& path) {
        std::lock_guard<std::mutex> lock(mutex);
        nlohmann::json j;
        j["references"] = nlohmann::json::object();
        for (const auto& [qid, ref] : references) j["references"][qid] = reference_to_json(ref);
        j["evaluations"] = nlohmann::json::object();
        for (const auto& [key, resp] : evaluations) j["evaluations"][key] = response_to_json(resp);
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write oracle recording '" + path + "'");
        out << j.dump(2) << '\n';
    }
};

class SinkRecordingOracle : public Oracle {
public:
    SinkRecordingOracle(Oracle& inner, RecordSink& sink) : inner_(inner), sink_(sink) {}

    ReferenceSet reference(const NLQuery& q) override {
        ReferenceSet r = inner_.reference(q);
        std::lock_guard<std::mutex> lock(sink_.mutex);
        sink_.references[q.id] = r;
        return r;
    }

    EvalResponse evaluate(const EvalRequest& request) override {
        EvalResponse r = inner_.evaluate(request);
        std::lock_guard<std::mutex> lock(sink_.mutex);
        sink_.evaluations[std::to_string(request.content_hash())] = r;
        return r;
    }

private:
    Oracle& inner_;
    RecordSink& sink_;
};

/// File-cache decorator; constructed per question so misses hit the
/// per-question counting layer underneath.
class CachingOracle : public Oracle {
public:
    CachingOracle(Oracle& inner, const FileCache& cache, std::string prefix)
        : inner_(inner), cache_(cache), prefix_(std::move(prefix)) {}

    ReferenceSet reference(const NLQuery& q) override {
        const std::string key = prefix_ + "|ref|" + q.id;
        if (auto hit = cache_.get("references", key)) return reference_from_json(*hit);
        ReferenceSet r = inner_.reference(q);
        cache_.put("references", key, reference_to_json(r));
        return r;
    }

    EvalResponse evaluate(const EvalRequest& request) override {
        const std::string key = prefix_ + "|eval|" + std::to_string(request.content_hash());
        if (auto hit = cache_.get("evaluations", key)) return response_from_json(*hit);
        EvalResponse r = inner_.evaluate(request);
        cache_.put("evaluations", key, response_to_json(r));
        return r;
    }

private:
    Oracle& inner_;
    const FileCache& cache_;
    std::string prefix_;
};

nlohmann::json scores_to_json(const QualityScores& s) {
    return {{"em", s.em}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

nlohmann::json plan_summary(const Graph& g, const PhaseOutcome& outcome, const AnswerSet& answers,
                            const std::string& rendered,
                            const std::optional<QualityScores>& scores) {
    nlohmann::json j;
    j["constraint_ids"] = outcome.plan.table.ids();
    j["query"] = rendered;
    j["answers"] = answer_strings(g, answers);
    j["gate_satisfied"] = outcome.gate_satisfied;
    j["threshold_reached"] = outcome.threshold_reached;
    j["iterations"] = outcome.iterations;
    if (scores) j["scores"] = scores_to_json(*scores);
    return j;
}

} // namespace

struct Pipeline::State {
    PipelineConfig config;
    std::unique_ptr<Graph> graph;
    MentionDictionary dict;
    std::unique_ptr<ConstraintSuggester> suggester;
    std::shared_ptr<Oracle> base_oracle; // fixture / http; null for exact (built per question)
    std::unique_ptr<RecordSink> record_sink;
    FileCache cache;
    std::string cache_prefix; // graph fingerprint + oracle identity
    RenderDialect dialect;

    std::atomic<long> total_reference_calls{0};
    std::atomic<long> total_evaluate_calls{0};
    std::atomic<int> shared_beam_width{0}; // may shrink under the call budget
    std::mutex trace_mutex;
};

Pipeline::Pipeline(PipelineConfig config) : state_(std::make_unique<State>()) {
    state_->config = std::move(config);
    const auto& cfg = state_->config;

    state_->graph = std::make_unique<Graph>(load_graph_file(cfg.graph_path));
    if (!cfg.dict_path.empty()) state_->dict = load_dictionary_file(cfg.dict_path);

    if (!cfg.suggester_fixture.empty()) {
        state_->suggester = std::make_unique<ScriptedSuggester>(cfg.suggester_fixture);
    } else {
        state_->suggester = std::make_unique<TokenOverlapSuggester>();
    }

    std::string oracle_identity = cfg.oracle_kind;
    if (cfg.oracle_kind == "exact") {
        // Ground truth is attached per question in run_question.
        state_->base_oracle = nullptr;
    } else if (cfg.oracle_kind == "fixture") {
        if (cfg.oracle_fixture_path.empty()) {
            throw ConfigError("fixture oracle requires --oracle-fixture");
        }
        state_->base_oracle = std::make_shared<FixtureOracle>(cfg.oracle_fixture_path);
        std::ifstream in(cfg.oracle_fixture_path);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        oracle_identity += ":" + std::to_string(fnv1a(content));
    } else if (cfg.oracle_kind == "http") {
        auto http_cfg = HttpOracleConfig::from_environment();
        http_cfg.timeout_ms = cfg.timeout_ms;
        state_->base_oracle = std::make_shared<HttpOracle>(http_cfg, *state_->graph, state_->dict);
        oracle_identity += ":" + http_cfg.url;
    } else {
        throw ConfigError("unknown oracle kind '" + cfg.oracle_kind + "'");
    }

    state_->cache = FileCache(cfg.cache_dir, cfg.cache_enabled && !cfg.cache_dir.empty());
    state_->cache_prefix =
        std::to_string(state_->graph->fingerprint()) + "|" + oracle_identity;
    if (!cfg.record_path.empty()) state_->record_sink = std::make_unique<RecordSink>();

    if (cfg.mapping_file.empty()) {
        const auto style = cfg.id_style == "url" ? RenderDialect::IdStyle::UrlBacktick
                                                 : RenderDialect::IdStyle::Plain;
        state_->dialect = cfg.dialect == "sparql" ? RenderDialect::sparql(style)
                                                  : RenderDialect::cypher(style);
    } else {
        state_->dialect = RenderDialect::load_file(cfg.mapping_file);
    }

    state_->shared_beam_width = cfg.search.beam_width;
}

Pipeline::~Pipeline() = default;

const Graph& Pipeline::graph() const { return *state_->graph; }
long Pipeline::total_reference_calls() const { return state_->total_reference_calls.load(); }
long Pipeline::total_evaluate_calls() const { return state_->total_evaluate_calls.load(); }

nlohmann::json Pipeline::run_question(const QuestionRecord& q, int beam_width_override) {
    auto& st = *state_;
    const auto& cfg = st.config;
    const Graph& g = *st.graph;
    const auto t0 = std::chrono::steady_clock::now();

    nlohmann::json record;
    record["id"] = q.id;
    record["question"] = q.text;
    record["flags"] = nlohmann::json::array();

    NLQuery query{q.text, q.id};

    // Per-question oracle stack: cache(counting(recording?(backend))).  The
    // backend is shared (fixture/http), or an exact oracle built from the
    // question's gold answers.
    std::shared_ptr<Oracle> question_base;
    std::string key_prefix = st.cache_prefix;
    if (cfg.oracle_kind == "exact") {
        std::set<std::string> answers;
        if (q.gold_answers) answers.insert(q.gold_answers->begin(), q.gold_answers->end());
        ReferenceSet truth = ground_reference(answers, g, st.dict, "exact");
        std::string gold_text;
        for (const auto& a : truth.answers) gold_text += a + ";";
        key_prefix += "|gold:" + std::to_string(fnv1a(gold_text));
        question_base = std::make_shared<ExactOracle>(std::move(truth));
    }
    Oracle& backend = question_base ? *question_base : *st.base_oracle;
    std::unique_ptr<SinkRecordingOracle> recording;
    Oracle* counted_target = &backend;
    if (st.record_sink) {
        recording = std::make_unique<SinkRecordingOracle>(backend, *st.record_sink);
        counted_target = recording.get();
    }
    auto counting = std::make_shared<CountingOracle>(
        std::shared_ptr<Oracle>(counted_target, [](Oracle*) {}));
    CachingOracle oracle(*counting, st.cache, key_prefix);

    auto finish = [&](const char* status) -> nlohmann::json& {
        record["status"] = status;
        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        double exec_ms = record.contains("timings") ? record["timings"].value("execution_ms", 0.0) : 0.0;
        record["timings"] = {{"generation_ms", std::max(0.0, wall_ms - exec_ms)},
                             {"execution_ms", exec_ms}};
        record["counters"] = {{"oracle_reference_calls", counting->reference_calls.load()},
                              {"oracle_evaluate_calls", counting->evaluate_calls.load()},
                              {"evaluate_requests",
                               record.contains("counters_requests") ? record["counters_requests"].get<long>() : 0},
                              {"graph_executions",
                               record.contains("counters_graph") ? record["counters_graph"].get<long>() : 0}};
        record.erase("counters_requests");
        record.erase("counters_graph");
        st.total_reference_calls += counting->reference_calls.load();
        st.total_evaluate_calls += counting->evaluate_calls.load();
        return record;
    };

    try {
        // Entity linking (hints bypass the linker), then the context subgraph,
        // both cache-backed.
        LinkedEntities linked;
        if (q.entity_hints) {
            for (const auto& id : *q.entity_hints) {
                if (!g.has_entity(id)) throw UnknownEntity(id);
                linked.ids.insert(id);
            }
        } else {
            const std::string link_key = key_prefix + "|link|" + q.id + "|" + q.text;
            if (auto hit = st.cache.get("links", link_key)) {
                for (const auto& id : hit->at("ids")) linked.ids.insert(id.get<std::string>());
            } else {
                linked = link_entities(query, g, st.dict);
                nlohmann::json cached;
                cached["ids"] = std::vector<std::string>(linked.ids.begin(), linked.ids.end());
                st.cache.put("links", link_key, cached);
            }
        }
        record["linked_entities"] = std::vector<std::string>(linked.ids.begin(), linked.ids.end());

        Graph subgraph;
        {
            std::string seeds;
            for (const auto& id : linked.ids) seeds += id + ",";
            const std::string sub_key =
                key_prefix + "|khop|" + std::to_string(cfg.hops) + "|" + seeds;
            if (auto hit = st.cache.get("subgraphs", sub_key)) {
                std::istringstream in(hit->at("graph").get<std::string>());
                subgraph = load_graph(in);
            } else {
                subgraph = k_hop_subgraph(g, linked.ids, cfg.hops);
                st.cache.put("subgraphs", sub_key, {{"graph", graph_to_text(subgraph)}});
            }
        }

        CTable table;
        try {
            table = build_ctable_with_subgraph(query, g, subgraph, linked, *st.suggester,
                                               cfg.match_cap);
        } catch (const EmptyAfterPruning&) {
            record["flags"].push_back("empty_after_pruning");
            record["universal"] = nullptr;
            record["minimal"] = nullptr;
            record["answers"] = nlohmann::json::array();
            if (q.gold_answers) {
                record["scores"] = scores_to_json(
                    score_answers({}, normalize_answers(*q.gold_answers)));
            }
            return finish("degenerate");
        }
        record["ctable"] = table.to_json();

        PlanTemplate shape;
        const PlanShape derived = derive_plan_shape(table);
        shape.answer_var = derived.answer_var;
        shape.answer_type = derived.answer_type;
        shape.return_property = "name";

        SearchConfig search = cfg.search;
        if (beam_width_override > 0) search.beam_width = beam_width_override;
        record["beam_width"] = search.beam_width;
        if (cfg.timeout_ms > 0) {
            search.deadline = t0 + std::chrono::milliseconds(cfg.timeout_ms);
        }

        const ReferenceSet reference = oracle.reference(query);
        record["reference"] = reference_to_json(reference);

        PhaseOutcome universal = chase(query, table, g, oracle, search, shape, reference);
        long evaluate_requests = universal.evaluate_requests;
        long graph_executions = universal.graph_executions;
        double exec_ms = universal.execution_ms;

        PhaseOutcome minimal;
        std::string optimal = "universal";
        bool short_circuited = false;
        if (universal.answers.projected.empty()) {
            record["flags"].push_back("empty_universal");
            minimal = universal;
            short_circuited = true;
        } else {
            minimal = backchase(query, universal.plan, table, g, oracle, search, shape, reference);
            evaluate_requests += minimal.evaluate_requests;
            graph_executions += minimal.graph_executions;
            exec_ms += minimal.execution_ms;

            EvalRequest select;
            select.question = query;
            select.candidates.emplace_back(0, universal.answers.projected_text());
            select.candidates.emplace_back(1, minimal.answers.projected_text());
            const EvalResponse picked = oracle.evaluate(select);
            ++evaluate_requests;
            if (picked.per_candidate.size() == 2) {
                optimal = picked.per_candidate[1].second >= picked.per_candidate[0].second
                              ? "minimal"
                              : "universal";
            }
        }

        if (!universal.gate_satisfied) record["flags"].push_back("no_complete_candidate");
        if (!short_circuited && !minimal.threshold_reached) {
            record["flags"].push_back("no_sound_candidate");
        }
        if (universal.timed_out || minimal.timed_out) record["flags"].push_back("timeout");

        // Post-validation of the deferred constraints, then rendering.
        const AnswerSet universal_answers =
            apply_post_constraints(universal.answers, universal.plan.table.deferred(), g);
        const AnswerSet minimal_answers =
            apply_post_constraints(minimal.answers, minimal.plan.table.deferred(), g);

        const std::string universal_text = render(universal.plan, st.dialect).text;
        const std::string minimal_text = render(minimal.plan, st.dialect).text;

        std::optional<QualityScores> uni_scores, min_scores, opt_scores;
        if (q.gold_answers) {
            const auto gold = normalize_answers(*q.gold_answers);
            uni_scores = score_answers(normalize_answers(answer_strings(g, universal_answers)), gold);
            min_scores = score_answers(normalize_answers(answer_strings(g, minimal_answers)), gold);
            opt_scores = optimal == "minimal" ? min_scores : uni_scores;
        }

        record["universal"] = plan_summary(g, universal, universal_answers, universal_text, uni_scores);
        record["minimal"] = plan_summary(g, minimal, minimal_answers, minimal_text, min_scores);
        record["optimal"] = optimal;
        record["answers"] =
            answer_strings(g, optimal == "minimal" ? minimal_answers : universal_answers);
        if (opt_scores) record["scores"] = scores_to_json(*opt_scores);

        record["counters_requests"] = evaluate_requests;
        record["counters_graph"] = graph_executions;
        record["timings"] = {{"execution_ms", exec_ms}};

        // Trace file per question.
        if (!cfg.out_dir.empty()) {
            std::lock_guard<std::mutex> lock(st.trace_mutex);
            fs::create_directories(fs::path(cfg.out_dir) / "traces");
            std::ofstream trace(fs::path(cfg.out_dir) / "traces" / (q.id + ".jsonl"));
            for (const auto& rec : universal.trace) trace << rec.to_json().dump() << '\n';
            for (const auto& rec : minimal.trace) trace << rec.to_json().dump() << '\n';
        }

        return finish("ok");
    } catch (const Error& e) {
        record["error"] = e.what();
        return finish("error");
    }
}

RunOutcome Pipeline::run_benchmark(const std::vector<QuestionRecord>& questions) {
    auto& st = *state_;
    const auto& cfg = st.config;

    std::vector<nlohmann::json> records(questions.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= questions.size()) break;

            int beam_width = st.shared_beam_width.load();
            records[i] = run_question(questions[i], beam_width);

            if (cfg.oracle_call_budget > 0) {
                const long used = st.total_reference_calls.load() + st.total_evaluate_calls.load();
                if (used > cfg.oracle_call_budget) {
                    int current = st.shared_beam_width.load();
                    const int halved = std::max(1, current / 2);
                    if (halved < current) st.shared_beam_width.store(halved);
                }
            }
        }
    };

    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    RunOutcome outcome;
    nlohmann::json per_question = nlohmann::json::array();
    std::vector<double> generation_ms, execution_ms;
    double em = 0, precision = 0, recall = 0, f1 = 0;
    int scored = 0;
    for (const auto& r : records) {
        per_question.push_back(r);
        const std::string status = r.value("status", "error");
        if (status == "ok") ++outcome.ok;
        else if (status == "degenerate") ++outcome.degenerate;
        else ++outcome.failed;
        if (r.contains("scores")) {
            em += r["scores"]["em"].get<double>();
            precision += r["scores"]["precision"].get<double>();
            recall += r["scores"]["recall"].get<double>();
            f1 += r["scores"]["f1"].get<double>();
            ++scored;
        }
        if (r.contains("timings")) {
            generation_ms.push_back(r["timings"]["generation_ms"].get<double>());
            execution_ms.push_back(r["timings"]["execution_ms"].get<double>());
        }
    }

    nlohmann::json report;
    report["per_question"] = std::move(per_question);
    nlohmann::json aggregate;
    if (scored > 0) {
        aggregate["em"] = em / scored;
        aggregate["p"] = precision / scored;
        aggregate["r"] = recall / scored;
        aggregate["f1"] = f1 / scored;
    } else {
        aggregate["em"] = 0.0;
        aggregate["p"] = 0.0;
        aggregate["r"] = 0.0;
        aggregate["f1"] = 0.0;
    }
    aggregate["scored_questions"] = scored;
    report["aggregate"] = std::move(aggregate);

    nlohmann::json latency;
    if (!generation_ms.empty()) {
        const auto gen = summarize_latency(generation_ms);
        const auto exec = summarize_latency(execution_ms);
        latency["p50_ms"] = gen.p50_ms;
        latency["p95_ms"] = gen.p95_ms;
        latency["execution"] = {{"p50_ms", exec.p50_ms}, {"p95_ms", exec.p95_ms}};
    } else {
        latency["p50_ms"] = 0.0;
        latency["p95_ms"] = 0.0;
        latency["execution"] = {{"p50_ms", 0.0}, {"p95_ms", 0.0}};
    }
    report["latency"] = std::move(latency);

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        std::ofstream out(fs::path(cfg.out_dir) / "report.json");
        out << report.dump(2) << '\n';
    }
    if (st.record_sink) st.record_sink->save(cfg.record_path);

    outcome.report = std::move(report);
    return outcome;
}

} // namespace cabq
