#pragma once

#include <set>
#include <string>
#include <vector>

namespace cabq {

struct QualityScores {
    int em = 0; // 1 iff exact set equality
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct LatencySummary {
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    std::size_t count = 0;
};

/// Trim surrounding whitespace and case-fold; applied to both sides before
/// any answer-set comparison.
std::string normalize_answer(const std::string& s);
std::set<std::string> normalize_answers(const std::vector<std::string>& raw);

/// P = |inter|/|predicted| (0 when predicted empty), R = |inter|/|gold|
/// (0 when gold empty), F1 = 2PR/(P+R) with 0 at P+R=0, EM = set equality.
QualityScores score_answers(const std::set<std::string>& predicted, const std::set<std::string>& gold);

/// Nearest-rank percentiles over the samples.  Throws EmptySamples.
LatencySummary summarize_latency(const std::vector<double>& samples_ms);

} // namespace cabq
