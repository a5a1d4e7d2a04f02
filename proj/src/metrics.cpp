#include "cabq/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "cabq/errors.hpp"

namespace cabq {

std::string normalize_answer(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out = s.substr(b, e - b);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::set<std::string> normalize_answers(const std::vector<std::string>& raw) {
    std::set<std::string> out;
    for (const auto& s : raw) out.insert(normalize_answer(s));
    return out;
}

QualityScores score_answers(const std::set<std::string>& predicted, const std::set<std::string>& gold) {
    QualityScores q;
    std::size_t inter = 0;
    for (const auto& p : predicted) inter += gold.count(p);
    q.precision = predicted.empty() ? 0.0 : static_cast<double>(inter) / predicted.size();
    q.recall = gold.empty() ? 0.0 : static_cast<double>(inter) / gold.size();
    q.f1 = (q.precision + q.recall) == 0.0 ? 0.0
                                           : 2.0 * q.precision * q.recall / (q.precision + q.recall);
    q.em = predicted == gold ? 1 : 0;
    return q;
}

LatencySummary summarize_latency(const std::vector<double>& samples_ms) {
    if (samples_ms.empty()) throw EmptySamples();
    std::vector<double> sorted = samples_ms;
    std::sort(sorted.begin(), sorted.end());
    auto nearest_rank = [&](double pct) {
        const auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * sorted.size()));
        return sorted[std::max<std::size_t>(rank, 1) - 1];
    };
    LatencySummary s;
    s.p50_ms = nearest_rank(50.0);
    s.p95_ms = nearest_rank(95.0);
    s.count = sorted.size();
    return s;
}

} // namespace cabq
