#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

#include "stereocrawl/csv.hpp"
#include "stereocrawl/error.hpp"
#include "stereocrawl/harm.hpp"
#include "stereocrawl/parallel.hpp"

namespace stereocrawl {

double quantile(std::span<const double> values, double q) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "quantile of an empty list");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SubjectHarmSummary summarize_subject(std::span<const Triple> triples,
                                     std::span<const RegardLabel> labels,
                                     std::span<const ToxicityScore> toxicities) {
    if (triples.empty()) throw Error(ErrorCode::EmptyInput, "no triples to summarize");
    if (labels.size() != triples.size() || toxicities.size() != triples.size()) {
        throw Error(ErrorCode::MisalignedInput, "triples, labels and scores differ in length");
    }
    SubjectHarmSummary s;
    s.subject = triples.front().subject;
    for (const auto& t : triples) {
        if (t.subject != s.subject) {
            throw Error(ErrorCode::MisalignedInput,
                        "triples mix subjects \"" + s.subject + "\" and \"" + t.subject + "\"");
        }
    }
    for (RegardLabel l : labels) {
        switch (l) {
            case RegardLabel::Positive: ++s.n_positive; break;
            case RegardLabel::Negative: ++s.n_negative; break;
            case RegardLabel::Neutral: ++s.n_neutral; break;
        }
    }
    s.overall_regard = static_cast<long>(s.n_positive) - static_cast<long>(s.n_negative);

    std::vector<double> values;
    values.reserve(toxicities.size());
    for (const auto& t : toxicities) values.push_back(t.value());
    s.toxicity_mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
    s.toxicity_q1 = quantile(values, 0.25);
    s.toxicity_median = quantile(values, 0.5);
    s.toxicity_q3 = quantile(values, 0.75);
    return s;
}

namespace {

/// Midranks of the pooled sample, doubled so ties stay integral.
std::vector<long> doubled_midranks(std::span<const double> pooled) {
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<long> ranks(pooled.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        // positions i..j (0-based) share the rank (i+1 + j+1)/2
        const long doubled = static_cast<long>(i + j + 2);
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
        i = j + 1;
    }
    return ranks;
}

/// P(|W - E| >= |w - E|) under random assignment of n1 of the ranks to the
/// first sample, by counting subsets.
double exact_two_sided(const std::vector<long>& ranks, std::size_t n1, long observed) {
    const long total = std::accumulate(ranks.begin(), ranks.end(), 0L);
    // ways[j][s]: subsets of size j with doubled rank sum s
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(total + 1, 0.0));
    ways[0][0] = 1.0;
    for (long r : ranks) {
        for (std::size_t j = n1; j >= 1; --j) {
            for (long s = total; s >= r; --s) ways[j][s] += ways[j - 1][s - r];
        }
    }
    // E(W) * N = n1 * total; compare N-scaled deviations to stay in integers.
    const long n = static_cast<long>(ranks.size());
    const long centre = static_cast<long>(n1) * total;
    const long observed_dev = std::labs(observed * n - centre);
    double hit = 0.0;
    double all = 0.0;
    for (long s = 0; s <= total; ++s) {
        const double w = ways[n1][s];
        if (w == 0.0) continue;
        all += w;
        if (std::labs(s * n - centre) >= observed_dev) hit += w;
    }
    return hit / all;
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw Error(ErrorCode::DegenerateInput, "Mann-Whitney U needs two non-empty samples");
    }
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = doubled_midranks(pooled);
    const long r1_doubled = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(a.size()), 0L);

    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    MannWhitneyResult result;
    result.u_statistic = static_cast<double>(r1_doubled) / 2.0 - n1 * (n1 + 1.0) / 2.0;

    if (a.size() <= 12 && b.size() <= 12) {
        result.exact = true;
        result.p_value = exact_two_sided(ranks, a.size(), r1_doubled);
        return result;
    }

    // Tie correction: sum of (t^3 - t) over tie groups.
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double n = n1 + n2;
    const double variance = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if (variance <= 0.0) {
        result.p_value = 1.0;
        return result;
    }
    const double mean = n1 * n2 / 2.0;
    const double z = std::max(0.0, std::fabs(result.u_statistic - mean) - 0.5) / std::sqrt(variance);
    result.p_value = std::clamp(std::erfc(z / std::sqrt(2.0)), DBL_MIN, 1.0);
    return result;
}

MannWhitneyResult augmentation_effect_test(std::span<const ToxicityScore> baseline,
                                           std::span<const ToxicityScore> augmented) {
    std::vector<double> a;
    std::vector<double> b;
    a.reserve(baseline.size());
    b.reserve(augmented.size());
    for (const auto& s : baseline) a.push_back(s.value());
    for (const auto& s : augmented) b.push_back(s.value());
    return mann_whitney_u(a, b);
}

GraphHarm score_graph(const KnowledgeGraph& graph, ToxicityScorer& toxicity,
                      RegardClassifier& regard, int threads) {
    const auto& triples = graph.triples();
    std::vector<std::optional<RegardLabel>> labels(triples.size());
    std::vector<std::optional<ToxicityScore>> scores(triples.size());
    parallel_for(triples.size(), threads, [&](std::size_t i) {
        const std::string statement = render_statement(triples[i]);
        labels[i] = regard.classify(statement);
        scores[i] = toxicity.score(statement);
    });

    GraphHarm out;
    out.labels.reserve(triples.size());
    out.toxicity.reserve(triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i) {
        out.labels.push_back(*labels[i]);
        out.toxicity.push_back(*scores[i]);
    }
    for (const auto& seed : graph.seeds()) {
        std::vector<Triple> ts;
        std::vector<RegardLabel> ls;
        std::vector<ToxicityScore> xs;
        for (std::size_t i = 0; i < triples.size(); ++i) {
            if (triples[i].subject != seed) continue;
            ts.push_back(triples[i]);
            ls.push_back(out.labels[i]);
            xs.push_back(out.toxicity[i]);
        }
        if (!ts.empty()) out.summaries.push_back(summarize_subject(ts, ls, xs));
    }
    return out;
}

namespace {

constexpr const char* kHarmColumns[] = {"subject",  "n_pos",    "n_neg",      "n_neutral", "overall_regard",
                                        "tox_mean", "tox_median", "tox_q1",   "tox_q3"};

}  // namespace

std::string harm_csv(std::span<const SubjectHarmSummary> summaries) {
    std::string out;
    for (std::size_t i = 0; i < std::size(kHarmColumns); ++i) {
        if (i) out += ',';
        out += kHarmColumns[i];
    }
    out += '\n';
    for (const auto& s : summaries) {
        out += csv::field(s.subject) + ',' + std::to_string(s.n_positive) + ',' +
               std::to_string(s.n_negative) + ',' + std::to_string(s.n_neutral) + ',' +
               std::to_string(s.overall_regard) + ',' + csv::number(s.toxicity_mean) + ',' +
               csv::number(s.toxicity_median) + ',' + csv::number(s.toxicity_q1) + ',' +
               csv::number(s.toxicity_q3) + '\n';
    }
    return out;
}

std::vector<SubjectHarmSummary> parse_harm_csv(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty()) throw Error(ErrorCode::InvalidConfig, "harm CSV is empty");
    const std::vector<std::string> header(std::begin(kHarmColumns), std::end(kHarmColumns));
    if (rows.front() != header) throw Error(ErrorCode::InvalidConfig, "harm CSV has an unexpected header");
    std::vector<SubjectHarmSummary> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw Error(ErrorCode::InvalidConfig,
                        "harm CSV row " + std::to_string(r + 1) + " has " +
                            std::to_string(row.size()) + " fields");
        }
        auto count = [&](const std::string& s) {
            const double v = csv::to_double(s);
            if (v < 0 || v != std::floor(v)) {
                throw Error(ErrorCode::InvalidConfig, "harm CSV count is not a whole number: " + s);
            }
            return static_cast<std::size_t>(v);
        };
        SubjectHarmSummary s;
        s.subject = row[0];
        s.n_positive = count(row[1]);
        s.n_negative = count(row[2]);
        s.n_neutral = count(row[3]);
        s.overall_regard = static_cast<long>(csv::to_double(row[4]));
        s.toxicity_mean = csv::to_double(row[5]);
        s.toxicity_median = csv::to_double(row[6]);
        s.toxicity_q1 = csv::to_double(row[7]);
        s.toxicity_q3 = csv::to_double(row[8]);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace stereocrawl
