#pragma once

#include <atomic>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereocrawl/http.hpp"
#include "stereocrawl/model.hpp"

namespace stereocrawl {

enum class RegardLabel { Negative, Neutral, Positive };

std::string_view to_string(RegardLabel label);

/// Maps a service label to the three regard classes; anything else is
/// nullopt.
std::optional<RegardLabel> regard_from_string(std::string_view label);

/// Identity-attack score in [0, 1].
class ToxicityScore {
public:
    /// Throws Error(InvalidRequest) outside [0, 1] or for NaN.
    explicit ToxicityScore(double value);

    double value() const noexcept { return value_; }

    friend bool operator==(const ToxicityScore&, const ToxicityScore&) = default;

private:
    double value_;
};

/// "<subject> <predicate> <object>", the sentence handed to scorers.
std::string render_statement(const Triple& t);

class ToxicityScorer {
public:
    virtual ~ToxicityScorer() = default;
    /// Throws Error(ScorerRejectedInput) for empty text, Error(ScorerTransport)
    /// when the service cannot be reached.
    virtual ToxicityScore score(std::string_view statement) = 0;
    virtual std::string describe() const = 0;
};

class RegardClassifier {
public:
    virtual ~RegardClassifier() = default;
    virtual RegardLabel classify(std::string_view statement) = 0;
    virtual std::string describe() const = 0;
};

/// Lower-cased words (letters, digits and apostrophes) of a statement.
std::vector<std::string> lexicon_tokens(std::string_view statement);

/// Offline stand-in: the fraction of tokens found in a word list.
class LexiconToxicityScorer final : public ToxicityScorer {
public:
    LexiconToxicityScorer();  // bundled identity-attack list
    explicit LexiconToxicityScorer(std::set<std::string> words);

    ToxicityScore score(std::string_view statement) override;
    std::string describe() const override { return "lexicon-toxicity/v1"; }

    const std::set<std::string>& words() const noexcept { return words_; }

private:
    std::set<std::string> words_;
};

/// Offline stand-in: Positive when positive hits outnumber negative ones,
/// Negative for the reverse, Neutral otherwise.
class LexiconRegardClassifier final : public RegardClassifier {
public:
    LexiconRegardClassifier();  // bundled lists
    LexiconRegardClassifier(std::set<std::string> positive, std::set<std::string> negative);

    RegardLabel classify(std::string_view statement) override;
    std::string describe() const override { return "lexicon-regard/v1"; }

private:
    std::set<std::string> positive_;
    std::set<std::string> negative_;
};

struct PerspectiveConfig {
    std::string url = "https://commentanalyzer.googleapis.com/v1alpha1/comments:analyze";
    std::string api_key;
    double requests_per_second = 1.0;
    http::RetryPolicy retry;

    /// api_key from STEREOCRAWL_PERSPECTIVE_KEY when empty.
    void apply_environment();
};

/// Identity-attack scores from a Perspective-style endpoint:
///   POST {comment:{text}, languages:["en"], requestedAttributes:{IDENTITY_ATTACK:{}}}
///   -> attributeScores.IDENTITY_ATTACK.summaryScore.value
class PerspectiveToxicityScorer final : public ToxicityScorer {
public:
    /// Throws Error(MissingCredential) without a key.
    explicit PerspectiveToxicityScorer(PerspectiveConfig config);

    ToxicityScore score(std::string_view statement) override;
    std::string describe() const override { return "perspective:IDENTITY_ATTACK"; }

private:
    PerspectiveConfig config_;
    http::Endpoint endpoint_;
    http::RateLimiter limiter_;
};

ToxicityScore decode_perspective_body(const std::string& body);

struct RegardServiceConfig {
    std::string url;
    std::string api_key;  // optional bearer token
    double requests_per_second = 10.0;
    http::RetryPolicy retry;

    /// url/api_key from STEREOCRAWL_REGARD_URL / STEREOCRAWL_REGARD_KEY when
    /// empty.
    void apply_environment();
};

/// Regard labels from a classifier service: POST {text} -> {label, scores}.
/// Labels outside negative/neutral/positive count as Neutral and are tallied
/// in unmapped_labels().
class RemoteRegardClassifier final : public RegardClassifier {
public:
    /// Throws Error(MissingCredential) without a URL.
    explicit RemoteRegardClassifier(RegardServiceConfig config);

    RegardLabel classify(std::string_view statement) override;
    std::string describe() const override { return "regard-service:" + config_.url; }

    std::size_t unmapped_labels() const noexcept { return unmapped_.load(); }

private:
    RegardServiceConfig config_;
    http::Endpoint endpoint_;
    http::RateLimiter limiter_;
    std::atomic<std::size_t> unmapped_{0};
};

/// Decoded regard response; `mapped` is false when the label fell outside the
/// three classes.
struct RegardDecoding {
    RegardLabel label = RegardLabel::Neutral;
    bool mapped = true;
};

RegardDecoding decode_regard_body(const std::string& body);

// ---------------------------------------------------------------------------
// Aggregation

struct SubjectHarmSummary {
    std::string subject;
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
    std::size_t n_neutral = 0;
    long overall_regard = 0;  // n_positive - n_negative
    double toxicity_mean = 0.0;
    double toxicity_median = 0.0;
    double toxicity_q1 = 0.0;
    double toxicity_q3 = 0.0;

    friend bool operator==(const SubjectHarmSummary&, const SubjectHarmSummary&) = default;
};

/// Quantile by linear interpolation between closest ranks (h = (n-1)q).
/// Throws Error(EmptyInput).
double quantile(std::span<const double> values, double q);

/// Throws Error(EmptyInput) for empty lists, Error(MisalignedInput) when the
/// lengths differ or the triples do not share one subject.
SubjectHarmSummary summarize_subject(std::span<const Triple> triples,
                                     std::span<const RegardLabel> labels,
                                     std::span<const ToxicityScore> toxicities);

struct MannWhitneyResult {
    double u_statistic = 0.0;  // U of the first sample
    double p_value = 1.0;      // two-sided
    bool exact = false;
};

/// Two-sided Mann-Whitney U. Exact null distribution (midranks, ties
/// included) when both samples have at most 12 values, otherwise the normal
/// approximation with tie and continuity corrections. Throws
/// Error(DegenerateInput) when a sample is empty.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

MannWhitneyResult augmentation_effect_test(std::span<const ToxicityScore> baseline,
                                           std::span<const ToxicityScore> augmented);

/// Labels and scores for every triple plus one summary per seed that has
/// triples, in roster order.
struct GraphHarm {
    std::vector<RegardLabel> labels;
    std::vector<ToxicityScore> toxicity;
    std::vector<SubjectHarmSummary> summaries;
};

GraphHarm score_graph(const KnowledgeGraph& graph, ToxicityScorer& toxicity,
                      RegardClassifier& regard, int threads = 1);

/// CSV with header subject,n_pos,n_neg,n_neutral,overall_regard,tox_mean,
/// tox_median,tox_q1,tox_q3.
std::string harm_csv(std::span<const SubjectHarmSummary> summaries);

/// Inverse of harm_csv. Throws Error(InvalidConfig) on malformed input.
std::vector<SubjectHarmSummary> parse_harm_csv(std::string_view csv);

}  // namespace stereocrawl
