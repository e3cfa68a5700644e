#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stereocrawl/model.hpp"

namespace stereocrawl {

// ---------------------------------------------------------------------------
// Preprocessing

using StopwordSet = std::unordered_set<std::string>;

/// NLTK's English list plus "can't", "cannot" and "cant".
const StopwordSet& bundled_stopwords();
inline constexpr std::string_view kStopwordListVersion = "nltk-english+3/v1";

/// Lemma of a lower-case word: an irregular-form table first, then
/// conservative -s/-es/-ies/-ing/-ed/-iest rules.
std::string lemmatize(std::string_view word);

/// Lower-case (ASCII and Latin-1 letters) without touching other bytes.
std::string fold_case(std::string_view s);

/// Lemmatized, lower-cased words of predicate + object, minus stopwords.
std::vector<std::string> preprocess(const Triple& triple,
                                    const StopwordSet& stopwords = bundled_stopwords());

// ---------------------------------------------------------------------------
// Embeddings

/// Word vectors keyed by case-folded word. The first entry wins when a file
/// lists a word twice under different casing.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dimension = 0) : dimension_(dimension) {}

    /// GloVe text format, "word v1 ... vD" per line; a word2vec-style
    /// "count dim" header line is skipped. When `vocabulary` is given only
    /// those (case-folded) words are kept. Throws Error(DimensionMismatch)
    /// for ragged rows and Error(InvalidConfig) for unreadable numbers.
    static EmbeddingTable parse(std::string_view text,
                                const std::unordered_set<std::string>* vocabulary = nullptr);
    static EmbeddingTable load(const std::string& path,
                               const std::unordered_set<std::string>* vocabulary = nullptr);

    /// Throws Error(DimensionMismatch) when the vector has the wrong size.
    void add(std::string_view word, std::span<const float> vector);

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return index_.size(); }

    /// Empty span when the word is unknown.
    std::span<const float> find(std::string_view word) const;

private:
    std::size_t dimension_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<float> data_;
};

struct Embedding {
    std::vector<double> vector;
    bool oov = false;  // no token had a vector; vector is all zeros
};

/// Mean of the vectors of the tokens found in the table.
Embedding embed(std::span<const std::string> tokens, const EmbeddingTable& table);

// ---------------------------------------------------------------------------
// Clustering

/// max(2, floor(total_triples / 40)).
std::size_t min_cluster_size(std::size_t total_triples);

inline constexpr int kNoiseTopic = -1;

struct TopicAssignment {
    std::size_t triple_index = 0;
    int topic_id = kNoiseTopic;

    friend bool operator==(const TopicAssignment&, const TopicAssignment&) = default;
};

/// HDBSCAN over Euclidean distance with min_samples = min_cluster_size and
/// excess-of-mass cluster selection. All-zero vectors are treated as
/// out-of-vocabulary documents and labeled noise. When the hierarchy never
/// splits into two clusters of min_size, everything that is not
/// out-of-vocabulary forms a single topic. Topic ids run 0..T-1 by
/// descending size, ties broken by lowest member index.
/// Throws Error(TooFewPoints) or Error(DimensionMismatch).
std::vector<TopicAssignment> cluster(std::span<const std::vector<double>> vectors,
                                     std::size_t min_size);

struct TopicSummary {
    int topic_id = 0;
    std::vector<std::string> representative_words;
    std::vector<double> scores;  // parallel to representative_words
    std::size_t size = 0;        // documents in the topic
};

/// Class-based TF-IDF: score(w,t) = tf(w,t) * ln(1 + A / f(w)), with A the
/// mean token count per topic. Ties are broken alphabetically.
/// Throws Error(NoTopics) when every document is noise, or
/// Error(MisalignedInput) when assignments and documents disagree.
std::vector<TopicSummary> representative_words(std::span<const TopicAssignment> assignments,
                                               std::span<const std::vector<std::string>> documents,
                                               std::size_t top_n = 5);

struct TopicDistribution {
    std::string subject;
    std::map<int, double> probabilities;  // every topic id, zeros included

    friend bool operator==(const TopicDistribution&, const TopicDistribution&) = default;
};

struct TopicDistributions {
    std::vector<TopicDistribution> subjects;  // first-appearance order
    TopicDistribution reference;              // pooled over all non-noise triples
};

/// Noise documents are left out of both p and q. Throws
/// Error(SubjectAllNoise) for a subject with no clustered triple and
/// Error(MisalignedInput) when the lengths differ.
TopicDistributions topic_distributions(std::span<const TopicAssignment> assignments,
                                       std::span<const std::string> subjects);

/// KL(p || q) = sum p_k ln(p_k / q_k) in nats. Throws
/// Error(SupportViolation) when p_k > 0 where q_k is zero or missing.
double relative_entropy(const TopicDistribution& p, const TopicDistribution& q);

// ---------------------------------------------------------------------------
// Pipeline

struct TopicModelOptions {
    std::size_t top_n = 5;
    std::optional<std::size_t> min_cluster_size;  // default: from the triple count
    int threads = 1;
};

struct SubjectEntropy {
    std::string subject;
    double relative_entropy = 0.0;
};

struct TopicModelResult {
    std::string protected_class;
    std::vector<std::vector<std::string>> documents;
    std::vector<bool> oov;
    std::vector<TopicAssignment> assignments;
    std::size_t min_cluster_size = 0;
    std::vector<TopicSummary> topics;
    TopicDistributions distributions;
    std::vector<SubjectEntropy> entropies;
    double noise_rate = 0.0;
    double oov_rate = 0.0;
};

TopicModelResult run_topic_model(const KnowledgeGraph& graph, const EmbeddingTable& table,
                                 const TopicModelOptions& options = {});

/// subject,topic_id,p_k (the pooled reference is listed as "(reference)").
std::string topic_distribution_csv(const TopicModelResult& r);
/// topic_id,rank,word,score
std::string topic_words_csv(const TopicModelResult& r);
/// subject,relative_entropy
std::string entropy_csv(const TopicModelResult& r);
/// Run metadata: class, min_cluster_size, topic count, noise and OOV rates.
std::string topic_meta_json(const TopicModelResult& r, std::string_view vectors_label);

inline constexpr std::string_view kReferenceRow = "(reference)";

}  // namespace stereocrawl
