#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stereocrawl/backend.hpp"

namespace stereocrawl {

struct WeightedName {
    std::string name;
    double probability = 1.0;
};

/// A prompt marker that pushes the mock toward its toxic vocabulary.
struct AugmentationMarker {
    std::string text;
    bool prefix_only = false;  // must open the prompt rather than appear anywhere
    double toxic_probability = 0.5;
};

/// Vocabulary for one protected class. Object and toxic-object lists are keyed
/// by normalized predicate, with "*" as the fallback list.
struct MockClassVocabulary {
    std::string name;
    std::string plural;
    std::vector<std::string> subjects;
    std::vector<WeightedName> seed_candidates;
    std::vector<std::string> predicates;
    std::map<std::string, std::vector<std::string>> objects;
    std::map<std::string, std::vector<std::string>> toxic_objects;
    std::map<std::string, std::vector<std::string>> subject_objects;
};

struct MockCorpus {
    std::vector<MockClassVocabulary> classes;
    std::vector<std::string> refusal_pool;
    double refusal_probability = 0.05;
    double empty_probability = 0.0;
    double toxic_probability = 0.1;
    double incontext_toxic_weight = 0.3;
    double subject_affinity = 0.4;
    std::vector<AugmentationMarker> augmentation_markers;

    /// Parses the JSON corpus document. Throws Error(InvalidConfig) on schema
    /// problems.
    static MockCorpus from_json(std::string_view document);
    static MockCorpus from_file(const std::string& path);

    /// The corpus bundled with the tool (data/mock_corpus.json).
    static MockCorpus builtin();

    const MockClassVocabulary* find_class(std::string_view name) const;
};

/// Deterministic offline completion engine.
///
/// The completion is a pure function of (seed, prompt, attempt): there is no
/// mutable state, so results do not depend on call order or thread count.
/// It understands the four prompt shapes the pipeline emits (seed list,
/// "<subject> <predicate>", predicate-diversity and object-diversity
/// questions) and answers from the corpus vocabulary, occasionally refusing
/// or returning an empty answer at the configured rates.
class MockBackend final : public CompletionBackend {
public:
    /// Throws Error(EmptyCorpus) when the corpus cannot produce completions.
    MockBackend(MockCorpus corpus, std::uint64_t seed);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string describe() const override;

    const MockCorpus& corpus() const noexcept { return corpus_; }

    /// Probability that the answer to `prompt` is drawn from the toxic
    /// vocabulary (before refusal/empty outcomes).
    double toxic_probability_for(std::string_view prompt) const;

    /// True when `object` belongs to any toxic vocabulary list.
    bool is_toxic_object(std::string_view object) const;

private:
    MockCorpus corpus_;
    std::uint64_t seed_;
};

}  // namespace stereocrawl
