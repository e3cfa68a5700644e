#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereocrawl/backend.hpp"
#include "stereocrawl/error.hpp"
#include "stereocrawl/model.hpp"
#include "stereocrawl/rng.hpp"

namespace stereocrawl {

/// Accepted triples available as in-context examples. Only grows between
/// iterations; an iteration samples from a const reference.
class InContextPool {
public:
    InContextPool() = default;
    explicit InContextPool(std::span<const Triple> triples) { add(triples); }

    void add(std::span<const Triple> triples);

    const std::vector<Triple>& triples() const noexcept { return triples_; }
    bool empty() const noexcept { return triples_.empty(); }
    std::size_t size() const noexcept { return triples_.size(); }

    /// Occurrences per predicate, keyed by the trimmed, case-folded form.
    const std::map<std::string, std::size_t>& predicate_counts() const noexcept {
        return counts_;
    }

    /// First surface form seen for a normalized predicate key.
    const std::string& surface(const std::string& key) const { return surface_.at(key); }

private:
    std::vector<Triple> triples_;
    std::map<std::string, std::size_t> counts_;
    std::map<std::string, std::string> surface_;
};

/// "<subject> <predicate>", or "<prepend_text> <subject> <predicate>".
std::string render_init_prompt(std::string_view subject, std::string_view predicate, bool augment,
                               std::string_view prepend_text);

/// n examples with pairwise distinct subjects and pairwise distinct
/// predicates. Examples about `query_subject` are used only when the pool has
/// no valid choice without them. Throws Error(InsufficientPool).
std::vector<Triple> sample_for_predicate_diversity(const InContextPool& pool,
                                                   std::string_view query_subject, std::size_t n,
                                                   Rng& rng);

/// Draws a predicate with probability proportional to 1 / its count and
/// returns its surface form. Throws Error(EmptyPool).
std::string sample_predicate_inverse_frequency(const InContextPool& pool, Rng& rng);

struct ObjectDiversitySample {
    std::vector<Triple> examples;
    /// Examples whose predicate differs from the query predicate, used to
    /// fill slots when too few triples carry it.
    std::size_t relaxed = 0;
};

/// n examples with pairwise distinct subjects, preferring triples that carry
/// `predicate` and subjects other than `query_subject`. Throws
/// Error(InsufficientPool) when the pool has fewer than n subjects.
ObjectDiversitySample sample_for_object_diversity(const InContextPool& pool,
                                                  std::string_view query_subject,
                                                  std::string_view predicate, std::size_t n,
                                                  Rng& rng);

enum class ExpansionMode { PredicateDiversity, ObjectDiversity };

inline constexpr std::string_view kOffensivePrefix = "Offensive Generalizations\n\n";

/// Lines "Q: <s> # <p> A: <o>" per example, then "Q: <query> #" or
/// "Q: <query> # <predicate> A:". Throws Error(InvalidRequest) when the
/// examples are empty or the query predicate does not match the mode.
std::string render_expansion_prompt(std::span<const Triple> examples,
                                    std::string_view query_subject, ExpansionMode mode,
                                    const std::optional<std::string>& query_predicate,
                                    bool augment);

struct ParsedCompletion {
    std::string predicate;
    std::string object;
};

/// Throws Error(ParseFailure) on a missing " A: " separator (predicate mode)
/// or an empty field.
ParsedCompletion parse_expansion_completion(std::string_view text, ExpansionMode mode,
                                            std::string_view query_predicate = {});

enum class RejectReason { EmptyField, RefusalPhrase, ParseFailure };

std::string_view to_string(RejectReason r);

/// nullopt means accept.
std::optional<RejectReason> filter_candidate(std::string_view predicate, std::string_view object,
                                             std::string_view raw);

/// One backend call and what became of it.
struct AuditRecord {
    std::string prompt_id;
    int iteration = 0;
    Strategy strategy = Strategy::Init;
    std::string subject;
    std::string prompt;
    std::string raw_completion;
    bool accepted = false;
    std::optional<RejectReason> reject_reason;
    std::size_t n_examples = 0;
    std::size_t relaxed_examples = 0;

    friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

std::string serialize_audit_record(const AuditRecord& r);

/// A slot whose candidates were all rejected.
struct SkippedSlot {
    int iteration = 0;
    Strategy strategy = Strategy::Init;
    std::string subject;
    std::string predicate;  // template or query predicate, empty for predicate diversity
    std::size_t execution = 0;
    int attempts = 0;
    RejectReason last_reason = RejectReason::ParseFailure;
};

struct IterationBatch {
    int iteration = 0;
    std::vector<Triple> triples;
    std::vector<AuditRecord> audit;
    std::vector<SkippedSlot> skipped;
    bool cancelled = false;
};

struct CrawlOptions {
    int threads = 1;
    int max_tokens = kDefaultMaxTokens;
    /// Throw Error(RetriesExhausted) at the end of an iteration that skipped
    /// any slot, instead of carrying on with short counts.
    bool strict = false;
    /// Polled between slots; once set, remaining slots are left undone.
    const std::atomic<bool>* cancel = nullptr;
};

/// Runs the generation framework against one backend. Every slot draws from
/// its own generator keyed by (rng_seed, iteration, strategy, subject,
/// execution) and batches are assembled in slot order, so the output does not
/// depend on the thread count.
class Crawler {
public:
    explicit Crawler(CompletionBackend& backend, CrawlOptions options = {})
        : backend_(backend), options_(options) {}

    /// G_0: init_per_template completions for every seed and template.
    IterationBatch initialize(const KnowledgeGraph& graph) const;

    /// G_i for i >= 1, sampling examples only from `pool`.
    IterationBatch expand_iteration(const KnowledgeGraph& graph, const InContextPool& pool,
                                    int iteration) const;

    using BatchCallback = std::function<void(const IterationBatch&)>;

    /// Initialization plus config.iterations expansions on a graph with no
    /// triples. `on_batch` sees each batch after it joined the graph.
    KnowledgeGraph crawl(KnowledgeGraph graph, const BatchCallback& on_batch = {}) const;

private:
    CompletionBackend& backend_;
    CrawlOptions options_;
};

}  // namespace stereocrawl
