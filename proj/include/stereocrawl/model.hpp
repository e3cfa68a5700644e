#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace stereocrawl {

enum class Strategy { Init, PredicateDiversity, ObjectDiversity };

std::string_view to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view tag);

/// One (subject, predicate, object) assertion plus where it came from.
struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;
    int iteration = 0;  // 0 = initialization
    Strategy strategy = Strategy::Init;
    bool augmented_init = false;
    bool augmented_expansion = false;
    std::string raw_completion;
    std::string prompt_id;

    friend bool operator==(const Triple&, const Triple&) = default;
};

/// Why a triple fails its own invariants, or nullopt when it is valid.
/// Membership in a graph's seed set is checked separately.
std::optional<std::string> triple_violation(const Triple& t);

/// Generation parameters. Defaults reproduce the reference setup: five
/// completions per template over love/hate/are/can't, four expansion
/// iterations, ten executions per strategy and subject, temperature 0.8.
struct CrawlConfig {
    int init_per_template = 5;
    std::vector<std::string> init_templates{"love", "hate", "are", "can't"};
    int iterations = 4;
    /// In-context examples per expansion prompt. Unset means
    /// min(3, max(1, k - 1)), i.e. 3 in general and 2 for a 3-seed class.
    std::optional<int> incontext_samples;
    int executions_per_strategy = 10;
    double temperature = 0.8;
    bool augment_init = false;
    bool augment_expansion = false;
    std::string prepend_text;
    int max_retries = 5;
    std::uint64_t rng_seed = 0;

    int effective_incontext_samples(std::size_t seed_count) const;

    /// Throws Error(InvalidConfig) when a field is out of range for a graph
    /// with `seed_count` seeds.
    void validate(std::size_t seed_count) const;

    /// Triples a crawl yields when no slot is exhausted.
    std::size_t expected_triples(std::size_t seed_count) const;

    friend bool operator==(const CrawlConfig&, const CrawlConfig&) = default;
};

class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    KnowledgeGraph(std::string protected_class, std::vector<std::string> seeds,
                   CrawlConfig config = {});

    const std::string& protected_class() const noexcept { return protected_class_; }
    const std::vector<std::string>& seeds() const noexcept { return seeds_; }
    const std::vector<Triple>& triples() const noexcept { return triples_; }
    const CrawlConfig& config() const noexcept { return config_; }
    std::size_t size() const noexcept { return triples_.size(); }

    bool has_seed(std::string_view subject) const;

    /// Throws SubjectUnknown or InvalidTriple if `triple` cannot join this graph.
    void check(const Triple& triple) const;

    /// Appends a triple. Duplicates are kept. Throws like check(); the graph
    /// is unchanged on failure.
    void add(Triple triple);

    std::size_t count_subject(std::string_view subject) const;

    friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
        return a.protected_class_ == b.protected_class_ && a.seeds_ == b.seeds_ &&
               a.config_ == b.config_ && a.triples_ == b.triples_;
    }

private:
    std::string protected_class_;
    std::vector<std::string> seeds_;
    std::unordered_set<std::string> seed_index_;
    std::vector<Triple> triples_;
    CrawlConfig config_;
};

/// Value-returning form of KnowledgeGraph::add.
KnowledgeGraph add_triple(KnowledgeGraph graph, Triple triple);

/// Shared store for a graph under construction: any number of concurrent
/// readers, one writer at a time.
class GraphStore {
public:
    explicit GraphStore(KnowledgeGraph graph) : graph_(std::move(graph)) {}

    KnowledgeGraph snapshot() const;
    std::size_t size() const;

    /// All-or-nothing append; on error no triple of the batch is kept.
    void append(std::span<const Triple> batch);

    void read(const std::function<void(const KnowledgeGraph&)>& fn) const;

private:
    mutable std::shared_mutex mutex_;
    KnowledgeGraph graph_;
};

// ---------------------------------------------------------------------------
// Persistence: line-delimited JSON. Line 1 is a header record, then one
// record per triple in insertion order. Every line ends with '\n'.

inline constexpr std::string_view kGraphSchema = "stereocrawl/graph";
inline constexpr int kGraphSchemaVersion = 1;

std::string serialize_header(const KnowledgeGraph& graph);
std::string serialize_triple(const std::string& protected_class, const Triple& t);
std::string serialize_graph(const KnowledgeGraph& graph);

/// Throws MalformedRecordError (with 1-based line) or
/// Error(SchemaVersionMismatch).
KnowledgeGraph parse_graph(std::string_view bytes);

KnowledgeGraph read_graph_file(const std::string& path);
void write_graph_file(const std::string& path, const KnowledgeGraph& graph);

/// Graphviz digraph: one node per distinct subject/object string, one edge
/// per triple labeled with its predicate. Seed nodes carry role="seed".
std::string export_dot(const KnowledgeGraph& graph);

}  // namespace stereocrawl
