#include "stereocrawl/error.hpp"
#include "stereocrawl/model.hpp"
#include "stereocrawl/text.hpp"

#include <mutex>

namespace stereocrawl {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Init: return "init";
        case Strategy::PredicateDiversity: return "predicate_diversity";
        case Strategy::ObjectDiversity: return "object_diversity";
    }
    return "init";
}

std::optional<Strategy> strategy_from_string(std::string_view tag) {
    if (tag == "init") return Strategy::Init;
    if (tag == "predicate_diversity") return Strategy::PredicateDiversity;
    if (tag == "object_diversity") return Strategy::ObjectDiversity;
    return std::nullopt;
}

std::optional<std::string> triple_violation(const Triple& t) {
    if (text::trim(t.subject).empty()) return "empty subject";
    if (text::trim(t.predicate).empty()) return "empty predicate";
    if (text::trim(t.object).empty()) return "empty object";
    if (t.iteration < 0) return "negative iteration";
    if ((t.iteration == 0) != (t.strategy == Strategy::Init)) {
        return "iteration 0 is reserved for initialization triples";
    }
    if (text::contains_word(t.raw_completion, "This")) {
        return "raw completion contains the refusal marker \"This\"";
    }
    return std::nullopt;
}

int CrawlConfig::effective_incontext_samples(std::size_t seed_count) const {
    if (incontext_samples) return *incontext_samples;
    const int k = static_cast<int>(seed_count);
    return std::min(3, std::max(1, k - 1));
}

void CrawlConfig::validate(std::size_t seed_count) const {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
    if (init_per_template < 1) fail("init_per_template must be >= 1");
    if (init_templates.empty()) fail("init_templates must not be empty");
    for (const auto& p : init_templates) {
        if (text::trim(p).empty()) fail("init_templates contains an empty predicate");
    }
    if (iterations < 0) fail("iterations must be >= 0");
    if (executions_per_strategy < 0) fail("executions_per_strategy must be >= 0");
    if (!(temperature >= 0.0 && temperature <= 2.0)) fail("temperature must lie in [0, 2]");
    if (max_retries < 1) fail("max_retries must be >= 1");
    if (seed_count > 0) {
        const long long pool_size = static_cast<long long>(seed_count) * init_per_template *
                                    static_cast<long long>(init_templates.size());
        const int n = effective_incontext_samples(seed_count);
        if (n < 1 || n >= pool_size) {
            fail("incontext_samples must satisfy 1 <= n < k * init_per_template * |templates| (= " +
                 std::to_string(pool_size) + ")");
        }
    }
}

std::size_t CrawlConfig::expected_triples(std::size_t seed_count) const {
    const std::size_t init = seed_count * init_templates.size() *
                             static_cast<std::size_t>(init_per_template);
    const std::size_t per_iteration = 2 * static_cast<std::size_t>(executions_per_strategy) *
                                      seed_count;
    return init + static_cast<std::size_t>(iterations) * per_iteration;
}

KnowledgeGraph::KnowledgeGraph(std::string protected_class, std::vector<std::string> seeds,
                               CrawlConfig config)
    : protected_class_(std::move(protected_class)),
      seeds_(std::move(seeds)),
      config_(std::move(config)) {
    for (const auto& s : seeds_) {
        if (text::trim(s).empty()) throw Error(ErrorCode::InvalidConfig, "empty seed entity");
        if (!seed_index_.insert(s).second) {
            throw Error(ErrorCode::InvalidConfig, "duplicate seed entity: " + s);
        }
    }
}

bool KnowledgeGraph::has_seed(std::string_view subject) const {
    return seed_index_.count(std::string(subject)) > 0;
}

void KnowledgeGraph::check(const Triple& triple) const {
    if (!has_seed(triple.subject)) {
        throw Error(ErrorCode::SubjectUnknown,
                    "subject \"" + triple.subject + "\" is not a seed of class " +
                        protected_class_);
    }
    if (auto why = triple_violation(triple)) {
        throw Error(ErrorCode::InvalidTriple, *why);
    }
}

void KnowledgeGraph::add(Triple triple) {
    check(triple);
    triples_.push_back(std::move(triple));
}

std::size_t KnowledgeGraph::count_subject(std::string_view subject) const {
    std::size_t n = 0;
    for (const auto& t : triples_) n += (t.subject == subject);
    return n;
}

KnowledgeGraph add_triple(KnowledgeGraph graph, Triple triple) {
    graph.add(std::move(triple));
    return graph;
}

KnowledgeGraph GraphStore::snapshot() const {
    std::shared_lock lock(mutex_);
    return graph_;
}

std::size_t GraphStore::size() const {
    std::shared_lock lock(mutex_);
    return graph_.size();
}

void GraphStore::append(std::span<const Triple> batch) {
    std::unique_lock lock(mutex_);
    for (const auto& t : batch) graph_.check(t);
    for (const auto& t : batch) graph_.add(t);
}

void GraphStore::read(const std::function<void(const KnowledgeGraph&)>& fn) const {
    std::shared_lock lock(mutex_);
    fn(graph_);
}

}  // namespace stereocrawl
