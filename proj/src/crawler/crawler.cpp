#include "stereocrawl/crawler.hpp"

#include "detail.hpp"
#include "stereocrawl/parallel.hpp"
#include "stereocrawl/text.hpp"

namespace stereocrawl {

namespace {

std::string_view short_tag(Strategy s) {
    switch (s) {
        case Strategy::Init: return "init";
        case Strategy::PredicateDiversity: return "pd";
        case Strategy::ObjectDiversity: return "od";
    }
    return "?";
}

struct Slot {
    Strategy strategy = Strategy::Init;
    std::size_t subject = 0;
    std::size_t execution = 0;
    std::string predicate;  // init template
};

struct SlotOutcome {
    std::optional<Triple> triple;
    std::vector<AuditRecord> audit;
    std::optional<SkippedSlot> skipped;
    bool ran = false;
};

/// What a slot asks and how to read the answer, fixed before the first call.
struct SlotPrompt {
    std::string prompt;
    std::string predicate;  // init template or object-diversity query predicate
    ExpansionMode mode = ExpansionMode::PredicateDiversity;
    std::size_t n_examples = 0;
    std::size_t relaxed = 0;
};

class SlotRunner {
public:
    SlotRunner(CompletionBackend& backend, const CrawlOptions& options, const KnowledgeGraph& graph,
               int iteration)
        : backend_(backend), options_(options), graph_(graph), iteration_(iteration) {}

    SlotOutcome run(const Slot& slot, const SlotPrompt& sp) const {
        const CrawlConfig& cfg = graph_.config();
        const std::string& subject = graph_.seeds()[slot.subject];
        SlotOutcome out;
        out.ran = true;

        CompletionRequest request;
        request.prompt = sp.prompt;
        request.temperature = cfg.temperature;
        request.max_tokens = options_.max_tokens;
        request.stop_sequences = slot.strategy == Strategy::Init ? init_stop_sequences()
                                                                 : expansion_stop_sequences();

        RejectReason last = RejectReason::ParseFailure;
        for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
            request.attempt = static_cast<std::uint32_t>(slot.execution) *
                                  static_cast<std::uint32_t>(cfg.max_retries) +
                              static_cast<std::uint32_t>(attempt);
            const CompletionResponse response = backend_.complete(request);

            AuditRecord record;
            record.prompt_id = "it" + std::to_string(iteration_) + "/" +
                               std::string(short_tag(slot.strategy)) + "/s" +
                               std::to_string(slot.subject) + "/e" +
                               std::to_string(slot.execution) + "/a" + std::to_string(attempt);
            record.iteration = iteration_;
            record.strategy = slot.strategy;
            record.subject = subject;
            record.prompt = sp.prompt;
            record.raw_completion = response.text;
            record.n_examples = sp.n_examples;
            record.relaxed_examples = sp.relaxed;

            std::optional<ParsedCompletion> parsed;
            if (slot.strategy == Strategy::Init) {
                std::string_view line = text::trim(response.text);
                line = line.substr(0, line.find('\n'));
                parsed = ParsedCompletion{sp.predicate, std::string(text::trim(line))};
            } else {
                parsed = detail::split_expansion(response.text, sp.mode, sp.predicate);
            }
            std::optional<RejectReason> reason;
            if (!parsed) {
                reason = text::contains_word(response.text, "This") ? RejectReason::RefusalPhrase
                                                                    : RejectReason::ParseFailure;
            } else {
                reason = filter_candidate(parsed->predicate, parsed->object, response.text);
            }
            record.accepted = !reason;
            record.reject_reason = reason;
            out.audit.push_back(std::move(record));

            if (!reason) {
                Triple t;
                t.subject = subject;
                t.predicate = std::move(parsed->predicate);
                t.object = std::move(parsed->object);
                t.iteration = iteration_;
                t.strategy = slot.strategy;
                t.augmented_init = cfg.augment_init;
                t.augmented_expansion = cfg.augment_expansion;
                t.raw_completion = response.text;
                t.prompt_id = out.audit.back().prompt_id;
                out.triple = std::move(t);
                return out;
            }
            last = *reason;
        }
        out.skipped = SkippedSlot{iteration_,     slot.strategy,   subject, sp.predicate,
                                  slot.execution, cfg.max_retries, last};
        return out;
    }

private:
    CompletionBackend& backend_;
    const CrawlOptions& options_;
    const KnowledgeGraph& graph_;
    int iteration_;
};

IterationBatch run_slots(const std::vector<Slot>& slots, int iteration, const CrawlOptions& options,
                         const std::function<SlotOutcome(const Slot&)>& fn) {
    std::vector<SlotOutcome> outcomes(slots.size());
    parallel_for(slots.size(), options.threads, [&](std::size_t i) {
        if (options.cancel && options.cancel->load()) return;
        outcomes[i] = fn(slots[i]);
    });

    IterationBatch batch;
    batch.iteration = iteration;
    for (auto& o : outcomes) {
        if (!o.ran) {
            batch.cancelled = true;
            continue;
        }
        for (auto& r : o.audit) batch.audit.push_back(std::move(r));
        if (o.triple) batch.triples.push_back(std::move(*o.triple));
        if (o.skipped) batch.skipped.push_back(std::move(*o.skipped));
    }
    return batch;
}

}  // namespace

IterationBatch Crawler::initialize(const KnowledgeGraph& graph) const {
    const CrawlConfig& cfg = graph.config();
    cfg.validate(graph.seeds().size());

    std::vector<Slot> slots;
    for (std::size_t s = 0; s < graph.seeds().size(); ++s) {
        for (std::size_t t = 0; t < cfg.init_templates.size(); ++t) {
            for (int j = 0; j < cfg.init_per_template; ++j) {
                slots.push_back({Strategy::Init, s,
                                 t * static_cast<std::size_t>(cfg.init_per_template) +
                                     static_cast<std::size_t>(j),
                                 cfg.init_templates[t]});
            }
        }
    }

    const SlotRunner runner(backend_, options_, graph, 0);
    return run_slots(slots, 0, options_, [&](const Slot& slot) {
        SlotPrompt sp;
        sp.predicate = slot.predicate;
        sp.prompt = render_init_prompt(graph.seeds()[slot.subject], slot.predicate,
                                       cfg.augment_init, cfg.prepend_text);
        return runner.run(slot, sp);
    });
}

IterationBatch Crawler::expand_iteration(const KnowledgeGraph& graph, const InContextPool& pool,
                                         int iteration) const {
    if (iteration < 1) throw Error(ErrorCode::InvalidRequest, "expansion iterations start at 1");
    const CrawlConfig& cfg = graph.config();
    cfg.validate(graph.seeds().size());
    if (pool.empty()) throw Error(ErrorCode::EmptyPool, "no accepted triples to use as examples");
    const auto n = static_cast<std::size_t>(cfg.effective_incontext_samples(graph.seeds().size()));

    std::vector<Slot> slots;
    for (std::size_t s = 0; s < graph.seeds().size(); ++s) {
        for (Strategy strategy : {Strategy::PredicateDiversity, Strategy::ObjectDiversity}) {
            for (int e = 0; e < cfg.executions_per_strategy; ++e) {
                slots.push_back({strategy, s, static_cast<std::size_t>(e), {}});
            }
        }
    }

    const SlotRunner runner(backend_, options_, graph, iteration);
    return run_slots(slots, iteration, options_, [&](const Slot& slot) {
        Rng rng = Rng::keyed(cfg.rng_seed, {static_cast<std::uint64_t>(iteration),
                                            static_cast<std::uint64_t>(slot.strategy),
                                            slot.subject, slot.execution});
        const std::string& subject = graph.seeds()[slot.subject];
        SlotPrompt sp;
        if (slot.strategy == Strategy::PredicateDiversity) {
            sp.mode = ExpansionMode::PredicateDiversity;
            const auto examples = sample_for_predicate_diversity(pool, subject, n, rng);
            sp.n_examples = examples.size();
            sp.prompt = render_expansion_prompt(examples, subject, sp.mode, std::nullopt,
                                                cfg.augment_expansion);
        } else {
            sp.mode = ExpansionMode::ObjectDiversity;
            sp.predicate = sample_predicate_inverse_frequency(pool, rng);
            const auto sample = sample_for_object_diversity(pool, subject, sp.predicate, n, rng);
            sp.n_examples = sample.examples.size();
            sp.relaxed = sample.relaxed;
            sp.prompt = render_expansion_prompt(sample.examples, subject, sp.mode, sp.predicate,
                                                cfg.augment_expansion);
        }
        return runner.run(slot, sp);
    });
}

KnowledgeGraph Crawler::crawl(KnowledgeGraph graph, const BatchCallback& on_batch) const {
    if (graph.size() != 0) {
        throw Error(ErrorCode::InvalidRequest, "crawl expects a graph without triples");
    }
    graph.config().validate(graph.seeds().size());

    InContextPool pool;
    auto absorb = [&](const IterationBatch& batch) {
        for (const auto& t : batch.triples) graph.add(t);
        pool.add(batch.triples);
        if (on_batch) on_batch(batch);
        if (options_.strict && !batch.skipped.empty()) {
            const auto& s = batch.skipped.front();
            throw Error(ErrorCode::RetriesExhausted,
                        std::to_string(batch.skipped.size()) + " slot(s) in iteration " +
                            std::to_string(batch.iteration) + " exhausted their retries, first: " +
                            s.subject + (s.predicate.empty() ? "" : " / " + s.predicate));
        }
        return !batch.cancelled;
    };

    if (!absorb(initialize(graph))) return graph;
    for (int i = 1; i <= graph.config().iterations; ++i) {
        if (!absorb(expand_iteration(graph, pool, i))) break;
    }
    return graph;
}

}  // namespace stereocrawl
