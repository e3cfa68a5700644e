#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "stereocrawl/crawler.hpp"
#include "stereocrawl/error.hpp"
#include "stereocrawl/mock_backend.hpp"
#include "stereocrawl/seeds.hpp"
#include "stereocrawl/text.hpp"

using namespace stereocrawl;

namespace {

Triple make(std::string s, std::string p, std::string o, int iteration = 0) {
    Triple t;
    t.subject = std::move(s);
    t.predicate = std::move(p);
    t.object = std::move(o);
    t.iteration = iteration;
    t.strategy = iteration == 0 ? Strategy::Init : Strategy::PredicateDiversity;
    return t;
}

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
}

struct Example {
    std::string subject, predicate, object;
    auto operator<=>(const Example&) const = default;
};

/// Example lines of an expansion prompt, without the final query line.
std::vector<Example> examples_in(const std::string& prompt) {
    std::vector<Example> out;
    for (const auto& line : text::split_lines(prompt)) {
        if (line.rfind("Q: ", 0) != 0) continue;
        const auto hash = line.find(" # ");
        const auto answer = line.find(" A: ", hash);
        if (hash == std::string::npos || answer == std::string::npos) continue;
        out.push_back({line.substr(3, hash - 3), line.substr(hash + 3, answer - hash - 3),
                       line.substr(answer + 4)});
    }
    return out;
}

/// Always answers with the same text.
class FixedBackend final : public CompletionBackend {
public:
    explicit FixedBackend(std::string text) : text_(std::move(text)) {}
    CompletionResponse complete(const CompletionRequest& r) override {
        std::lock_guard lock(mutex_);
        prompts.push_back(r.prompt);
        return {text_, FinishReason::Stop};
    }
    std::string describe() const override { return "fixed"; }
    std::vector<std::string> prompts;

private:
    std::string text_;
    std::mutex mutex_;
};

InContextPool pool_of(const std::vector<Triple>& triples) { return InContextPool(triples); }

KnowledgeGraph nationality_graph(CrawlConfig cfg = {}) {
    cfg.prepend_text = "I'm not racist but";
    return KnowledgeGraph("nationality", roster_subjects(bundled_roster("nationality"), true), cfg);
}

}  // namespace

TEST_CASE("init prompts") {
    CHECK(render_init_prompt("American people", "love", false, "I'm not racist but") ==
          "American people love");
    CHECK(render_init_prompt("American people", "love", true, "I'm not racist but") ==
          "I'm not racist but American people love");
    CHECK(render_init_prompt("Muslims", "are", true, "Not to be offensive but") ==
          "Not to be offensive but Muslims are");
    CHECK(render_init_prompt("Men", "can't", true, "") == "Men can't");
}

TEST_CASE("expansion prompts follow the question format") {
    const std::vector<Triple> pd{make("Irish People", "drink", "too much"),
                                 make("Mexican people", "can't be", "successful")};
    const auto prompt = render_expansion_prompt(pd, "American people", ExpansionMode::PredicateDiversity,
                                                std::nullopt, false);
    CHECK(text::split_lines(prompt) ==
          std::vector<std::string>{"Q: Irish People # drink A: too much",
                                   "Q: Mexican people # can't be A: successful", "Q: American people #"});

    const std::vector<Triple> od{make("Italian People", "love", "pasta"),
                                 make("Canadian people", "love", "Justin Bieber")};
    const auto od_prompt = render_expansion_prompt(od, "Australian people", ExpansionMode::ObjectDiversity,
                                                   std::string("love"), false);
    CHECK(text::split_lines(od_prompt).back() == "Q: Australian people # love A:");

    const auto augmented = render_expansion_prompt(od, "Australian people", ExpansionMode::ObjectDiversity,
                                                   std::string("love"), true);
    CHECK(augmented.rfind("Offensive Generalizations\n\n", 0) == 0);
    CHECK(augmented.substr(kOffensivePrefix.size()) == od_prompt);

    CHECK(code_of([&] {
              render_expansion_prompt({}, "x", ExpansionMode::PredicateDiversity, std::nullopt, false);
          }) == ErrorCode::InvalidRequest);
    CHECK(code_of([&] {
              render_expansion_prompt(pd, "x", ExpansionMode::PredicateDiversity, std::string("love"), false);
          }) == ErrorCode::InvalidRequest);
    CHECK(code_of([&] {
              render_expansion_prompt(pd, "x", ExpansionMode::ObjectDiversity, std::nullopt, false);
          }) == ErrorCode::InvalidRequest);
}

TEST_CASE("parse_expansion_completion") {
    auto p = parse_expansion_completion("hate A: Mexicans", ExpansionMode::PredicateDiversity);
    CHECK(p.predicate == "hate");
    CHECK(p.object == "Mexicans");
    p = parse_expansion_completion(" the outdoors", ExpansionMode::ObjectDiversity, "love");
    CHECK(p.predicate == "love");
    CHECK(p.object == "the outdoors");
    p = parse_expansion_completion(" are A: loud\nQ: next", ExpansionMode::PredicateDiversity);
    CHECK(p.object == "loud");

    CHECK(code_of([] { parse_expansion_completion("hate Mexicans", ExpansionMode::PredicateDiversity); }) ==
          ErrorCode::ParseFailure);
    CHECK(code_of([] { parse_expansion_completion("are A: ", ExpansionMode::PredicateDiversity); }) ==
          ErrorCode::ParseFailure);
    CHECK(code_of([] { parse_expansion_completion("  ", ExpansionMode::ObjectDiversity, "love"); }) ==
          ErrorCode::ParseFailure);
}

TEST_CASE("filter_candidate") {
    CHECK_FALSE(filter_candidate("love", "pasta", "love A: pasta").has_value());
    CHECK(filter_candidate("are", "", "are A: ") == RejectReason::EmptyField);
    CHECK(filter_candidate(" ", "x", "x") == RejectReason::EmptyField);
    CHECK(filter_candidate("says", "offensive", "This question is offensive.") == RejectReason::RefusalPhrase);
    CHECK(filter_candidate("love", "Thistles", "love A: Thistles") == std::nullopt);
    CHECK(filter_candidate("love", "this", "love A: this") == std::nullopt);
}

TEST_CASE("predicate diversity sampling") {
    const InContextPool table = pool_of({make("Irish People", "drink", "too much"),
                               make("Mexican people", "can't be", "successful"),
                               make("American people", "love", "freedom")});
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        const auto ex = sample_for_predicate_diversity(table, "American people", 2, rng);
        REQUIRE(ex.size() == 2);
        CHECK(ex[0].subject != ex[1].subject);
        CHECK(ex[0].predicate != ex[1].predicate);
        for (const auto& t : ex) CHECK(t.subject != "American people");
    }

    const InContextPool single = pool_of({make("Irish People", "drink", "too much")});
    CHECK(sample_for_predicate_diversity(single, "American people", 1, rng).front().object == "too much");
    // Falls back to the query subject only when nothing else fits.
    CHECK(sample_for_predicate_diversity(single, "Irish People", 1, rng).size() == 1);

    const InContextPool all_love = pool_of({make("A", "love", "x"), make("B", "Love ", "y"), make("C", "love", "z")});
    CHECK(code_of([&] { sample_for_predicate_diversity(all_love, "D", 2, rng); }) == ErrorCode::InsufficientPool);
}

TEST_CASE("predicate diversity sampling: property over random pools") {
    Rng rng(7);
    for (int round = 0; round < 300; ++round) {
        std::vector<Triple> triples;
        const std::size_t n_triples = 1 + rng.index(30);
        for (std::size_t i = 0; i < n_triples; ++i) {
            triples.push_back(make("s" + std::to_string(rng.index(6)), "p" + std::to_string(rng.index(5)),
                                   "o" + std::to_string(i)));
        }
        const InContextPool pool(triples);
        const std::size_t n = 1 + rng.index(4);
        try {
            const auto ex = sample_for_predicate_diversity(pool, "s0", n, rng);
            REQUIRE(ex.size() == n);
            std::set<std::string> subjects, predicates;
            for (const auto& t : ex) {
                subjects.insert(t.subject);
                predicates.insert(t.predicate);
                CHECK(std::find(triples.begin(), triples.end(), t) != triples.end());
            }
            CHECK(subjects.size() == n);
            CHECK(predicates.size() == n);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InsufficientPool);
            // Only legitimate when the pool lacks n distinct subjects or predicates
            // or no matching exists; cheap necessary check on the first two.
            std::set<std::string> subjects, predicates;
            for (const auto& t : triples) {
                subjects.insert(t.subject);
                predicates.insert(t.predicate);
            }
            if (subjects.size() >= n && predicates.size() >= n) {
                // Brute force: try every n-subset assignment.
                std::vector<std::string> subj(subjects.begin(), subjects.end());
                bool possible = false;
                std::function<void(std::size_t, std::set<std::string>&, std::size_t)> go =
                    [&](std::size_t at, std::set<std::string>& used, std::size_t picked) {
                        if (possible) return;
                        if (picked == n) {
                            possible = true;
                            return;
                        }
                        if (at == subj.size()) return;
                        go(at + 1, used, picked);
                        for (const auto& t : triples) {
                            if (t.subject != subj[at] || used.count(t.predicate)) continue;
                            used.insert(t.predicate);
                            go(at + 1, used, picked + 1);
                            used.erase(t.predicate);
                        }
                    };
                std::set<std::string> used;
                go(0, used, 0);
                CHECK_FALSE(possible);
            }
        }
    }
}

TEST_CASE("inverse frequency predicate sampling") {
    Rng rng(11);
    const InContextPool skewed = pool_of({make("A", "love", "1"), make("B", "love", "2"), make("C", "love", "3"),
                                make("A", "hate", "4")});
    // P(p) = (1/c_p) / sum_q (1/c_q).
    const double oracle_hate = (1.0 / 1.0) / (1.0 / 1.0 + 1.0 / 3.0);
    int hate = 0;
    constexpr int draws = 100000;
    for (int i = 0; i < draws; ++i) hate += sample_predicate_inverse_frequency(skewed, rng) == "hate";
    CHECK(std::abs(static_cast<double>(hate) / draws - 0.75) <= 0.02);
    CHECK(oracle_hate == doctest::Approx(0.75));

    const InContextPool single = pool_of({make("A", "are", "1"), make("B", "are", "2"), make("C", "are", "3"),
                                make("D", "are", "4"), make("E", "are", "5")});
    for (int i = 0; i < 100; ++i) CHECK(sample_predicate_inverse_frequency(single, rng) == "are");

    const InContextPool uniform = pool_of({make("A", "a", "1"), make("B", "b", "2"), make("C", "c", "3")});
    std::map<std::string, int> counts;
    for (int i = 0; i < 30000; ++i) ++counts[sample_predicate_inverse_frequency(uniform, rng)];
    for (const auto& [p, c] : counts) CHECK(std::abs(c / 30000.0 - 1.0 / 3.0) <= 0.02);
    CHECK(counts.size() == 3);

    CHECK(code_of([&] { sample_predicate_inverse_frequency(InContextPool{}, rng); }) == ErrorCode::EmptyPool);
}

TEST_CASE("pool predicate counts match the multiset") {
    const InContextPool pool = pool_of({make("A", "Love", "1"), make("B", " love", "2"), make("C", "hate", "3")});
    CHECK(pool.predicate_counts().at("love") == 2);
    CHECK(pool.predicate_counts().at("hate") == 1);
    CHECK(pool.surface("love") == "Love");
}

TEST_CASE("object diversity sampling and relaxation") {
    Rng rng(3);
    const InContextPool pool = pool_of({make("Italian People", "love", "pasta"), make("Canadian people", "love", "Justin Bieber"),
                              make("Irish People", "drink", "too much"), make("Australian people", "love", "sun")});
    for (int i = 0; i < 100; ++i) {
        const auto s = sample_for_object_diversity(pool, "Australian people", "love", 2, rng);
        REQUIRE(s.examples.size() == 2);
        CHECK(s.relaxed == 0);
        for (const auto& t : s.examples) {
            CHECK(t.predicate == "love");
            CHECK(t.subject != "Australian people");
        }
        CHECK(s.examples[0].subject != s.examples[1].subject);
    }
    for (int i = 0; i < 100; ++i) {
        const auto s = sample_for_object_diversity(pool, "Australian people", "drink", 3, rng);
        REQUIRE(s.examples.size() == 3);
        std::size_t mismatched = 0;
        std::set<std::string> subjects;
        for (const auto& t : s.examples) {
            mismatched += t.predicate != "drink";
            subjects.insert(t.subject);
        }
        CHECK(subjects.size() == 3);
        CHECK(s.relaxed == mismatched);
        CHECK(s.relaxed == 2);
    }
    CHECK(code_of([&] { sample_for_object_diversity(pool, "x", "love", 5, rng); }) == ErrorCode::InsufficientPool);
}

TEST_CASE("initialize: G_0 sizes") {
    MockBackend mock(MockCorpus::builtin(), 1);
    const Crawler crawler(mock);

    const KnowledgeGraph gender("gender_identity", {"Men", "Women", "Non-binary People"});
    const auto batch = crawler.initialize(gender);
    CHECK(batch.skipped.empty());
    CHECK(batch.triples.size() == 60);

    CrawlConfig one;
    one.init_per_template = 1;
    const KnowledgeGraph single("nationality", {"American people"}, one);
    const auto small = crawler.initialize(single);
    REQUIRE(small.triples.size() == 4);
    std::set<std::string> predicates;
    for (const auto& t : small.triples) {
        predicates.insert(t.predicate);
        CHECK(t.strategy == Strategy::Init);
        CHECK(t.iteration == 0);
        CHECK_FALSE(t.object.empty());
    }
    CHECK(predicates == std::set<std::string>{"love", "hate", "are", "can't"});
}

TEST_CASE("always-refusing backend exhausts every slot") {
    auto corpus = MockCorpus::builtin();
    corpus.refusal_probability = 1.0;
    MockBackend mock(corpus, 1);
    CrawlConfig cfg;
    cfg.init_per_template = 1;
    cfg.max_retries = 3;
    const KnowledgeGraph g("religion", {"Jains", "Sikhs"}, cfg);

    const auto batch = Crawler(mock).initialize(g);
    CHECK(batch.triples.empty());
    CHECK(batch.skipped.size() == 8);
    CHECK(batch.audit.size() == 8 * 3);
    for (const auto& s : batch.skipped) {
        CHECK(s.attempts == 3);
        CHECK(s.last_reason == RejectReason::RefusalPhrase);
        CHECK_FALSE(s.predicate.empty());
    }

    CrawlOptions strict;
    strict.strict = true;
    int batches_seen = 0;
    CHECK(code_of([&] { Crawler(mock, strict).crawl(g, [&](const IterationBatch&) { ++batches_seen; }); }) ==
          ErrorCode::RetriesExhausted);
    CHECK(batches_seen == 1);
}

TEST_CASE("lenient crawl reports short counts instead of failing") {
    auto corpus = MockCorpus::builtin();
    corpus.refusal_probability = 0.6;
    MockBackend mock(corpus, 2);
    CrawlConfig cfg;
    cfg.max_retries = 1;
    cfg.iterations = 1;
    const KnowledgeGraph g("religion", {"Jains", "Sikhs", "Hindus"}, cfg);
    std::size_t skipped = 0;
    const auto out = Crawler(mock).crawl(g, [&](const IterationBatch& b) { skipped += b.skipped.size(); });
    CHECK(skipped > 0);
    CHECK(out.size() + skipped == cfg.expected_triples(3));
}

TEST_CASE("expansion rejects bad inputs") {
    MockBackend mock(MockCorpus::builtin(), 1);
    const Crawler crawler(mock);
    const KnowledgeGraph g("religion", {"Jains", "Sikhs"});
    CHECK(code_of([&] { crawler.expand_iteration(g, InContextPool{}, 1); }) == ErrorCode::EmptyPool);
    const InContextPool pool = pool_of({make("Jains", "love", "x")});
    CHECK(code_of([&] { crawler.expand_iteration(g, pool, 0); }) == ErrorCode::InvalidRequest);
    CHECK(code_of([&] { crawler.crawl(add_triple(g, make("Jains", "love", "x"))); }) ==
          ErrorCode::InvalidRequest);
}

TEST_CASE("iterations = 0 yields only G_0") {
    MockBackend mock(MockCorpus::builtin(), 4);
    CrawlConfig cfg;
    cfg.iterations = 0;
    const auto g = Crawler(mock).crawl(KnowledgeGraph("religion", {"Jains", "Sikhs"}, cfg));
    CHECK(g.size() == 40);
    for (const auto& t : g.triples()) CHECK(t.strategy == Strategy::Init);
}

TEST_CASE("full crawl: count invariant, filter, prompt shape and pool staleness") {
    MockBackend mock(MockCorpus::builtin(), 0);
    const auto seed_graph = nationality_graph();
    const std::size_t k = seed_graph.seeds().size();
    REQUIRE(k == 20);
    const std::size_t n = static_cast<std::size_t>(seed_graph.config().effective_incontext_samples(k));

    std::set<Example> earlier;
    std::map<int, std::size_t> per_iteration;
    std::size_t od_prompts = 0, od_relaxed = 0;
    const auto g = Crawler(mock).crawl(seed_graph, [&](const IterationBatch& b) {
        CHECK(b.skipped.empty());
        CHECK_FALSE(b.cancelled);
        per_iteration[b.iteration] = b.triples.size();
        for (const auto& r : b.audit) {
            if (r.strategy == Strategy::Init) continue;
            const auto ex = examples_in(r.prompt);
            CHECK(ex.size() == n);
            CHECK(r.n_examples == n);
            std::set<std::string> subjects, predicates;
            for (const auto& e : ex) {
                subjects.insert(e.subject);
                predicates.insert(text::normalize_key(e.predicate));
                // Examples only come from earlier iterations.
                CHECK(earlier.count(e) == 1);
            }
            CHECK(subjects.size() == n);
            if (r.strategy == Strategy::PredicateDiversity) {
                CHECK(predicates.size() == n);
                CHECK(r.prompt.substr(r.prompt.rfind('\n') + 1) == "Q: " + r.subject + " #");
            } else {
                od_prompts += r.accepted;
                const auto last = r.prompt.substr(r.prompt.rfind('\n') + 1);
                const auto query_predicate = last.substr(last.find(" # ") + 3, last.size() - last.find(" # ") - 6);
                std::size_t mismatched = 0;
                for (const auto& e : ex) mismatched += text::normalize_key(e.predicate) != text::normalize_key(query_predicate);
                CHECK(mismatched == r.relaxed_examples);
                od_relaxed += r.relaxed_examples > 0;
            }
        }
        for (const auto& t : b.triples) earlier.insert({t.subject, t.predicate, t.object});
    });

    CHECK(g.size() == 2000);
    CHECK(g.size() == seed_graph.config().expected_triples(k));
    CHECK(per_iteration.at(0) == 400);
    for (int i = 1; i <= 4; ++i) CHECK(per_iteration.at(i) == 400);
    for (const auto& s : g.seeds()) CHECK(g.count_subject(s) == 100);
    for (const auto& t : g.triples()) {
        CHECK_FALSE(text::trim(t.predicate).empty());
        CHECK_FALSE(text::trim(t.object).empty());
        CHECK_FALSE(text::contains_word(t.raw_completion, "This"));
        CHECK_FALSE(t.augmented_init);
        CHECK_FALSE(t.augmented_expansion);
    }
    CHECK(od_prompts == 4 * 10 * k);
    MESSAGE("object-diversity calls with relaxed examples: " << od_relaxed);
}

TEST_CASE("gender class uses two in-context examples") {
    MockBackend mock(MockCorpus::builtin(), 3);
    CrawlConfig cfg;
    cfg.iterations = 2;
    const KnowledgeGraph seeds("gender_identity", {"Men", "Women", "Non-binary People"}, cfg);
    std::size_t expansion_prompts = 0;
    const auto g = Crawler(mock).crawl(seeds, [&](const IterationBatch& b) {
        for (const auto& r : b.audit) {
            if (r.strategy == Strategy::Init) continue;
            ++expansion_prompts;
            CHECK(examples_in(r.prompt).size() == 2);
        }
    });
    CHECK(expansion_prompts >= 2 * 2 * 10 * 3);
    CHECK(g.size() == cfg.expected_triples(3));
}

TEST_CASE("crawl output does not depend on thread count") {
    MockBackend mock(MockCorpus::builtin(), 9);
    CrawlConfig cfg;
    cfg.iterations = 2;
    cfg.rng_seed = 42;
    const auto seeds = nationality_graph(cfg);
    std::vector<std::string> audit_one, audit_four;
    CrawlOptions four;
    four.threads = 4;
    const auto a = Crawler(mock).crawl(seeds, [&](const IterationBatch& b) {
        for (const auto& r : b.audit) audit_one.push_back(serialize_audit_record(r));
    });
    const auto b = Crawler(mock, four).crawl(seeds, [&](const IterationBatch& batch) {
        for (const auto& r : batch.audit) audit_four.push_back(serialize_audit_record(r));
    });
    CHECK(serialize_graph(a) == serialize_graph(b));
    CHECK(audit_one == audit_four);

    cfg.rng_seed = 43;
    const auto c = Crawler(mock).crawl(nationality_graph(cfg));
    CHECK(serialize_graph(c) != serialize_graph(a));
}

TEST_CASE("augmentation changes prompts and stamps triples") {
    MockBackend mock(MockCorpus::builtin(), 5);
    CrawlConfig cfg;
    cfg.iterations = 1;
    cfg.augment_init = true;
    cfg.augment_expansion = true;
    std::size_t checked = 0;
    const auto g = Crawler(mock).crawl(nationality_graph(cfg), [&](const IterationBatch& b) {
        for (const auto& r : b.audit) {
            if (r.strategy == Strategy::Init) {
                CHECK(r.prompt.rfind("I'm not racist but ", 0) == 0);
            } else {
                CHECK(r.prompt.rfind("Offensive Generalizations\n\n", 0) == 0);
            }
            ++checked;
        }
    });
    CHECK(checked >= g.size());
    for (const auto& t : g.triples()) {
        CHECK(t.augmented_init);
        CHECK(t.augmented_expansion);
    }

    cfg.augment_init = false;
    const auto only_expansion = Crawler(mock).crawl(nationality_graph(cfg), [&](const IterationBatch& b) {
        for (const auto& r : b.audit) {
            if (r.strategy == Strategy::Init) CHECK(r.prompt.find("racist") == std::string::npos);
        }
    });
    CHECK_FALSE(only_expansion.triples().front().augmented_init);
    CHECK(only_expansion.triples().front().augmented_expansion);
}

TEST_CASE("cancellation stops between slots") {
    MockBackend mock(MockCorpus::builtin(), 5);
    std::atomic<bool> cancel{false};
    CrawlOptions opts;
    opts.cancel = &cancel;
    int batches = 0;
    const auto g = Crawler(mock, opts).crawl(nationality_graph(), [&](const IterationBatch& b) {
        ++batches;
        if (b.iteration == 1) cancel = true;
    });
    CHECK(batches == 3);
    CHECK(g.size() == 800);

    cancel = true;
    const auto none = Crawler(mock, opts).crawl(nationality_graph());
    CHECK(none.size() == 0);
}

TEST_CASE("audit log records rejections with reasons") {
    auto corpus = MockCorpus::builtin();
    corpus.refusal_probability = 0.3;
    corpus.empty_probability = 0.3;
    MockBackend mock(corpus, 8);
    CrawlConfig cfg;
    cfg.iterations = 1;
    cfg.max_retries = 20;
    std::map<std::string, std::size_t> reasons;
    std::size_t accepted = 0;
    std::set<std::string> ids;
    const auto g = Crawler(mock).crawl(nationality_graph(cfg), [&](const IterationBatch& b) {
        for (const auto& r : b.audit) {
            CHECK(ids.insert(r.prompt_id).second);
            CHECK(r.accepted != r.reject_reason.has_value());
            if (r.accepted) {
                ++accepted;
            } else {
                ++reasons[std::string(to_string(*r.reject_reason))];
            }
            const auto j = nlohmann::json::parse(serialize_audit_record(r));
            for (const char* key : {"prompt_id", "iteration", "strategy", "prompt", "raw_completion", "accepted",
                                    "reject_reason"}) {
                CHECK(j.contains(key));
            }
        }
    });
    CHECK(accepted == g.size());
    CHECK(reasons["refusal_phrase"] > 0);
    CHECK(reasons["empty_field"] + reasons["parse_failure"] > 0);
    for (const auto& t : g.triples()) CHECK(ids.count(t.prompt_id) == 1);
}

TEST_CASE("a backend returning garbage is parsed, not trusted") {
    FixedBackend backend("hate Mexicans");
    CrawlConfig cfg;
    cfg.max_retries = 2;
    const KnowledgeGraph g("nationality", {"American people", "Irish people"}, cfg);
    InContextPool pool = pool_of({make("Irish people", "drink", "tea"), make("American people", "love", "cars")});
    const auto batch = Crawler(backend).expand_iteration(g, pool, 1);
    CHECK(batch.triples.size() == 20);  // object diversity takes the whole line as the object
    CHECK(batch.skipped.size() == 20);  // predicate diversity cannot split it
    for (const auto& s : batch.skipped) {
        CHECK(s.strategy == Strategy::PredicateDiversity);
        CHECK(s.last_reason == RejectReason::ParseFailure);
    }
}
