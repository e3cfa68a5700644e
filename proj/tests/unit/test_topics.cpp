#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "stereocrawl/builtin_data.hpp"
#include "stereocrawl/crawler.hpp"
#include "stereocrawl/error.hpp"
#include "stereocrawl/mock_backend.hpp"
#include "stereocrawl/rng.hpp"
#include "stereocrawl/seeds.hpp"
#include "stereocrawl/topics.hpp"

using namespace stereocrawl;

namespace {

Triple make(std::string s, std::string p, std::string o) {
    Triple t;
    t.subject = std::move(s);
    t.predicate = std::move(p);
    t.object = std::move(o);
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

TopicDistribution dist(std::map<int, double> p, std::string subject = "s") {
    return {std::move(subject), std::move(p)};
}

double normal(Rng& rng) {
    const double u1 = std::max(rng.uniform(), 1e-12);
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<std::vector<double>> two_blobs(Rng& rng, std::size_t per_blob, double spread) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < per_blob; ++i) out.push_back({normal(rng) * spread, normal(rng) * spread});
    for (std::size_t i = 0; i < per_blob; ++i) {
        out.push_back({10.0 + normal(rng) * spread, 10.0 + normal(rng) * spread});
    }
    return out;
}

/// Best agreement between predicted labels and truth over both label pairings.
double pairing_accuracy(const std::vector<TopicAssignment>& a, std::size_t per_blob) {
    std::size_t direct = 0, swapped = 0;
    for (const auto& x : a) {
        const int truth = x.triple_index < per_blob ? 0 : 1;
        direct += x.topic_id == truth;
        swapped += x.topic_id == 1 - truth;
    }
    return static_cast<double>(std::max(direct, swapped)) / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("preprocess") {
    CHECK(preprocess(make("Italian people", "love", "pasta")) == std::vector<std::string>{"love", "pasta"});
    CHECK(preprocess(make("X", "are", "the friendliest")) == std::vector<std::string>{"friendly"});
    CHECK(preprocess(make("X", "are", "the very same")).empty());
    CHECK(preprocess(make("X", "can't", "Drive Cars")) == std::vector<std::string>{"drive", "car"});
}

TEST_CASE("preprocess never emits stopwords or upper case") {
    const auto& stop = bundled_stopwords();
    CHECK(stop.count("the"));
    CHECK(stop.count("can't"));
    CHECK(stop.count("cannot"));
    MockBackend mock(MockCorpus::builtin(), 1);
    CrawlConfig cfg;
    cfg.iterations = 1;
    const auto g = Crawler(mock).crawl(KnowledgeGraph("nationality", roster_subjects(bundled_roster("nationality"), true), cfg));
    for (const auto& t : g.triples()) {
        for (const auto& tok : preprocess(t)) {
            CHECK_FALSE(stop.count(tok));
            CHECK(std::none_of(tok.begin(), tok.end(), [](char c) { return c >= 'A' && c <= 'Z'; }));
        }
    }
}

TEST_CASE("lemmatizer") {
    CHECK(lemmatize("cars") == "car");
    CHECK(lemmatize("countries") == "country");
    CHECK(lemmatize("friendliest") == "friendly");
    CHECK(lemmatize("men") == "man");
    CHECK(lemmatize("women") == "woman");
    CHECK(lemmatize("loves") == "love");
    CHECK(lemmatize("pasta") == "pasta");
    CHECK(fold_case("ÉCOLE Ünder") == "école ünder");
}

TEST_CASE("embedding table parsing") {
    const auto table = EmbeddingTable::parse("3 3\nlove 1 0 0\npasta 0 2 0\nLove 9 9 9\nwarm 0 0 4\n");
    CHECK(table.dimension() == 3);
    CHECK(table.size() == 3);
    REQUIRE(table.find("LOVE").size() == 3);
    CHECK(table.find("love")[0] == 1.0f);
    CHECK(table.find("nope").empty());

    const std::unordered_set<std::string> vocab{"pasta"};
    CHECK(EmbeddingTable::parse("love 1 0 0\npasta 0 2 0\n", &vocab).size() == 1);

    CHECK(code_of([] { EmbeddingTable::parse("love 1 0 0\npasta 0 2\n"); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([] { EmbeddingTable::parse("love 1 x 0\n"); }) == ErrorCode::InvalidConfig);
    EmbeddingTable t(2);
    const std::vector<float> wrong{1, 2, 3};
    CHECK(code_of([&] { t.add("w", wrong); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("embed averages found vectors") {
    const auto table = EmbeddingTable::parse("love 1 0 3\npasta 0 2 1\n");
    const std::vector<std::string> one{"love"};
    CHECK(embed(one, table).vector == std::vector<double>{1, 0, 3});
    const std::vector<std::string> two{"love", "pasta", "zzz"};
    const auto e = embed(two, table);
    CHECK_FALSE(e.oov);
    CHECK(e.vector[0] == doctest::Approx((1.0 + 0.0) / 2));
    CHECK(e.vector[1] == doctest::Approx((0.0 + 2.0) / 2));
    CHECK(e.vector[2] == doctest::Approx((3.0 + 1.0) / 2));
    const std::vector<std::string> none{"zzz"};
    const auto z = embed(none, table);
    CHECK(z.oov);
    CHECK(z.vector == std::vector<double>{0, 0, 0});
    CHECK(embed(std::vector<std::string>{}, table).oov);
}

TEST_CASE("min_cluster_size") {
    CHECK(min_cluster_size(2000) == 50);
    CHECK(min_cluster_size(300) == 7);
    CHECK(min_cluster_size(40) == 2);
    CHECK(min_cluster_size(1) == 2);
    CHECK(min_cluster_size(119) == 2);
    CHECK(min_cluster_size(120) == 3);
}

TEST_CASE("cluster: two separated blobs") {
    Rng rng(31);
    const auto points = two_blobs(rng, 50, 0.5);
    const auto a = cluster(points, 10);
    REQUIRE(a.size() == 100);
    std::set<int> topics;
    std::size_t noise = 0;
    for (const auto& x : a) {
        if (x.topic_id == kNoiseTopic) {
            ++noise;
        } else {
            topics.insert(x.topic_id);
        }
    }
    CHECK(topics == std::set<int>{0, 1});
    CHECK(noise <= 5);
    CHECK(pairing_accuracy(a, 50) >= 0.95);
    CHECK(cluster(points, 10) == a);
}

TEST_CASE("cluster: topic ids by size, min size respected") {
    Rng rng(4);
    for (int round = 0; round < 20; ++round) {
        std::vector<std::vector<double>> points;
        const std::size_t big = 30 + rng.index(30), small = 15 + rng.index(10);
        for (std::size_t i = 0; i < small; ++i) points.push_back({normal(rng) * 0.3, normal(rng) * 0.3});
        for (std::size_t i = 0; i < big; ++i) points.push_back({20 + normal(rng) * 0.3, normal(rng) * 0.3});
        const std::size_t min_size = 8;
        const auto a = cluster(points, min_size);
        std::map<int, std::size_t> sizes;
        for (const auto& x : a) {
            if (x.topic_id != kNoiseTopic) ++sizes[x.topic_id];
        }
        REQUIRE_FALSE(sizes.empty());
        int expect = 0;
        for (const auto& [id, n] : sizes) {
            CHECK(id == expect++);
            CHECK(n >= min_size);
            if (sizes.count(id + 1)) CHECK(n >= sizes.at(id + 1));
        }
    }
}

TEST_CASE("cluster: degenerate inputs") {
    const std::vector<std::vector<double>> same(20, {1.0, 2.0});
    const auto a = cluster(same, 5);
    for (const auto& x : a) CHECK(x.topic_id == 0);

    const std::vector<std::vector<double>> few(5, {1.0, 2.0});
    CHECK(code_of([&] { cluster(few, 10); }) == ErrorCode::TooFewPoints);

    std::vector<std::vector<double>> ragged(20, {1.0, 2.0});
    ragged[7] = {1.0};
    CHECK(code_of([&] { cluster(ragged, 5); }) == ErrorCode::DimensionMismatch);

    std::vector<std::vector<double>> with_oov(20, {1.0, 2.0});
    with_oov[3] = {0.0, 0.0};
    const auto b = cluster(with_oov, 5);
    CHECK(b[3].topic_id == kNoiseTopic);
    CHECK(b[4].topic_id == 0);
}

TEST_CASE("class-based TF-IDF") {
    const std::vector<std::vector<std::string>> docs{{"lazy"}, {"lazy"}, {"friendly"}, {"warm"}};
    const std::vector<TopicAssignment> a{{0, 0}, {1, 0}, {2, 1}, {3, 1}};
    const auto topics = representative_words(a, docs);
    REQUIRE(topics.size() == 2);
    // A = 4 tokens / 2 topics = 2.
    CHECK(topics[0].representative_words == std::vector<std::string>{"lazy"});
    CHECK(topics[0].scores[0] == doctest::Approx(2.0 * std::log(1.0 + 2.0 / 2.0)));
    CHECK(topics[1].representative_words == std::vector<std::string>{"friendly", "warm"});
    CHECK(topics[1].scores[0] == doctest::Approx(1.0 * std::log(1.0 + 2.0 / 1.0)));
    CHECK(topics[0].size == 2);

    const std::vector<std::vector<std::string>> one_doc{{"pasta"}};
    const std::vector<TopicAssignment> one{{0, 0}};
    CHECK(representative_words(one, one_doc)[0].representative_words.front() == "pasta");

    // "shared" has the same tf in topic 0 as "only" but also occurs in topic 1.
    const std::vector<std::vector<std::string>> mixed{{"shared", "only"}, {"shared", "other"}};
    const std::vector<TopicAssignment> m{{0, 0}, {1, 1}};
    const auto t = representative_words(m, mixed);
    CHECK(t[0].representative_words == std::vector<std::string>{"only", "shared"});
    CHECK(t[0].scores[0] > t[0].scores[1]);

    const std::vector<TopicAssignment> all_noise{{0, kNoiseTopic}};
    CHECK(code_of([&] { representative_words(all_noise, one_doc); }) == ErrorCode::NoTopics);
    CHECK(code_of([&] { representative_words(a, one_doc); }) == ErrorCode::MisalignedInput);
}

TEST_CASE("representative words come from the topic's own documents") {
    Rng rng(8);
    const std::vector<std::string> words{"a", "b", "c", "d", "e", "f", "g"};
    for (int round = 0; round < 100; ++round) {
        std::vector<std::vector<std::string>> docs(1 + rng.index(30));
        std::vector<TopicAssignment> a;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            for (std::size_t w = rng.index(4); w > 0; --w) docs[i].push_back(words[rng.index(words.size())]);
            a.push_back({i, static_cast<int>(rng.index(3))});
        }
        a[0].topic_id = 0;
        const auto topics = representative_words(a, docs, 3);
        for (const auto& t : topics) {
            std::set<std::string> vocab;
            for (const auto& x : a) {
                if (x.topic_id == t.topic_id) vocab.insert(docs[x.triple_index].begin(), docs[x.triple_index].end());
            }
            CHECK(t.representative_words.size() <= 3);
            for (const auto& w : t.representative_words) CHECK(vocab.count(w));
            CHECK(std::is_sorted(t.scores.rbegin(), t.scores.rend()));
        }
    }
}

TEST_CASE("topic distributions") {
    std::vector<TopicAssignment> a;
    std::vector<std::string> subjects;
    for (std::size_t i = 0; i < 10; ++i) {
        a.push_back({i, static_cast<int>(i % 2)});
        subjects.push_back("S");
    }
    auto d = topic_distributions(a, subjects);
    REQUIRE(d.subjects.size() == 1);
    CHECK(d.subjects[0].probabilities == std::map<int, double>{{0, 0.5}, {1, 0.5}});
    CHECK(d.subjects[0].probabilities == d.reference.probabilities);

    // Equal counts: pooled q is the plain mean of the p's.
    a.clear();
    subjects.clear();
    for (std::size_t i = 0; i < 200; ++i) {
        const bool first = i < 100;
        a.push_back({i, first ? static_cast<int>(i % 4 == 0) : static_cast<int>(i % 3 != 0) + 1});
        subjects.push_back(first ? "A" : "B");
    }
    d = topic_distributions(a, subjects);
    for (const auto& [k, q] : d.reference.probabilities) {
        const double mean = (d.subjects[0].probabilities.at(k) + d.subjects[1].probabilities.at(k)) / 2.0;
        CHECK(q == doctest::Approx(mean).epsilon(1e-12));
    }
    for (const auto& s : d.subjects) {
        double sum = 0;
        for (const auto& [k, p] : s.probabilities) sum += p;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.probabilities.size() == d.reference.probabilities.size());
    }

    // Noise is left out of both p and q.
    a[0].topic_id = kNoiseTopic;
    d = topic_distributions(a, subjects);
    CHECK_FALSE(d.reference.probabilities.count(kNoiseTopic));

    std::vector<TopicAssignment> noisy{{0, 0}, {1, kNoiseTopic}};
    std::vector<std::string> two{"A", "B"};
    CHECK(code_of([&] { topic_distributions(noisy, two); }) == ErrorCode::SubjectAllNoise);
    CHECK(code_of([&] { topic_distributions(noisy, std::span(two).first(1)); }) == ErrorCode::MisalignedInput);
}

TEST_CASE("relative entropy") {
    const auto half = dist({{0, 0.5}, {1, 0.5}});
    CHECK(relative_entropy(half, half) == 0.0);
    CHECK(relative_entropy(dist({{0, 1.0}, {1, 0.0}}), half) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(std::fabs(relative_entropy(dist({{0, 1.0}, {1, 0.0}}), half) - 0.69314718056) < 1e-9);
    const double expected = 0.25 * std::log(0.5) + 0.75 * std::log(1.5);
    CHECK(std::fabs(relative_entropy(dist({{0, 0.25}, {1, 0.75}}), half) - expected) < 1e-9);
    CHECK(std::fabs(expected - 0.13081) < 1e-5);

    CHECK(code_of([&] { relative_entropy(half, dist({{0, 1.0}, {1, 0.0}})); }) == ErrorCode::SupportViolation);
    CHECK(code_of([&] { relative_entropy(half, dist({{0, 1.0}})); }) == ErrorCode::SupportViolation);
    CHECK(relative_entropy(dist({{0, 1.0}, {1, 0.0}}), dist({{0, 1.0}})) == 0.0);
}

TEST_CASE("relative entropy: Gibbs inequality over random pairs") {
    Rng rng(12);
    for (int round = 0; round < 1000; ++round) {
        const std::size_t k = 1 + rng.index(8);
        std::map<int, double> p, q;
        double sp = 0, sq = 0;
        for (std::size_t i = 0; i < k; ++i) {
            p[static_cast<int>(i)] = rng.bernoulli(0.2) ? 0.0 : rng.uniform();
            q[static_cast<int>(i)] = 0.01 + rng.uniform();
            sp += p[static_cast<int>(i)];
            sq += q[static_cast<int>(i)];
        }
        if (sp == 0) {
            p[0] = 1;
            sp = 1;
        }
        for (auto& [i, v] : p) v /= sp;
        for (auto& [i, v] : q) v /= sq;
        CHECK(relative_entropy(dist(p), dist(q)) >= -1e-12);
        CHECK(std::fabs(relative_entropy(dist(p), dist(p))) <= 1e-12);
        CHECK(std::fabs(relative_entropy(dist(q), dist(q))) <= 1e-12);
    }
}

TEST_CASE("topic model pipeline on a mock crawl") {
    MockBackend mock(MockCorpus::builtin(), 0);
    const auto g = Crawler(mock).crawl(
        KnowledgeGraph("nationality", roster_subjects(bundled_roster("nationality"), true), CrawlConfig{}));
    REQUIRE(g.size() == 2000);
    const auto table = EmbeddingTable::parse(builtin::toy_vectors_text());
    const auto r = run_topic_model(g, table);
    CHECK(r.min_cluster_size == 50);
    CHECK(r.protected_class == "nationality");
    CHECK(r.assignments.size() == 2000);
    CHECK_FALSE(r.topics.empty());
    CHECK(r.noise_rate >= 0.0);
    CHECK(r.noise_rate < 1.0);
    CHECK(r.distributions.subjects.size() == 20);
    CHECK(r.entropies.size() == 20);
    for (const auto& e : r.entropies) CHECK(e.relative_entropy >= 0.0);

    std::map<int, std::size_t> sizes;
    for (const auto& a : r.assignments) {
        if (a.topic_id != kNoiseTopic) ++sizes[a.topic_id];
    }
    for (const auto& [id, n] : sizes) CHECK(n >= r.min_cluster_size);

    TopicModelOptions threaded;
    threaded.threads = 3;
    const auto again = run_topic_model(g, table, threaded);
    CHECK(topic_distribution_csv(again) == topic_distribution_csv(r));
    CHECK(topic_words_csv(again) == topic_words_csv(r));
    CHECK(entropy_csv(again) == entropy_csv(r));
    CHECK(topic_meta_json(again, "toy") == topic_meta_json(r, "toy"));

    CHECK(topic_distribution_csv(r).rfind("subject,topic_id,p_k\n", 0) == 0);
    CHECK(topic_distribution_csv(r).find(std::string(kReferenceRow)) != std::string::npos);
    CHECK(topic_words_csv(r).rfind("topic_id,rank,word,score\n", 0) == 0);
    CHECK(entropy_csv(r).rfind("subject,relative_entropy\n", 0) == 0);
    const auto meta = nlohmann::json::parse(topic_meta_json(r, "toy"));
    CHECK(meta["min_cluster_size"] == 50);
    CHECK(meta.contains("noise_rate"));
    CHECK(meta.contains("oov_rate"));
}
