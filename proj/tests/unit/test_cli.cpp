#include <algorithm>
#include <cstdlib>
#include <map>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "dot_grammar.hpp"
#include "json.hpp"
#include "stereocrawl/builtin_data.hpp"
#include "stereocrawl/cli.hpp"
#include "stereocrawl/harm.hpp"
#include "stereocrawl/model.hpp"
#include "stereocrawl/report.hpp"

using namespace stereocrawl;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("stereocrawl-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const std::string& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

/// Small mock crawl: 3 gender seeds, one expansion iteration.
Result small_crawl(const TempDir& dir, const std::string& name, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"crawl", "--class", "gender_identity", "--backend", "mock", "--iterations", "1",
                                  "--seed", "5", "--out", dir / name};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
}

}  // namespace

TEST_CASE("help documents every flag") {
    const std::map<std::string, std::vector<std::string>> flags{
        {"seeds", {"--class", "--backend", "--mock-corpus", "--seed", "--runs", "--min-support", "--add", "--bundled",
                   "--out", "--config", "--threads"}},
        {"crawl", {"--class", "--roster", "--dynamic-roster", "--add", "--out", "--audit", "--dot", "--augment-init",
                   "--augment-expansion", "--seed", "--iterations", "--init-per-template", "--incontext-samples",
                   "--executions", "--temperature", "--max-retries", "--strict", "--backend", "--mock-corpus",
                   "--config", "--threads"}},
        {"score", {"--graph", "--augmented", "--out", "--augmented-out", "--test-out", "--meta", "--scorer",
                   "--config", "--threads"}},
        {"topics", {"--graph", "--vectors", "--toy-vectors", "--out-dir", "--top-n", "--min-cluster-size",
                    "--config", "--threads"}},
        {"report", {"--harm", "--distributions", "--entropy", "--figures", "--out-dir", "--title"}},
        {"selftest", {"--out-dir", "--seed", "--threads"}},
    };
    const auto top = run({"--help"});
    CHECK(top.code == 0);
    for (const auto& [command, list] : flags) {
        CHECK(top.out.find(command) != std::string::npos);
        const auto r = run({command, "--help"});
        CHECK(r.code == 0);
        for (const auto& f : list) CHECK_MESSAGE(r.out.find(f) != std::string::npos, command << " " << f);
    }
    CHECK(run({"--version"}).code == 0);
}

TEST_CASE("flag errors exit 64") {
    CHECK(run({}).code == cli::kFlagError);
    CHECK(run({"crawl", "--no-such-flag"}).code == 64);
    CHECK(run({"frobnicate"}).code == 64);
    CHECK(run({"crawl", "--iterations", "many"}).code == 64);
    CHECK(run({"report", "--figures", "pie"}).code == 64);
    CHECK(run({"score"}).code == 64);  // --graph is required
}

TEST_CASE("crawl writes graph, audit and DOT, and reruns byte-identically") {
    TempDir dir;
    const auto r = small_crawl(dir, "g.jsonl", {"--dot", dir / "g.dot", "--augment-init", "--augment-expansion"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto g = parse_graph(slurp(dir / "g.jsonl"));
    CHECK(g.protected_class() == "gender_identity");
    CHECK(g.size() == 60 + 60);
    for (const auto& t : g.triples()) {
        CHECK(t.augmented_init);
        CHECK(t.augmented_expansion);
    }
    CHECK(fs::exists(dir / "g.audit.jsonl"));
    const auto dot = dotcheck::check(slurp(dir / "g.dot"));
    REQUIRE(dot.has_value());
    CHECK(dot->edges == g.size());
    CHECK(r.out.find("Men") != std::string::npos);

    const auto again = small_crawl(dir, "h.jsonl", {"--augment-init", "--augment-expansion"});
    REQUIRE(again.code == 0);
    CHECK(slurp(dir / "h.jsonl") == slurp(dir / "g.jsonl"));
    CHECK(slurp(dir / "h.audit.jsonl") == slurp(dir / "g.audit.jsonl"));

    REQUIRE(small_crawl(dir, "plain.jsonl").code == 0);
    for (const auto& t : parse_graph(slurp(dir / "plain.jsonl")).triples()) CHECK_FALSE(t.augmented_init);
}

TEST_CASE("crawl: iterations 0 and strict mode") {
    TempDir dir;
    REQUIRE(run({"crawl", "--class", "religion", "--backend", "mock", "--iterations", "0", "--out",
                 dir / "r.jsonl"})
                .code == 0);
    const auto g = parse_graph(slurp(dir / "r.jsonl"));
    CHECK(g.size() == 20 * g.seeds().size());

    auto corpus = nlohmann::json::parse(builtin::mock_corpus_json());
    corpus["refusal_probability"] = 1.0;
    write(dir / "refuse.json", corpus.dump());
    const auto strict = run({"crawl", "--class", "gender_identity", "--backend", "mock", "--mock-corpus",
                             dir / "refuse.json", "--strict", "--max-retries", "2", "--out", dir / "s.jsonl"});
    CHECK(strict.code == cli::kExternalFailure);
    const auto lenient = run({"crawl", "--class", "gender_identity", "--backend", "mock", "--mock-corpus",
                              dir / "refuse.json", "--max-retries", "2", "--out", dir / "l.jsonl"});
    // Nothing to expand from: the empty G_0 and its audit are still written.
    CHECK(lenient.code == cli::kDataError);
    CHECK(lenient.err.find("EmptyPool") != std::string::npos);
    CHECK(parse_graph(slurp(dir / "l.jsonl")).size() == 0);
    const auto audit = slurp(dir / "l.audit.jsonl");
    CHECK(std::count(audit.begin(), audit.end(), '\n') == 3 * 20 * 2);
}

TEST_CASE("remote backend without credentials exits 1 with a hint") {
    ::unsetenv("STEREOCRAWL_LLM_KEY");
    ::unsetenv("STEREOCRAWL_LLM_URL");
    TempDir dir;
    const auto r = run({"crawl", "--class", "religion", "--out", dir / "x.jsonl"});
    CHECK(r.code == 1);
    CHECK(r.err.find("STEREOCRAWL_LLM_KEY") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "x.jsonl"));
}

TEST_CASE("seeds: bundled, hybrid and unknown class") {
    TempDir dir;
    const auto r = run({"seeds", "--class", "nationality", "--backend", "mock", "--add", "Brazil", "--add", "Chile",
                        "--add", "Nigeria", "--add", "South Africa", "--out", dir / "n.json"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto roster = nlohmann::json::parse(slurp(dir / "n.json"));
    CHECK(slurp(dir / "n.json").find("\"manual\"") != std::string::npos);
    CHECK(slurp(dir / "n.json").find("South Africa") != std::string::npos);
    CHECK(run({"seeds", "--class", "religion", "--bundled", "--out", dir / "r.json"}).code == 0);
    CHECK(run({"seeds", "--class", "astrology", "--bundled", "--out", dir / "a.json"}).code == 2);
}

TEST_CASE("config layering: defaults < file < flags") {
    TempDir dir;
    fs::create_directories(dir.path() / "conf");
    write(dir / "conf/roster.json",
          R"({"class":"religion","entities":[{"name":"Jains","provenance":"manual"},{"name":"Sikhs","provenance":"manual"}]})");
    write(dir / "conf/run.json", R"({"class":"religion","roster":{"file":"roster.json"},
        "crawl":{"iterations":1,"executions_per_strategy":2},"backend":{"kind":"mock"}})");

    cli::RunConfig cfg;
    cli::apply_config_file(dir / "conf/run.json", cfg);
    CHECK(cfg.crawl.iterations == 1);
    CHECK(cfg.crawl.init_per_template == 5);
    CHECK(fs::path(cfg.roster.file) == fs::path(dir / "conf/roster.json"));
    CHECK(cfg.backend.kind == cli::BackendKind::Mock);

    auto from_file = run({"crawl", "--config", dir / "conf/run.json", "--out", dir / "a.jsonl"});
    REQUIRE_MESSAGE(from_file.code == 0, from_file.err);
    auto g = parse_graph(slurp(dir / "a.jsonl"));
    CHECK(g.seeds() == std::vector<std::string>{"Jains", "Sikhs"});
    CHECK(g.size() == 2 * 20 + 2 * 2 * 2);

    auto flagged = run({"crawl", "--config", dir / "conf/run.json", "--iterations", "0", "--out", dir / "b.jsonl"});
    REQUIRE(flagged.code == 0);
    CHECK(parse_graph(slurp(dir / "b.jsonl")).size() == 40);

    write(dir / "conf/bad.json", R"({"crawl":{"iteratons":1}})");
    CHECK(run({"crawl", "--config", dir / "conf/bad.json", "--out", dir / "c.jsonl"}).code == 2);
    write(dir / "conf/bad2.json", R"({"colour":"blue"})");
    CHECK(run({"crawl", "--config", dir / "conf/bad2.json", "--out", dir / "c.jsonl"}).code == 2);
    CHECK(run({"crawl", "--config", dir / "conf/missing.json", "--out", dir / "c.jsonl"}).code == 2);
    cli::RunConfig untouched;
    CHECK_THROWS_AS(cli::apply_config_json(R"({"threads":"four"})", ".", untouched), Error);
}

TEST_CASE("score: outputs, untouched inputs and withheld partial results") {
    TempDir dir;
    REQUIRE(small_crawl(dir, "base.jsonl").code == 0);
    REQUIRE(small_crawl(dir, "aug.jsonl", {"--augment-init", "--augment-expansion"}).code == 0);
    const auto base_bytes = slurp(dir / "base.jsonl");
    const auto aug_bytes = slurp(dir / "aug.jsonl");

    const auto r = run({"score", "--graph", dir / "base.jsonl", "--augmented", dir / "aug.jsonl", "--scorer",
                        "lexicon", "--out", dir / "harm.csv"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(slurp(dir / "base.jsonl") == base_bytes);
    CHECK(slurp(dir / "aug.jsonl") == aug_bytes);
    const auto rows = parse_harm_csv(slurp(dir / "harm.csv"));
    CHECK(rows.size() == 3);
    CHECK(fs::exists(dir / "harm_augmented.csv"));
    const auto test = nlohmann::json::parse(slurp(dir / "augmentation_test.json"));
    CHECK(test.contains("p_value"));
    CHECK(r.out.find("p") != std::string::npos);

    const auto again = run({"score", "--graph", dir / "base.jsonl", "--scorer", "lexicon", "--out", dir / "h2.csv"});
    REQUIRE(again.code == 0);
    CHECK(slurp(dir / "h2.csv") == slurp(dir / "harm.csv"));

    CHECK(run({"score", "--graph", dir / "base.jsonl", "--scorer", "lexicon", "--out", dir / "base.jsonl"}).code ==
          2);
    CHECK(slurp(dir / "base.jsonl") == base_bytes);

    // Port 1 refuses connections.
    write(dir / "scorer.json", R"({"scorer":{"kind":"remote","perspective_key":"k",
        "perspective_url":"http://127.0.0.1:1/analyze","regard_url":"http://127.0.0.1:1/regard"}})");
    const auto dead = run({"score", "--graph", dir / "base.jsonl", "--config", dir / "scorer.json", "--out",
                           dir / "dead.csv"});
    CHECK(dead.code == 1);
    CHECK_FALSE(fs::exists(dir / "dead.csv"));

    ::unsetenv("STEREOCRAWL_PERSPECTIVE_KEY");
    CHECK(run({"score", "--graph", dir / "base.jsonl", "--out", dir / "nokey.csv"}).code == 1);
    CHECK(run({"score", "--graph", dir / "nothing.jsonl", "--scorer", "lexicon", "--out", dir / "n.csv"}).code == 2);
    CHECK(run({"score", "--graph", dir / "base.jsonl", "--augmented", dir / "nothing.jsonl", "--scorer", "lexicon",
               "--out", dir / "n.csv"})
              .code == 2);
    CHECK_FALSE(fs::exists(dir / "n.csv"));
}

TEST_CASE("topics: guards and outputs") {
    TempDir dir;
    REQUIRE(small_crawl(dir, "gender.jsonl").code == 0);
    REQUIRE(run({"crawl", "--class", "religion", "--backend", "mock", "--iterations", "0", "--out",
                 dir / "religion.jsonl"})
                .code == 0);

    ::unsetenv("STEREOCRAWL_VECTORS");
    CHECK(run({"topics", "--graph", dir / "gender.jsonl", "--out-dir", dir / "t"}).code == 2);
    const auto mixed = run({"topics", "--graph", dir / "gender.jsonl", "--graph", dir / "religion.jsonl",
                            "--toy-vectors", "--out-dir", dir / "t"});
    CHECK(mixed.code == 2);
    CHECK_FALSE(mixed.err.empty());

    const auto too_few = run({"topics", "--graph", dir / "gender.jsonl", "--toy-vectors", "--min-cluster-size",
                              "1000", "--out-dir", dir / "t"});
    CHECK(too_few.code == 2);

    const auto ok = run({"topics", "--graph", dir / "gender.jsonl", "--toy-vectors", "--out-dir", dir / "t"});
    REQUIRE_MESSAGE(ok.code == 0, ok.err);
    for (const char* f : {"topic_distribution.csv", "topic_words.csv", "entropy.csv", "topics_meta.json"}) {
        CHECK(fs::exists(dir.path() / "t" / f));
    }
    const auto meta = nlohmann::json::parse(slurp(dir / "t/topics_meta.json"));
    CHECK(meta.dump().find("builtin:toy-vectors") != std::string::npos);

    write(dir / "vectors.txt", std::string(builtin::toy_vectors_text()));
    const auto from_file = run({"topics", "--graph", dir / "gender.jsonl", "--vectors", dir / "vectors.txt",
                                "--out-dir", dir / "u"});
    REQUIRE(from_file.code == 0);
    CHECK(slurp(dir / "u/topic_distribution.csv") == slurp(dir / "t/topic_distribution.csv"));
}

TEST_CASE("report: figures from score and topic outputs") {
    TempDir dir;
    const std::vector<SubjectHarmSummary> rows{{"Men", 10, 4, 6, 6, 0.02, 0.01, 0.0, 0.03},
                                               {"Women", 3, 9, 8, -6, 0.08, 0.05, 0.02, 0.1}};
    write(dir / "harm.csv", harm_csv(rows));
    const auto r = run({"report", "--harm", dir / "harm.csv", "--out-dir", dir / "fig"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    for (const char* f : {"regard.csv", "regard.svg", "toxicity.csv", "toxicity.svg", "scatter.csv", "scatter.svg"}) {
        CHECK(fs::exists(dir.path() / "fig" / f));
    }
    const auto scatter = slurp(dir / "fig/scatter.csv");
    CHECK(scatter.rfind("subject,overall_regard,tox_mean\n", 0) == 0);
    CHECK(scatter.find("Women,-6,0.08") != std::string::npos);
    const auto svg = slurp(dir / "fig/regard.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("Women") != std::string::npos);
    CHECK_FALSE(fs::exists(dir.path() / "fig" / "topics.svg"));

    const auto again = run({"report", "--harm", dir / "harm.csv", "--out-dir", dir / "fig2"});
    REQUIRE(again.code == 0);
    CHECK(slurp(dir / "fig2/regard.svg") == svg);

    CHECK(run({"report", "--harm", dir / "harm.csv", "--figures", "topics", "--out-dir", dir / "f3"}).code == 2);
    CHECK(run({"report", "--out-dir", dir / "f4"}).code == 2);
    CHECK(run({"report", "--harm", dir / "absent.csv", "--out-dir", dir / "f5"}).code == 2);

    write(dir / "dist.csv", "subject,topic_id,p_k\nMen,0,0.5\nMen,1,0.5\nWomen,0,1\nWomen,1,0\n");
    write(dir / "entropy.csv", "subject,relative_entropy\nMen,0.1\nWomen,0.3\n");
    const auto topics = run({"report", "--distributions", dir / "dist.csv", "--entropy", dir / "entropy.csv",
                             "--figures", "topics,entropy", "--out-dir", dir / "f6"});
    REQUIRE_MESSAGE(topics.code == 0, topics.err);
    CHECK(fs::exists(dir / "f6/topics.svg"));
    CHECK(fs::exists(dir / "f6/entropy.svg"));
    CHECK_FALSE(fs::exists(dir / "f6/regard.svg"));
}

TEST_CASE("report parsers") {
    const auto d = parse_topic_distribution_csv(
        "subject,topic_id,p_k\nMen,0,0.25\nMen,1,0.75\n(reference),0,0.5\n(reference),1,0.5\n");
    REQUIRE(d.size() >= 1);
    CHECK(d[0].subject == "Men");
    CHECK(d[0].probabilities.at(1) == doctest::Approx(0.75));
    const auto e = parse_entropy_csv("subject,relative_entropy\nMen,0.13081\n");
    REQUIRE(e.size() == 1);
    CHECK(e[0].relative_entropy == doctest::Approx(0.13081));
    CHECK_THROWS_AS(parse_entropy_csv("who,what\n"), Error);
    CHECK_THROWS_AS(parse_topic_distribution_csv("subject,p\n"), Error);
    CHECK(figure_from_string("scatter") == Figure::Scatter);
    CHECK_FALSE(figure_from_string("pie").has_value());
}

TEST_CASE("selftest runs the mock pipeline and reruns identically") {
    TempDir dir;
    const auto a = run({"selftest", "--out-dir", dir / "a"});
    REQUIRE_MESSAGE(a.code == 0, a.err);
    CHECK(a.out.find("PASS") != std::string::npos);
    CHECK(a.out.find("FAIL") == std::string::npos);
    const auto b = run({"selftest", "--out-dir", dir / "b", "--threads", "2"});
    REQUIRE(b.code == 0);
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir.path() / "a")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), dir.path() / "a");
        CHECK_MESSAGE(slurp(entry.path().string()) == slurp((dir.path() / "b" / rel).string()), rel.string());
        ++compared;
    }
    CHECK(compared >= 10);
}
