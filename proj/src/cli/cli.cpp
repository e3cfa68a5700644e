#include "stereocrawl/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stereocrawl/builtin_data.hpp"
#include "stereocrawl/config_json.hpp"
#include "stereocrawl/crawler.hpp"
#include "stereocrawl/csv.hpp"
#include "stereocrawl/error.hpp"
#include "stereocrawl/mock_backend.hpp"
#include "stereocrawl/protected_class.hpp"
#include "stereocrawl/report.hpp"
#include "stereocrawl/seeds.hpp"
#include "stereocrawl/topics.hpp"

namespace fs = std::filesystem;

namespace stereocrawl::cli {

std::atomic<bool>& cancel_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

namespace {

extern "C" void on_sigint(int) { cancel_flag().store(true); }

using json = nlohmann::json;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, std::string_view contents) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << contents;
    if (!out.flush()) throw Error(ErrorCode::Io, "cannot write " + path);
}

std::ofstream open_output(const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    return out;
}

void require_file(const std::string& path, std::string_view what) {
    if (!path.empty() && !fs::is_regular_file(path)) {
        throw Error(ErrorCode::InvalidConfig, std::string(what) + " not found: " + path);
    }
}

/// Refuses to write over any input.
void guard_output(const std::string& out, const std::vector<std::string>& inputs) {
    std::error_code ec;
    for (const auto& in : inputs) {
        if (!in.empty() && fs::exists(out) && fs::equivalent(out, in, ec)) {
            throw Error(ErrorCode::InvalidConfig, "output " + out + " would overwrite input " + in);
        }
    }
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).lexically_normal().string();
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::TransportError:
        case ErrorCode::RemoteRefusal:
        case ErrorCode::RateLimited:
        case ErrorCode::MissingCredential:
        case ErrorCode::ScorerTransport:
        case ErrorCode::ScorerRejectedInput:
        case ErrorCode::RetriesExhausted:
            return kExternalFailure;
        case ErrorCode::Cancelled:
            return kInterrupted;
        default:
            return kDataError;
    }
}

std::string hint_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingCredential:
            return "set STEREOCRAWL_LLM_URL/STEREOCRAWL_LLM_KEY (completions), "
                   "STEREOCRAWL_PERSPECTIVE_KEY and STEREOCRAWL_REGARD_URL (scorers), or use "
                   "--backend mock / --scorer lexicon";
        case ErrorCode::TooFewPoints:
            return "crawl more triples or lower --min-cluster-size";
        case ErrorCode::RetriesExhausted:
            return "rerun without --strict to keep short counts, or raise --max-retries";
        default:
            return {};
    }
}

// ---------------------------------------------------------------------------
// Config file

void expect_keys(const json& j, std::initializer_list<std::string_view> keys, std::string_view where) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, std::string(where) + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
            throw Error(ErrorCode::InvalidConfig,
                        "unknown key \"" + it.key() + "\" in " + std::string(where));
        }
    }
}

template <typename T>
void take(const json& j, const char* key, T& target, std::string_view where) {
    if (!j.contains(key)) return;
    try {
        target = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidConfig,
                    "wrong type for \"" + std::string(key) + "\" in " + std::string(where));
    }
}

void take_path(const json& j, const char* key, std::string& target, const std::string& base,
               std::string_view where) {
    std::string value;
    if (!j.contains(key)) return;
    take(j, key, value, where);
    target = value.empty() || fs::path(value).is_absolute() || base.empty()
                 ? value
                 : join_path(base, value);
}

BackendKind backend_kind(const std::string& s) {
    if (s == "mock") return BackendKind::Mock;
    if (s == "remote") return BackendKind::Remote;
    throw Error(ErrorCode::InvalidConfig, "backend kind must be mock or remote, got \"" + s + "\"");
}

ScorerKind scorer_kind(const std::string& s) {
    if (s == "lexicon") return ScorerKind::Lexicon;
    if (s == "remote") return ScorerKind::Remote;
    throw Error(ErrorCode::InvalidConfig, "scorer kind must be lexicon or remote, got \"" + s + "\"");
}

}  // namespace

void RunConfig::validate() const {
    require_file(roster.file, "roster file");
    require_file(backend.mock_corpus, "mock corpus");
    require_file(vectors, "vector file");
    if (roster.runs < 1 || roster.min_support < 1 || roster.min_support > roster.runs) {
        throw Error(ErrorCode::InvalidConfig, "roster needs runs >= min_support >= 1");
    }
    if (threads < 1) throw Error(ErrorCode::InvalidConfig, "threads must be at least 1");
}

void apply_config_json(std::string_view document, const std::string& base, RunConfig& c) {
    json j;
    try {
        j = json::parse(document);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
    }
    expect_keys(j, {"class", "roster", "crawl", "backend", "scorer", "vectors", "output_dir", "threads", "people_suffix"},
                "config");
    take(j, "class", c.protected_class, "config");
    take_path(j, "vectors", c.vectors, base, "config");
    take_path(j, "output_dir", c.output_dir, base, "config");
    take(j, "threads", c.threads, "config");
    if (j.contains("people_suffix")) {
        bool v = false;
        take(j, "people_suffix", v, "config");
        c.people_suffix = v;
    }
    if (j.contains("roster")) {
        const auto& r = j["roster"];
        expect_keys(r, {"file", "dynamic", "additions", "runs", "min_support"}, "roster");
        take_path(r, "file", c.roster.file, base, "roster");
        take(r, "dynamic", c.roster.dynamic, "roster");
        take(r, "additions", c.roster.additions, "roster");
        take(r, "runs", c.roster.runs, "roster");
        take(r, "min_support", c.roster.min_support, "roster");
    }
    if (j.contains("crawl")) apply_crawl_config_json(j["crawl"], c.crawl);
    if (j.contains("backend")) {
        const auto& b = j["backend"];
        expect_keys(b, {"kind", "url", "api_key", "model", "max_in_flight", "mock_corpus", "mock_seed"}, "backend");
        std::string kind;
        take(b, "kind", kind, "backend");
        if (!kind.empty()) c.backend.kind = backend_kind(kind);
        take(b, "url", c.backend.remote.url, "backend");
        take(b, "api_key", c.backend.remote.api_key, "backend");
        take(b, "model", c.backend.remote.model, "backend");
        take(b, "max_in_flight", c.backend.remote.max_in_flight, "backend");
        take_path(b, "mock_corpus", c.backend.mock_corpus, base, "backend");
        if (b.contains("mock_seed")) {
            std::uint64_t seed = 0;
            take(b, "mock_seed", seed, "backend");
            c.backend.mock_seed = seed;
        }
    }
    if (j.contains("scorer")) {
        const auto& s = j["scorer"];
        expect_keys(s, {"kind", "perspective_url", "perspective_key", "regard_url", "regard_key", "requests_per_second"},
                    "scorer");
        std::string kind;
        take(s, "kind", kind, "scorer");
        if (!kind.empty()) c.scorer.kind = scorer_kind(kind);
        take(s, "perspective_url", c.scorer.perspective.url, "scorer");
        take(s, "perspective_key", c.scorer.perspective.api_key, "scorer");
        take(s, "regard_url", c.scorer.regard.url, "scorer");
        take(s, "regard_key", c.scorer.regard.api_key, "scorer");
        take(s, "requests_per_second", c.scorer.perspective.requests_per_second, "scorer");
    }
}

void apply_config_file(const std::string& path, RunConfig& config) {
    require_file(path, "config file");
    const auto base = fs::path(path).parent_path().string();
    apply_config_json(read_text(path), base, config);
}

void install_interrupt_handler() { std::signal(SIGINT, on_sigint); }

namespace {

// ---------------------------------------------------------------------------
// Shared wiring

std::unique_ptr<CompletionBackend> make_backend(const RunConfig& c) {
    if (c.backend.kind == BackendKind::Mock) {
        auto corpus = c.backend.mock_corpus.empty() ? MockCorpus::builtin()
                                                    : MockCorpus::from_file(c.backend.mock_corpus);
        return std::make_unique<MockBackend>(std::move(corpus), c.backend.mock_seed.value_or(c.crawl.rng_seed));
    }
    auto remote = c.backend.remote;
    remote.apply_environment();
    return std::make_unique<RemoteBackend>(std::move(remote));
}

struct Scorers {
    std::unique_ptr<ToxicityScorer> toxicity;
    std::unique_ptr<RegardClassifier> regard;
};

Scorers make_scorers(const RunConfig& c) {
    if (c.scorer.kind == ScorerKind::Lexicon) {
        return {std::make_unique<LexiconToxicityScorer>(), std::make_unique<LexiconRegardClassifier>()};
    }
    auto p = c.scorer.perspective;
    p.apply_environment();
    auto r = c.scorer.regard;
    r.apply_environment();
    return {std::make_unique<PerspectiveToxicityScorer>(std::move(p)),
            std::make_unique<RemoteRegardClassifier>(std::move(r))};
}

/// Roster for a crawl: file, dynamic generation or the bundled list, plus
/// manual additions.
SeedRoster resolve_roster(const RunConfig& c, CompletionBackend* backend) {
    SeedRoster roster;
    if (!c.roster.file.empty()) {
        roster = read_roster_file(c.roster.file);
        if (!c.protected_class.empty() &&
            protected_class_info(roster.protected_class()).key != protected_class_info(c.protected_class).key) {
            throw Error(ErrorCode::InvalidConfig, "roster " + c.roster.file + " is for class \"" +
                                                      roster.protected_class() + "\", not \"" +
                                                      c.protected_class + "\"");
        }
    } else if (c.roster.dynamic) {
        SeedGenerationOptions opts;
        opts.runs = c.roster.runs;
        opts.min_support = c.roster.min_support;
        opts.threads = c.threads;
        roster = generate_seeds(*backend, c.protected_class, opts).roster;
    } else {
        roster = bundled_roster(c.protected_class);
    }
    return merge_manual(std::move(roster), c.roster.additions);
}

std::string class_key(const RunConfig& c) {
    if (c.protected_class.empty()) throw Error(ErrorCode::InvalidConfig, "no protected class given (--class)");
    return protected_class_info(c.protected_class).key;
}

std::string pad(std::string_view s, std::size_t width) {
    std::string out(s);
    if (out.size() < width) out.append(width - out.size(), ' ');
    return out;
}

/// Shared options: config file, output directory, thread count.
struct CommonFlags {
    std::string config;
    int threads = 1;
    CLI::Option* threads_opt = nullptr;

    void add(CLI::App& app) {
        app.add_option("--config", config, "JSON run configuration (flags override it)");
        threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    }

    RunConfig load() const {
        RunConfig c;
        if (!config.empty()) apply_config_file(config, c);
        if (threads_opt->count()) c.threads = threads;
        return c;
    }
};

struct BackendFlags {
    std::string kind;
    std::string mock_corpus;
    CLI::Option* kind_opt = nullptr;
    CLI::Option* corpus_opt = nullptr;

    void add(CLI::App& app) {
        kind_opt = app.add_option("--backend", kind, "Completion backend: mock or remote (default remote)")
                       ->check(CLI::IsMember({"mock", "remote"}));
        corpus_opt = app.add_option("--mock-corpus", mock_corpus, "Mock corpus JSON (default: bundled)");
    }

    void apply(RunConfig& c) const {
        if (kind_opt->count()) c.backend.kind = backend_kind(kind);
        if (corpus_opt->count()) c.backend.mock_corpus = mock_corpus;
    }
};

// ---------------------------------------------------------------------------
// seeds

struct SeedsCommand {
    CommonFlags common;
    BackendFlags backend;
    std::string cls;
    std::uint64_t seed = 0;
    int runs = 5;
    int min_support = 3;
    std::vector<std::string> additions;
    bool bundled = false;
    std::string out;
    CLI::Option *cls_opt, *seed_opt, *runs_opt, *support_opt, *out_opt;

    void add(CLI::App& app) {
        cls_opt = app.add_option("--class", cls, "Protected class, e.g. nationality");
        backend.add(app);
        seed_opt = app.add_option("--seed", seed, "Mock backend seed");
        runs_opt = app.add_option("--runs", runs, "Generation runs")->check(CLI::PositiveNumber);
        support_opt = app.add_option("--min-support", min_support, "Runs that must list an entity")
                          ->check(CLI::PositiveNumber);
        app.add_option("--add", additions, "Manual addition (repeatable)");
        app.add_flag("--bundled", bundled, "Start from the bundled roster instead of generating");
        out_opt = app.add_option("--out", out, "Roster file (default <output_dir>/<class>.roster.json)");
        common.add(app);
    }

    int run(std::ostream& os) {
        RunConfig c = common.load();
        backend.apply(c);
        if (cls_opt->count()) c.protected_class = cls;
        if (seed_opt->count()) c.backend.mock_seed = seed;
        if (runs_opt->count()) c.roster.runs = runs;
        if (support_opt->count()) c.roster.min_support = min_support;
        c.roster.additions.insert(c.roster.additions.end(), additions.begin(), additions.end());
        c.validate();
        const auto key = class_key(c);
        const std::string path = out_opt->count() ? out : join_path(c.output_dir, key + ".roster.json");

        SeedRoster roster;
        std::vector<SeedRun> runs_log;
        if (bundled) {
            roster = bundled_roster(key);
        } else {
            auto engine = make_backend(c);
            SeedGenerationOptions opts;
            opts.runs = c.roster.runs;
            opts.min_support = c.roster.min_support;
            opts.threads = c.threads;
            auto gen = generate_seeds(*engine, key, opts);
            roster = std::move(gen.roster);
            runs_log = std::move(gen.runs);
        }
        roster = merge_manual(std::move(roster), c.roster.additions);
        guard_output(path, {c.roster.file, c.backend.mock_corpus});
        write_text(path, roster_to_json(roster, runs_log));

        os << "roster: " << path << " (" << roster.size() << " entities)\n";
        for (const auto& e : roster.entities()) {
            os << "  " << pad(e.name, 28) << to_string(e.provenance);
            if (e.provenance == Provenance::Dynamic) os << "  support " << e.support << "/" << c.roster.runs;
            os << "\n";
        }
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// crawl

std::string default_audit_path(const std::string& graph_path) {
    std::string stem = graph_path;
    if (stem.size() > 6 && stem.ends_with(".jsonl")) stem.resize(stem.size() - 6);
    return stem + ".audit.jsonl";
}

struct CrawlCommand {
    CommonFlags common;
    BackendFlags backend;
    std::string cls, roster, out, audit, dot;
    bool augment_init = false, augment_expansion = false, strict = false, dynamic = false;
    std::uint64_t seed = 0;
    int iterations = 4, init_per_template = 5, incontext = 3, executions = 10, max_retries = 5;
    double temperature = 0.8;
    std::vector<std::string> additions;
    CLI::Option *cls_opt, *roster_opt, *out_opt, *audit_opt, *seed_opt, *it_opt, *init_opt, *ic_opt,
        *exec_opt, *temp_opt, *retry_opt;

    void add(CLI::App& app) {
        cls_opt = app.add_option("--class", cls, "Protected class (default: the roster's class)");
        roster_opt = app.add_option("--roster", roster, "Roster file (default: bundled roster)");
        app.add_flag("--dynamic-roster", dynamic, "Generate the roster with the backend first");
        app.add_option("--add", additions, "Extra seed entity (repeatable)");
        out_opt = app.add_option("--out", out, "Graph file (default <output_dir>/<class>.graph.jsonl)");
        audit_opt = app.add_option("--audit", audit, "Audit log (default: next to the graph)");
        app.add_option("--dot", dot, "Also write a Graphviz DOT export here");
        app.add_flag("--augment-init", augment_init, "Prepend the class phrase to initialization prompts");
        app.add_flag("--augment-expansion", augment_expansion,
                     "Prefix expansion prompts with \"Offensive Generalizations\"");
        seed_opt = app.add_option("--seed", seed, "RNG seed for sampling (and the mock backend)");
        it_opt = app.add_option("--iterations", iterations, "Expansion iterations (default 4)")
                     ->check(CLI::NonNegativeNumber);
        init_opt = app.add_option("--init-per-template", init_per_template,
                                  "Completions per seed and template (default 5)")
                       ->check(CLI::PositiveNumber);
        ic_opt = app.add_option("--incontext-samples", incontext,
                                "Examples per expansion prompt (default min(3, k-1))")
                     ->check(CLI::PositiveNumber);
        exec_opt = app.add_option("--executions", executions, "Executions per strategy and seed (default 10)")
                       ->check(CLI::PositiveNumber);
        temp_opt = app.add_option("--temperature", temperature, "Sampling temperature (default 0.8)")
                       ->check(CLI::Range(0.0, 2.0));
        retry_opt = app.add_option("--max-retries", max_retries, "Attempts per slot (default 5)")
                        ->check(CLI::PositiveNumber);
        app.add_flag("--strict", strict, "Exit 1 if any slot exhausts its retries");
        backend.add(app);
        common.add(app);
    }

    int run(std::ostream& os) {
        RunConfig c = common.load();
        backend.apply(c);
        if (cls_opt->count()) c.protected_class = cls;
        if (roster_opt->count()) c.roster.file = roster;
        if (dynamic) c.roster.dynamic = true;
        c.roster.additions.insert(c.roster.additions.end(), additions.begin(), additions.end());
        auto& k = c.crawl;
        if (seed_opt->count()) k.rng_seed = seed;
        if (it_opt->count()) k.iterations = iterations;
        if (init_opt->count()) k.init_per_template = init_per_template;
        if (ic_opt->count()) k.incontext_samples = incontext;
        if (exec_opt->count()) k.executions_per_strategy = executions;
        if (temp_opt->count()) k.temperature = temperature;
        if (retry_opt->count()) k.max_retries = max_retries;
        if (augment_init) k.augment_init = true;
        if (augment_expansion) k.augment_expansion = true;
        c.validate();

        if (c.protected_class.empty() && !c.roster.file.empty()) {
            c.protected_class = read_roster_file(c.roster.file).protected_class();
        }
        const auto key = class_key(c);
        const auto info = protected_class_info(key);
        if (k.prepend_text.empty()) k.prepend_text = info.prepend_text;

        auto engine = make_backend(c);
        const auto seeds = resolve_roster(c, engine.get());
        const auto subjects = roster_subjects(seeds, c.people_suffix.value_or(info.people_suffix));
        KnowledgeGraph graph(key, subjects, k);
        k.validate(subjects.size());

        const std::string graph_path = out_opt->count() ? out : join_path(c.output_dir, key + ".graph.jsonl");
        const std::string audit_path = audit_opt->count() ? audit : default_audit_path(graph_path);
        const std::vector<std::string> inputs{c.roster.file, c.backend.mock_corpus};
        guard_output(graph_path, inputs);
        guard_output(audit_path, inputs);

        auto graph_out = open_output(graph_path);
        auto audit_out = open_output(audit_path);
        graph_out << serialize_header(graph) << std::flush;

        std::size_t skipped = 0;
        CrawlOptions options;
        options.threads = c.threads;
        options.strict = strict;
        options.cancel = &cancel_flag();
        Crawler crawler(*engine, options);
        auto on_batch = [&](const IterationBatch& batch) {
            for (const auto& t : batch.triples) graph_out << serialize_triple(key, t);
            for (const auto& a : batch.audit) audit_out << serialize_audit_record(a);
            graph_out.flush();
            audit_out.flush();
            skipped += batch.skipped.size();
            os << "iteration " << batch.iteration << ": " << batch.triples.size() << " triples";
            if (!batch.skipped.empty()) os << ", " << batch.skipped.size() << " skipped slots";
            os << "\n";
        };

        KnowledgeGraph result;
        try {
            result = crawler.crawl(graph, on_batch);
        } catch (...) {
            graph_out.flush();
            audit_out.flush();
            throw;
        }
        if (!graph_out || !audit_out) throw Error(ErrorCode::Io, "writing " + graph_path + " failed");
        if (cancel_flag().load()) {
            os << "interrupted: kept " << result.size() << " triples in " << graph_path << "\n";
            return kInterrupted;
        }
        if (!dot.empty()) {
            guard_output(dot, inputs);
            write_text(dot, export_dot(result));
        }

        os << "graph: " << graph_path << " (" << result.size() << " triples, expected "
           << k.expected_triples(subjects.size()) << ")\n";
        os << "audit: " << audit_path << "\n";
        if (skipped) os << "skipped slots: " << skipped << "\n";
        for (const auto& s : result.seeds()) {
            os << "  " << pad(s, 28) << result.count_subject(s) << "\n";
        }
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// score

std::string with_suffix(const std::string& path, std::string_view suffix) {
    fs::path p(path);
    const auto ext = p.extension().string();
    return (p.parent_path() / (p.stem().string() + std::string(suffix) + ext)).string();
}

struct ScoreCommand {
    CommonFlags common;
    std::string graph, augmented, out, augmented_out, test_out, meta, scorer;
    CLI::Option *out_opt, *scorer_opt, *aug_out_opt, *test_out_opt;

    void add(CLI::App& app) {
        app.add_option("--graph", graph, "Graph to score")->required();
        app.add_option("--augmented", augmented,
                       "Augmented graph; scores it too and tests for a toxicity shift");
        out_opt = app.add_option("--out", out, "Harm CSV (default <output_dir>/harm.csv)");
        aug_out_opt = app.add_option("--augmented-out", augmented_out,
                                     "Harm CSV for the augmented graph (default: <out>_augmented.csv)");
        test_out_opt = app.add_option("--test-out", test_out,
                                      "Augmentation test JSON (default: next to --out)");
        app.add_option("--meta", meta, "Write scorer metadata JSON here");
        scorer_opt = app.add_option("--scorer", scorer, "lexicon or remote (default remote)")
                         ->check(CLI::IsMember({"lexicon", "remote"}));
        common.add(app);
    }

    int run(std::ostream& os) {
        RunConfig c = common.load();
        if (scorer_opt->count()) c.scorer.kind = scorer_kind(scorer);
        c.validate();
        const auto base = read_graph_file(graph);
        std::optional<KnowledgeGraph> aug;
        if (!augmented.empty()) aug = read_graph_file(augmented);

        auto scorers = make_scorers(c);
        // Everything is scored before anything is written.
        const auto harm = score_graph(base, *scorers.toxicity, *scorers.regard, c.threads);
        std::optional<GraphHarm> aug_harm;
        if (aug) aug_harm = score_graph(*aug, *scorers.toxicity, *scorers.regard, c.threads);

        const std::string csv_path = out_opt->count() ? out : join_path(c.output_dir, "harm.csv");
        std::vector<std::string> inputs{graph, augmented};
        guard_output(csv_path, inputs);

        std::vector<std::pair<std::string, std::string>> files{{csv_path, harm_csv(harm.summaries)}};
        std::optional<MannWhitneyResult> test;
        if (aug_harm) {
            test = augmentation_effect_test(harm.toxicity, aug_harm->toxicity);
            const auto aug_path = aug_out_opt->count() ? augmented_out : with_suffix(csv_path, "_augmented");
            const auto test_path = test_out_opt->count()
                                       ? test_out
                                       : (fs::path(csv_path).parent_path() / "augmentation_test.json").string();
            nlohmann::ordered_json j;
            j["test"] = "mann-whitney-u";
            j["alternative"] = "two-sided";
            j["baseline"] = {{"graph", fs::path(graph).filename().string()}, {"n", harm.toxicity.size()}};
            j["augmented"] = {{"graph", fs::path(augmented).filename().string()}, {"n", aug_harm->toxicity.size()}};
            j["u_statistic"] = test->u_statistic;
            j["p_value"] = test->p_value;
            j["exact"] = test->exact;
            j["toxicity_scorer"] = scorers.toxicity->describe();
            guard_output(aug_path, inputs);
            guard_output(test_path, inputs);
            files.emplace_back(aug_path, harm_csv(aug_harm->summaries));
            files.emplace_back(test_path, j.dump(2) + "\n");
        }
        if (!meta.empty()) {
            guard_output(meta, inputs);
            nlohmann::ordered_json j;
            j["class"] = base.protected_class();
            j["statements"] = harm.toxicity.size();
            j["toxicity_scorer"] = scorers.toxicity->describe();
            j["regard_classifier"] = scorers.regard->describe();
            if (const auto* r = dynamic_cast<RemoteRegardClassifier*>(scorers.regard.get())) {
                j["unmapped_regard_labels"] = r->unmapped_labels();
            }
            files.emplace_back(meta, j.dump(2) + "\n");
        }
        for (const auto& [path, contents] : files) write_text(path, contents);

        os << "harm: " << csv_path << " (" << harm.summaries.size() << " subjects, "
           << harm.toxicity.size() << " statements)\n";
        os << "  " << pad("subject", 28) << pad("regard", 8) << "tox_mean\n";
        for (const auto& s : harm.summaries) {
            os << "  " << pad(s.subject, 28) << pad(std::to_string(s.overall_regard), 8)
               << csv::number(s.toxicity_mean) << "\n";
        }
        if (test) {
            auto mean = [](const std::vector<ToxicityScore>& v) {
                double sum = 0.0;
                for (const auto& x : v) sum += x.value();
                return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
            };
            os << "augmentation effect (Mann-Whitney U, two-sided)\n"
               << "  baseline   n=" << harm.toxicity.size() << " mean=" << csv::number(mean(harm.toxicity)) << "\n"
               << "  augmented  n=" << aug_harm->toxicity.size() << " mean=" << csv::number(mean(aug_harm->toxicity))
               << "\n"
               << "  U=" << csv::number(test->u_statistic) << " p=" << csv::number(test->p_value)
               << (test->exact ? " (exact)" : " (normal approximation)") << "\n";
        }
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// topics

KnowledgeGraph merge_graphs(const std::vector<KnowledgeGraph>& graphs) {
    std::vector<std::string> seeds;
    for (const auto& g : graphs) {
        if (g.protected_class() != graphs.front().protected_class()) {
            throw Error(ErrorCode::InvalidConfig,
                        "topics models one protected class per run, got \"" +
                            graphs.front().protected_class() + "\" and \"" + g.protected_class() +
                            "\"; run it once per class");
        }
        for (const auto& s : g.seeds()) {
            if (std::find(seeds.begin(), seeds.end(), s) == seeds.end()) seeds.push_back(s);
        }
    }
    KnowledgeGraph merged(graphs.front().protected_class(), seeds, graphs.front().config());
    for (const auto& g : graphs) {
        for (const auto& t : g.triples()) merged.add(t);
    }
    return merged;
}

struct TopicsCommand {
    CommonFlags common;
    std::vector<std::string> graphs;
    std::string vectors, out_dir;
    bool toy = false;
    std::size_t top_n = 5;
    std::size_t min_size = 0;
    CLI::Option *vectors_opt, *out_opt, *min_opt;

    void add(CLI::App& app) {
        app.add_option("--graph", graphs, "Graph file (repeatable, one protected class)")
            ->required();
        vectors_opt = app.add_option("--vectors", vectors,
                                     "Word vectors, GloVe text format (default: $STEREOCRAWL_VECTORS)");
        app.add_flag("--toy-vectors", toy, "Use the small bundled vector table");
        out_opt = app.add_option("--out-dir", out_dir, "Output directory (default <output_dir>)");
        app.add_option("--top-n", top_n, "Representative words per topic")->check(CLI::PositiveNumber);
        min_opt = app.add_option("--min-cluster-size", min_size,
                                 "HDBSCAN minimum cluster size (default: triples / 40, at least 2)")
                      ->check(CLI::Range(2, 1 << 30));
        common.add(app);
    }

    int run(std::ostream& os) {
        RunConfig c = common.load();
        if (vectors_opt->count()) c.vectors = vectors;
        if (c.vectors.empty() && !toy) {
            if (const char* env = std::getenv("STEREOCRAWL_VECTORS"); env && *env) c.vectors = env;
        }
        c.validate();
        if (c.vectors.empty() && !toy) {
            throw Error(ErrorCode::InvalidConfig,
                        "no word vectors: pass --vectors, set STEREOCRAWL_VECTORS, or use --toy-vectors");
        }
        std::vector<KnowledgeGraph> loaded;
        for (const auto& g : graphs) loaded.push_back(read_graph_file(g));
        const auto graph = merge_graphs(loaded);

        std::unordered_set<std::string> vocabulary;
        for (const auto& t : graph.triples()) {
            for (auto& w : preprocess(t)) vocabulary.insert(std::move(w));
        }
        const bool use_toy = toy && !vectors_opt->count();
        const auto table = use_toy ? EmbeddingTable::parse(builtin::toy_vectors_text(), &vocabulary)
                                   : EmbeddingTable::load(c.vectors, &vocabulary);
        const std::string label = use_toy ? "builtin:toy-vectors" : fs::path(c.vectors).filename().string();

        TopicModelOptions opts;
        opts.top_n = top_n;
        opts.threads = c.threads;
        if (min_opt->count()) opts.min_cluster_size = min_size;
        const auto result = run_topic_model(graph, table, opts);

        const std::string dir = out_opt->count() ? out_dir : c.output_dir;
        const std::vector<std::pair<std::string, std::string>> files{
            {join_path(dir, "topic_distribution.csv"), topic_distribution_csv(result)},
            {join_path(dir, "topic_words.csv"), topic_words_csv(result)},
            {join_path(dir, "entropy.csv"), entropy_csv(result)},
            {join_path(dir, "topics_meta.json"), topic_meta_json(result, label)},
        };
        for (const auto& [path, contents] : files) guard_output(path, graphs);
        for (const auto& [path, contents] : files) write_text(path, contents);

        os << "topics: " << result.topics.size() << " over " << result.assignments.size()
           << " triples (min cluster size " << result.min_cluster_size << ", noise "
           << csv::number(result.noise_rate) << ", oov " << csv::number(result.oov_rate) << ")\n";
        for (const auto& t : result.topics) {
            os << "  topic " << t.topic_id << " (" << t.size << "):";
            for (const auto& w : t.representative_words) os << " " << w;
            os << "\n";
        }
        os << "relative entropy vs pooled reference\n";
        for (const auto& e : result.entropies) {
            os << "  " << pad(e.subject, 28) << csv::number(e.relative_entropy) << "\n";
        }
        os << "written to " << dir << "\n";
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// report

struct ReportCommand {
    std::string harm, distributions, entropy, out_dir = "figures", title;
    std::vector<std::string> figures;

    void add(CLI::App& app) {
        app.add_option("--harm", harm, "Harm CSV from score");
        app.add_option("--distributions", distributions, "topic_distribution.csv from topics");
        app.add_option("--entropy", entropy, "entropy.csv from topics");
        app.add_option("--figures", figures,
                       "Figures to draw: regard, toxicity, scatter, topics, entropy (default: all with inputs)")
            ->delimiter(',')
            ->check(CLI::IsMember({"regard", "toxicity", "scatter", "topics", "entropy"}));
        app.add_option("--out-dir", out_dir, "Output directory (default figures)");
        app.add_option("--title", title, "Chart title prefix, e.g. the protected class");
    }

    int run(std::ostream& os) {
        auto load = [](const std::string& path, std::string_view what) -> std::optional<std::string> {
            if (path.empty()) return std::nullopt;
            if (!fs::is_regular_file(path)) {
                throw Error(ErrorCode::EmptyInput, std::string(what) + " not found: " + path);
            }
            return read_text(path);
        };
        ReportInputs in;
        in.title = title;
        if (auto t = load(harm, "harm CSV")) in.harm = parse_harm_csv(*t);
        if (auto t = load(distributions, "topic distribution CSV")) in.distributions = parse_topic_distribution_csv(*t);
        if (auto t = load(entropy, "entropy CSV")) in.entropies = parse_entropy_csv(*t);

        std::vector<Figure> wanted;
        if (figures.empty()) {
            if (in.harm) wanted.insert(wanted.end(), {Figure::Regard, Figure::Toxicity, Figure::Scatter});
            if (in.distributions) wanted.push_back(Figure::Topics);
            if (in.entropies) wanted.push_back(Figure::Entropy);
            if (wanted.empty()) {
                throw Error(ErrorCode::EmptyInput, "nothing to report: pass --harm, --distributions or --entropy");
            }
        } else {
            for (const auto& f : figures) wanted.push_back(*figure_from_string(f));
        }
        const auto files = build_report(in, wanted);
        for (const auto& f : files) guard_output(join_path(out_dir, f.name), {harm, distributions, entropy});
        for (const auto& f : files) {
            write_text(join_path(out_dir, f.name), f.contents);
            os << "wrote " << join_path(out_dir, f.name) << "\n";
        }
        return kOk;
    }
};

// ---------------------------------------------------------------------------
// selftest

struct IterationCounts {
    std::size_t total = 0;
    std::map<int, std::size_t> per_iteration;
    std::size_t min_subject = 0;
    std::size_t max_subject = 0;
};

IterationCounts count_graph(const KnowledgeGraph& g) {
    IterationCounts c;
    c.total = g.size();
    for (const auto& t : g.triples()) ++c.per_iteration[t.iteration];
    bool first = true;
    for (const auto& s : g.seeds()) {
        const auto n = g.count_subject(s);
        c.min_subject = first ? n : std::min(c.min_subject, n);
        c.max_subject = first ? n : std::max(c.max_subject, n);
        first = false;
    }
    return c;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SelftestCommand {
    std::string out_dir = "selftest";
    std::uint64_t seed = 0;
    int threads = 1;

    void add(CLI::App& app) {
        app.add_option("--out-dir", out_dir, "Where to write the pipeline outputs (default selftest)");
        app.add_option("--seed", seed, "Crawl and mock seed (default 0)");
        app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    }

    int step(const std::vector<std::string>& args, std::ostream& err) {
        std::ostringstream sink;
        std::ostringstream errors;
        const int code = dispatch(args, sink, errors);
        if (code != kOk) err << "selftest step \"" << args.front() << "\" failed (" << code << "):\n" << errors.str();
        return code;
    }

    int run(std::ostream& os, std::ostream& err) {
        const std::string s = std::to_string(seed);
        const std::string t = std::to_string(threads);
        auto p = [&](const std::string& name) { return join_path(out_dir, name); };
        const std::vector<std::vector<std::string>> steps{
            {"crawl", "--class", "nationality", "--backend", "mock", "--seed", s, "--threads", t, "--out",
             p("baseline.graph.jsonl")},
            {"crawl", "--class", "nationality", "--backend", "mock", "--seed", s, "--threads", t, "--out",
             p("augmented.graph.jsonl"), "--augment-init", "--augment-expansion"},
            {"score", "--graph", p("baseline.graph.jsonl"), "--augmented", p("augmented.graph.jsonl"),
             "--scorer", "lexicon", "--threads", t, "--out", p("harm.csv"), "--meta", p("harm_meta.json")},
            {"topics", "--graph", p("baseline.graph.jsonl"), "--toy-vectors", "--threads", t, "--out-dir",
             p("topics")},
            {"report", "--harm", p("harm.csv"), "--distributions", p("topics/topic_distribution.csv"),
             "--entropy", p("topics/entropy.csv"), "--title", "nationality", "--out-dir", p("figures")},
        };
        for (const auto& a : steps) {
            if (const int code = step(a, err); code != kOk) return code;
        }

        bool ok = true;
        const auto expected = CrawlConfig{}.expected_triples(20);
        os << "count invariant: bundled nationality roster, mock backend, seed " << s << "\n";
        os << pad("graph", 11) << pad("total", 7) << pad("expected", 10);
        for (int i = 0; i <= 4; ++i) os << pad("G_" + std::to_string(i), 6);
        os << pad("per-subject", 13) << "status\n";
        for (const char* name : {"baseline", "augmented"}) {
            const auto g = read_graph_file(p(std::string(name) + ".graph.jsonl"));
            const auto c = count_graph(g);
            bool row_ok = g.seeds().size() == 20 && c.total == expected && c.min_subject == 100 &&
                          c.max_subject == 100;
            os << pad(name, 11) << pad(std::to_string(c.total), 7) << pad(std::to_string(expected), 10);
            for (int i = 0; i <= 4; ++i) {
                const auto it = c.per_iteration.find(i);
                const std::size_t n = it == c.per_iteration.end() ? 0 : it->second;
                row_ok = row_ok && n == 400;
                os << pad(std::to_string(n), 6);
            }
            os << pad(std::to_string(c.min_subject) + ".." + std::to_string(c.max_subject), 13)
               << (row_ok ? "PASS" : "FAIL") << "\n";
            ok = ok && row_ok;
        }
        const auto test = json::parse(read_text(p("augmentation_test.json")));
        os << "augmentation effect: p=" << csv::number(test["p_value"].get<double>()) << "\n";
        os << "outputs in " << out_dir << "\n";
        return ok ? kOk : kExternalFailure;
    }
};

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Crawl stereotype triples from a language model and measure representational harm",
                 "stereocrawl"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "stereocrawl 1.0");

    SeedsCommand seeds;
    CrawlCommand crawl;
    ScoreCommand score;
    TopicsCommand topics;
    ReportCommand report;
    SelftestCommand selftest;
    auto* seeds_app = app.add_subcommand("seeds", "Build a seed-entity roster for a protected class");
    auto* crawl_app = app.add_subcommand("crawl", "Generate a knowledge graph of triples");
    auto* score_app = app.add_subcommand("score", "Regard and identity-attack scores per subject");
    auto* topics_app = app.add_subcommand("topics", "Topic model and relative entropy per subject");
    auto* report_app = app.add_subcommand("report", "CSV data and SVG charts from score/topics outputs");
    auto* selftest_app = app.add_subcommand("selftest", "Run the bundled mock pipeline end to end");
    seeds.add(*seeds_app);
    crawl.add(*crawl_app);
    score.add(*score_app);
    topics.add(*topics_app);
    report.add(*report_app);
    selftest.add(*selftest_app);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const auto chosen = app.get_subcommands();
        out << (chosen.empty() ? app.help() : chosen.front()->help());
        return kOk;
    } catch (const CLI::CallForVersion& v) {
        out << v.what() << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto chosen = app.get_subcommands();
        err << "run with " << (chosen.empty() ? "" : chosen.front()->get_name() + " ") << "--help for usage\n";
        return kFlagError;
    }

    try {
        if (seeds_app->parsed()) return seeds.run(out);
        if (crawl_app->parsed()) return crawl.run(out);
        if (score_app->parsed()) return score.run(out);
        if (topics_app->parsed()) return topics.run(out);
        if (report_app->parsed()) return report.run(out);
        if (selftest_app->parsed()) return selftest.run(out, err);
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        if (const auto hint = hint_for(e.code()); !hint.empty()) err << "hint: " << hint << "\n";
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        err << "error [io]: " << e.what() << "\n";
        return kDataError;
    }
    return kFlagError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    return dispatch(args, out, err);
}

}  // namespace stereocrawl::cli
