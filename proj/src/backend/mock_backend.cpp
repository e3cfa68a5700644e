#include "stereocrawl/mock_backend.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stereocrawl/builtin_data.hpp"
#include "stereocrawl/error.hpp"
#include "stereocrawl/rng.hpp"
#include "stereocrawl/text.hpp"

namespace stereocrawl {

namespace {

using nlohmann::json;

constexpr std::string_view kSeedListPrefix = "Provide a list of common ";

std::map<std::string, std::vector<std::string>> keyed_lists(const json& j) {
    std::map<std::string, std::vector<std::string>> out;
    if (j.is_array()) {
        out["*"] = j.get<std::vector<std::string>>();
        return out;
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = it.key() == "*" ? "*" : text::normalize_key(it.key());
        out[key] = it.value().get<std::vector<std::string>>();
    }
    return out;
}

std::map<std::string, std::vector<std::string>> subject_lists(const json& j) {
    std::map<std::string, std::vector<std::string>> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        out[text::normalize_key(it.key())] = it.value().get<std::vector<std::string>>();
    }
    return out;
}

const std::vector<std::string>* lookup(const std::map<std::string, std::vector<std::string>>& m,
                                       std::string_view predicate) {
    auto it = m.find(text::normalize_key(predicate));
    if (it != m.end() && !it->second.empty()) return &it->second;
    it = m.find("*");
    if (it != m.end() && !it->second.empty()) return &it->second;
    return nullptr;
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
    return items[rng.index(items.size())];
}

enum class PromptKind { SeedList, Init, PredicateQuestion, ObjectQuestion };

struct PromptShape {
    PromptKind kind = PromptKind::Init;
    std::string subject;
    std::string predicate;  // Init: template predicate; ObjectQuestion: query predicate
    std::string plural;     // SeedList
    std::vector<std::string> example_objects;
    std::vector<std::string> example_predicates;
};

std::string last_nonempty_line(std::string_view prompt) {
    auto lines = text::split_lines(prompt);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        if (!text::trim(*it).empty()) return std::string(text::trim(*it));
    }
    return {};
}

}  // namespace

MockCorpus MockCorpus::from_json(std::string_view document) {
    json j;
    try {
        j = json::parse(document);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("mock corpus is not valid JSON: ") + e.what());
    }
    MockCorpus c;
    try {
        c.refusal_pool = j.value("refusal_pool", std::vector<std::string>{});
        c.refusal_probability = j.value("refusal_probability", c.refusal_probability);
        c.empty_probability = j.value("empty_probability", c.empty_probability);
        c.toxic_probability = j.value("toxic_probability", c.toxic_probability);
        c.incontext_toxic_weight = j.value("incontext_toxic_weight", c.incontext_toxic_weight);
        c.subject_affinity = j.value("subject_affinity", c.subject_affinity);
        for (const auto& m : j.value("augmentation_markers", json::array())) {
            AugmentationMarker marker;
            marker.text = m.at("text").get<std::string>();
            marker.prefix_only = m.value("match", std::string("contains")) == "prefix";
            marker.toxic_probability = m.value("toxic_probability", 0.5);
            c.augmentation_markers.push_back(std::move(marker));
        }
        for (const auto& cj : j.value("classes", json::array())) {
            MockClassVocabulary v;
            v.name = cj.at("name").get<std::string>();
            v.plural = cj.value("plural", v.name + "s");
            v.subjects = cj.value("subjects", std::vector<std::string>{});
            for (const auto& s : cj.value("seed_candidates", json::array())) {
                v.seed_candidates.push_back(
                    {s.at("name").get<std::string>(), s.value("probability", 1.0)});
            }
            v.predicates = cj.value("predicates", std::vector<std::string>{});
            v.objects = keyed_lists(cj.value("objects", json::object()));
            v.toxic_objects = keyed_lists(cj.value("toxic_objects", json::object()));
            v.subject_objects = subject_lists(cj.value("subject_objects", json::object()));
            c.classes.push_back(std::move(v));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("mock corpus schema error: ") + e.what());
    }
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(c.refusal_probability) || !in_unit(c.empty_probability) ||
        !in_unit(c.toxic_probability) || !in_unit(c.subject_affinity)) {
        throw Error(ErrorCode::InvalidConfig, "mock corpus probabilities must lie in [0, 1]");
    }
    return c;
}

MockCorpus MockCorpus::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open mock corpus " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

MockCorpus MockCorpus::builtin() { return from_json(builtin::mock_corpus_json()); }

const MockClassVocabulary* MockCorpus::find_class(std::string_view name) const {
    const std::string key = text::normalize_key(name);
    for (const auto& c : classes) {
        if (text::normalize_key(c.name) == key || text::normalize_key(c.plural) == key) return &c;
    }
    return nullptr;
}

MockBackend::MockBackend(MockCorpus corpus, std::uint64_t seed)
    : corpus_(std::move(corpus)), seed_(seed) {
    if (corpus_.classes.empty()) throw Error(ErrorCode::EmptyCorpus, "mock corpus has no classes");
    for (const auto& c : corpus_.classes) {
        if (c.predicates.empty() || !lookup(c.objects, "*")) {
            throw Error(ErrorCode::EmptyCorpus,
                        "mock class \"" + c.name + "\" needs predicates and a \"*\" object list");
        }
    }
    if (corpus_.refusal_probability > 0.0 && corpus_.refusal_pool.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "refusal_probability > 0 but the refusal pool is empty");
    }
}

std::string MockBackend::describe() const { return "mock:seed=" + std::to_string(seed_); }

namespace {

struct Resolved {
    const MockClassVocabulary* vocabulary = nullptr;
    PromptShape shape;
};

Resolved resolve(const MockCorpus& corpus, std::string_view prompt) {
    Resolved r;
    r.vocabulary = &corpus.classes.front();

    if (text::starts_with_icase(text::trim(prompt), kSeedListPrefix)) {
        r.shape.kind = PromptKind::SeedList;
        std::string plural(text::trim(text::trim(prompt).substr(kSeedListPrefix.size())));
        while (!plural.empty() && (plural.back() == '.' || plural.back() == ':')) plural.pop_back();
        r.shape.plural = plural;
        if (const auto* v = corpus.find_class(plural)) r.vocabulary = v;
        return r;
    }

    const std::string last = last_nonempty_line(prompt);
    auto find_subject_class = [&](std::string_view subject) {
        const std::string key = text::normalize_key(subject);
        for (const auto& c : corpus.classes) {
            for (const auto& s : c.subjects) {
                if (text::normalize_key(s) == key) return &c;
            }
        }
        return r.vocabulary;
    };

    if (last.rfind("Q: ", 0) == 0) {
        // Expansion question. Collect the example answers for the toxicity
        // feedback, then decode the final line.
        for (const auto& line : text::split_lines(prompt)) {
            if (line.rfind("Q: ", 0) != 0) continue;
            const auto hash = line.find(" # ");
            const auto answer = line.find(" A: ");
            if (hash == std::string::npos || answer == std::string::npos || answer < hash) continue;
            r.shape.example_predicates.emplace_back(text::trim(line.substr(hash + 3, answer - hash - 3)));
            r.shape.example_objects.emplace_back(text::trim(line.substr(answer + 4)));
        }
        std::string body = last.substr(3);
        const auto hash = body.find(" #");
        r.shape.subject = std::string(text::trim(body.substr(0, hash)));
        std::string rest = hash == std::string::npos ? "" : std::string(text::trim(body.substr(hash + 2)));
        if (rest.size() >= 2 && rest.compare(rest.size() - 2, 2, "A:") == 0) {
            r.shape.kind = PromptKind::ObjectQuestion;
            r.shape.predicate = std::string(text::trim(std::string_view(rest).substr(0, rest.size() - 2)));
        } else {
            r.shape.kind = PromptKind::PredicateQuestion;
        }
        r.vocabulary = find_subject_class(r.shape.subject);
        return r;
    }

    // "<prefix> <subject> <predicate>": locate the longest known subject.
    r.shape.kind = PromptKind::Init;
    const std::string lowered = text::ascii_lower(last);
    std::size_t best_len = 0;
    for (const auto& c : corpus.classes) {
        for (const auto& s : c.subjects) {
            const std::string key = text::ascii_lower(s);
            const auto pos = lowered.find(key);
            if (pos != std::string::npos && key.size() > best_len) {
                best_len = key.size();
                r.vocabulary = &c;
                r.shape.subject = last.substr(pos, key.size());
                r.shape.predicate = std::string(text::trim(last.substr(pos + key.size())));
            }
        }
    }
    if (best_len == 0) {
        const auto space = last.rfind(' ');
        r.shape.predicate = space == std::string::npos ? last : last.substr(space + 1);
        r.shape.subject = space == std::string::npos ? "" : last.substr(0, space);
    }
    return r;
}

std::string seed_list(const MockClassVocabulary& v, Rng& rng) {
    std::vector<std::string> names;
    for (const auto& c : v.seed_candidates) {
        if (rng.bernoulli(c.probability)) names.push_back(c.name);
    }
    if (names.empty()) return {};
    rng.shuffle(std::span<std::string>(names));
    const double style = rng.uniform();
    std::string out;
    if (style < 0.6) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            out += "\n" + std::to_string(i + 1) + ". " + names[i];
        }
    } else if (style < 0.8) {
        for (const auto& n : names) out += "\n- " + n;
    } else {
        out = "\n";
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i > 0) out += (i + 1 == names.size()) ? ", and " : ", ";
            out += names[i];
        }
        out += ".";
    }
    return out;
}

}  // namespace

bool MockBackend::is_toxic_object(std::string_view object) const {
    const std::string key = text::normalize_key(object);
    for (const auto& c : corpus_.classes) {
        for (const auto& [pred, list] : c.toxic_objects) {
            for (const auto& o : list) {
                if (text::normalize_key(o) == key) return true;
            }
        }
    }
    return false;
}

double MockBackend::toxic_probability_for(std::string_view prompt) const {
    double p = corpus_.toxic_probability;
    const std::string_view trimmed = text::trim(prompt);
    for (const auto& m : corpus_.augmentation_markers) {
        const bool hit = m.prefix_only ? trimmed.rfind(m.text, 0) == 0
                                       : prompt.find(m.text) != std::string_view::npos;
        if (hit) p = std::max(p, m.toxic_probability);
    }
    const auto shape = resolve(corpus_, prompt).shape;
    if (!shape.example_objects.empty()) {
        std::size_t toxic = 0;
        for (const auto& o : shape.example_objects) toxic += is_toxic_object(o);
        p += corpus_.incontext_toxic_weight *
             static_cast<double>(toxic) / static_cast<double>(shape.example_objects.size());
    }
    return std::clamp(p, 0.0, 0.95);
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
    request.validate();
    Rng rng(hash_combine(stable_hash(request.prompt, seed_), request.attempt));
    const Resolved resolved = resolve(corpus_, request.prompt);
    const MockClassVocabulary& vocab = *resolved.vocabulary;
    const PromptShape& shape = resolved.shape;

    std::string text;
    if (shape.kind == PromptKind::SeedList) {
        text = seed_list(vocab, rng);
    } else if (rng.bernoulli(corpus_.refusal_probability)) {
        text = " " + pick(corpus_.refusal_pool, rng);
    } else {
        const bool empty = rng.bernoulli(corpus_.empty_probability);
        const bool toxic = rng.bernoulli(toxic_probability_for(request.prompt));

        std::string predicate = shape.predicate;
        if (shape.kind == PromptKind::PredicateQuestion) {
            std::vector<std::string> fresh;
            std::set<std::string> used;
            for (const auto& p : shape.example_predicates) used.insert(text::normalize_key(p));
            for (const auto& p : vocab.predicates) {
                if (!used.count(text::normalize_key(p))) fresh.push_back(p);
            }
            predicate = pick(fresh.empty() ? vocab.predicates : fresh, rng);
        }

        std::string object;
        if (!empty) {
            const std::vector<std::string>* pool = nullptr;
            if (toxic) pool = lookup(vocab.toxic_objects, predicate);
            if (!pool) {
                auto affinity = vocab.subject_objects.find(text::normalize_key(shape.subject));
                if (affinity != vocab.subject_objects.end() && !affinity->second.empty() &&
                    rng.bernoulli(corpus_.subject_affinity)) {
                    pool = &affinity->second;
                } else {
                    pool = lookup(vocab.objects, predicate);
                }
            }
            object = pick(*pool, rng);
        }

        switch (shape.kind) {
            case PromptKind::Init:
                text = empty ? "" : " " + object + "\nQ:";
                break;
            case PromptKind::PredicateQuestion:
                text = " " + predicate + " A: " + object + "\nQ: ";
                break;
            case PromptKind::ObjectQuestion:
                text = empty ? "" : " " + object + "\nQ: ";
                break;
            case PromptKind::SeedList:
                break;
        }
    }

    CompletionResponse response;
    response.finish_reason = FinishReason::Stop;
    text::cut_at_stop(text, request.stop_sequences);

    // Whitespace-delimited words stand in for tokens.
    std::istringstream words(text);
    std::string word;
    int count = 0;
    std::size_t cut = std::string::npos;
    std::size_t scan = 0;
    while (words >> word) {
        scan = text.find(word, scan) + word.size();
        if (++count == request.max_tokens) {
            cut = scan;
            break;
        }
    }
    if (cut != std::string::npos && !text::trim(text.substr(cut)).empty()) {
        text.resize(cut);
        response.finish_reason = FinishReason::Length;
    }
    response.text = std::move(text);
    return response;
}

}  // namespace stereocrawl
