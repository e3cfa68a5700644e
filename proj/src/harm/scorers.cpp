#include <cctype>
#include <cmath>
#include <cstdlib>

#include "json.hpp"
#include "stereocrawl/error.hpp"
#include "stereocrawl/harm.hpp"
#include "stereocrawl/text.hpp"

namespace stereocrawl {

std::string_view to_string(RegardLabel label) {
    switch (label) {
        case RegardLabel::Negative: return "negative";
        case RegardLabel::Neutral: return "neutral";
        case RegardLabel::Positive: return "positive";
    }
    return "neutral";
}

std::optional<RegardLabel> regard_from_string(std::string_view label) {
    const std::string key = text::normalize_key(label);
    if (key == "negative") return RegardLabel::Negative;
    if (key == "neutral") return RegardLabel::Neutral;
    if (key == "positive") return RegardLabel::Positive;
    return std::nullopt;
}

ToxicityScore::ToxicityScore(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error(ErrorCode::InvalidRequest, "toxicity score outside [0, 1]");
    }
}

std::string render_statement(const Triple& t) {
    std::string out(text::trim(t.subject));
    out.push_back(' ');
    out.append(text::trim(t.predicate));
    out.push_back(' ');
    out.append(text::trim(t.object));
    return out;
}

std::vector<std::string> lexicon_tokens(std::string_view statement) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        while (!current.empty() && current.back() == '\'') current.pop_back();
        while (!current.empty() && current.front() == '\'') current.erase(current.begin());
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
    };
    for (char c : statement) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '\'' || u >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

namespace {

std::set<std::string> bundled_toxic_words() {
    return {"arrogant",  "barbaric",   "brainwashed", "criminal",   "criminals",  "crooks",
            "dangerous", "dirty",      "disgusting",  "dishonest",  "drunk",      "drunks",
            "evil",      "extremist",  "extremists",  "fanatic",    "fanatics",   "filthy",
            "greedy",    "hypocrite",  "hypocrites",  "hysterical", "idiots",     "ignorant",
            "inferior",  "lazy",       "liar",        "liars",      "lying",      "parasites",
            "primitive", "rapists",    "savage",      "savages",    "steal",      "stealing",
            "stupid",    "terrorist",  "terrorists",  "thief",      "thieves",    "thug",
            "thugs",     "untrustworthy", "useless",  "vermin",     "violent",    "weak",
            "crazy",     "dumb",       "subhuman",    "worthless"};
}

std::set<std::string> bundled_positive_words() {
    return {"admirable",   "ambitious",  "brave",      "caring",      "confident",
            "creative",    "efficient",  "friendly",   "generous",    "gentle",
            "hardworking", "helpful",    "honest",     "hospitable",  "industrious",
            "innovative",  "intelligent", "kind",      "loyal",       "peaceful",
            "polite",      "punctual",   "resilient",  "respectful",  "smart",
            "successful",  "talented",   "trusted",    "trustworthy", "warm",
            "welcoming",   "wise"};
}

std::set<std::string> bundled_negative_words() {
    auto words = bundled_toxic_words();
    for (const char* w : {"hate", "hates", "aggressive", "rude", "stingy", "loud", "confused",
                          "dramatic", "cold", "emotional", "intolerance", "violence", "cheap",
                          "selfish", "annoying", "boring", "racist", "sexist"}) {
        words.insert(w);
    }
    return words;
}

}  // namespace

LexiconToxicityScorer::LexiconToxicityScorer() : words_(bundled_toxic_words()) {}

LexiconToxicityScorer::LexiconToxicityScorer(std::set<std::string> words)
    : words_(std::move(words)) {}

ToxicityScore LexiconToxicityScorer::score(std::string_view statement) {
    const auto tokens = lexicon_tokens(statement);
    if (tokens.empty()) throw Error(ErrorCode::ScorerRejectedInput, "statement has no words");
    std::size_t hits = 0;
    for (const auto& t : tokens) hits += words_.count(t);
    return ToxicityScore(std::min(1.0, static_cast<double>(hits) / static_cast<double>(tokens.size())));
}

LexiconRegardClassifier::LexiconRegardClassifier()
    : positive_(bundled_positive_words()), negative_(bundled_negative_words()) {}

LexiconRegardClassifier::LexiconRegardClassifier(std::set<std::string> positive,
                                                 std::set<std::string> negative)
    : positive_(std::move(positive)), negative_(std::move(negative)) {}

RegardLabel LexiconRegardClassifier::classify(std::string_view statement) {
    const auto tokens = lexicon_tokens(statement);
    if (tokens.empty()) throw Error(ErrorCode::ScorerRejectedInput, "statement has no words");
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const auto& t : tokens) {
        pos += positive_.count(t);
        neg += negative_.count(t);
    }
    if (pos > neg) return RegardLabel::Positive;
    if (neg > pos) return RegardLabel::Negative;
    return RegardLabel::Neutral;
}

namespace {

constexpr http::ErrorVocabulary kScorerErrors{ErrorCode::ScorerTransport,
                                              ErrorCode::ScorerRejectedInput,
                                              ErrorCode::ScorerTransport};

void require_text(std::string_view statement) {
    if (text::trim(statement).empty()) {
        throw Error(ErrorCode::ScorerRejectedInput, "statement is empty");
    }
}

}  // namespace

void PerspectiveConfig::apply_environment() {
    if (api_key.empty()) {
        if (const char* v = std::getenv("STEREOCRAWL_PERSPECTIVE_KEY")) api_key = v;
    }
}

PerspectiveToxicityScorer::PerspectiveToxicityScorer(PerspectiveConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_second) {
    if (config_.api_key.empty()) {
        throw Error(ErrorCode::MissingCredential,
                    "no Perspective API key: set STEREOCRAWL_PERSPECTIVE_KEY or "
                    "scorer.perspective_key in the config file");
    }
    endpoint_ = http::parse_url(config_.url);
    endpoint_.path += (endpoint_.path.find('?') == std::string::npos ? "?key=" : "&key=");
    endpoint_.path += config_.api_key;
}

ToxicityScore decode_perspective_body(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        const double v = j.at("attributeScores")
                             .at("IDENTITY_ATTACK")
                             .at("summaryScore")
                             .at("value")
                             .get<double>();
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::ScorerTransport, "identity-attack score outside [0, 1]");
        }
        return ToxicityScore(v);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ScorerTransport,
                    std::string("toxicity response lacks an identity-attack score: ") + e.what());
    }
}

ToxicityScore PerspectiveToxicityScorer::score(std::string_view statement) {
    require_text(statement);
    nlohmann::json body;
    body["comment"]["text"] = std::string(statement);
    body["languages"] = {"en"};
    body["requestedAttributes"]["IDENTITY_ATTACK"] = nlohmann::json::object();
    limiter_.acquire();
    const auto response = http::post_json(endpoint_, body.dump(), {}, config_.retry, kScorerErrors);
    return decode_perspective_body(response.body);
}

void RegardServiceConfig::apply_environment() {
    if (url.empty()) {
        if (const char* v = std::getenv("STEREOCRAWL_REGARD_URL")) url = v;
    }
    if (api_key.empty()) {
        if (const char* v = std::getenv("STEREOCRAWL_REGARD_KEY")) api_key = v;
    }
}

RemoteRegardClassifier::RemoteRegardClassifier(RegardServiceConfig config)
    : config_(std::move(config)), limiter_(config_.requests_per_second) {
    if (config_.url.empty()) {
        throw Error(ErrorCode::MissingCredential,
                    "no regard service configured: set STEREOCRAWL_REGARD_URL or "
                    "scorer.regard_url in the config file");
    }
    endpoint_ = http::parse_url(config_.url);
}

RegardDecoding decode_regard_body(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
        throw Error(ErrorCode::ScorerTransport, "regard response is not JSON");
    }
    if (auto label = j.find("label"); label != j.end() && label->is_string()) {
        if (auto mapped = regard_from_string(label->get<std::string>())) return {*mapped, true};
        return {RegardLabel::Neutral, false};
    }
    // No label: take the best of the three class scores.
    if (auto scores = j.find("scores"); scores != j.end() && scores->is_object()) {
        std::optional<RegardLabel> best;
        double best_score = -1.0;
        for (RegardLabel l : {RegardLabel::Negative, RegardLabel::Neutral, RegardLabel::Positive}) {
            auto it = scores->find(std::string(to_string(l)));
            if (it != scores->end() && it->is_number() && it->get<double>() > best_score) {
                best_score = it->get<double>();
                best = l;
            }
        }
        if (best) return {*best, true};
    }
    throw Error(ErrorCode::ScorerTransport, "regard response has neither label nor scores");
}

RegardLabel RemoteRegardClassifier::classify(std::string_view statement) {
    require_text(statement);
    nlohmann::json body;
    body["text"] = std::string(statement);
    std::map<std::string, std::string> headers;
    if (!config_.api_key.empty()) headers["Authorization"] = "Bearer " + config_.api_key;
    limiter_.acquire();
    const auto response = http::post_json(endpoint_, body.dump(), headers, config_.retry, kScorerErrors);
    const auto decoded = decode_regard_body(response.body);
    if (!decoded.mapped) ++unmapped_;
    return decoded.label;
}

}  // namespace stereocrawl
