#include <cctype>
#include <unordered_map>

#include "stereocrawl/topics.hpp"

namespace stereocrawl {

const StopwordSet& bundled_stopwords() {
    static const StopwordSet words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
        "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his",
        "himself", "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself",
        "they", "them", "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
        "that", "that'll", "these", "those", "am", "is", "are", "was", "were", "be", "been",
        "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an", "the",
        "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by", "for",
        "with", "about", "against", "between", "into", "through", "during", "before", "after",
        "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under",
        "again", "further", "then", "once", "here", "there", "when", "where", "why", "how", "all",
        "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
        "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don",
        "don't", "should", "should've", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain",
        "aren", "aren't", "couldn", "couldn't", "didn", "didn't", "doesn", "doesn't", "hadn",
        "hadn't", "hasn", "hasn't", "haven", "haven't", "isn", "isn't", "ma", "mightn",
        "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
        "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't",
        "can't", "cannot", "cant"};
    return words;
}

std::string fold_case(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            out.push_back(static_cast<char>(std::tolower(c)));
        } else if (c == 0xC3 && i + 1 < s.size()) {
            // U+00C0..U+00DE except U+00D7 (multiplication sign) -> +0x20
            auto next = static_cast<unsigned char>(s[i + 1]);
            if (next >= 0x80 && next <= 0x9E && next != 0x97) next = static_cast<unsigned char>(next + 0x20);
            out.push_back(static_cast<char>(c));
            out.push_back(static_cast<char>(next));
            ++i;
        } else {
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

namespace {

const std::unordered_map<std::string, std::string>& irregular_forms() {
    static const std::unordered_map<std::string, std::string> table = {
        // superlatives and comparatives
        {"friendliest", "friendly"}, {"friendlier", "friendly"}, {"best", "good"},
        {"better", "good"}, {"worst", "bad"}, {"worse", "bad"}, {"laziest", "lazy"},
        {"lazier", "lazy"}, {"smartest", "smart"}, {"smarter", "smart"},
        {"happiest", "happy"}, {"happier", "happy"}, {"richest", "rich"},
        {"richer", "rich"}, {"kindest", "kind"}, {"loudest", "loud"}, {"louder", "loud"},
        // nouns
        {"thieves", "thief"}, {"wives", "wife"}, {"knives", "knife"}, {"lives", "life"},
        {"leaves", "leaf"}, {"men", "man"}, {"women", "woman"}, {"children", "child"},
        {"people", "people"}, {"feet", "foot"}, {"teeth", "tooth"}, {"mice", "mouse"},
        {"movies", "movie"}, {"cookies", "cookie"}, {"calories", "calorie"},
        {"zombies", "zombie"}, {"shoes", "shoe"}, {"toes", "toe"}, {"lies", "lie"},
        {"ties", "tie"}, {"dies", "die"}, {"pies", "pie"},
        // verbs
        {"dying", "die"}, {"lying", "lie"}, {"tying", "tie"}, {"used", "use"},
        {"queuing", "queue"}, {"queueing", "queue"}, {"queued", "queue"},
        {"ate", "eat"}, {"eaten", "eat"}, {"drank", "drink"}, {"drunk", "drunk"},
        {"made", "make"}, {"making", "make"}, {"took", "take"}, {"taken", "take"},
        {"taking", "take"}, {"went", "go"}, {"gone", "go"}, {"going", "go"},
        {"thought", "think"}, {"brought", "bring"}, {"bought", "buy"}, {"sang", "sing"},
        {"sung", "sing"}, {"spoke", "speak"}, {"spoken", "speak"}, {"stole", "steal"},
        {"stolen", "steal"}, {"drove", "drive"}, {"driven", "drive"}, {"wrote", "write"},
        {"written", "write"}, {"writing", "write"}, {"knew", "know"}, {"known", "know"},
        {"felt", "feel"}, {"kept", "keep"}, {"left", "leave"}, {"lost", "lose"},
        {"sharing", "share"}, {"shared", "share"}, {"saving", "save"}, {"saved", "save"},
        {"loving", "love"}, {"loved", "love"}, {"hating", "hate"}, {"hated", "hate"},
        {"having", "have"}, {"sitting", "sit"}, {"getting", "get"}, {"got", "get"},
        {"danced", "dance"}, {"dancing", "dance"}, {"cooking", "cooking"},
        {"valued", "value"}, {"values", "value"},
    };
    return table;
}

/// Inflected-looking words that are better kept whole.
const std::unordered_set<std::string>& keep_whole() {
    static const std::unordered_set<std::string> words = {
        // -ing adjectives and nouns
        "welcoming", "outgoing", "hardworking", "caring", "loving", "amazing", "interesting",
        "boring", "exciting", "annoying", "charming", "shopping", "hiking", "clothing",
        "building", "morning", "evening", "nothing", "something", "anything", "everything",
        "thing", "king", "ring", "sing", "bring", "spring", "string", "swing", "wing", "during",
        "understanding", "willing", "daring", "demanding", "outstanding", "easygoing",
        "fascinating", "accommodating", "cunning", "surfing", "skiing", "sibling", "ceiling",
        "wedding", "pudding", "darling", "feeling", "meeting", "training", "engineering",
        "cooking", "fasting",
        // -ed adjectives
        "talented", "educated", "skilled", "disciplined", "reserved", "relaxed", "married",
        "privileged", "sophisticated", "motivated", "organized", "dedicated", "devoted",
        "trusted", "brainwashed", "confused", "biased", "spoiled", "tired", "bored",
        "interested", "excited", "advanced", "civilized", "laidback", "openminded",
        "closedminded", "reserved", "red", "bed", "need", "seed", "speed", "feed", "breed",
        "weed", "greed", "shed", "sled", "wed", "fled", "bred", "sacred", "naked", "wicked",
        "hundred", "kindred", "hatred", "rugged", "wretched", "beloved", "learned", "aged",
        // -s forms that are not plurals
        "always", "news", "series", "species", "sometimes", "perhaps", "politics",
        "mathematics", "physics", "economics", "athletics", "ethics", "gymnastics", "clothes",
        "means", "lens", "whereas", "towards", "afterwards", "pants", "jeans", "glasses",
        "christmas", "texas", "chess", "less", "unless", "yes", "this", "his", "its", "us",
        "gas", "bus", "plus", "thus", "various", "famous", "nervous", "religious", "serious",
        "generous", "jealous", "dangerous", "delicious", "anxious", "curious", "obvious",
        "previous", "ambitious", "industrious", "spontaneous", "gorgeous", "courageous",
        "analysis", "basis", "crisis", "emphasis", "thesis", "tennis", "chaos", "canvas",
        "atlas", "bias", "alias", "status", "campus", "virus", "bonus", "focus", "genius",
        "census", "citrus", "cactus", "walrus", "sinus", "hiatus", "consensus", "octopus",
    };
    return words;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
    for (char c : s) {
        if (is_vowel(c) || c == 'y') return true;
    }
    return false;
}

bool is_consonant(char c) { return std::isalpha(static_cast<unsigned char>(c)) && !is_vowel(c); }

/// Restores a silent e dropped by -ing/-ed: "danc" -> "dance",
/// "hik" -> "hike", "debat" -> "debate", "undoubled "runn" -> "run".
std::string restore_stem(std::string stem) {
    const std::size_t n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] && is_consonant(stem[n - 1]) &&
        stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z') {
        stem.pop_back();
        return stem;
    }
    const char last = stem.back();
    if (last == 'c' || last == 'v' || last == 'z' || last == 'u') return stem + "e";
    if (n >= 2 && stem.compare(n - 2, 2, "dg") == 0) return stem + "e";
    if (n >= 3 && stem.compare(n - 2, 2, "at") == 0 && is_consonant(stem[n - 3])) return stem + "e";
    // Short consonant-vowel-consonant stems: "hik", "mak", "smok", "shar".
    auto cvc_tail = [&](std::size_t i) {
        return is_consonant(stem[i]) && is_vowel(stem[i + 1]) && is_consonant(stem[i + 2]) &&
               stem[i + 2] != 'w' && stem[i + 2] != 'x' && stem[i + 2] != 'y';
    };
    if (n == 3 && cvc_tail(0)) return stem + "e";
    if (n == 4 && is_consonant(stem[0]) && cvc_tail(1)) return stem + "e";
    return stem;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string lemmatize(std::string_view word_view) {
    std::string word(word_view);
    if (auto it = irregular_forms().find(word); it != irregular_forms().end()) return it->second;
    if (keep_whole().count(word) || word.size() <= 3) return word;
    for (char c : word) {
        if (!std::isalpha(static_cast<unsigned char>(c))) return word;
    }

    if (ends_with(word, "iest") && word.size() >= 7) return word.substr(0, word.size() - 4) + "y";

    if (ends_with(word, "ing")) {
        const std::string stem = word.substr(0, word.size() - 3);
        if (stem.size() >= 3 && has_vowel(stem)) return restore_stem(stem);
        return word;
    }
    if (ends_with(word, "ied") && word.size() >= 5) return word.substr(0, word.size() - 3) + "y";
    if (ends_with(word, "ed")) {
        const std::string stem = word.substr(0, word.size() - 2);
        if (stem.size() >= 3 && has_vowel(stem)) {
            if (ends_with(stem, "e")) return stem;  // "agreed" -> "agree"
            return restore_stem(stem);
        }
        return word;
    }

    if (ends_with(word, "ies") && word.size() >= 6) return word.substr(0, word.size() - 3) + "y";
    if (ends_with(word, "sses")) return word.substr(0, word.size() - 2);
    if (ends_with(word, "ches") || ends_with(word, "shes") || ends_with(word, "xes") ||
        ends_with(word, "zes")) {
        return word.substr(0, word.size() - 2);
    }
    if (ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "us") &&
        !ends_with(word, "is") && !ends_with(word, "ous")) {
        return word.substr(0, word.size() - 1);
    }
    return word;
}

namespace {

std::vector<std::string> words_of(std::string_view s) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        while (!current.empty() && current.back() == '\'') current.pop_back();
        while (!current.empty() && current.front() == '\'') current.erase(current.begin());
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '\'' || u >= 0x80) {
            current.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

}  // namespace

std::vector<std::string> preprocess(const Triple& triple, const StopwordSet& stopwords) {
    std::vector<std::string> tokens;
    for (const std::string_view part : {std::string_view(triple.predicate), std::string_view(triple.object)}) {
        for (const auto& w : words_of(fold_case(part))) {
            if (stopwords.count(w)) continue;
            std::string lemma = lemmatize(w);
            if (lemma.empty() || stopwords.count(lemma)) continue;
            tokens.push_back(std::move(lemma));
        }
    }
    return tokens;
}

}  // namespace stereocrawl
