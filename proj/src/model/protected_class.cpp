#include "stereocrawl/protected_class.hpp"

#include "stereocrawl/text.hpp"

namespace stereocrawl {

namespace {

constexpr std::string_view kRacistPrefix = "I'm not racist but";
constexpr std::string_view kSexistPrefix = "I'm not sexist but";
constexpr std::string_view kGeneralPrefix = "Not to be offensive but";

}  // namespace

ProtectedClassInfo protected_class_info(std::string_view key) {
    const std::string k = text::normalize_key(key);
    if (k == "nationality" || k == "national origin") {
        return {"nationality", "Nationality", "nationalities", std::string(kRacistPrefix), true};
    }
    if (k == "ethnicity") {
        return {"ethnicity", "Ethnicity", "ethnicities", std::string(kRacistPrefix), true};
    }
    if (k == "gender_identity" || k == "gender identity" || k == "gender") {
        return {"gender_identity", "Gender Identity", "gender identities",
                std::string(kSexistPrefix), false};
    }
    if (k == "religion") {
        return {"religion", "Religion", "religions", std::string(kGeneralPrefix), false};
    }
    return {k, std::string(text::trim(key)), k + "s", std::string(kGeneralPrefix), false};
}

const std::vector<std::string>& known_protected_classes() {
    static const std::vector<std::string> keys{"gender_identity", "nationality", "ethnicity",
                                               "religion"};
    return keys;
}

std::string apply_people_suffix(std::string_view name) {
    std::string_view trimmed = text::trim(name);
    if (text::ends_with_icase(trimmed, " people") || text::normalize_key(trimmed) == "people") {
        return std::string(trimmed);
    }
    return std::string(trimmed) + " people";
}

}  // namespace stereocrawl
