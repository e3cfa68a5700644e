#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stereocrawl {

/// Static facts about a protected class: how it is named in prompts, which
/// phrase the initialization augmentation prepends, and whether group names
/// get a trailing " people".
struct ProtectedClassInfo {
    std::string key;           // "nationality"
    std::string label;         // "Nationality"
    std::string plural;        // "nationalities", used in the seed-list prompt
    std::string prepend_text;  // initialization augmentation prefix
    bool people_suffix = false;
};

/// Known classes, plus a generic fallback for anything else (plural = key+"s",
/// the general-purpose augmentation phrase, no suffix).
ProtectedClassInfo protected_class_info(std::string_view key);

/// The built-in class keys: gender_identity, nationality, ethnicity, religion.
const std::vector<std::string>& known_protected_classes();

/// "American" -> "American people"; names already ending in "people" are
/// returned unchanged.
std::string apply_people_suffix(std::string_view name);

}  // namespace stereocrawl
