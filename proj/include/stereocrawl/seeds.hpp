#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stereocrawl/backend.hpp"
#include "stereocrawl/protected_class.hpp"

namespace stereocrawl {

enum class Provenance { Manual, Dynamic };

std::string_view to_string(Provenance p);

struct SeedEntity {
    std::string name;
    Provenance provenance = Provenance::Manual;
    int support = 0;  // number of generation runs that listed it (dynamic only)

    friend bool operator==(const SeedEntity&, const SeedEntity&) = default;
};

/// Ordered, duplicate-free list of seed entities for one protected class.
/// Two names are duplicates when they match after trimming, whitespace
/// collapsing and case folding; the first surface form wins.
class SeedRoster {
public:
    SeedRoster() = default;
    explicit SeedRoster(std::string protected_class)
        : protected_class_(std::move(protected_class)) {}

    /// Returns false (and changes nothing) for empty or duplicate names.
    bool add(std::string_view name, Provenance provenance, int support = 0);

    bool contains(std::string_view name) const;

    const std::string& protected_class() const noexcept { return protected_class_; }
    const std::vector<SeedEntity>& entities() const noexcept { return entities_; }
    std::vector<std::string> names() const;
    std::size_t size() const noexcept { return entities_.size(); }
    bool empty() const noexcept { return entities_.empty(); }

    friend bool operator==(const SeedRoster&, const SeedRoster&) = default;

private:
    std::string protected_class_;
    std::vector<SeedEntity> entities_;
};

/// "Provide a list of common <plural>".
std::string seed_list_prompt(const ProtectedClassInfo& info);

/// Splits a list-shaped completion into items. Accepts numbered lines
/// ("1. X", "2) X"), bulleted lines ("- X", "* X", "• X") and a single
/// comma-separated line ("X, Y, and Z").
std::vector<std::string> parse_list_completion(std::string_view completion);

struct SeedRun {
    std::string completion;
    std::vector<std::string> items;
};

struct SeedGeneration {
    SeedRoster roster;
    std::vector<SeedRun> runs;  // raw parse log, kept for audit
};

struct SeedGenerationOptions {
    int runs = 5;
    int min_support = 3;
    double temperature = 0.8;
    int max_tokens = 256;
    int threads = 1;
};

/// Prompts the backend `runs` times and keeps entities listed in at least
/// `min_support` distinct runs, ordered by descending support and then by
/// first appearance. Throws Error(EmptyRoster) if nothing qualifies, or
/// Error(InvalidConfig) unless runs >= min_support >= 1.
SeedGeneration generate_seeds(CompletionBackend& backend, std::string_view protected_class,
                              const SeedGenerationOptions& options = {});

/// Appends manual additions; names already present are skipped.
SeedRoster merge_manual(SeedRoster roster, std::span<const std::string> additions);

/// The seed lists used for the four reference classes. Throws
/// Error(InvalidConfig) for any other class.
SeedRoster bundled_roster(std::string_view protected_class);

/// Crawl subjects for a roster, applying the " people" suffix when asked.
std::vector<std::string> roster_subjects(const SeedRoster& roster, bool people_suffix);

// Roster file: {"class": ..., "entities": [{"name", "provenance", "support"}],
//               "runs": [{"completion", "items"}]}
std::string roster_to_json(const SeedRoster& roster, std::span<const SeedRun> runs = {});
SeedRoster roster_from_json(std::string_view document);
SeedRoster read_roster_file(const std::string& path);

}  // namespace stereocrawl
