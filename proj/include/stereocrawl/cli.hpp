#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stereocrawl/harm.hpp"
#include "stereocrawl/model.hpp"
#include "stereocrawl/remote_backend.hpp"

namespace stereocrawl::cli {

enum ExitCode : int {
    kOk = 0,
    kExternalFailure = 1,
    kDataError = 2,
    kFlagError = 64,
    kInterrupted = 130,
};

enum class BackendKind { Mock, Remote };
enum class ScorerKind { Lexicon, Remote };

struct RosterSource {
    std::string file;        // empty: bundled roster (or dynamic generation)
    bool dynamic = false;    // generate with the backend
    std::vector<std::string> additions;
    int runs = 5;
    int min_support = 3;
};

struct BackendSelection {
    BackendKind kind = BackendKind::Remote;
    RemoteBackendConfig remote;
    std::string mock_corpus;  // empty: bundled corpus
    std::optional<std::uint64_t> mock_seed;  // defaults to the crawl seed
};

struct ScorerSelection {
    ScorerKind kind = ScorerKind::Remote;
    PerspectiveConfig perspective;
    RegardServiceConfig regard;
};

/// Everything one pipeline run needs. Layered as compiled defaults, then a
/// JSON config file, then command-line flags.
struct RunConfig {
    std::string protected_class;
    RosterSource roster;
    CrawlConfig crawl;
    BackendSelection backend;
    ScorerSelection scorer;
    std::string vectors;
    std::string output_dir = ".";
    int threads = 1;
    std::optional<bool> people_suffix;  // unset: per-class default

    /// Throws Error(InvalidConfig) when a referenced file is missing.
    void validate() const;
};

/// Overlays a JSON config document. Relative paths are resolved against
/// `base_dir`. Unknown keys throw Error(InvalidConfig).
void apply_config_json(std::string_view document, const std::string& base_dir, RunConfig& config);
void apply_config_file(const std::string& path, RunConfig& config);

/// Set by the SIGINT handler; the crawl stops at the next slot boundary.
std::atomic<bool>& cancel_flag();

/// Installs the SIGINT handler that sets cancel_flag().
void install_interrupt_handler();

/// Entry point behind the stereocrawl binary. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stereocrawl::cli
