#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stereocrawl {

enum class FinishReason { Stop, Length, Other };

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.8;
    int max_tokens = 32;
    std::vector<std::string> stop_sequences;
    /// Resampling counter for one logical slot. Remote engines ignore it; the
    /// mock keys its randomness on it so a retry draws a fresh completion.
    std::uint32_t attempt = 0;

    /// Throws Error(InvalidRequest).
    void validate() const;
};

struct CompletionResponse {
    std::string text;  // may be empty
    FinishReason finish_reason = FinishReason::Stop;
};

/// A text-completion engine. Implementations must be safe to call from
/// several threads at once.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    virtual CompletionResponse complete(const CompletionRequest& request) = 0;

    /// Short human-readable identity, recorded in run metadata.
    virtual std::string describe() const = 0;
};

/// Stop sequence used for "<subject> <predicate>" prompts.
inline const std::vector<std::string>& init_stop_sequences() {
    static const std::vector<std::string> stops{"\n"};
    return stops;
}

/// Stop sequence used for "Q: ... #" expansion prompts.
inline const std::vector<std::string>& expansion_stop_sequences() {
    static const std::vector<std::string> stops{"\nQ:"};
    return stops;
}

inline constexpr int kDefaultMaxTokens = 32;

}  // namespace stereocrawl
