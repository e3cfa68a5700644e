#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include "stereocrawl/backend.hpp"
#include "stereocrawl/http.hpp"

namespace stereocrawl {

struct RemoteBackendConfig {
    std::string url;  // full completions endpoint
    std::string api_key;
    std::string model = "text-davinci-003";
    int max_in_flight = 4;
    http::RetryPolicy retry;

    /// Fills url/api_key from STEREOCRAWL_LLM_URL / STEREOCRAWL_LLM_KEY when
    /// they are empty.
    void apply_environment();
};

/// Client for a completions endpoint:
///   POST {model, prompt, temperature, max_tokens, stop}
///   -> {choices: [{text, finish_reason}, ...]}
/// The credential is sent as "Authorization: Bearer <key>".
class RemoteBackend final : public CompletionBackend {
public:
    /// Throws Error(MissingCredential) without a URL or key.
    explicit RemoteBackend(RemoteBackendConfig config);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string describe() const override;

private:
    RemoteBackendConfig config_;
    http::Endpoint endpoint_;
    std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

/// Decodes a completions response body. Throws Error(TransportError) when the
/// body lacks choices[0].text.
CompletionResponse decode_completion_body(const std::string& body);

}  // namespace stereocrawl
