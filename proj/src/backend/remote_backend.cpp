#include "stereocrawl/remote_backend.hpp"

#include <cstdlib>

#include "json.hpp"
#include "stereocrawl/error.hpp"

namespace stereocrawl {

void CompletionRequest::validate() const {
    if (prompt.empty()) throw Error(ErrorCode::InvalidRequest, "completion prompt is empty");
    if (max_tokens < 1) throw Error(ErrorCode::InvalidRequest, "max_tokens must be >= 1");
}

void RemoteBackendConfig::apply_environment() {
    if (url.empty()) {
        if (const char* v = std::getenv("STEREOCRAWL_LLM_URL")) url = v;
    }
    if (api_key.empty()) {
        if (const char* v = std::getenv("STEREOCRAWL_LLM_KEY")) api_key = v;
    }
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
    if (config_.url.empty()) {
        throw Error(ErrorCode::MissingCredential,
                    "no completion endpoint configured: set STEREOCRAWL_LLM_URL or backend.url "
                    "in the config file");
    }
    if (config_.api_key.empty()) {
        throw Error(ErrorCode::MissingCredential,
                    "no API key configured: set STEREOCRAWL_LLM_KEY or backend.api_key in the "
                    "config file");
    }
    endpoint_ = http::parse_url(config_.url);
    in_flight_ = std::make_unique<std::counting_semaphore<>>(std::max(1, config_.max_in_flight));
}

CompletionResponse decode_completion_body(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
        throw HttpError(ErrorCode::TransportError, 200, "completion response is not JSON");
    }
    const auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty() ||
        !(*choices)[0].contains("text") || !(*choices)[0]["text"].is_string()) {
        throw HttpError(ErrorCode::TransportError, 200,
                        "completion response lacks choices[0].text");
    }
    const auto& first = (*choices)[0];
    CompletionResponse r;
    r.text = first["text"].get<std::string>();
    r.finish_reason = FinishReason::Other;
    if (auto fr = first.find("finish_reason"); fr != first.end() && fr->is_string()) {
        const auto s = fr->get<std::string>();
        if (s == "stop") r.finish_reason = FinishReason::Stop;
        else if (s == "length") r.finish_reason = FinishReason::Length;
    }
    return r;
}

CompletionResponse RemoteBackend::complete(const CompletionRequest& request) {
    request.validate();
    nlohmann::ordered_json body;
    body["model"] = config_.model;
    body["prompt"] = request.prompt;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    body["stop"] = request.stop_sequences;

    in_flight_->acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{*in_flight_};

    const auto response = http::post_json(
        endpoint_, body.dump(), {{"Authorization", "Bearer " + config_.api_key}}, config_.retry,
        {ErrorCode::TransportError, ErrorCode::RemoteRefusal, ErrorCode::RateLimited});
    return decode_completion_body(response.body);
}

std::string RemoteBackend::describe() const {
    return "remote:" + config_.model + "@" + endpoint_.origin + endpoint_.path;
}

}  // namespace stereocrawl
