#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "stereocrawl/error.hpp"

namespace stereocrawl::http {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;    // path plus query, starts with '/'
};

/// Splits an absolute http(s) URL. Throws Error(InvalidConfig).
Endpoint parse_url(const std::string& url);

struct Response {
    int status = 0;
    std::string body;
    std::map<std::string, std::string> headers;  // lower-cased names
};

struct RetryPolicy {
    int max_retries = 5;
    std::chrono::milliseconds base_delay{250};
    std::chrono::milliseconds max_delay{8000};
    std::chrono::milliseconds timeout{30000};
};

/// Error codes used when a call finally fails. Each client maps failures to
/// its own module's vocabulary (backend vs scorer).
struct ErrorVocabulary {
    ErrorCode transport;
    ErrorCode refusal;
    ErrorCode rate_limited;
};

/// POSTs a JSON body with retries. Transport failures, 5xx and 429 are
/// retried with exponential backoff (429 honors Retry-After); any other 4xx
/// fails immediately. At most `policy.max_retries` retries are made. The
/// thrown HttpError carries the final status (0 for transport failures).
Response post_json(const Endpoint& endpoint, const std::string& body,
                   const std::map<std::string, std::string>& headers,
                   const RetryPolicy& policy, const ErrorVocabulary& vocabulary);

/// Client-side limiter shared by all threads using one remote service.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second);

    /// Blocks until the caller may issue its next request.
    void acquire();

private:
    std::mutex mutex_;
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_{};
};

}  // namespace stereocrawl::http
