#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "stereocrawl/http.hpp"
#include "stereocrawl/text.hpp"

#include <algorithm>
#include <charconv>
#include <thread>

namespace stereocrawl::http {

Endpoint parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::InvalidConfig, "URL must be absolute: " + url);
    }
    const std::string scheme = text::ascii_lower(url.substr(0, scheme_end));
    if (scheme != "http" && scheme != "https") {
        throw Error(ErrorCode::InvalidConfig, "unsupported URL scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint e;
    if (path_start == std::string::npos) {
        e.origin = url;
        e.path = "/";
    } else {
        e.origin = url.substr(0, path_start);
        e.path = url.substr(path_start);
    }
    if (e.origin.size() <= scheme_end + 3) {
        throw Error(ErrorCode::InvalidConfig, "URL has no host: " + url);
    }
    return e;
}

namespace {

std::chrono::milliseconds backoff(const RetryPolicy& p, int retry) {
    auto delay = p.base_delay * (1LL << std::min(retry, 20));
    return std::min<std::chrono::milliseconds>(delay, p.max_delay);
}

std::optional<std::chrono::milliseconds> retry_after(const httplib::Response& res) {
    if (!res.has_header("Retry-After")) return std::nullopt;
    const std::string v = res.get_header_value("Retry-After");
    long long seconds = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seconds);
    if (ec != std::errc() || seconds < 0) return std::nullopt;
    return std::chrono::milliseconds(std::min<long long>(seconds, 60) * 1000);
}

std::string truncate_body(const std::string& body) {
    constexpr std::size_t kMax = 512;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

}  // namespace

Response post_json(const Endpoint& endpoint, const std::string& body,
                   const std::map<std::string, std::string>& headers,
                   const RetryPolicy& policy, const ErrorVocabulary& vocabulary) {
    httplib::Client client(endpoint.origin);
    const auto timeout = policy.timeout;
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                  static_cast<long>((timeout.count() % 1000) * 1000));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                            static_cast<long>((timeout.count() % 1000) * 1000));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                             static_cast<long>((timeout.count() % 1000) * 1000));

    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);

    for (int retry = 0;; ++retry) {
        const bool can_retry = retry < policy.max_retries;
        auto result = client.Post(endpoint.path, hdrs, body, "application/json");

        if (!result) {
            if (can_retry) {
                std::this_thread::sleep_for(backoff(policy, retry));
                continue;
            }
            throw HttpError(vocabulary.transport, 0,
                            "transport failure calling " + endpoint.origin + endpoint.path +
                                ": " + httplib::to_string(result.error()) + " (after " +
                                std::to_string(retry) + " retries)");
        }

        const int status = result->status;
        if (status >= 200 && status < 300) {
            Response r;
            r.status = status;
            r.body = result->body;
            for (const auto& [k, v] : result->headers) r.headers[text::ascii_lower(k)] = v;
            return r;
        }
        if (status == 429) {
            if (can_retry) {
                std::this_thread::sleep_for(retry_after(*result).value_or(backoff(policy, retry)));
                continue;
            }
            throw HttpError(vocabulary.rate_limited, status,
                            "rate limited by " + endpoint.origin + " (HTTP 429 after " +
                                std::to_string(retry) + " retries)");
        }
        if (status >= 500) {
            if (can_retry) {
                std::this_thread::sleep_for(backoff(policy, retry));
                continue;
            }
            throw HttpError(vocabulary.transport, status,
                            "server error from " + endpoint.origin + ": HTTP " +
                                std::to_string(status) + ": " + truncate_body(result->body));
        }
        throw HttpError(vocabulary.refusal, status,
                        "request refused by " + endpoint.origin + ": HTTP " +
                            std::to_string(status) + ": " + truncate_body(result->body));
    }
}

RateLimiter::RateLimiter(double requests_per_second) {
    if (requests_per_second <= 0.0) {
        interval_ = std::chrono::steady_clock::duration::zero();
    } else {
        interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / requests_per_second));
    }
}

void RateLimiter::acquire() {
    if (interval_ == std::chrono::steady_clock::duration::zero()) return;
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_);
        next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

}  // namespace stereocrawl::http
