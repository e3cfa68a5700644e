#include "json.hpp"
#include "stereocrawl/crawler.hpp"
#include "stereocrawl/text.hpp"
#include "detail.hpp"

namespace stereocrawl {

std::string render_init_prompt(std::string_view subject, std::string_view predicate, bool augment,
                               std::string_view prepend_text) {
    std::string out;
    if (augment && !text::trim(prepend_text).empty()) {
        out.append(text::trim(prepend_text)).push_back(' ');
    }
    out.append(text::trim(subject)).push_back(' ');
    out.append(text::trim(predicate));
    return out;
}

std::string render_expansion_prompt(std::span<const Triple> examples,
                                    std::string_view query_subject, ExpansionMode mode,
                                    const std::optional<std::string>& query_predicate,
                                    bool augment) {
    if (examples.empty()) throw Error(ErrorCode::InvalidRequest, "expansion prompt needs examples");
    if ((mode == ExpansionMode::ObjectDiversity) != query_predicate.has_value()) {
        throw Error(ErrorCode::InvalidRequest,
                    "a query predicate is required for, and only for, object diversity");
    }
    std::string out;
    if (augment) out.append(kOffensivePrefix);
    for (const auto& t : examples) {
        out.append("Q: ").append(t.subject).append(" # ").append(t.predicate);
        out.append(" A: ").append(t.object).push_back('\n');
    }
    out.append("Q: ").append(query_subject).append(" #");
    if (mode == ExpansionMode::ObjectDiversity) out.append(" ").append(*query_predicate).append(" A:");
    return out;
}

namespace {

constexpr std::string_view kAnswer = " A: ";

std::string_view first_line(std::string_view s) {
    const auto nl = s.find('\n');
    return nl == std::string_view::npos ? s : s.substr(0, nl);
}

}  // namespace

namespace detail {

/// Lenient split used by the crawler: nullopt only when the separator is
/// missing; empty fields are left for the filter to reject.
std::optional<ParsedCompletion> split_expansion(std::string_view text, ExpansionMode mode,
                                                std::string_view query_predicate) {
    if (mode == ExpansionMode::ObjectDiversity) {
        return ParsedCompletion{std::string(text::trim(query_predicate)),
                                std::string(text::trim(first_line(text::trim(text))))};
    }
    const std::string_view line = first_line(text);
    const auto sep = line.find(kAnswer);
    if (sep != std::string_view::npos) {
        return ParsedCompletion{std::string(text::trim(line.substr(0, sep))),
                                std::string(text::trim(line.substr(sep + kAnswer.size())))};
    }
    // "are A:" with the trailing space stripped by the engine.
    const std::string_view trimmed = text::trim(line);
    if (trimmed.size() >= 3 && trimmed.substr(trimmed.size() - 3) == " A:") {
        return ParsedCompletion{std::string(text::trim(trimmed.substr(0, trimmed.size() - 3))), ""};
    }
    if (trimmed == "A:") return ParsedCompletion{"", ""};
    return std::nullopt;
}

}  // namespace detail

ParsedCompletion parse_expansion_completion(std::string_view text, ExpansionMode mode,
                                            std::string_view query_predicate) {
    auto parsed = detail::split_expansion(text, mode, query_predicate);
    if (!parsed) throw Error(ErrorCode::ParseFailure, "completion has no \" A: \" separator");
    if (parsed->predicate.empty()) throw Error(ErrorCode::ParseFailure, "empty predicate");
    if (parsed->object.empty()) throw Error(ErrorCode::ParseFailure, "empty object");
    return std::move(*parsed);
}

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::EmptyField: return "empty_field";
        case RejectReason::RefusalPhrase: return "refusal_phrase";
        case RejectReason::ParseFailure: return "parse_failure";
    }
    return "unknown";
}

std::optional<RejectReason> filter_candidate(std::string_view predicate, std::string_view object,
                                             std::string_view raw) {
    if (text::trim(predicate).empty() || text::trim(object).empty()) {
        return RejectReason::EmptyField;
    }
    if (text::contains_word(raw, "This")) return RejectReason::RefusalPhrase;
    return std::nullopt;
}

std::string serialize_audit_record(const AuditRecord& r) {
    nlohmann::ordered_json j;
    j["prompt_id"] = r.prompt_id;
    j["iteration"] = r.iteration;
    j["strategy"] = to_string(r.strategy);
    j["subject"] = r.subject;
    j["prompt"] = r.prompt;
    j["raw_completion"] = r.raw_completion;
    j["accepted"] = r.accepted;
    j["reject_reason"] = r.reject_reason ? nlohmann::ordered_json(to_string(*r.reject_reason))
                                         : nlohmann::ordered_json(nullptr);
    j["n_examples"] = r.n_examples;
    j["relaxed_examples"] = r.relaxed_examples;
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

}  // namespace stereocrawl
