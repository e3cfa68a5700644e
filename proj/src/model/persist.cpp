#include "stereocrawl/config_json.hpp"
#include "stereocrawl/error.hpp"
#include "stereocrawl/model.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace stereocrawl {

namespace {

using nlohmann::json;

constexpr std::string_view kTripleFields[] = {
    "class",     "subject",        "predicate",           "object",         "iteration",
    "strategy",  "augmented_init", "augmented_expansion", "raw_completion", "prompt_id"};

std::string dump_line(const ordered_json& j) {
    // Invalid UTF-8 from a backend is replaced rather than aborting a crawl.
    return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

template <typename T>
T field(const json& j, std::string_view key, std::size_t line) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw MalformedRecordError(line, "missing field \"" + std::string(key) + "\"");
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw MalformedRecordError(line, "field \"" + std::string(key) + "\" has the wrong type");
    }
}

}  // namespace

ordered_json crawl_config_to_json(const CrawlConfig& c) {
    ordered_json j;
    j["init_per_template"] = c.init_per_template;
    j["init_templates"] = c.init_templates;
    j["iterations"] = c.iterations;
    j["incontext_samples"] = c.incontext_samples ? ordered_json(*c.incontext_samples)
                                                 : ordered_json(nullptr);
    j["executions_per_strategy"] = c.executions_per_strategy;
    j["temperature"] = c.temperature;
    j["augment_init"] = c.augment_init;
    j["augment_expansion"] = c.augment_expansion;
    j["prepend_text"] = c.prepend_text;
    j["max_retries"] = c.max_retries;
    j["rng_seed"] = c.rng_seed;
    return j;
}

void apply_crawl_config_json(const json& j, CrawlConfig& c) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "crawl config must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        try {
            if (key == "init_per_template") c.init_per_template = v.get<int>();
            else if (key == "init_templates") c.init_templates = v.get<std::vector<std::string>>();
            else if (key == "iterations") c.iterations = v.get<int>();
            else if (key == "incontext_samples") {
                if (v.is_null()) c.incontext_samples.reset();
                else c.incontext_samples = v.get<int>();
            } else if (key == "executions_per_strategy") c.executions_per_strategy = v.get<int>();
            else if (key == "temperature") c.temperature = v.get<double>();
            else if (key == "augment_init") c.augment_init = v.get<bool>();
            else if (key == "augment_expansion") c.augment_expansion = v.get<bool>();
            else if (key == "prepend_text") c.prepend_text = v.get<std::string>();
            else if (key == "max_retries") c.max_retries = v.get<int>();
            else if (key == "rng_seed") c.rng_seed = v.get<std::uint64_t>();
            else throw Error(ErrorCode::InvalidConfig, "unknown crawl config key \"" + key + "\"");
        } catch (const json::exception&) {
            throw Error(ErrorCode::InvalidConfig, "crawl config key \"" + key + "\" has the wrong type");
        }
    }
}

std::string serialize_header(const KnowledgeGraph& graph) {
    ordered_json j;
    j["schema"] = kGraphSchema;
    j["version"] = kGraphSchemaVersion;
    j["class"] = graph.protected_class();
    j["seeds"] = graph.seeds();
    j["config"] = crawl_config_to_json(graph.config());
    return dump_line(j);
}

std::string serialize_triple(const std::string& protected_class, const Triple& t) {
    ordered_json j;
    j["class"] = protected_class;
    j["subject"] = t.subject;
    j["predicate"] = t.predicate;
    j["object"] = t.object;
    j["iteration"] = t.iteration;
    j["strategy"] = to_string(t.strategy);
    j["augmented_init"] = t.augmented_init;
    j["augmented_expansion"] = t.augmented_expansion;
    j["raw_completion"] = t.raw_completion;
    j["prompt_id"] = t.prompt_id;
    return dump_line(j);
}

std::string serialize_graph(const KnowledgeGraph& graph) {
    std::string out = serialize_header(graph);
    for (const auto& t : graph.triples()) out += serialize_triple(graph.protected_class(), t);
    return out;
}

KnowledgeGraph parse_graph(std::string_view bytes) {
    if (bytes.empty()) throw MalformedRecordError(1, "empty stream, expected a header record");

    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::optional<KnowledgeGraph> graph;

    while (pos < bytes.size()) {
        ++line_no;
        const std::size_t end = bytes.find('\n', pos);
        if (end == std::string_view::npos) {
            throw MalformedRecordError(line_no, "truncated record (no terminating newline)");
        }
        std::string_view line = bytes.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw MalformedRecordError(line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) throw MalformedRecordError(line_no, "record is not an object");

        if (!graph) {
            const auto schema = field<std::string>(j, "schema", line_no);
            if (schema != kGraphSchema) {
                throw MalformedRecordError(line_no, "unexpected schema \"" + schema + "\"");
            }
            const int version = field<int>(j, "version", line_no);
            if (version != kGraphSchemaVersion) {
                throw Error(ErrorCode::SchemaVersionMismatch,
                            "graph schema version " + std::to_string(version) +
                                " is not supported (expected " +
                                std::to_string(kGraphSchemaVersion) + ")");
            }
            CrawlConfig config;
            try {
                apply_crawl_config_json(field<json>(j, "config", line_no), config);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::MalformedRecord) throw;
                throw MalformedRecordError(line_no, e.what());
            }
            try {
                graph.emplace(field<std::string>(j, "class", line_no),
                              field<std::vector<std::string>>(j, "seeds", line_no),
                              std::move(config));
            } catch (const MalformedRecordError&) {
                throw;
            } catch (const Error& e) {
                throw MalformedRecordError(line_no, e.what());
            }
            continue;
        }

        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (auto f : kTripleFields) known = known || it.key() == f;
            if (!known) throw MalformedRecordError(line_no, "unknown field \"" + it.key() + "\"");
        }
        if (field<std::string>(j, "class", line_no) != graph->protected_class()) {
            throw MalformedRecordError(line_no, "triple class does not match the header");
        }
        Triple t;
        t.subject = field<std::string>(j, "subject", line_no);
        t.predicate = field<std::string>(j, "predicate", line_no);
        t.object = field<std::string>(j, "object", line_no);
        t.iteration = field<int>(j, "iteration", line_no);
        const auto tag = field<std::string>(j, "strategy", line_no);
        const auto strategy = strategy_from_string(tag);
        if (!strategy) throw MalformedRecordError(line_no, "unknown strategy \"" + tag + "\"");
        t.strategy = *strategy;
        t.augmented_init = field<bool>(j, "augmented_init", line_no);
        t.augmented_expansion = field<bool>(j, "augmented_expansion", line_no);
        t.raw_completion = field<std::string>(j, "raw_completion", line_no);
        t.prompt_id = field<std::string>(j, "prompt_id", line_no);
        try {
            graph->add(std::move(t));
        } catch (const Error& e) {
            throw MalformedRecordError(line_no, e.what());
        }
    }
    if (!graph) throw MalformedRecordError(1, "missing header record");
    return std::move(*graph);
}

KnowledgeGraph read_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open graph file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph(buf.str());
}

void write_graph_file(const std::string& path, const KnowledgeGraph& graph) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write graph file " + path);
    out << serialize_graph(graph);
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

// ---------------------------------------------------------------------------

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string export_dot(const KnowledgeGraph& graph) {
    // Nodes are emitted in order of first appearance; subjects and objects
    // share one namespace.
    std::vector<std::string> order;
    std::map<std::string, bool> is_seed_node;
    auto touch = [&](const std::string& name, bool seed) {
        auto [it, inserted] = is_seed_node.emplace(name, seed);
        if (inserted) order.push_back(name);
        else it->second = it->second || seed;
    };
    for (const auto& t : graph.triples()) {
        touch(t.subject, true);
        touch(t.object, graph.has_seed(t.object));
    }

    std::ostringstream out;
    out << "digraph " << dot_quote(graph.protected_class().empty() ? "G" : graph.protected_class())
        << " {\n";
    out << "  node [shape=ellipse];\n";
    for (const auto& name : order) {
        out << "  " << dot_quote(name);
        if (is_seed_node[name]) out << " [role=\"seed\", style=filled, fillcolor=lightblue]";
        else out << " [role=\"object\"]";
        out << ";\n";
    }
    for (const auto& t : graph.triples()) {
        out << "  " << dot_quote(t.subject) << " -> " << dot_quote(t.object)
            << " [label=" << dot_quote(t.predicate) << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace stereocrawl
