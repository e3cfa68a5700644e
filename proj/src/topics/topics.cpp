#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "stereocrawl/csv.hpp"
#include "stereocrawl/error.hpp"
#include "stereocrawl/parallel.hpp"
#include "stereocrawl/topics.hpp"

namespace stereocrawl {

std::vector<TopicSummary> representative_words(std::span<const TopicAssignment> assignments,
                                               std::span<const std::vector<std::string>> documents,
                                               std::size_t top_n) {
    if (assignments.size() != documents.size()) {
        throw Error(ErrorCode::MisalignedInput, "assignments and documents differ in length");
    }
    std::map<int, std::map<std::string, std::size_t>> tf;
    std::map<int, std::size_t> sizes;
    std::map<std::string, std::size_t> f;
    std::size_t total_tokens = 0;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        const int topic = assignments[i].topic_id;
        if (topic == kNoiseTopic) continue;
        ++sizes[topic];
        auto& counts = tf[topic];
        for (const auto& w : documents[i]) {
            ++counts[w];
            ++f[w];
            ++total_tokens;
        }
    }
    if (sizes.empty()) throw Error(ErrorCode::NoTopics, "every document is noise");
    const double average = static_cast<double>(total_tokens) / static_cast<double>(sizes.size());

    std::vector<TopicSummary> out;
    for (const auto& [topic, size] : sizes) {
        std::vector<std::pair<std::string, double>> scored;
        for (const auto& [w, count] : tf[topic]) {
            scored.emplace_back(w, static_cast<double>(count) *
                                       std::log(1.0 + average / static_cast<double>(f[w])));
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        TopicSummary s;
        s.topic_id = topic;
        s.size = size;
        for (std::size_t k = 0; k < scored.size() && k < top_n; ++k) {
            s.representative_words.push_back(scored[k].first);
            s.scores.push_back(scored[k].second);
        }
        out.push_back(std::move(s));
    }
    return out;
}

TopicDistributions topic_distributions(std::span<const TopicAssignment> assignments,
                                       std::span<const std::string> subjects) {
    if (assignments.size() != subjects.size()) {
        throw Error(ErrorCode::MisalignedInput, "assignments and subjects differ in length");
    }
    std::set<int> topics;
    for (const auto& a : assignments) {
        if (a.topic_id != kNoiseTopic) topics.insert(a.topic_id);
    }

    std::vector<std::string> order;
    std::map<std::string, std::map<int, std::size_t>> counts;
    std::map<int, std::size_t> pooled;
    std::size_t pooled_total = 0;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        auto [it, inserted] = counts.try_emplace(subjects[i]);
        if (inserted) order.push_back(subjects[i]);
        const int topic = assignments[i].topic_id;
        if (topic == kNoiseTopic) continue;
        ++it->second[topic];
        ++pooled[topic];
        ++pooled_total;
    }

    auto normalize = [&](const std::string& subject, const std::map<int, std::size_t>& c) {
        std::size_t total = 0;
        for (const auto& [t, k] : c) total += k;
        if (total == 0) {
            throw Error(ErrorCode::SubjectAllNoise,
                        "every triple about \"" + subject + "\" was left unclustered");
        }
        TopicDistribution d;
        d.subject = subject;
        for (int t : topics) {
            const auto it = c.find(t);
            d.probabilities[t] = it == c.end() ? 0.0
                                               : static_cast<double>(it->second) / static_cast<double>(total);
        }
        return d;
    };

    TopicDistributions out;
    for (const auto& s : order) out.subjects.push_back(normalize(s, counts[s]));
    if (pooled_total == 0) throw Error(ErrorCode::NoTopics, "every document is noise");
    out.reference = normalize(std::string(kReferenceRow), pooled);
    return out;
}

double relative_entropy(const TopicDistribution& p, const TopicDistribution& q) {
    double kl = 0.0;
    for (const auto& [topic, pk] : p.probabilities) {
        if (pk <= 0.0) continue;
        const auto it = q.probabilities.find(topic);
        if (it == q.probabilities.end() || it->second <= 0.0) {
            throw Error(ErrorCode::SupportViolation,
                        "topic " + std::to_string(topic) + " has p > 0 but q = 0 for \"" +
                            p.subject + "\"");
        }
        kl += pk * std::log(pk / it->second);
    }
    return kl;
}

TopicModelResult run_topic_model(const KnowledgeGraph& graph, const EmbeddingTable& table,
                                 const TopicModelOptions& options) {
    if (table.size() == 0 || table.dimension() == 0) {
        throw Error(ErrorCode::InvalidConfig, "the word-vector table is empty");
    }
    const auto& triples = graph.triples();
    TopicModelResult r;
    r.protected_class = graph.protected_class();
    r.min_cluster_size = options.min_cluster_size.value_or(min_cluster_size(std::max<std::size_t>(1, triples.size())));

    r.documents.resize(triples.size());
    std::vector<Embedding> embedded(triples.size());
    parallel_for(triples.size(), options.threads, [&](std::size_t i) {
        r.documents[i] = preprocess(triples[i]);
        embedded[i] = embed(r.documents[i], table);
    });
    std::vector<std::vector<double>> vectors;
    vectors.reserve(triples.size());
    std::size_t oov = 0;
    for (auto& e : embedded) {
        r.oov.push_back(e.oov);
        oov += e.oov;
        vectors.push_back(std::move(e.vector));
    }

    r.assignments = cluster(vectors, r.min_cluster_size);
    r.topics = representative_words(r.assignments, r.documents, options.top_n);

    std::vector<std::string> subjects;
    subjects.reserve(triples.size());
    for (const auto& t : triples) subjects.push_back(t.subject);
    r.distributions = topic_distributions(r.assignments, subjects);
    for (const auto& d : r.distributions.subjects) {
        r.entropies.push_back({d.subject, relative_entropy(d, r.distributions.reference)});
    }

    std::size_t noise = 0;
    for (const auto& a : r.assignments) noise += a.topic_id == kNoiseTopic;
    const double n = static_cast<double>(std::max<std::size_t>(1, triples.size()));
    r.noise_rate = static_cast<double>(noise) / n;
    r.oov_rate = static_cast<double>(oov) / n;
    return r;
}

std::string topic_distribution_csv(const TopicModelResult& r) {
    std::string out = "subject,topic_id,p_k\n";
    auto rows = [&](const TopicDistribution& d) {
        for (const auto& [t, p] : d.probabilities) {
            out += csv::field(d.subject) + ',' + std::to_string(t) + ',' + csv::number(p) + '\n';
        }
    };
    for (const auto& d : r.distributions.subjects) rows(d);
    rows(r.distributions.reference);
    return out;
}

std::string topic_words_csv(const TopicModelResult& r) {
    std::string out = "topic_id,rank,word,score\n";
    for (const auto& t : r.topics) {
        for (std::size_t k = 0; k < t.representative_words.size(); ++k) {
            out += std::to_string(t.topic_id) + ',' + std::to_string(k + 1) + ',' +
                   csv::field(t.representative_words[k]) + ',' + csv::number(t.scores[k]) + '\n';
        }
    }
    return out;
}

std::string entropy_csv(const TopicModelResult& r) {
    std::string out = "subject,relative_entropy\n";
    for (const auto& e : r.entropies) {
        out += csv::field(e.subject) + ',' + csv::number(e.relative_entropy) + '\n';
    }
    return out;
}

std::string topic_meta_json(const TopicModelResult& r, std::string_view vectors_label) {
    nlohmann::ordered_json j;
    j["class"] = r.protected_class;
    j["documents"] = r.assignments.size();
    j["min_cluster_size"] = r.min_cluster_size;
    j["topics"] = r.topics.size();
    j["noise_rate"] = r.noise_rate;
    j["oov_rate"] = r.oov_rate;
    j["vectors"] = std::string(vectors_label);
    j["stopwords"] = std::string(kStopwordListVersion);
    j["distance"] = "euclidean";
    j["log_base"] = "e";
    j["sizes"] = nlohmann::ordered_json::array();
    for (const auto& t : r.topics) j["sizes"].push_back(t.size);
    return j.dump(2) + "\n";
}

}  // namespace stereocrawl
