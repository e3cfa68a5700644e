#include <algorithm>
#include <numeric>
#include <set>

#include "stereocrawl/crawler.hpp"
#include "stereocrawl/text.hpp"

namespace stereocrawl {

void InContextPool::add(std::span<const Triple> triples) {
    for (const auto& t : triples) {
        const std::string key = text::normalize_key(t.predicate);
        ++counts_[key];
        surface_.try_emplace(key, std::string(text::trim(t.predicate)));
        triples_.push_back(t);
    }
}

namespace {

/// Indices of pool triples grouped by subject then predicate key.
struct PoolIndex {
    std::vector<std::string> subjects;    // distinct, first-appearance order
    std::vector<std::string> predicates;  // distinct keys, first-appearance order
    // cell[s][p] = triple indices with subject s and predicate p
    std::vector<std::map<std::size_t, std::vector<std::size_t>>> cell;

    explicit PoolIndex(const std::vector<Triple>& triples) {
        std::map<std::string, std::size_t> s_index;
        std::map<std::string, std::size_t> p_index;
        for (std::size_t i = 0; i < triples.size(); ++i) {
            auto [si, s_new] = s_index.try_emplace(triples[i].subject, subjects.size());
            if (s_new) {
                subjects.push_back(triples[i].subject);
                cell.emplace_back();
            }
            const std::string key = text::normalize_key(triples[i].predicate);
            auto [pi, p_new] = p_index.try_emplace(key, predicates.size());
            if (p_new) predicates.push_back(key);
            cell[si->second][pi->second].push_back(i);
        }
    }
};

/// Kuhn's augmenting-path matching over a shuffled subject order, stopping at
/// `want` matched subjects. Returns (subject, predicate) pairs.
std::vector<std::pair<std::size_t, std::size_t>> match_subjects(
    const PoolIndex& idx, const std::vector<std::size_t>& subject_order, std::size_t want,
    Rng& rng) {
    std::vector<std::vector<std::size_t>> adj(idx.subjects.size());
    for (std::size_t s : subject_order) {
        for (const auto& [p, members] : idx.cell[s]) adj[s].push_back(p);
        rng.shuffle(std::span<std::size_t>(adj[s]));
    }
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> owner(idx.predicates.size(), kNone);
    std::vector<char> visited;

    std::function<bool(std::size_t)> augment = [&](std::size_t s) {
        for (std::size_t p : adj[s]) {
            if (visited[p]) continue;
            visited[p] = 1;
            if (owner[p] == kNone || augment(owner[p])) {
                owner[p] = s;
                return true;
            }
        }
        return false;
    };

    std::size_t matched = 0;
    for (std::size_t s : subject_order) {
        if (matched == want) break;
        visited.assign(idx.predicates.size(), 0);
        if (augment(s)) ++matched;
    }

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t s : subject_order) {
        for (std::size_t p = 0; p < owner.size(); ++p) {
            if (owner[p] == s) pairs.emplace_back(s, p);
        }
    }
    return pairs;
}

}  // namespace

std::vector<Triple> sample_for_predicate_diversity(const InContextPool& pool,
                                                   std::string_view query_subject, std::size_t n,
                                                   Rng& rng) {
    if (n == 0) throw Error(ErrorCode::InvalidRequest, "need at least one in-context example");
    const PoolIndex idx(pool.triples());

    std::vector<std::size_t> others;
    std::vector<std::size_t> everyone(idx.subjects.size());
    std::iota(everyone.begin(), everyone.end(), std::size_t{0});
    for (std::size_t s : everyone) {
        if (idx.subjects[s] != query_subject) others.push_back(s);
    }
    rng.shuffle(std::span<std::size_t>(others));
    rng.shuffle(std::span<std::size_t>(everyone));

    auto pairs = match_subjects(idx, others, n, rng);
    if (pairs.size() < n && others.size() < everyone.size()) {
        pairs = match_subjects(idx, everyone, n, rng);
    }
    if (pairs.size() < n) {
        throw Error(ErrorCode::InsufficientPool,
                    "pool cannot supply " + std::to_string(n) +
                        " examples with distinct subjects and predicates");
    }

    std::vector<Triple> out;
    out.reserve(n);
    for (const auto& [s, p] : pairs) {
        const auto& members = idx.cell[s].at(p);
        out.push_back(pool.triples()[members[rng.index(members.size())]]);
    }
    return out;
}

std::string sample_predicate_inverse_frequency(const InContextPool& pool, Rng& rng) {
    const auto& counts = pool.predicate_counts();
    if (counts.empty()) throw Error(ErrorCode::EmptyPool, "in-context pool is empty");
    double total = 0.0;
    for (const auto& [key, c] : counts) total += 1.0 / static_cast<double>(c);
    double u = rng.uniform() * total;
    for (const auto& [key, c] : counts) {
        u -= 1.0 / static_cast<double>(c);
        if (u < 0.0) return pool.surface(key);
    }
    return pool.surface(counts.rbegin()->first);
}

ObjectDiversitySample sample_for_object_diversity(const InContextPool& pool,
                                                  std::string_view query_subject,
                                                  std::string_view predicate, std::size_t n,
                                                  Rng& rng) {
    if (n == 0) throw Error(ErrorCode::InvalidRequest, "need at least one in-context example");
    const PoolIndex idx(pool.triples());
    if (idx.subjects.size() < n) {
        throw Error(ErrorCode::InsufficientPool,
                    "pool has " + std::to_string(idx.subjects.size()) + " subjects, need " +
                        std::to_string(n));
    }
    const auto key_it = std::find(idx.predicates.begin(), idx.predicates.end(),
                                  text::normalize_key(predicate));
    const std::size_t pkey = static_cast<std::size_t>(key_it - idx.predicates.begin());

    // Subjects in preference tiers: matching predicate before query subject
    // exclusion, both before relaxing the predicate.
    std::vector<std::size_t> tiers[4];
    for (std::size_t s = 0; s < idx.subjects.size(); ++s) {
        const bool matches = idx.cell[s].count(pkey) > 0;
        const bool is_query = idx.subjects[s] == query_subject;
        tiers[(matches ? 0 : 2) + (is_query ? 1 : 0)].push_back(s);
    }

    ObjectDiversitySample out;
    for (int tier = 0; tier < 4 && out.examples.size() < n; ++tier) {
        auto& subjects = tiers[tier];
        rng.shuffle(std::span<std::size_t>(subjects));
        for (std::size_t s : subjects) {
            if (out.examples.size() == n) break;
            std::vector<std::size_t> members;
            if (tier < 2) {
                members = idx.cell[s].at(pkey);
            } else {
                for (const auto& [p, m] : idx.cell[s]) members.insert(members.end(), m.begin(), m.end());
                ++out.relaxed;
            }
            out.examples.push_back(pool.triples()[members[rng.index(members.size())]]);
        }
    }
    return out;
}

}  // namespace stereocrawl
