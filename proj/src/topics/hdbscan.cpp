#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stereocrawl/error.hpp"
#include "stereocrawl/topics.hpp"

namespace stereocrawl {

std::size_t min_cluster_size(std::size_t total_triples) {
    return std::max<std::size_t>(2, total_triples / 40);
}

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return std::sqrt(s);
}

struct Merge {
    std::size_t left;
    std::size_t right;
    double distance;
    std::size_t size;
};

/// Distance to the k-th nearest point, counting the point itself.
std::vector<double> core_distances(const std::vector<const std::vector<double>*>& pts, std::size_t k) {
    const std::size_t n = pts.size();
    k = std::min(k, n);
    std::vector<double> core(n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row[j] = distance(*pts[i], *pts[j]);
        std::nth_element(row.begin(), row.begin() + static_cast<long>(k - 1), row.end());
        core[i] = row[k - 1];
    }
    return core;
}

/// Prim's algorithm on the dense mutual-reachability graph, then the edges
/// sorted into a single-linkage merge list.
std::vector<Merge> single_linkage(const std::vector<const std::vector<double>*>& pts,
                                  const std::vector<double>& core) {
    const std::size_t n = pts.size();
    struct Edge {
        std::size_t a;
        std::size_t b;
        double w;
    };
    std::vector<Edge> edges;
    edges.reserve(n - 1);
    std::vector<char> in_tree(n, 0);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> from(n, 0);
    std::size_t current = 0;
    in_tree[0] = 1;
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t next = n;
        double next_w = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            const double w = std::max({core[current], core[j], distance(*pts[current], *pts[j])});
            if (w < best[j]) {
                best[j] = w;
                from[j] = current;
            }
            if (best[j] < next_w) {
                next_w = best[j];
                next = j;
            }
        }
        in_tree[next] = 1;
        edges.push_back({from[next], next, next_w});
        current = next;
    }
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.w < y.w; });

    // Union-find where each set remembers its current tree node id.
    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::vector<std::size_t> size(2 * n - 1, 1);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::vector<Merge> merges;
    merges.reserve(n - 1);
    std::size_t next_id = n;
    for (const auto& e : edges) {
        const std::size_t ra = find(e.a);
        const std::size_t rb = find(e.b);
        const std::size_t node = next_id++;
        merges.push_back({ra, rb, e.w, size[ra] + size[rb]});
        parent[ra] = node;
        parent[rb] = node;
        size[node] = size[ra] + size[rb];
    }
    return merges;
}

struct CondensedEdge {
    std::size_t parent;  // cluster label
    std::size_t child;   // point index (< n) or cluster label (>= n)
    double lambda;
    std::size_t child_size;
};

std::vector<CondensedEdge> condense(const std::vector<Merge>& merges, std::size_t n,
                                    std::size_t min_size) {
    double max_finite = 0.0;
    for (const auto& m : merges) {
        if (m.distance > 0.0) max_finite = std::max(max_finite, 1.0 / m.distance);
    }
    const double lambda_cap = max_finite > 0.0 ? max_finite * 1e3 : 1.0;
    auto lambda_of = [&](double d) { return d > 0.0 ? std::min(1.0 / d, lambda_cap) : lambda_cap; };
    auto node_size = [&](std::size_t node) { return node < n ? 1 : merges[node - n].size; };

    std::vector<CondensedEdge> out;
    const std::size_t root = 2 * n - 2;
    std::vector<std::size_t> relabel(2 * n - 1, 0);
    relabel[root] = n;
    std::size_t next_label = n + 1;

    auto emit_points = [&](std::size_t node, std::size_t label, double lambda) {
        std::vector<std::size_t> stack{node};
        while (!stack.empty()) {
            const std::size_t x = stack.back();
            stack.pop_back();
            if (x < n) {
                out.push_back({label, x, lambda, 1});
            } else {
                stack.push_back(merges[x - n].right);
                stack.push_back(merges[x - n].left);
            }
        }
    };

    // Breadth-first from the root so parents get labels before children.
    std::vector<std::size_t> queue{root};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::size_t node = queue[qi];
        if (node < n) continue;
        const Merge& m = merges[node - n];
        const double lambda = lambda_of(m.distance);
        const std::size_t label = relabel[node];
        const bool left_big = node_size(m.left) >= min_size;
        const bool right_big = node_size(m.right) >= min_size;
        if (left_big && right_big) {
            for (std::size_t child : {m.left, m.right}) {
                relabel[child] = next_label++;
                out.push_back({label, relabel[child], lambda, node_size(child)});
                queue.push_back(child);
            }
        } else if (!left_big && !right_big) {
            emit_points(m.left, label, lambda);
            emit_points(m.right, label, lambda);
        } else {
            const std::size_t big = left_big ? m.left : m.right;
            const std::size_t small = left_big ? m.right : m.left;
            emit_points(small, label, lambda);
            relabel[big] = label;
            queue.push_back(big);
        }
    }
    return out;
}

/// Cluster labels chosen by excess of mass. The root counts only when it
/// never splits.
std::vector<std::size_t> select_clusters(const std::vector<CondensedEdge>& tree, std::size_t n) {
    std::size_t max_label = n;
    for (const auto& e : tree) max_label = std::max(max_label, std::max(e.parent, e.child));
    const std::size_t count = max_label - n + 1;

    std::vector<double> birth(count, 0.0);
    for (const auto& e : tree) {
        if (e.child >= n) birth[e.child - n] = e.lambda;
    }
    std::vector<double> stability(count, 0.0);
    std::vector<std::vector<std::size_t>> children(count);
    for (const auto& e : tree) {
        stability[e.parent - n] += (e.lambda - birth[e.parent - n]) * static_cast<double>(e.child_size);
        if (e.child >= n) children[e.parent - n].push_back(e.child - n);
    }
    if (children[0].empty()) return {n};

    std::vector<char> selected(count, 1);
    selected[0] = 0;
    std::vector<double> subtree(stability);
    // Children always carry larger labels than their parent.
    for (std::size_t c = count; c-- > 1;) {
        double child_sum = 0.0;
        for (std::size_t k : children[c]) child_sum += subtree[k];
        if (!children[c].empty() && child_sum > stability[c]) {
            selected[c] = 0;
            subtree[c] = child_sum;
        } else {
            subtree[c] = stability[c];
            std::vector<std::size_t> stack(children[c]);
            while (!stack.empty()) {
                const std::size_t k = stack.back();
                stack.pop_back();
                selected[k] = 0;
                stack.insert(stack.end(), children[k].begin(), children[k].end());
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t c = 1; c < count; ++c) {
        if (selected[c]) out.push_back(c + n);
    }
    return out;
}

/// Point labels: the selected cluster above the point in the condensed tree,
/// or -1.
std::vector<long> label_points(const std::vector<CondensedEdge>& tree, std::size_t n,
                               const std::vector<std::size_t>& chosen) {
    std::size_t max_label = n;
    for (const auto& e : tree) max_label = std::max(max_label, std::max(e.parent, e.child));
    std::vector<std::size_t> up(max_label + 1, static_cast<std::size_t>(-1));
    for (const auto& e : tree) up[e.child] = e.parent;
    std::vector<char> is_chosen(max_label + 1, 0);
    for (std::size_t c : chosen) is_chosen[c] = 1;

    std::vector<long> labels(n, -1);
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t x = up[p];
        while (x != static_cast<std::size_t>(-1)) {
            if (is_chosen[x]) {
                labels[p] = static_cast<long>(x);
                break;
            }
            x = up[x];
        }
    }
    return labels;
}

}  // namespace

std::vector<TopicAssignment> cluster(std::span<const std::vector<double>> vectors,
                                     std::size_t min_size) {
    if (min_size < 2) throw Error(ErrorCode::InvalidConfig, "min cluster size must be at least 2");
    if (vectors.size() < min_size) {
        throw Error(ErrorCode::TooFewPoints, std::to_string(vectors.size()) +
                                                 " documents, minimum cluster size is " +
                                                 std::to_string(min_size));
    }
    const std::size_t dim = vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "document vectors differ in dimension");
        }
    }

    std::vector<TopicAssignment> out(vectors.size());
    std::vector<const std::vector<double>*> pts;
    std::vector<std::size_t> original;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        out[i].triple_index = i;
        const bool zero = std::all_of(vectors[i].begin(), vectors[i].end(), [](double x) { return x == 0.0; });
        if (!zero) {
            pts.push_back(&vectors[i]);
            original.push_back(i);
        }
    }
    if (pts.size() < min_size) return out;

    const std::size_t n = pts.size();
    const auto core = core_distances(pts, min_size);
    const auto merges = single_linkage(pts, core);
    const auto tree = condense(merges, n, min_size);
    const auto chosen = select_clusters(tree, n);

    std::vector<long> labels;
    if (chosen.size() == 1 && chosen.front() == n) {
        labels.assign(n, static_cast<long>(n));
    } else {
        labels = label_points(tree, n, chosen);
    }

    // Renumber by descending size, then lowest member index.
    struct Group {
        long label;
        std::size_t size = 0;
        std::size_t first = 0;
    };
    std::vector<Group> groups;
    for (std::size_t p = 0; p < n; ++p) {
        if (labels[p] < 0) continue;
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.label == labels[p]; });
        if (it == groups.end()) {
            groups.push_back({labels[p], 1, p});
        } else {
            ++it->size;
        }
    }
    std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
        if (a.size != b.size) return a.size > b.size;
        return a.first < b.first;
    });
    for (std::size_t p = 0; p < n; ++p) {
        if (labels[p] < 0) continue;
        const auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.label == labels[p]; });
        out[original[p]].topic_id = static_cast<int>(it - groups.begin());
    }
    return out;
}

}  // namespace stereocrawl
