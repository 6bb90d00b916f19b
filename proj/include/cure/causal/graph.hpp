#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cure/error.hpp"

namespace cure::causal {

enum class Mark { tail, arrow, circle };

inline char mark_symbol(Mark m) { return m == Mark::tail ? '-' : m == Mark::arrow ? '>' : 'o'; }

/// Undirected adjacency over indexed vertices.
struct Skeleton {
    std::vector<std::string> vertices;
    std::vector<std::vector<bool>> adjacent;
    /// Conditioning set that removed each edge, keyed by (lower, higher) index.
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> sepsets;
    /// Votes over unshielded triples i–k–j (i < j), keyed (i, k, j): how many
    /// neighbourhood subsets separate i and j, and how many of those contain k.
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>> triple_votes;
    std::size_t tests_run = 0;

    explicit Skeleton(std::vector<std::string> names = {})
        : vertices(std::move(names)), adjacent(vertices.size(), std::vector<bool>(vertices.size(), false)) {}

    std::size_t size() const { return vertices.size(); }
    bool has_edge(std::size_t a, std::size_t b) const { return adjacent[a][b]; }
    void set_edge(std::size_t a, std::size_t b, bool on) { adjacent[a][b] = adjacent[b][a] = on; }
    std::vector<std::size_t> neighbors(std::size_t a) const {
        std::vector<std::size_t> out;
        for (std::size_t b = 0; b < size(); ++b)
            if (adjacent[a][b]) out.push_back(b);
        return out;
    }
    std::size_t edge_count() const {
        std::size_t n = 0;
        for (std::size_t a = 0; a < size(); ++a)
            for (std::size_t b = a + 1; b < size(); ++b) n += adjacent[a][b];
        return n;
    }
    const std::vector<std::size_t>* sepset(std::size_t a, std::size_t b) const {
        auto it = sepsets.find({std::min(a, b), std::max(a, b)});
        return it == sepsets.end() ? nullptr : &it->second;
    }
};

/// Partial ancestral graph. mark[a][b] is the endpoint mark at b on edge a–b.
class Pag {
public:
    explicit Pag(const Skeleton& s) : vertices_(s.vertices), sepsets_(s.sepsets) {
        const auto n = s.size();
        marks_.assign(n, std::vector<std::optional<Mark>>(n));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (a != b && s.has_edge(a, b)) marks_[a][b] = Mark::circle;
    }

    const std::vector<std::string>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    bool adjacent(std::size_t a, std::size_t b) const { return marks_[a][b].has_value(); }
    /// Mark at `at` on the edge between `from` and `at`.
    Mark mark(std::size_t from, std::size_t at) const {
        if (!marks_[from][at]) throw UsageError("no edge between " + vertices_[from] + " and " + vertices_[at]);
        return *marks_[from][at];
    }
    void set_mark(std::size_t from, std::size_t at, Mark m) {
        if (!marks_[from][at]) throw UsageError("no edge between " + vertices_[from] + " and " + vertices_[at]);
        marks_[from][at] = m;
    }
    std::size_t index_of(const std::string& name) const {
        auto it = std::find(vertices_.begin(), vertices_.end(), name);
        if (it == vertices_.end()) throw UsageError("unknown vertex '" + name + "'");
        return static_cast<std::size_t>(it - vertices_.begin());
    }
    const std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>>& sepsets() const { return sepsets_; }

    /// Edge list as (a, b, mark at a, mark at b) with a < b.
    std::vector<std::tuple<std::size_t, std::size_t, Mark, Mark>> edges() const {
        std::vector<std::tuple<std::size_t, std::size_t, Mark, Mark>> out;
        for (std::size_t a = 0; a < size(); ++a)
            for (std::size_t b = a + 1; b < size(); ++b)
                if (adjacent(a, b)) out.emplace_back(a, b, mark(b, a), mark(a, b));
        return out;
    }

private:
    std::vector<std::string> vertices_;
    std::vector<std::vector<std::optional<Mark>>> marks_;
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> sepsets_;
};

/// Acyclic directed mixed graph: directed edges for causation, bidirected
/// edges for latent confounding.
class Admg {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    Admg() = default;
    explicit Admg(std::vector<std::string> vertices) : vertices_(std::move(vertices)) {
        std::set<std::string> seen(vertices_.begin(), vertices_.end());
        if (seen.size() != vertices_.size()) throw DataError("duplicate vertex names");
    }

    const std::vector<std::string>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    std::size_t index_of(const std::string& name) const {
        auto it = std::find(vertices_.begin(), vertices_.end(), name);
        if (it == vertices_.end()) throw UsageError("unknown vertex '" + name + "'");
        return static_cast<std::size_t>(it - vertices_.begin());
    }
    bool has_vertex(const std::string& name) const { return std::find(vertices_.begin(), vertices_.end(), name) != vertices_.end(); }

    void add_directed(std::size_t from, std::size_t to) {
        if (from == to) throw UsageError("self-loop on '" + vertices_.at(from) + "'");
        directed_.insert({from, to});
    }
    void add_directed(const std::string& from, const std::string& to) { add_directed(index_of(from), index_of(to)); }
    void add_bidirected(std::size_t a, std::size_t b) {
        if (a == b) throw UsageError("self-loop on '" + vertices_.at(a) + "'");
        bidirected_.insert({std::min(a, b), std::max(a, b)});
    }
    void add_bidirected(const std::string& a, const std::string& b) { add_bidirected(index_of(a), index_of(b)); }
    void remove_directed(std::size_t from, std::size_t to) { directed_.erase({from, to}); }

    const std::set<Edge>& directed() const { return directed_; }
    const std::set<Edge>& bidirected() const { return bidirected_; }

    bool has_directed(std::size_t from, std::size_t to) const { return directed_.count({from, to}) != 0; }
    bool adjacent(std::size_t a, std::size_t b) const {
        return has_directed(a, b) || has_directed(b, a) || bidirected_.count({std::min(a, b), std::max(a, b)});
    }
    std::vector<std::size_t> parents(std::size_t v) const {
        std::vector<std::size_t> out;
        for (const auto& [a, b] : directed_)
            if (b == v) out.push_back(a);
        return out;
    }
    std::vector<std::size_t> children(std::size_t v) const {
        std::vector<std::size_t> out;
        for (const auto& [a, b] : directed_)
            if (a == v) out.push_back(b);
        return out;
    }

    /// A directed cycle as a vertex sequence (first vertex repeated implicitly), or empty.
    std::vector<std::size_t> find_cycle() const {
        const auto n = size();
        std::vector<int> state(n, 0);
        std::vector<std::size_t> stack;
        std::vector<std::size_t> cycle;
        std::function<bool(std::size_t)> visit = [&](std::size_t v) {
            state[v] = 1;
            stack.push_back(v);
            for (auto w : children(v)) {
                if (state[w] == 1) {
                    auto it = std::find(stack.begin(), stack.end(), w);
                    cycle.assign(it, stack.end());
                    return true;
                }
                if (state[w] == 0 && visit(w)) return true;
            }
            stack.pop_back();
            state[v] = 2;
            return false;
        };
        for (std::size_t v = 0; v < n; ++v)
            if (state[v] == 0 && visit(v)) return cycle;
        return {};
    }
    bool is_acyclic() const { return find_cycle().empty(); }

    /// Square 0/1 matrix in vertex order; bidirected edges set both entries.
    std::vector<std::vector<int>> adjacency_matrix() const {
        std::vector<std::vector<int>> m(size(), std::vector<int>(size(), 0));
        for (const auto& [a, b] : directed_) m[a][b] = 1;
        for (const auto& [a, b] : bidirected_) m[a][b] = m[b][a] = 1;
        return m;
    }

    nlohmann::json to_json(const nlohmann::json& meta = nlohmann::json::object()) const {
        nlohmann::json j;
        j["vertices"] = vertices_;
        j["directed"] = nlohmann::json::array();
        for (const auto& [a, b] : directed_) j["directed"].push_back({vertices_[a], vertices_[b]});
        j["bidirected"] = nlohmann::json::array();
        for (const auto& [a, b] : bidirected_) j["bidirected"].push_back({vertices_[a], vertices_[b]});
        j["meta"] = meta;
        return j;
    }

    static Admg from_json(const nlohmann::json& j) {
        try {
            Admg g(j.at("vertices").get<std::vector<std::string>>());
            for (const auto& e : j.at("directed")) g.add_directed(e.at(0).get<std::string>(), e.at(1).get<std::string>());
            for (const auto& e : j.at("bidirected")) g.add_bidirected(e.at(0).get<std::string>(), e.at(1).get<std::string>());
            if (!g.is_acyclic()) throw DataError("directed part of the model contains a cycle");
            return g;
        } catch (const nlohmann::json::exception& e) {
            throw DataError(std::string("malformed model JSON: ") + e.what());
        } catch (const UsageError& e) {
            throw DataError(std::string("malformed model JSON: ") + e.what());
        }
    }

    friend bool operator==(const Admg&, const Admg&) = default;

private:
    std::vector<std::string> vertices_;
    std::set<Edge> directed_;
    std::set<Edge> bidirected_;
};

inline std::vector<std::vector<int>> adjacency_matrix(const Admg& g) { return g.adjacency_matrix(); }

/// Edge identity used for comparisons: "a->b" or "a<->b" with sorted endpoints.
struct EdgeKey {
    std::string from;
    std::string to;
    bool bidirected = false;
    friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

struct GraphOverlap {
    std::set<EdgeKey> common;
    std::set<EdgeKey> only_a;
    std::set<EdgeKey> only_b;
};

inline std::set<EdgeKey> edge_keys(const Admg& g) {
    std::set<EdgeKey> out;
    const auto& v = g.vertices();
    for (const auto& [a, b] : g.directed()) out.insert({v[a], v[b], false});
    for (const auto& [a, b] : g.bidirected()) out.insert({std::min(v[a], v[b]), std::max(v[a], v[b]), true});
    return out;
}

inline GraphOverlap graph_overlap(const Admg& a, const Admg& b) {
    std::set<std::string> va(a.vertices().begin(), a.vertices().end());
    std::set<std::string> vb(b.vertices().begin(), b.vertices().end());
    if (va != vb) throw UsageError("graph overlap needs identical vertex sets");
    const auto ea = edge_keys(a);
    const auto eb = edge_keys(b);
    GraphOverlap out;
    for (const auto& e : ea) (eb.count(e) ? out.common : out.only_a).insert(e);
    for (const auto& e : eb)
        if (!ea.count(e)) out.only_b.insert(e);
    return out;
}

/// Unordered vertex pairs joined by any edge.
inline std::set<std::pair<std::string, std::string>> adjacencies(const Admg& g) {
    std::set<std::pair<std::string, std::string>> out;
    const auto& v = g.vertices();
    auto add = [&](std::size_t a, std::size_t b) { out.insert({std::min(v[a], v[b]), std::max(v[a], v[b])}); };
    for (const auto& [a, b] : g.directed()) add(a, b);
    for (const auto& [a, b] : g.bidirected()) add(a, b);
    return out;
}

} // namespace cure::causal
