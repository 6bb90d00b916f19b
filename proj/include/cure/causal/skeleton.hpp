#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cure/causal/ci_test.hpp"
#include "cure/causal/graph.hpp"
#include "cure/data.hpp"

namespace cure::causal {

/// Background knowledge for structure learning.
struct StructuralConstraints {
    /// Exogenous vertices: no edges among them and no arrowheads into them.
    std::set<std::string> sources;
    /// Ordered pairs (u, v) for which u -> v is ruled out.
    std::set<std::pair<std::string, std::string>> forbidden;

    /// Options are jointly independent sources.
    static StructuralConstraints from_roles(const Dataset& ds) {
        StructuralConstraints c;
        for (const auto& name : ds.names_with_role(Role::option)) c.sources.insert(name);
        return c;
    }

    bool is_source(const std::string& v) const { return sources.count(v) != 0; }
    bool forbids_direction(const std::string& u, const std::string& v) const { return is_source(v) || forbidden.count({u, v}); }
    bool forbids_adjacency(const std::string& u, const std::string& v) const {
        return (is_source(u) && is_source(v)) || (forbids_direction(u, v) && forbids_direction(v, u));
    }

    void check(const std::vector<std::string>& vertices) const {
        std::set<std::string> known(vertices.begin(), vertices.end());
        for (const auto& s : sources)
            if (!known.count(s)) throw UsageError("constraint names unknown vertex '" + s + "'");
        for (const auto& [u, v] : forbidden)
            if (!known.count(u) || !known.count(v)) throw UsageError("constraint names unknown vertex pair '" + u + "', '" + v + "'");
    }
};

namespace detail {

/// Calls f on every size-k subset of `pool` in lexicographic order; stops when f returns true.
template <class F>
bool for_each_subset(const std::vector<std::size_t>& pool, std::size_t k, F&& f) {
    if (k > pool.size()) return false;
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    std::vector<std::size_t> subset(k);
    for (;;) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = pool[pick[i]];
        if (f(subset)) return true;
        std::size_t i = k;
        while (i > 0 && pick[i - 1] == pool.size() - k + i - 1) --i;
        if (i == 0) return false;
        ++pick[i - 1];
        for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
}

} // namespace detail

struct SkeletonOptions {
    double alpha = 0.05;
    std::size_t max_cond = 3;
    /// Collect separating-set votes for every unshielded triple.
    bool majority_rule = true;
};

namespace detail {

/// For each unshielded triple, tests every subset (size <= max_cond) of the
/// final neighbourhoods of both ends and counts the separating ones.
inline void vote_triples(Skeleton& g, const Eigen::MatrixXd& corr, std::size_t n, const StructuralConstraints& constraints,
                         const SkeletonOptions& opt) {
    const auto p = g.size();
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
            if (g.has_edge(i, j) || constraints.forbids_adjacency(g.vertices[i], g.vertices[j])) continue;
            std::vector<std::size_t> middle;
            for (std::size_t k = 0; k < p; ++k)
                if (g.has_edge(i, k) && g.has_edge(j, k)) middle.push_back(k);
            if (middle.empty()) continue;
            std::set<std::vector<std::size_t>> separating;
            for (auto [x, y] : {std::pair{i, j}, std::pair{j, i}}) {
                std::vector<std::size_t> pool;
                for (auto v : g.neighbors(x))
                    if (v != y) pool.push_back(v);
                for (std::size_t level = 0; level <= std::min(opt.max_cond, pool.size()); ++level) {
                    for_each_subset(pool, level, [&](const std::vector<std::size_t>& cond) {
                        if (separating.count(cond) || n <= cond.size() + 3) return false;
                        double r = 0.0;
                        try {
                            r = partial_correlation(corr, i, j, cond);
                        } catch (const NumericalError&) {
                            return false;
                        }
                        ++g.tests_run;
                        if (fisher_z_test(r, n, cond.size(), opt.alpha).independent) separating.insert(cond);
                        return false;
                    });
                }
            }
            for (auto k : middle) {
                std::size_t with_k = 0;
                for (const auto& s : separating) with_k += std::find(s.begin(), s.end(), k) != s.end();
                g.triple_votes[{i, k, j}] = {separating.size(), with_k};
            }
        }
    }
}

} // namespace detail

/// Order-independent (stable) PC adjacency search. Starting from the
/// complete graph minus constraint-forbidden pairs, removes x–y once some
/// conditioning set S of the current neighbours of x or y, |S| = 0..max_cond,
/// makes Fisher's z test accept independence. Neighbour sets are frozen per
/// level so the result does not depend on the visiting order.
inline Skeleton learn_skeleton(const Dataset& ds, const std::vector<std::string>& vertices,
                               const StructuralConstraints& constraints, const SkeletonOptions& opt = {}) {
    constraints.check(vertices);
    Skeleton g(vertices);
    const auto p = vertices.size();
    if (p < 2) return g;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b)
            if (!constraints.forbids_adjacency(vertices[a], vertices[b])) g.set_edge(a, b, true);
            else g.sepsets[{a, b}] = {};

    const auto corr = correlation_matrix(ds, vertices);
    const auto n = ds.rows();

    for (std::size_t level = 0; level <= opt.max_cond; ++level) {
        std::vector<std::vector<std::size_t>> frozen(p);
        bool any = false;
        for (std::size_t a = 0; a < p; ++a) {
            frozen[a] = g.neighbors(a);
            any = any || frozen[a].size() > level;
        }
        if (!any) break;
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) {
                if (!g.has_edge(a, b)) continue;
                bool removed = false;
                for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                    std::vector<std::size_t> pool;
                    for (auto v : frozen[x])
                        if (v != y) pool.push_back(v);
                    removed = detail::for_each_subset(pool, level, [&](const std::vector<std::size_t>& cond) {
                        if (n <= cond.size() + 3) return false;
                        double r = 0.0;
                        try {
                            r = partial_correlation(corr, a, b, cond);
                        } catch (const NumericalError&) {
                            return false;
                        }
                        ++g.tests_run;
                        if (!fisher_z_test(r, n, cond.size(), opt.alpha).independent) return false;
                        g.set_edge(a, b, false);
                        g.sepsets[{a, b}] = cond;
                        return true;
                    });
                    if (removed) break;
                }
            }
        }
    }
    if (opt.majority_rule) detail::vote_triples(g, corr, n, constraints, opt);
    return g;
}

inline Skeleton learn_skeleton(const Dataset& ds, const StructuralConstraints& constraints, const SkeletonOptions& opt = {}) {
    return learn_skeleton(ds, ds.names(), constraints, opt);
}

} // namespace cure::causal
