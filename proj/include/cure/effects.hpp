#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "cure/causal/graph.hpp"
#include "cure/data.hpp"
#include "cure/error.hpp"
#include "cure/space.hpp"

namespace cure {

using CausalPath = std::vector<std::string>;

/// All simple directed paths option -> ... -> target with at most `max_len`
/// edges (0 means unbounded), in depth-first order over vertex order.
inline std::vector<CausalPath> find_causal_paths(const causal::Admg& g, const std::string& option, const std::string& target,
                                                 std::size_t max_len = 0) {
    const auto from = g.index_of(option);
    const auto to = g.index_of(target);
    if (max_len == 0) max_len = g.size();
    std::vector<CausalPath> out;
    if (from == to) return out;
    std::vector<std::vector<std::size_t>> children(g.size());
    for (const auto& [a, b] : g.directed()) children[a].push_back(b);
    std::vector<std::size_t> stack{from};
    std::vector<bool> on_path(g.size(), false);
    on_path[from] = true;
    auto walk = [&](auto&& self, std::size_t v) -> void {
        if (v == to) {
            CausalPath p;
            for (auto s : stack) p.push_back(g.vertices()[s]);
            out.push_back(std::move(p));
            return;
        }
        if (stack.size() > max_len) return;
        for (auto w : children[v]) {
            if (on_path[w]) continue;
            on_path[w] = true;
            stack.push_back(w);
            self(self, w);
            stack.pop_back();
            on_path[w] = false;
        }
    };
    walk(walk, from);
    return out;
}

inline bool has_causal_path(const causal::Admg& g, const std::string& option, const std::string& target) {
    const auto from = g.index_of(option);
    const auto to = g.index_of(target);
    std::vector<bool> seen(g.size(), false);
    std::vector<std::size_t> todo{from};
    seen[from] = true;
    while (!todo.empty()) {
        const auto v = todo.back();
        todo.pop_back();
        for (auto w : g.children(v)) {
            if (w == to) return true;
            if (!seen[w]) {
                seen[w] = true;
                todo.push_back(w);
            }
        }
    }
    return false;
}

struct EffectOptions {
    std::size_t bins = 10;      ///< equal-frequency bins for the local average
    std::size_t min_rows = 10;  ///< below this the bin falls back to global regression
    std::size_t grid_size = 10; ///< intervention grid for numeric options
};

namespace detail {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double operator()(double x) const { return intercept + slope * x; }
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {my - slope * mx, slope};
}

} // namespace detail

/// E[target | do(option = value)]. Options are parentless in the model, so
/// the intervention reduces to conditioning, estimated locally: rows whose
/// option value falls in the same equal-frequency bin as `value` (or equal
/// to it, for options with few distinct values). The bin mean is moved to
/// `value` along the slope fitted over the bin and its two neighbours, so
/// the estimate refers to `value` rather than the bin centre. Sparse bins
/// fall back to a global line.
inline double interventional_mean(const Dataset& ds, const causal::Admg& g, const std::string& option, double value, const std::string& target,
                                  const EffectOptions& opt = {}) {
    if (g.has_vertex(option) && !g.parents(g.index_of(option)).empty())
        throw UsageError("option '" + option + "' has parents in the model; intervention is not a conditioning");
    if (ds.space()) {
        const auto* def = ds.space()->find(option);
        if (def && (value < def->lo - 1e-12 || value > def->hi + 1e-12))
            throw UsageError("value " + format_double(value) + " outside the domain of '" + option + "'");
    }
    const auto xs = ds.values(option);
    const auto ys = ds.values(target);
    const auto n = xs.size();
    if (n == 0) throw DataError("empty dataset");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    std::vector<double> distinct;
    for (auto i : order)
        if (distinct.empty() || xs[i] != distinct.back()) distinct.push_back(xs[i]);

    std::vector<double> bx, by, wx, wy;
    bool exact = false;
    if (distinct.size() <= opt.bins) {
        exact = true;
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(xs[i] - value) <= 1e-9 * std::max(1.0, std::abs(value))) {
                bx.push_back(xs[i]);
                by.push_back(ys[i]);
            }
    } else {
        // bin b covers sorted ranks [b n / bins, (b + 1) n / bins); ties stay with their first rank
        std::size_t chosen = 0;
        for (std::size_t b = 1; b < opt.bins; ++b)
            if (xs[order[b * n / opt.bins]] <= value) chosen = b;
        const double inf = std::numeric_limits<double>::infinity();
        auto edge = [&](std::size_t b) { return b >= opt.bins ? inf : xs[order[b * n / opt.bins]]; };
        const double lo = edge(chosen), hi = edge(chosen + 1);
        const double wlo = chosen > 0 ? edge(chosen - 1) : -inf, whi = edge(chosen + 2);
        for (std::size_t i = 0; i < n; ++i) {
            if (xs[i] >= lo && xs[i] < hi) {
                bx.push_back(xs[i]);
                by.push_back(ys[i]);
            }
            if (xs[i] >= wlo && xs[i] < whi) {
                wx.push_back(xs[i]);
                wy.push_back(ys[i]);
            }
        }
    }
    if (bx.size() < opt.min_rows) {
        std::vector<double> ax(xs.begin(), xs.end()), ay(ys.begin(), ys.end());
        return detail::fit_line(ax, ay)(value);
    }
    const double my = std::accumulate(by.begin(), by.end(), 0.0) / static_cast<double>(by.size());
    if (exact) return my;
    const double mx = std::accumulate(bx.begin(), bx.end(), 0.0) / static_cast<double>(bx.size());
    return my + detail::fit_line(wx, wy).slope * (value - mx);
}

/// Intervention values for an option: all levels for categorical options,
/// otherwise lo + j (hi - lo) / N for j = 1..N (rounded and deduplicated for integers).
inline std::vector<double> intervention_grid(const OptionDef& def, std::size_t n) {
    std::vector<double> grid;
    if (def.has_levels()) {
        for (std::size_t l = 0; l < def.levels.size(); ++l) grid.push_back(static_cast<double>(l));
        return grid;
    }
    if (n == 0) throw UsageError("intervention grid needs at least one point");
    for (std::size_t j = 1; j <= n; ++j) {
        double x = def.lo + static_cast<double>(j) * (def.hi - def.lo) / static_cast<double>(n);
        if (def.kind == OptionKind::integer) x = std::round(x);
        if (grid.empty() || grid.back() != x) grid.push_back(x);
    }
    return grid;
}

/// Average causal effect: mean absolute shift of E[target] under do(option = x_j)
/// relative to do(option = default), over the intervention grid. Exactly 0
/// without a directed path option -> target in the model.
inline double ace(const Dataset& ds, const causal::Admg& g, const std::string& option, const std::string& target, const EffectOptions& opt = {}) {
    if (!g.has_vertex(option) || !g.has_vertex(target)) throw UsageError("ACE query names a vertex outside the model");
    if (!has_causal_path(g, option, target)) return 0.0;
    if (!ds.space()) throw UsageError("ACE needs the dataset's configuration space");
    const auto& def = ds.space()->at(option);
    const double base = interventional_mean(ds, g, option, to_numeric(def.default_value), target, opt);
    const auto grid = intervention_grid(def, opt.grid_size);
    double total = 0.0;
    for (double x : grid) total += std::abs(interventional_mean(ds, g, option, x, target, opt) - base);
    return total / static_cast<double>(grid.size());
}

/// ACE values per target, per option.
struct AceTable {
    std::vector<std::string> targets;
    std::vector<std::string> options;
    std::map<std::string, std::map<std::string, double>> values; ///< target -> option -> ACE

    double at(const std::string& target, const std::string& option) const {
        auto t = values.find(target);
        if (t == values.end()) throw UsageError("ACE table has no target '" + target + "'");
        auto o = t->second.find(option);
        if (o == t->second.end()) throw UsageError("ACE table has no option '" + option + "'");
        return o->second;
    }
};

inline AceTable ace_table(const Dataset& ds, const causal::Admg& g, const std::vector<std::string>& targets, const EffectOptions& opt = {}) {
    if (!ds.space()) throw UsageError("ACE needs the dataset's configuration space");
    AceTable t;
    t.targets = targets;
    for (const auto& name : ds.names_with_role(Role::option))
        if (!ds.space()->at(name).fixed && g.has_vertex(name)) t.options.push_back(name);
    for (const auto& target : targets) {
        if (!g.has_vertex(target) || !ds.has(target)) throw UsageError("unknown target '" + target + "'");
        for (const auto& option : t.options) t.values[target][option] = ace(ds, g, option, target, opt);
    }
    return t;
}

struct Reduction {
    ReducedSpace space;
    std::vector<std::string> selected;
    std::map<std::string, std::vector<std::string>> top; ///< target -> its top-K options
    std::vector<std::string> degenerate_targets;          ///< targets whose ACEs were all zero
    bool degenerate() const { return !degenerate_targets.empty(); }
};

/// Options of one target ordered by descending score, ties by name.
inline std::vector<std::string> ranked_options(const std::map<std::string, double>& scores) {
    std::vector<std::string> names;
    for (const auto& [name, _] : scores) names.push_back(name);
    std::stable_sort(names.begin(), names.end(), [&](const auto& a, const auto& b) {
        const double x = scores.at(a), y = scores.at(b);
        return x != y ? x > y : a < b;
    });
    return names;
}

/// Union over targets of each target's K highest-ranked options with a
/// nonzero score. A target with no nonzero score contributes its first K
/// options by name and is reported as degenerate; K at or above the option
/// count keeps everything. Fixed options and options unknown to `space`
/// never enter the selection.
inline Reduction rank_and_reduce(const AceTable& table, std::size_t k, const ConfigSpace& space) {
    if (k < 1) throw UsageError("top-K needs K >= 1");
    Reduction r;
    std::set<std::string> chosen;
    for (const auto& target : table.targets) {
        std::map<std::string, double> scores;
        auto it = table.values.find(target);
        if (it == table.values.end()) throw UsageError("ACE table has no target '" + target + "'");
        for (const auto& [option, v] : it->second) {
            const auto* def = space.find(option);
            if (def && !def->fixed) scores[option] = v;
        }
        const auto order = ranked_options(scores);
        std::vector<std::string> top;
        const bool all_zero = std::all_of(scores.begin(), scores.end(), [](const auto& kv) { return kv.second == 0.0; });
        if (k >= scores.size()) {
            for (const auto& name : order) top.push_back(name);
        } else if (all_zero) {
            r.degenerate_targets.push_back(target);
            for (const auto& [name, _] : scores)
                if (top.size() < k) top.push_back(name);
        } else {
            for (const auto& name : order)
                if (top.size() < k && scores.at(name) > 0.0) top.push_back(name);
        }
        chosen.insert(top.begin(), top.end());
        r.top[target] = std::move(top);
    }
    for (const auto& name : space.free_names())
        if (chosen.count(name)) r.selected.push_back(name);
    r.space = ReducedSpace(space, r.selected);
    return r;
}

/// CSV with columns option, target, ace, selected; rows grouped by option,
/// options in descending ACE order of the first target.
inline void write_ace_csv(const AceTable& table, const std::vector<std::string>& selected, std::ostream& out) {
    std::set<std::string> sel(selected.begin(), selected.end());
    std::vector<std::string> order = table.options;
    if (!table.targets.empty()) order = ranked_options(table.values.at(table.targets.front()));
    out << "option,target,ace,selected\n";
    for (const auto& option : order)
        for (const auto& target : table.targets)
            out << option << ',' << target << ',' << format_double(table.at(target, option)) << ',' << (sel.count(option) ? 1 : 0) << '\n';
}

/// Reads an ACE table from CSV rows (option, target, ace[, selected]).
inline AceTable read_ace_csv(std::istream& in) {
    AceTable t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("ACE table is empty");
    const auto header = detail::split_csv_line(line);
    if (header.size() < 3 || detail::trim(header[0]) != "option" || detail::trim(header[1]) != "target" || detail::trim(header[2]) != "ace")
        throw DataError("ACE table header must start with option,target,ace");
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() < 3) throw DataError("ACE table row " + std::to_string(row) + " has too few fields");
        const std::string option(detail::trim(f[0])), target(detail::trim(f[1]));
        const double v = detail::parse_number(detail::trim(f[2]), "ace", row);
        if (std::find(t.targets.begin(), t.targets.end(), target) == t.targets.end()) t.targets.push_back(target);
        if (std::find(t.options.begin(), t.options.end(), option) == t.options.end()) t.options.push_back(option);
        t.values[target][option] = v;
    }
    for (const auto& target : t.targets)
        for (const auto& option : t.options)
            if (!t.values[target].count(option)) throw DataError("ACE table lacks (" + option + ", " + target + ")");
    return t;
}

} // namespace cure
