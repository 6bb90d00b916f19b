#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "cure/error.hpp"

namespace cure::mobo {

using Point = std::vector<double>;

/// a dominates b under minimization: no worse everywhere, strictly better somewhere.
inline bool dominates(const Point& a, const Point& b) {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        strict = strict || a[i] < b[i];
    }
    return strict;
}

/// Indices of the nondominated points; among identical points only the first is kept.
inline std::vector<std::size_t> pareto_indices(const std::vector<Point>& points) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points.empty() && points[i].size() != points[0].size()) throw UsageError("points differ in dimension");
        bool keep = true;
        for (std::size_t j = 0; j < points.size() && keep; ++j) {
            if (j == i) continue;
            if (dominates(points[j], points[i]) || (j < i && points[j] == points[i])) keep = false;
        }
        if (keep) out.push_back(i);
    }
    return out;
}

inline std::vector<Point> pareto_front(const std::vector<Point>& points) {
    std::vector<Point> out;
    for (auto i : pareto_indices(points)) out.push_back(points[i]);
    return out;
}

struct HvResult {
    double volume = 0.0;
    std::size_t clipped = 0; ///< points not strictly dominating the reference point
};

/// Area dominated by a set of 2-objective points up to `ref` (1-objective:
/// length). Points that do not strictly improve on `ref` in every coordinate
/// are left out and counted.
inline HvResult hypervolume_detail(const std::vector<Point>& points, const Point& ref) {
    const auto m = ref.size();
    if (m < 1 || m > 2) throw UsageError("hypervolume supports one or two objectives");
    HvResult res;
    std::vector<Point> inside;
    for (const auto& p : points) {
        if (p.size() != m) throw UsageError("point dimension differs from the reference point");
        bool ok = true;
        for (std::size_t i = 0; i < m; ++i) ok = ok && p[i] < ref[i];
        if (ok) inside.push_back(p);
        else ++res.clipped;
    }
    if (inside.empty()) return res;
    if (m == 1) {
        double best = ref[0];
        for (const auto& p : inside) best = std::min(best, p[0]);
        res.volume = ref[0] - best;
        return res;
    }
    auto front = pareto_front(inside);
    std::sort(front.begin(), front.end());
    // sweep by f1; each point adds the strip up to the next point's f1
    for (std::size_t i = 0; i < front.size(); ++i) {
        const double next = i + 1 < front.size() ? front[i + 1][0] : ref[0];
        res.volume += (next - front[i][0]) * (ref[1] - front[i][1]);
    }
    return res;
}

inline double hypervolume(const std::vector<Point>& points, const Point& ref) { return hypervolume_detail(points, ref).volume; }

} // namespace cure::mobo
