#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cure/error.hpp"
#include "cure/mobo/pareto.hpp"
#include "cure/stats.hpp"

namespace cure::mobo {

namespace detail {

/// ∫_{-∞}^{c} Φ((z − µ)/σ) dz = E[(c − Y)⁺] for Y ~ N(µ, σ²).
inline double psi(double c, double mu, double sd) {
    if (std::isinf(c)) return c < 0 ? 0.0 : std::numeric_limits<double>::infinity();
    if (!(sd > 0.0)) return std::max(c - mu, 0.0);
    const double z = (c - mu) / sd;
    return (c - mu) * normal_cdf(z) + sd * normal_pdf(z);
}

} // namespace detail

/// Exact expected hypervolume improvement for two minimized objectives with
/// independent Gaussian predictions. The region not dominated by the front
/// (inside the reference box) splits into vertical strips between
/// consecutive front points; in each strip the improvement factorizes into
/// an f1 term and an f2 term with closed-form expectations.
inline double ehvi(const Point& mean, const Point& sd, const std::vector<Point>& front_points, const Point& ref) {
    if (mean.size() != 2 || sd.size() != 2 || ref.size() != 2) throw UsageError("EHVI is implemented for exactly two objectives");
    for (double s : sd)
        if (s < 0.0 || std::isnan(s)) throw UsageError("EHVI needs non-negative standard deviations");
    std::vector<Point> inside;
    for (const auto& p : front_points) {
        if (p.size() != 2) throw UsageError("EHVI front points must have two objectives");
        if (p[0] < ref[0] && p[1] < ref[1]) inside.push_back(p);
    }
    auto front = pareto_front(inside);
    std::sort(front.begin(), front.end());

    const double inf = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t i = 0; i <= front.size(); ++i) {
        const double lo = i == 0 ? -inf : front[i - 1][0];
        const double hi = i < front.size() ? front[i][0] : ref[0];
        const double top = i == 0 ? ref[1] : front[i - 1][1];
        if (!(hi > lo)) continue;
        const double width = detail::psi(hi, mean[0], sd[0]) - detail::psi(lo, mean[0], sd[0]);
        total += std::max(width, 0.0) * detail::psi(top, mean[1], sd[1]);
    }
    return std::max(total, 0.0);
}

} // namespace cure::mobo
