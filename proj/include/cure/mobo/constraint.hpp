#pragma once

#include <numeric>
#include <utility>
#include <vector>

#include "cure/error.hpp"

namespace cure::mobo {

/// Safety penalty for constraint metric h: 0 at or above the soft threshold
/// th1, 1 at or below the hard threshold th2, linear in between.
inline double penalty(double h, double th1, double th2) {
    if (!(th2 < th1)) throw UsageError("penalty needs Th2 < Th1");
    if (h >= th1) return 0.0;
    if (h <= th2) return 1.0;
    return (th1 - h) / (th1 - th2);
}

struct SafetyCheck {
    bool satisfied = false;
    double margin = 0.0;
};

/// Task-completion rate reduced by the mean penalty, compared with theta.
inline SafetyCheck safety_satisfied(double tcr, const std::vector<double>& penalties, double theta) {
    if (penalties.empty()) throw UsageError("safety check needs at least one penalty");
    const double mean = std::accumulate(penalties.begin(), penalties.end(), 0.0) / static_cast<double>(penalties.size());
    const double margin = tcr - mean;
    return {margin >= theta, margin};
}

/// Both readings of the efficiency ratio over trials 1..n: the literal one
/// (successes / Σk) and the weighted one (Σ k·success_k / Σk).
inline std::pair<double, double> efficiency(const std::vector<bool>& success) {
    if (success.empty()) throw UsageError("efficiency needs at least one trial");
    const double n = static_cast<double>(success.size());
    const double denom = n * (n + 1.0) / 2.0;
    double count = 0.0, weighted = 0.0;
    for (std::size_t k = 0; k < success.size(); ++k)
        if (success[k]) {
            count += 1.0;
            weighted += static_cast<double>(k + 1);
        }
    return {count / denom, weighted / denom};
}

/// Non-functional fault: some objective exceeds its limit.
inline bool fault_predicate(const std::vector<double>& objectives, const std::vector<double>& limits) {
    if (limits.size() < objectives.size()) throw UsageError("fault limits do not cover every objective");
    for (std::size_t i = 0; i < objectives.size(); ++i)
        if (objectives[i] > limits[i]) return true;
    return false;
}

} // namespace cure::mobo
