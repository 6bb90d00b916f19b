#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cure/data.hpp"
#include "cure/error.hpp"
#include "cure/stats.hpp"

namespace cure::causal {

/// Pearson correlation matrix of the named columns.
inline Eigen::MatrixXd correlation_matrix(const Dataset& ds, const std::vector<std::string>& names) {
    const auto n = static_cast<Eigen::Index>(ds.rows());
    const auto p = static_cast<Eigen::Index>(names.size());
    if (n < 2) throw DataError("correlation needs at least two rows");
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index c = 0; c < p; ++c) {
        const auto v = ds.values(names[static_cast<std::size_t>(c)]);
        for (Eigen::Index r = 0; r < n; ++r) x(r, c) = v[static_cast<std::size_t>(r)];
    }
    x.rowwise() -= x.colwise().mean();
    const Eigen::VectorXd norms = x.colwise().norm();
    for (Eigen::Index c = 0; c < p; ++c) {
        if (!(norms(c) > 0.0)) throw DataError("column '" + names[static_cast<std::size_t>(c)] + "' is constant");
        x.col(c) /= norms(c);
    }
    Eigen::MatrixXd corr = x.transpose() * x;
    corr.diagonal().setOnes();
    return corr;
}

/// Partial correlation of variables i and j given `cond`, read off the
/// inverse of the correlation submatrix over {i, j} ∪ cond.
inline double partial_correlation(const Eigen::MatrixXd& corr, std::size_t i, std::size_t j, std::span<const std::size_t> cond) {
    if (i == j) return 1.0;
    const auto k = static_cast<Eigen::Index>(cond.size() + 2);
    std::vector<std::size_t> idx{i, j};
    idx.insert(idx.end(), cond.begin(), cond.end());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            sub(a, b) = corr(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]),
                             static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
    const Eigen::VectorXd d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff()))
        throw NumericalError("singular correlation submatrix");
    const Eigen::MatrixXd prec = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
    const double r = -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
    return std::clamp(r, -1.0, 1.0);
}

inline double partial_correlation(const Dataset& ds, const std::string& i, const std::string& j, const std::vector<std::string>& cond) {
    if (i == j) return 1.0;
    if (ds.rows() <= cond.size() + 3) throw UsageError("partial correlation needs more rows than |S| + 3");
    std::vector<std::string> names{i, j};
    names.insert(names.end(), cond.begin(), cond.end());
    const auto corr = correlation_matrix(ds, names);
    std::vector<std::size_t> idx(cond.size());
    for (std::size_t k = 0; k < cond.size(); ++k) idx[k] = k + 2;
    return partial_correlation(corr, 0, 1, idx);
}

struct CiResult {
    bool independent = false;
    double p_value = 0.0;
    double statistic = 0.0;
};

/// Fisher's z test of zero partial correlation: sqrt(n - s - 3) |atanh r|
/// against a two-sided standard normal.
inline CiResult fisher_z_test(double r, std::size_t n, std::size_t s, double alpha) {
    if (n <= s + 3) throw UsageError("Fisher z test needs n - s - 3 > 0");
    if (std::abs(r) >= 1.0) return {false, 0.0, std::numeric_limits<double>::infinity()};
    const double stat = std::sqrt(static_cast<double>(n - s - 3)) * std::abs(0.5 * std::log((1.0 + r) / (1.0 - r)));
    const double p = std::erfc(stat / std::sqrt(2.0));
    return {p > alpha, p, stat};
}

} // namespace cure::causal
