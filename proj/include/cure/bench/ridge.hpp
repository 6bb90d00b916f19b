#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cure/data.hpp"
#include "cure/effects.hpp"
#include "cure/error.hpp"

namespace cure::bench {

/// Closed-form ridge coefficients (XᵀX + λI)⁻¹Xᵀy; nothing when the system is singular.
inline std::optional<Eigen::VectorXd> ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    Eigen::MatrixXd a = x.transpose() * x;
    a.diagonal().array() += lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const Eigen::VectorXd d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * std::max(1.0, d.cwiseAbs().maxCoeff())) return std::nullopt;
    return Eigen::VectorXd(ldlt.solve(x.transpose() * y));
}

struct RidgeCv {
    double lambda = 0.0;
    double cv_mse = 0.0;
    Eigen::VectorXd coef;
};

/// λ chosen by K-fold cross-validated squared error (contiguous folds), then refit on all rows.
inline RidgeCv ridge_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<double>& lambdas, std::size_t folds) {
    if (folds < 2) throw UsageError("cross-validation needs at least two folds");
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < folds) throw UsageError("fewer rows than folds");
    RidgeCv best;
    best.cv_mse = std::numeric_limits<double>::infinity();
    for (double lambda : lambdas) {
        double sse = 0.0;
        bool ok = true;
        for (std::size_t f = 0; f < folds && ok; ++f) {
            const std::size_t lo = f * n / folds, hi = (f + 1) * n / folds;
            Eigen::MatrixXd xt(static_cast<Eigen::Index>(n - (hi - lo)), x.cols());
            Eigen::VectorXd yt(xt.rows());
            Eigen::Index k = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (i < lo || i >= hi) {
                    xt.row(k) = x.row(static_cast<Eigen::Index>(i));
                    yt(k++) = y(static_cast<Eigen::Index>(i));
                }
            const auto coef = ridge_fit(xt, yt, lambda);
            if (!coef) {
                ok = false;
                break;
            }
            for (std::size_t i = lo; i < hi; ++i) {
                const double e = y(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(i)).dot(*coef);
                sse += e * e;
            }
        }
        if (!ok) continue;
        const double mse = sse / static_cast<double>(n);
        if (mse < best.cv_mse) {
            best.cv_mse = mse;
            best.lambda = lambda;
        }
    }
    if (!std::isfinite(best.cv_mse)) throw NumericalError("every ridge penalty gave a singular system");
    best.coef = *ridge_fit(x, y, best.lambda);
    return best;
}

inline const std::vector<double>& default_ridge_grid() {
    static const std::vector<double> grid{0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1000.0};
    return grid;
}

struct RidgeScreen {
    std::map<std::string, std::map<std::string, double>> coefficients; ///< target -> option -> |coef|
    std::map<std::string, double> lambda;
    std::vector<std::string> selected;
};

/// Per target: standardized options and target, cross-validated ridge, the K
/// options with the largest |coefficient|. Selection is the union over targets.
inline RidgeScreen ridge_screen(const Dataset& ds, const std::vector<std::string>& targets, std::size_t k, const ConfigSpace& space,
                                std::size_t folds = 5, const std::vector<double>& lambdas = default_ridge_grid()) {
    if (k < 1) throw UsageError("top-K needs K >= 1");
    std::vector<std::string> options;
    for (const auto& name : ds.names_with_role(Role::option))
        if (space.find(name) && !space.at(name).fixed) options.push_back(name);
    if (options.empty()) throw DataError("no free option columns to screen");
    const auto n = static_cast<Eigen::Index>(ds.rows());
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(options.size()));
    for (std::size_t c = 0; c < options.size(); ++c) {
        const auto v = ds.values(options[c]);
        const double m = sample_mean(v), s = sample_sd(v);
        for (Eigen::Index r = 0; r < n; ++r) x(r, static_cast<Eigen::Index>(c)) = s > 0 ? (v[static_cast<std::size_t>(r)] - m) / s : 0.0;
    }
    RidgeScreen out;
    std::set<std::string> chosen;
    for (const auto& target : targets) {
        if (!ds.has(target)) throw UsageError("unknown target '" + target + "'");
        const auto v = ds.values(target);
        const double m = sample_mean(v), s = sample_sd(v);
        Eigen::VectorXd y(n);
        for (Eigen::Index r = 0; r < n; ++r) y(r) = s > 0 ? (v[static_cast<std::size_t>(r)] - m) / s : 0.0;
        const auto fit = ridge_cv(x, y, lambdas, folds);
        out.lambda[target] = fit.lambda;
        std::map<std::string, double> scores;
        for (std::size_t c = 0; c < options.size(); ++c) scores[options[c]] = std::abs(fit.coef(static_cast<Eigen::Index>(c)));
        const auto order = ranked_options(scores);
        for (std::size_t i = 0; i < std::min(k, order.size()); ++i) chosen.insert(order[i]);
        out.coefficients[target] = std::move(scores);
    }
    for (const auto& name : space.free_names())
        if (chosen.count(name)) out.selected.push_back(name);
    return out;
}

} // namespace cure::bench
