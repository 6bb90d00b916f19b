#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <json.hpp>

#include "cure/data.hpp"
#include "cure/gp/model.hpp"
#include "cure/rng.hpp"

namespace cure::gp {

struct FitOptions {
    std::size_t restarts = 3;
    std::size_t max_iter = 60;
    double min_scale = 1e-4; ///< bounds for θ0, λ, θ_ℓ
    double max_scale = 1e4;
    double min_noise = 1e-6; ///< bounds for σ², in units of the standardized target
    double max_noise = 1e4;
};

struct FitResult {
    GpModel model;
    double lml = -std::numeric_limits<double>::infinity();
    std::size_t failed_restarts = 0;
    /// every restart failed; the model carries the initial hyperparameters
    bool warning = false;
};

namespace detail {

struct FitProblem {
    const InputLayout* layout;
    const Eigen::MatrixXd* x;
    const Eigen::VectorXd* y; // standardized
    Eigen::VectorXd lo, hi;   // bounds on the packed vector (±inf for mean terms)
};

constexpr double kPenalty = 1e3;
constexpr double kFailure = 1e12;

inline double fit_objective(const FitProblem& fp, const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
    Eigen::VectorXd v = u.cwiseMax(fp.lo).cwiseMin(fp.hi);
    double pen = 0.0;
    Eigen::VectorXd pgrad = Eigen::VectorXd::Zero(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double excess = u(i) - v(i);
        pen += kPenalty * excess * excess;
        pgrad(i) = 2.0 * kPenalty * excess;
    }
    try {
        auto [p, m] = unpack(*fp.layout, v);
        GpModel model(*fp.layout, *fp.x, *fp.y, p, m);
        const double f = -model.log_marginal_likelihood() + pen;
        if (grad) *grad = -model.lml_gradient() + pgrad;
        return std::isfinite(f) ? f : kFailure;
    } catch (const NumericalError&) {
        if (grad) *grad = pgrad;
        return kFailure + pen;
    }
}

inline Eigen::Map<const Eigen::VectorXd> as_eigen(const gsl_vector* v) { return {v->data, static_cast<Eigen::Index>(v->size)}; }

inline double gsl_f(const gsl_vector* u, void* params) {
    return fit_objective(*static_cast<FitProblem*>(params), as_eigen(u), nullptr);
}

inline void gsl_df(const gsl_vector* u, void* params, gsl_vector* g) {
    Eigen::VectorXd grad;
    fit_objective(*static_cast<FitProblem*>(params), as_eigen(u), &grad);
    for (std::size_t i = 0; i < g->size; ++i) gsl_vector_set(g, i, grad(static_cast<Eigen::Index>(i)));
}

inline void gsl_fdf(const gsl_vector* u, void* params, double* f, gsl_vector* g) {
    Eigen::VectorXd grad;
    *f = fit_objective(*static_cast<FitProblem*>(params), as_eigen(u), &grad);
    for (std::size_t i = 0; i < g->size; ++i) gsl_vector_set(g, i, grad(static_cast<Eigen::Index>(i)));
}

/// BFGS descent from `start`; returns the end point, or nothing if the run
/// never left the failure region.
inline std::optional<Eigen::VectorXd> descend(FitProblem& fp, const Eigen::VectorXd& start, std::size_t max_iter) {
    const auto n = static_cast<std::size_t>(start.size());
    gsl_multimin_function_fdf fn{&gsl_f, &gsl_df, &gsl_fdf, n, &fp};
    gsl_vector* x0 = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x0, i, start(static_cast<Eigen::Index>(i)));
    gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
    gsl_multimin_fdfminimizer_set(s, &fn, x0, 0.05, 0.1);
    for (std::size_t it = 0; it < max_iter; ++it) {
        if (gsl_multimin_fdfminimizer_iterate(s) != GSL_SUCCESS) break;
        if (gsl_multimin_test_gradient(s->gradient, 1e-5) == GSL_SUCCESS) break;
    }
    Eigen::VectorXd end = as_eigen(s->x);
    const double f = s->f;
    gsl_multimin_fdfminimizer_free(s);
    gsl_vector_free(x0);
    if (!(f < kFailure)) return std::nullopt;
    return end.cwiseMax(fp.lo).cwiseMin(fp.hi);
}

} // namespace detail

/// Maximizes the log marginal likelihood over (θ0, Λ, θ_ℓ, σ²) in log space
/// and the linear mean (a, b). The target is standardized for the search and
/// the result mapped back. The first restart starts at `init`, the rest at
/// seeded random points; the best end point wins.
inline FitResult fit_hyperparams(const InputLayout& layout, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelParams& init,
                                 const LinearMean& init_mean, std::uint64_t seed, const FitOptions& opt = {}) {
    if (y.size() < 2) throw UsageError("hyperparameter fitting needs at least two points");
    if (opt.restarts < 1) throw UsageError("hyperparameter fitting needs at least one restart");
    init.check(layout);
    static const bool quiet = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)quiet;

    const double shift = y.mean();
    double scale = std::sqrt((y.array() - shift).square().sum() / static_cast<double>(y.size() - 1));
    if (!(scale > 0.0)) scale = 1.0;
    const Eigen::VectorXd ys = (y.array() - shift) / scale;

    KernelParams p0 = init;
    p0.theta0 /= scale;
    p0.noise = std::clamp(p0.noise / (scale * scale), opt.min_noise, opt.max_noise);
    LinearMean m0{init_mean.slope / scale, (init_mean.offset - shift) / scale};
    Eigen::VectorXd start = pack(p0, m0);

    const auto nl = static_cast<Eigen::Index>(layout.numeric_dims());
    const auto nc = static_cast<Eigen::Index>(layout.categorical_dims());
    detail::FitProblem fp{&layout, &x, &ys, Eigen::VectorXd(start.size()), Eigen::VectorXd(start.size())};
    const double inf = std::numeric_limits<double>::infinity();
    fp.lo.setConstant(-inf);
    fp.hi.setConstant(inf);
    fp.lo.head(1 + nl + nc).setConstant(std::log(opt.min_scale));
    fp.hi.head(1 + nl + nc).setConstant(std::log(opt.max_scale));
    fp.lo(1 + nl + nc) = std::log(opt.min_noise);
    fp.hi(1 + nl + nc) = std::log(opt.max_noise);
    start = start.cwiseMax(fp.lo).cwiseMin(fp.hi);

    FitResult out;
    std::optional<Eigen::VectorXd> best;
    double best_f = inf;
    const Rng root(seed);
    for (std::size_t r = 0; r < opt.restarts; ++r) {
        Eigen::VectorXd s = start;
        if (r > 0) {
            auto rng = root.derive(static_cast<std::uint64_t>(r));
            s(0) = rng.uniform(std::log(0.3), std::log(3.0));
            for (Eigen::Index i = 0; i < nl; ++i) s(1 + i) = rng.uniform(std::log(0.05), std::log(20.0));
            for (Eigen::Index i = 0; i < nc; ++i) s(1 + nl + i) = rng.uniform(std::log(0.05), std::log(5.0));
            s(1 + nl + nc) = rng.uniform(std::log(1e-4), std::log(0.3));
            s.tail(nl + 1).setZero();
        }
        auto end = detail::descend(fp, s, opt.max_iter);
        if (!end) {
            ++out.failed_restarts;
            continue;
        }
        const double f = detail::fit_objective(fp, *end, nullptr);
        if (f < best_f) {
            best_f = f;
            best = end;
        }
    }

    auto to_original = [&](const Eigen::VectorXd& v) {
        auto [p, m] = unpack(layout, v);
        p.theta0 *= scale;
        p.noise *= scale * scale;
        m.slope *= scale;
        m.offset = m.offset * scale + shift;
        return std::pair{p, m};
    };
    if (best) {
        auto [p, m] = to_original(*best);
        out.model = GpModel(layout, x, y, p, m);
    } else {
        out.warning = true;
        out.model = GpModel(layout, x, y, init, init_mean);
    }
    out.lml = out.model.log_marginal_likelihood();
    return out;
}

/// Initial guess from the data: unit ARD weights, amplitude at the target's
/// spread, small noise, flat mean at the target average.
inline std::pair<KernelParams, LinearMean> default_init(const InputLayout& layout, const Eigen::VectorXd& y) {
    auto p = KernelParams::defaults(layout);
    auto m = LinearMean::zero(layout);
    const double mean = y.size() ? y.mean() : 0.0;
    double sd = y.size() > 1 ? std::sqrt((y.array() - mean).square().sum() / static_cast<double>(y.size() - 1)) : 1.0;
    if (!(sd > 0.0)) sd = 1.0;
    p.theta0 = sd;
    p.noise = 0.01 * sd * sd;
    m.offset = mean;
    return {p, m};
}

inline nlohmann::json params_to_json(const KernelParams& p, const LinearMean& m) {
    return {{"theta0", p.theta0},
            {"lambda", std::vector<double>(p.lambda.data(), p.lambda.data() + p.lambda.size())},
            {"cat_scale", std::vector<double>(p.cat_scale.data(), p.cat_scale.data() + p.cat_scale.size())},
            {"noise", p.noise},
            {"slope", std::vector<double>(m.slope.data(), m.slope.data() + m.slope.size())},
            {"offset", m.offset}};
}

} // namespace cure::gp
