#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "cure/error.hpp"
#include "cure/gp/kernel.hpp"

namespace cure::gp {

struct Prediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

/// Packed hyperparameter vector: log θ0, log λ, log θ_ℓ, log σ², slope, offset.
inline Eigen::VectorXd pack(const KernelParams& p, const LinearMean& m) {
    const auto nl = p.lambda.size(), nc = p.cat_scale.size(), ns = m.slope.size();
    Eigen::VectorXd v(1 + nl + nc + 1 + ns + 1);
    v(0) = std::log(p.theta0);
    v.segment(1, nl) = p.lambda.array().log().matrix();
    v.segment(1 + nl, nc) = p.cat_scale.array().log().matrix();
    v(1 + nl + nc) = std::log(p.noise);
    v.segment(2 + nl + nc, ns) = m.slope;
    v(2 + nl + nc + ns) = m.offset;
    return v;
}

inline std::pair<KernelParams, LinearMean> unpack(const InputLayout& layout, const Eigen::VectorXd& v) {
    const auto nl = static_cast<Eigen::Index>(layout.numeric_dims());
    const auto nc = static_cast<Eigen::Index>(layout.categorical_dims());
    if (v.size() != 3 + 2 * nl + nc) throw UsageError("packed hyperparameters have the wrong length");
    KernelParams p;
    p.theta0 = std::exp(v(0));
    p.lambda = v.segment(1, nl).array().exp().matrix();
    p.cat_scale = v.segment(1 + nl, nc).array().exp().matrix();
    p.noise = std::exp(v(1 + nl + nc));
    LinearMean m{v.segment(2 + nl + nc, nl), v(2 + nl + nc + nl)};
    return {p, m};
}

/// GP regression with a cached Cholesky factor of K + σ²I. The diagonal
/// also carries the smallest jitter from 1e-9 .. 1e-6 that makes the
/// factorization succeed.
class GpModel {
public:
    GpModel() = default;

    GpModel(InputLayout layout, Eigen::MatrixXd x, Eigen::VectorXd y, KernelParams params, LinearMean mean)
        : layout_(std::move(layout)), x_(std::move(x)), y_(std::move(y)), params_(std::move(params)), mean_(std::move(mean)) {
        params_.check(layout_);
        if (x_.rows() != y_.size()) throw UsageError("GP inputs and targets differ in length");
        if (static_cast<std::size_t>(x_.cols()) != layout_.dims()) throw UsageError("GP inputs do not match the layout");
        if (x_.rows() < 1) throw UsageError("GP needs at least one training point");
        if (mean_.slope.size() != static_cast<Eigen::Index>(layout_.numeric_dims())) throw UsageError("mean slope does not match the layout");
        if (!y_.allFinite()) throw DataError("GP targets must be finite");
        factorize();
    }

    const InputLayout& layout() const { return layout_; }
    const KernelParams& params() const { return params_; }
    const LinearMean& mean_function() const { return mean_; }
    const Eigen::MatrixXd& inputs() const { return x_; }
    const Eigen::VectorXd& targets() const { return y_; }
    double jitter() const { return jitter_; }
    std::size_t size() const { return static_cast<std::size_t>(y_.size()); }

    Eigen::VectorXd prior_mean(const Eigen::MatrixXd& x) const {
        Eigen::VectorXd m(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) m(i) = mean_(layout_, x.row(i).transpose());
        return m;
    }

    /// Mean µ(x) + k(x)ᵀ(K+σ²I)⁻¹(y−µ) and variance k(x,x) + σ² − k(x)ᵀ(K+σ²I)⁻¹k(x)
    /// (without the σ² term when include_noise is false), clamped at 0.
    Prediction posterior(const Eigen::MatrixXd& x, bool include_noise = true) const {
        const Eigen::MatrixXd ks = cross_covariance(layout_, params_, x_, x);
        Prediction out;
        out.mean = prior_mean(x) + ks.transpose() * alpha_;
        const Eigen::MatrixXd v = chol_.matrixL().solve(ks);
        const double prior = params_.theta0 * params_.theta0 + (include_noise ? params_.noise : 0.0);
        out.variance = (prior - v.colwise().squaredNorm().transpose().array()).max(0.0).matrix();
        return out;
    }

    std::pair<double, double> posterior(const Configuration& c, bool include_noise = true) const {
        Eigen::MatrixXd x = layout_.encode(c).transpose();
        const auto p = posterior(x, include_noise);
        return {p.mean(0), p.variance(0)};
    }

    double log_marginal_likelihood() const {
        const double n = static_cast<double>(y_.size());
        return -0.5 * residual_.dot(alpha_) - 0.5 * logdet_ - 0.5 * n * std::log(2.0 * std::numbers::pi);
    }

    /// Gradient of the log marginal likelihood with respect to pack(params, mean).
    Eigen::VectorXd lml_gradient() const {
        const auto n = x_.rows();
        const auto nl = static_cast<Eigen::Index>(layout_.numeric_dims());
        const auto nc = static_cast<Eigen::Index>(layout_.categorical_dims());
        Eigen::VectorXd g = Eigen::VectorXd::Zero(3 + 2 * nl + nc);
        const Eigen::MatrixXd cinv = chol_.solve(Eigen::MatrixXd::Identity(n, n));
        const Eigen::MatrixXd w = alpha_ * alpha_.transpose() - cinv;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double wk = w(i, j) * k_(i, j);
                g(0) += wk; // ½ · W · 2K
                if (i == j) continue;
                double r = 0.0, mismatch = 0.0;
                kernel_terms(layout_, params_, x_.row(i).transpose(), x_.row(j).transpose(), r, mismatch);
                Eigen::Index kn = 0, kc = 0;
                for (std::size_t d = 0; d < layout_.dims(); ++d) {
                    const auto c = static_cast<Eigen::Index>(d);
                    if (layout_.is_categorical(d)) {
                        if (x_(i, c) != x_(j, c)) g(1 + nl + kc) -= 0.5 * wk * params_.cat_scale(kc);
                        ++kc;
                    } else {
                        const double diff = x_(i, c) - x_(j, c);
                        if (r > 0.0) g(1 + kn) -= 0.5 * wk * params_.lambda(kn) * diff * diff / (2.0 * r);
                        ++kn;
                    }
                }
            }
        }
        g(1 + nl + nc) = 0.5 * w.trace() * params_.noise;
        Eigen::Index kn = 0;
        for (std::size_t d = 0; d < layout_.dims(); ++d)
            if (!layout_.is_categorical(d)) g(2 + nl + nc + kn++) = x_.col(static_cast<Eigen::Index>(d)).dot(alpha_);
        g(2 + 2 * nl + nc) = alpha_.sum();
        return g;
    }

    /// Same hyperparameters, new data.
    GpModel with_data(Eigen::MatrixXd x, Eigen::VectorXd y) const { return GpModel(layout_, std::move(x), std::move(y), params_, mean_); }

private:
    void factorize() {
        k_ = gram(layout_, params_, x_);
        for (double jitter : {1e-9, 1e-8, 1e-7, 1e-6}) {
            Eigen::MatrixXd c = k_;
            c.diagonal().array() += params_.noise + jitter;
            chol_.compute(c);
            if (chol_.info() == Eigen::Success && (chol_.matrixLLT().diagonal().array() > 0.0).all()) {
                jitter_ = jitter;
                residual_ = y_ - prior_mean(x_);
                alpha_ = chol_.solve(residual_);
                logdet_ = 2.0 * chol_.matrixLLT().diagonal().array().log().sum();
                if (alpha_.allFinite() && std::isfinite(logdet_)) return;
            }
        }
        throw NumericalError("covariance matrix not positive definite after jitter 1e-6");
    }

    InputLayout layout_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    KernelParams params_;
    LinearMean mean_;
    Eigen::MatrixXd k_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd residual_, alpha_;
    double logdet_ = 0.0;
    double jitter_ = 0.0;
};

} // namespace cure::gp
