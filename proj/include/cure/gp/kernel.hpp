#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cure/error.hpp"
#include "cure/space.hpp"

namespace cure::gp {

/// How configurations become GP inputs: numeric options scaled to [0, 1] by
/// their domain, categorical options as level indices.
class InputLayout {
public:
    InputLayout() = default;

    InputLayout(const ConfigSpace& space, const std::vector<std::string>& names) : names_(names) {
        for (const auto& name : names) {
            const auto& def = space.at(name);
            categorical_.push_back(def.has_levels());
            lo_.push_back(def.lo);
            hi_.push_back(def.hi);
            (def.has_levels() ? n_cat_ : n_num_)++;
        }
    }

    /// Layout over bare dimensions, already scaled.
    static InputLayout raw(std::size_t numeric, std::size_t categorical) {
        InputLayout l;
        for (std::size_t i = 0; i < numeric + categorical; ++i) {
            l.names_.push_back("x" + std::to_string(i));
            l.categorical_.push_back(i >= numeric);
            l.lo_.push_back(0.0);
            l.hi_.push_back(1.0);
        }
        l.n_num_ = numeric;
        l.n_cat_ = categorical;
        return l;
    }

    std::size_t dims() const { return names_.size(); }
    std::size_t numeric_dims() const { return n_num_; }
    std::size_t categorical_dims() const { return n_cat_; }
    bool is_categorical(std::size_t d) const { return categorical_[d]; }
    const std::vector<std::string>& names() const { return names_; }

    Eigen::VectorXd encode(const Configuration& c) const {
        Eigen::VectorXd x(static_cast<Eigen::Index>(dims()));
        for (std::size_t d = 0; d < dims(); ++d) {
            const double v = to_numeric(c.at(names_[d]));
            x(static_cast<Eigen::Index>(d)) = categorical_[d] ? v : (hi_[d] > lo_[d] ? (v - lo_[d]) / (hi_[d] - lo_[d]) : 0.0);
        }
        return x;
    }

    Eigen::MatrixXd encode(const std::vector<Configuration>& cs) const {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(cs.size()), static_cast<Eigen::Index>(dims()));
        for (std::size_t i = 0; i < cs.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = encode(cs[i]).transpose();
        return x;
    }

private:
    std::vector<std::string> names_;
    std::vector<bool> categorical_;
    std::vector<double> lo_, hi_;
    std::size_t n_num_ = 0, n_cat_ = 0;
};

/// Matérn-1/2 amplitude and ARD weights, categorical scales, noise variance.
struct KernelParams {
    double theta0 = 1.0;
    Eigen::VectorXd lambda;    ///< diagonal of Λ, one per numeric dimension
    Eigen::VectorXd cat_scale; ///< θ_ℓ, one per categorical dimension
    double noise = 1e-6;       ///< σ²

    static KernelParams defaults(const InputLayout& layout) {
        KernelParams p;
        p.lambda = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(layout.numeric_dims()));
        p.cat_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(layout.categorical_dims()));
        return p;
    }

    void check(const InputLayout& layout) const {
        if (static_cast<std::size_t>(lambda.size()) != layout.numeric_dims() ||
            static_cast<std::size_t>(cat_scale.size()) != layout.categorical_dims())
            throw UsageError("kernel parameters do not match the input layout");
        if (!(theta0 > 0.0) || (lambda.array() <= 0.0).any() || (cat_scale.array() <= 0.0).any() || !(noise >= 0.0))
            throw UsageError("kernel parameters must be positive");
    }
};

/// µ(x) = a·x_numeric + b.
struct LinearMean {
    Eigen::VectorXd slope;
    double offset = 0.0;

    static LinearMean zero(const InputLayout& layout) {
        return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.numeric_dims())), 0.0};
    }

    double operator()(const InputLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& x) const {
        double m = offset;
        Eigen::Index k = 0;
        for (std::size_t d = 0; d < layout.dims(); ++d)
            if (!layout.is_categorical(d)) m += slope(k++) * x(static_cast<Eigen::Index>(d));
        return m;
    }
};

/// Weighted distance r = sqrt(Σ λ_d Δ_d²) over numeric dims and the count-
/// weighted categorical mismatch Σ θ_ℓ [x_ℓ ≠ x'_ℓ].
inline void kernel_terms(const InputLayout& layout, const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b, double& r, double& mismatch) {
    double r2 = 0.0;
    mismatch = 0.0;
    Eigen::Index kn = 0, kc = 0;
    for (std::size_t d = 0; d < layout.dims(); ++d) {
        const auto i = static_cast<Eigen::Index>(d);
        if (layout.is_categorical(d)) {
            if (a(i) != b(i)) mismatch += p.cat_scale(kc);
            ++kc;
        } else {
            const double diff = a(i) - b(i);
            r2 += p.lambda(kn++) * diff * diff;
        }
    }
    r = std::sqrt(r2);
}

/// θ0² exp(−r) · exp(−Σ θ_ℓ δ(x_ℓ ≠ x'_ℓ)) on encoded inputs.
inline double kernel(const InputLayout& layout, const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& a,
                     const Eigen::Ref<const Eigen::VectorXd>& b) {
    double r = 0.0, mismatch = 0.0;
    kernel_terms(layout, p, a, b, r, mismatch);
    return p.theta0 * p.theta0 * std::exp(-r - mismatch);
}

inline double kernel(const InputLayout& layout, const KernelParams& p, const Configuration& a, const Configuration& b) {
    return kernel(layout, p, layout.encode(a), layout.encode(b));
}

/// Cross-covariance between the rows of A and the rows of B.
inline Eigen::MatrixXd cross_covariance(const InputLayout& layout, const KernelParams& p, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = kernel(layout, p, a.row(i).transpose(), b.row(j).transpose());
    return k;
}

inline Eigen::MatrixXd gram(const InputLayout& layout, const KernelParams& p, const Eigen::MatrixXd& x) {
    const auto n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = p.theta0 * p.theta0;
        for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i) = kernel(layout, p, x.row(i).transpose(), x.row(j).transpose());
    }
    return k;
}

} // namespace cure::gp
