#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cure/data.hpp"
#include "cure/error.hpp"
#include "cure/rng.hpp"

namespace cure::causal {

/// Integer codes for a column. Columns with at most `bins` distinct values
/// keep one code per value; otherwise values are cut into equal-frequency
/// bins, with tied values always sharing a bin.
inline std::vector<int> discretize(std::span<const double> values, std::size_t bins) {
    if (bins < 1) throw UsageError("discretize needs at least one bin");
    const auto n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<int> codes(n, 0);
    std::size_t distinct = 0;
    for (std::size_t r = 0; r < n; ++r)
        if (r == 0 || values[order[r]] != values[order[r - 1]]) ++distinct;
    if (distinct <= bins) {
        int code = -1;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == 0 || values[order[r]] != values[order[r - 1]]) ++code;
            codes[order[r]] = code;
        }
        return codes;
    }
    // bin of the first occurrence of a value wins, then codes are compacted
    int bin = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (r == 0 || values[order[r]] != values[order[r - 1]]) bin = static_cast<int>(r * bins / n);
        codes[order[r]] = bin;
    }
    std::vector<int> remap(bins, -1);
    int next = 0;
    for (std::size_t r = 0; r < n; ++r) {
        auto& m = remap[static_cast<std::size_t>(codes[order[r]])];
        if (m < 0) m = next++;
    }
    for (auto& c : codes) c = remap[static_cast<std::size_t>(c)];
    return codes;
}

inline int cardinality(std::span<const int> codes) {
    return codes.empty() ? 0 : *std::max_element(codes.begin(), codes.end()) + 1;
}

/// Entropy in bits of a probability vector (zeros ignored).
inline double entropy_of(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return std::max(h, 0.0);
}

/// Entropy in bits of the empirical distribution of a discrete column.
inline double entropy(std::span<const int> codes) {
    if (codes.empty()) throw UsageError("entropy of an empty column");
    std::vector<double> counts(static_cast<std::size_t>(cardinality(codes)), 0.0);
    for (int c : codes) counts[static_cast<std::size_t>(c)] += 1.0;
    for (auto& c : counts) c /= static_cast<double>(codes.size());
    return entropy_of(counts);
}

/// Joint distribution q(X, Y, Z), stored as p[(x * ny + y) * nz + z].
struct Joint3 {
    std::size_t nx = 0, ny = 0, nz = 0;
    std::vector<double> p;

    double operator()(std::size_t x, std::size_t y, std::size_t z) const { return p[(x * ny + y) * nz + z]; }

    std::vector<double> marginal_z() const {
        std::vector<double> out(nz, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) out[i % nz] += p[i];
        return out;
    }
    std::vector<double> marginal_xy() const {
        std::vector<double> out(nx * ny, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) out[i / nz] += p[i];
        return out;
    }
    double entropy_z() const { return entropy_of(marginal_z()); }

    /// I(X; Y | Z) in bits.
    double conditional_mi() const {
        std::vector<double> xz(nx * nz, 0.0), yz(ny * nz, 0.0);
        const auto qz = marginal_z();
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y)
                for (std::size_t z = 0; z < nz; ++z) {
                    xz[x * nz + z] += (*this)(x, y, z);
                    yz[y * nz + z] += (*this)(x, y, z);
                }
        double mi = 0.0;
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y)
                for (std::size_t z = 0; z < nz; ++z) {
                    const double q = (*this)(x, y, z);
                    if (q > 0.0) mi += q * std::log2(q * qz[z] / (xz[x * nz + z] * yz[y * nz + z]));
                }
        return std::max(mi, 0.0);
    }
};

struct LatentResult {
    Joint3 joint;
    double h_z = 0.0;
    double cmi = 0.0;
    /// false when no candidate met the conditional-independence bound; the
    /// returned latent is then the one with the smallest I(X;Y|Z).
    bool converged = true;
};

struct LatentSearchOptions {
    std::size_t k = 0; ///< latent cardinality; 0 means max(|X|, |Y|)
    std::size_t restarts = 20;
    std::size_t iters = 500;
    double beta = 10.0; ///< weight of I(X;Y|Z) against H(Z) on the first restart
    std::size_t beta_steps = 5; ///< restart r uses beta * 2^(r mod beta_steps)
    double cmi_tol = 1e-3;
};

namespace detail {

inline std::vector<double> empirical_joint(std::span<const int> x, std::span<const int> y, std::size_t nx, std::size_t ny) {
    std::vector<double> pxy(nx * ny, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) pxy[static_cast<std::size_t>(x[i]) * ny + static_cast<std::size_t>(y[i])] += 1.0;
    for (auto& v : pxy) v /= static_cast<double>(x.size());
    return pxy;
}

/// Alternating update q(z|x,y) ∝ q(z|x) q(z|y) / q(z)^(1-w), run until the
/// conditional stops moving. w = 1/beta is the entropy weight after dividing
/// the objective H(Z) + beta I(X;Y|Z) by beta.
inline void alternate(std::vector<double>& cond, const std::vector<double>& pxy, std::size_t nx, std::size_t ny, std::size_t nz,
                      double w, std::size_t iters) {
    std::vector<double> qz(nz), qzx(nx * nz), qzy(ny * nz), px(nx, 0.0), py(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            px[x] += pxy[x * ny + y];
            py[y] += pxy[x * ny + y];
        }
    for (std::size_t it = 0; it < iters; ++it) {
        std::fill(qz.begin(), qz.end(), 0.0);
        std::fill(qzx.begin(), qzx.end(), 0.0);
        std::fill(qzy.begin(), qzy.end(), 0.0);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y) {
                const double m = pxy[x * ny + y];
                if (m == 0.0) continue;
                for (std::size_t z = 0; z < nz; ++z) {
                    const double q = m * cond[(x * ny + y) * nz + z];
                    qz[z] += q;
                    qzx[x * nz + z] += q;
                    qzy[y * nz + z] += q;
                }
            }
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t z = 0; z < nz; ++z) qzx[x * nz + z] = px[x] > 0 ? qzx[x * nz + z] / px[x] : 0.0;
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t z = 0; z < nz; ++z) qzy[y * nz + z] = py[y] > 0 ? qzy[y * nz + z] / py[y] : 0.0;
        double delta = 0.0;
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y) {
                if (pxy[x * ny + y] == 0.0) continue;
                double* row = &cond[(x * ny + y) * nz];
                std::vector<double> next(nz, 0.0);
                double total = 0.0;
                for (std::size_t z = 0; z < nz; ++z) {
                    if (qz[z] <= 0.0) continue;
                    next[z] = qzx[x * nz + z] * qzy[y * nz + z] / std::pow(qz[z], 1.0 - w);
                    total += next[z];
                }
                if (!(total > 0.0)) continue;
                for (std::size_t z = 0; z < nz; ++z) {
                    next[z] /= total;
                    delta = std::max(delta, std::abs(next[z] - row[z]));
                    row[z] = next[z];
                }
            }
        if (delta < 1e-10) break;
    }
}

inline Joint3 joint_from_conditional(const std::vector<double>& cond, const std::vector<double>& pxy, std::size_t nx, std::size_t ny,
                                     std::size_t nz) {
    Joint3 j{nx, ny, nz, std::vector<double>(nx * ny * nz, 0.0)};
    for (std::size_t xy = 0; xy < nx * ny; ++xy)
        for (std::size_t z = 0; z < nz; ++z) j.p[xy * nz + z] = pxy[xy] * cond[xy * nz + z];
    return j;
}

} // namespace detail

/// Searches for a low-entropy latent Z that renders X and Y conditionally
/// independent. Candidates are the random-restart alternating-minimization
/// solutions over a doubling ladder of weights (each also polished with the entropy term switched off) plus the
/// trivial latents Z = const, Z = X and Z = Y where k allows; the lowest H(Z)
/// among candidates with I(X;Y|Z) <= cmi_tol is returned.
inline LatentResult latent_search(std::span<const int> x, std::span<const int> y, const LatentSearchOptions& opt, std::uint64_t seed) {
    if (x.size() != y.size()) throw UsageError("latent search needs columns of equal length");
    if (x.empty()) throw UsageError("latent search on empty columns");
    if (opt.restarts < 1) throw UsageError("latent search needs at least one restart");
    if (opt.beta <= 0.0) throw UsageError("latent search weight must be positive");
    const auto nx = static_cast<std::size_t>(cardinality(x));
    const auto ny = static_cast<std::size_t>(cardinality(y));
    const std::size_t k = opt.k == 0 ? std::max<std::size_t>({nx, ny, 2}) : opt.k;
    if (k < 2) throw UsageError("latent cardinality must be at least 2");
    const auto pxy = detail::empirical_joint(x, y, nx, ny);

    LatentResult best;
    bool have_feasible = false;
    double best_cmi = std::numeric_limits<double>::infinity();
    auto consider = [&](Joint3 j) {
        const double h = j.entropy_z();
        const double cmi = j.conditional_mi();
        const bool feasible = cmi <= opt.cmi_tol;
        if (feasible) {
            if (!have_feasible || h < best.h_z - 1e-12) {
                best = {std::move(j), h, cmi, true};
                have_feasible = true;
            }
        } else if (!have_feasible && cmi < best_cmi) {
            best = {std::move(j), h, cmi, false};
        }
        best_cmi = std::min(best_cmi, cmi);
    };

    {
        std::vector<double> cond(nx * ny * k, 0.0);
        for (std::size_t xy = 0; xy < nx * ny; ++xy) cond[xy * k] = 1.0;
        consider(detail::joint_from_conditional(cond, pxy, nx, ny, k));
        if (k >= nx) {
            std::fill(cond.begin(), cond.end(), 0.0);
            for (std::size_t a = 0; a < nx; ++a)
                for (std::size_t b = 0; b < ny; ++b) cond[(a * ny + b) * k + a] = 1.0;
            consider(detail::joint_from_conditional(cond, pxy, nx, ny, k));
        }
        if (k >= ny) {
            std::fill(cond.begin(), cond.end(), 0.0);
            for (std::size_t a = 0; a < nx; ++a)
                for (std::size_t b = 0; b < ny; ++b) cond[(a * ny + b) * k + b] = 1.0;
            consider(detail::joint_from_conditional(cond, pxy, nx, ny, k));
        }
    }

    Rng root(seed);
    for (std::size_t r = 0; r < opt.restarts; ++r) {
        auto rng = root.derive(static_cast<std::uint64_t>(r));
        std::vector<double> cond(nx * ny * k);
        for (std::size_t xy = 0; xy < nx * ny; ++xy) {
            double total = 0.0;
            for (std::size_t z = 0; z < k; ++z) total += cond[xy * k + z] = rng.uniform(0.01, 1.0);
            for (std::size_t z = 0; z < k; ++z) cond[xy * k + z] /= total;
        }
        const double beta = opt.beta * std::ldexp(1.0, static_cast<int>(r % std::max<std::size_t>(opt.beta_steps, 1)));
        detail::alternate(cond, pxy, nx, ny, k, 1.0 / beta, opt.iters);
        consider(detail::joint_from_conditional(cond, pxy, nx, ny, k));
        detail::alternate(cond, pxy, nx, ny, k, 0.0, opt.iters);
        consider(detail::joint_from_conditional(cond, pxy, nx, ny, k));
    }
    return best;
}

/// Entropy of the greedy minimum-entropy coupling of the given distributions:
/// repeatedly take the smallest of the per-distribution maxima as one state
/// of the shared exogenous variable.
inline double greedy_coupling_entropy(std::vector<std::vector<double>> dists) {
    if (dists.empty()) return 0.0;
    for (auto& d : dists) {
        const double total = std::accumulate(d.begin(), d.end(), 0.0);
        if (!(total > 0.0)) throw UsageError("coupling of an empty distribution");
        for (auto& v : d) v /= total;
    }
    std::vector<double> mass;
    double remaining = 1.0;
    while (remaining > 1e-12) {
        double r = std::numeric_limits<double>::infinity();
        std::vector<std::size_t> arg(dists.size());
        for (std::size_t i = 0; i < dists.size(); ++i) {
            arg[i] = static_cast<std::size_t>(std::max_element(dists[i].begin(), dists[i].end()) - dists[i].begin());
            r = std::min(r, dists[i][arg[i]]);
        }
        if (!(r > 1e-15)) break;
        for (std::size_t i = 0; i < dists.size(); ++i) dists[i][arg[i]] -= r;
        mass.push_back(r);
        remaining -= r;
    }
    return entropy_of(mass);
}

/// H(E) for the model `effect = f(cause, E)`: greedy coupling of p(effect | cause = c).
inline double exogenous_entropy(std::span<const int> cause, std::span<const int> effect) {
    const auto nc = static_cast<std::size_t>(cardinality(cause));
    const auto ne = static_cast<std::size_t>(cardinality(effect));
    std::vector<std::vector<double>> cond(nc, std::vector<double>(ne, 0.0));
    for (std::size_t i = 0; i < cause.size(); ++i) cond[static_cast<std::size_t>(cause[i])][static_cast<std::size_t>(effect[i])] += 1.0;
    std::erase_if(cond, [](const auto& d) { return std::accumulate(d.begin(), d.end(), 0.0) == 0.0; });
    return greedy_coupling_entropy(std::move(cond));
}

enum class EdgeKind { forward, backward, bidirected };

inline const char* to_string(EdgeKind k) {
    return k == EdgeKind::forward ? "forward" : k == EdgeKind::backward ? "backward" : "bidirected";
}

struct EdgeResolution {
    EdgeKind kind = EdgeKind::forward;
    double h_x = 0.0, h_y = 0.0;
    double h_latent = 0.0;
    double threshold = 0.0;
    double h_e_forward = 0.0;  ///< H(E) for y = f(x, E)
    double h_e_backward = 0.0; ///< H(E~) for x = g(y, E~)
    bool tie = false;
    bool latent_converged = true;
    /// |H(E) - H(E~)|; how confident the direction is.
    double gap() const { return std::abs(h_e_forward - h_e_backward); }
};

struct ResolveOptions {
    std::size_t bins = 5;
    double theta = 0.8;
    bool allow_forward = true;
    bool allow_backward = true;
    bool allow_bidirected = true;
    LatentSearchOptions latent{};
};

/// Resolves an undetermined edge between two discretized columns: a latent
/// with entropy below theta * min(H(X), H(Y)) explains the dependence as
/// confounding; otherwise the direction with the smaller exogenous entropy
/// wins. Exact ties (within 1e-9) go to x -> y when x sorts first by name,
/// which callers pass via `x_first`.
inline EdgeResolution resolve_codes(std::span<const int> x, std::span<const int> y, const ResolveOptions& opt, std::uint64_t seed,
                                    bool x_first = true) {
    if (!opt.allow_forward && !opt.allow_backward && !opt.allow_bidirected) throw UsageError("edge resolution with every outcome excluded");
    EdgeResolution res;
    res.h_x = entropy(x);
    res.h_y = entropy(y);
    res.threshold = opt.theta * std::min(res.h_x, res.h_y);
    res.h_e_forward = exogenous_entropy(x, y);
    res.h_e_backward = exogenous_entropy(y, x);
    if (opt.allow_bidirected) {
        const auto latent = latent_search(x, y, opt.latent, seed);
        res.h_latent = latent.h_z;
        res.latent_converged = latent.converged;
        if ((latent.converged && latent.h_z < res.threshold) || (!opt.allow_forward && !opt.allow_backward)) {
            res.kind = EdgeKind::bidirected;
            return res;
        }
    }
    if (!opt.allow_backward) {
        res.kind = EdgeKind::forward;
    } else if (!opt.allow_forward) {
        res.kind = EdgeKind::backward;
    } else if (std::abs(res.h_e_forward - res.h_e_backward) <= 1e-9) {
        res.tie = true;
        res.kind = x_first ? EdgeKind::forward : EdgeKind::backward;
    } else {
        res.kind = res.h_e_forward < res.h_e_backward ? EdgeKind::forward : EdgeKind::backward;
    }
    return res;
}

inline EdgeResolution resolve_edge(const Dataset& ds, const std::string& x, const std::string& y, const ResolveOptions& opt,
                                   std::uint64_t seed) {
    const auto xv = ds.values(x);
    const auto yv = ds.values(y);
    const auto xc = discretize(xv, opt.bins);
    const auto yc = discretize(yv, opt.bins);
    return resolve_codes(xc, yc, opt, seed, x < y);
}

} // namespace cure::causal
