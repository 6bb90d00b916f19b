#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cure/error.hpp"
#include "cure/gp/fit.hpp"
#include "cure/mobo/constraint.hpp"
#include "cure/mobo/ehvi.hpp"
#include "cure/mobo/pareto.hpp"
#include "cure/rng.hpp"
#include "cure/space.hpp"
#include "cure/stats.hpp"

namespace cure::mobo {

struct ObjectiveSpec {
    std::vector<std::string> objectives; ///< minimized
    std::vector<double> preferences;     ///< per-objective fault limits
    std::vector<double> reference;       ///< hypervolume reference point
    std::string constraint = "h";
    double th1 = 0.25;
    double th2 = 0.18;
    double theta = 0.8;

    void check() const {
        if (objectives.empty()) throw UsageError("at least one objective is required");
        if (reference.size() != objectives.size()) throw UsageError("reference point must have one entry per objective");
        if (!preferences.empty() && preferences.size() != objectives.size())
            throw UsageError("preference thresholds must have one entry per objective");
        if (!(th2 < th1)) throw UsageError("hard threshold Th2 must lie below soft threshold Th1");
    }

    nlohmann::json to_json() const {
        return {{"objectives", objectives}, {"preferences", preferences}, {"reference", reference}, {"constraint", constraint},
                {"th1", th1},               {"th2", th2},                 {"theta", theta}};
    }
};

enum class Phase { init, bo };

inline const char* to_string(Phase p) { return p == Phase::init ? "init" : "bo"; }

struct Outcome {
    std::vector<double> objectives;
    double h = 0.0;
    bool success = true;
};

/// Black-box system under test; must be deterministic given the trial seed.
using Evaluator = std::function<Outcome(const Configuration&, std::uint64_t trial_seed)>;

struct Trial {
    Configuration config;
    std::vector<double> objectives;
    double h = 0.0;
    bool success = false;
    double alpha = 0.0;
    std::size_t iter = 0;
    Phase phase = Phase::init;
    bool eval_failed = false;
};

/// All trials plus the current nondominated set among successful trials.
class ParetoArchive {
public:
    void add(Trial t) {
        trials_.push_back(std::move(t));
        std::vector<Point> pts;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < trials_.size(); ++i)
            if (trials_[i].success) {
                pts.push_back(trials_[i].objectives);
                idx.push_back(i);
            }
        front_.clear();
        for (auto k : pareto_indices(pts)) front_.push_back(idx[k]);
    }
    const std::vector<Trial>& trials() const { return trials_; }
    const std::vector<std::size_t>& front() const { return front_; }
    std::vector<Point> front_points() const {
        std::vector<Point> out;
        for (auto i : front_) out.push_back(trials_[i].objectives);
        return out;
    }
    double hypervolume(const Point& ref) const { return mobo::hypervolume(front_points(), ref); }

private:
    std::vector<Trial> trials_;
    std::vector<std::size_t> front_;
};

struct IterationStats {
    double hv = 0.0;
    double efficiency_literal = 0.0;
    double efficiency_alt = 0.0;
    std::size_t violations = 0; ///< cumulative trials with h below Th1
    std::size_t failures = 0;   ///< cumulative unsuccessful trials
    std::size_t faults = 0;     ///< cumulative objective-limit faults
};

struct TrialLog {
    std::vector<std::string> option_names;
    ConfigSpace space;
    ObjectiveSpec spec;
    std::vector<Trial> trials;
    std::vector<IterationStats> stats;
    nlohmann::json hyperparameters = nlohmann::json::array();

    void write_csv(std::ostream& out) const {
        out << "iter,phase";
        for (const auto& n : option_names) out << ',' << n;
        for (const auto& o : spec.objectives) out << ',' << o;
        out << ",h,alpha,success,hv,efficiency_literal,efficiency_alt\n";
        for (std::size_t i = 0; i < trials.size(); ++i) {
            const auto& t = trials[i];
            out << t.iter << ',' << to_string(t.phase);
            for (const auto& n : option_names) {
                const auto& v = t.config.at(n);
                out << ',' << (space.find(n) ? format_value(space.at(n), v) : format_double(to_numeric(v)));
            }
            for (double v : t.objectives) out << ',' << format_double(v);
            out << ',' << format_double(t.h) << ',' << format_double(t.alpha) << ',' << (t.success ? 1 : 0) << ','
                << format_double(stats[i].hv) << ',' << format_double(stats[i].efficiency_literal) << ','
                << format_double(stats[i].efficiency_alt) << '\n';
        }
    }

    std::vector<double> hv_series() const {
        std::vector<double> out;
        for (const auto& s : stats) out.push_back(s.hv);
        return out;
    }
};

struct BoOptions {
    std::size_t n_init = 15;
    std::size_t budget = 100;
    std::size_t relearn_every = 10;
    std::size_t pool = 1000;
    double perturb_sd = 0.1;
    double resample_prob = 0.2;
    gp::FitOptions fit{};
    std::uint64_t seed = 0;

    void check() const {
        if (n_init < 2) throw UsageError("at least two initial trials are required");
        if (budget < n_init) throw UsageError("budget must cover the initial trials");
        if (relearn_every < 1) throw UsageError("relearn cadence must be at least 1");
        if (pool < 1) throw UsageError("candidate pool must hold at least one configuration");
    }
};

/// One GP per objective followed by the constraint-metric GP.
struct SurrogateSet {
    std::vector<gp::GpModel> models;
};

/// Candidates: `pool` uniform draws from the reduced space, then one
/// perturbation of every front member (numeric options jittered by
/// perturb_sd of their range, categorical ones redrawn with resample_prob).
/// Returns the candidate maximizing EHVI times the probability that the
/// constraint metric clears Th2; the first maximum wins ties.
inline Configuration propose_next(const SurrogateSet& s, const ReducedSpace& space, const ParetoArchive& archive, const ObjectiveSpec& spec,
                                  std::size_t pool, Rng& rng, double perturb_sd = 0.1, double resample_prob = 0.2) {
    if (pool < 1) throw UsageError("candidate pool must hold at least one configuration");
    if (s.models.size() != spec.objectives.size() + 1) throw UsageError("one surrogate per objective plus one for the constraint is required");
    auto candidates = space.sample(pool, rng);
    for (auto i : archive.front()) {
        Configuration c = archive.trials()[i].config;
        for (const auto& name : space.selected()) {
            const auto& def = space.parent().at(name);
            if (def.has_levels()) {
                if (rng.bernoulli(resample_prob)) c.set(name, sample_value(def, rng));
            } else {
                const double x = std::clamp(to_numeric(c.at(name)) + rng.normal(0.0, perturb_sd * (def.hi - def.lo)), def.lo, def.hi);
                c.set(name, from_numeric(def, def.kind == OptionKind::integer ? std::round(x) : x));
            }
        }
        candidates.push_back(std::move(c));
    }
    if (candidates.size() == 1) return candidates.front();

    const auto& layout = s.models.front().layout();
    const Eigen::MatrixXd x = layout.encode(candidates);
    std::vector<gp::Prediction> pred;
    for (const auto& m : s.models) pred.push_back(m.posterior(x));
    const auto front = archive.front_points();
    const auto m = spec.objectives.size();
    std::size_t best = 0;
    double best_score = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Point mean(m), sd(m);
        for (std::size_t k = 0; k < m; ++k) {
            mean[k] = pred[k].mean(i);
            sd[k] = std::sqrt(pred[k].variance(i));
        }
        const double mu_h = pred[m].mean(i);
        const double sd_h = std::sqrt(pred[m].variance(i));
        const double feasible = sd_h > 0.0 ? normal_cdf((mu_h - spec.th2) / sd_h) : (mu_h >= spec.th2 ? 1.0 : 0.0);
        const double score = ehvi(mean, sd, front, spec.reference) * feasible;
        if (score > best_score) {
            best_score = score;
            best = static_cast<std::size_t>(i);
        }
    }
    return candidates[best];
}

struct OptimizationResult {
    TrialLog log;
    std::vector<std::size_t> front; ///< indices into log.trials
    ReducedSpace space;
};

namespace detail {

inline IterationStats summarize(const ParetoArchive& archive, const ObjectiveSpec& spec) {
    IterationStats s;
    s.hv = archive.hypervolume(spec.reference);
    std::vector<bool> ok;
    for (const auto& t : archive.trials()) {
        ok.push_back(t.success);
        if (t.h < spec.th1) ++s.violations;
        if (!t.success) ++s.failures;
        if (!spec.preferences.empty() && fault_predicate(t.objectives, spec.preferences)) ++s.faults;
    }
    std::tie(s.efficiency_literal, s.efficiency_alt) = efficiency(ok);
    return s;
}

} // namespace detail

/// Phase II: n_init random trials in the reduced space, then model-based
/// proposals until the budget is spent. Hyperparameters are refit on every
/// relearn_every-th model-based iteration and reused in between.
inline OptimizationResult run_optimization(const ReducedSpace& space, const Evaluator& evaluate, const ObjectiveSpec& spec, const BoOptions& opt) {
    spec.check();
    opt.check();
    const Rng root(opt.seed);
    Rng init_rng = root.derive("init");
    Rng propose_rng = root.derive("propose");
    const Rng gp_root = root.derive("gp");
    const Rng eval_root = root.derive("eval");

    OptimizationResult res;
    res.space = space;
    res.log.option_names = space.parent().names();
    res.log.space = space.parent();
    res.log.spec = spec;
    ParetoArchive archive;

    auto run_trial = [&](const Configuration& c, Phase phase) {
        Trial t;
        t.config = c;
        t.iter = archive.trials().size();
        t.phase = phase;
        try {
            auto out = evaluate(c, eval_root.derive(static_cast<std::uint64_t>(t.iter)).seed());
            if (out.objectives.size() != spec.objectives.size()) throw DataError("evaluator returned the wrong number of objectives");
            for (double v : out.objectives)
                if (!std::isfinite(v)) throw DataError("evaluator returned a non-finite objective");
            if (!std::isfinite(out.h)) throw DataError("evaluator returned a non-finite constraint metric");
            t.objectives = std::move(out.objectives);
            t.h = out.h;
            t.success = out.success;
        } catch (const std::exception&) {
            // failed evaluations count as worst case and the loop goes on
            t.objectives = spec.reference;
            t.h = spec.th2;
            t.success = false;
            t.eval_failed = true;
        }
        t.alpha = penalty(t.h, spec.th1, spec.th2);
        archive.add(t);
        res.log.trials.push_back(std::move(t));
        res.log.stats.push_back(detail::summarize(archive, spec));
    };

    for (const auto& c : space.sample(opt.n_init, init_rng)) run_trial(c, Phase::init);

    const gp::InputLayout layout(space.parent(), space.selected());
    const auto m = spec.objectives.size();
    SurrogateSet surrogates;
    for (std::size_t t = 0; archive.trials().size() < opt.budget; ++t) {
        std::vector<Configuration> cs;
        for (const auto& tr : archive.trials()) cs.push_back(tr.config);
        const Eigen::MatrixXd x = layout.encode(cs);
        std::vector<Eigen::VectorXd> ys(m + 1, Eigen::VectorXd(x.rows()));
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const auto& tr = archive.trials()[static_cast<std::size_t>(i)];
            for (std::size_t k = 0; k < m; ++k) ys[k](i) = tr.objectives[k];
            ys[m](i) = tr.h;
        }
        if (t % opt.relearn_every == 0 || surrogates.models.empty()) {
            nlohmann::json snap{{"iter", archive.trials().size()}, {"models", nlohmann::json::array()}};
            const auto gp_rng = gp_root.derive(static_cast<std::uint64_t>(t));
            std::vector<gp::GpModel> fitted;
            for (std::size_t k = 0; k <= m; ++k) {
                auto [p0, m0] = surrogates.models.empty() ? gp::default_init(layout, ys[k])
                                                          : std::pair{surrogates.models[k].params(), surrogates.models[k].mean_function()};
                auto fit = gp::fit_hyperparams(layout, x, ys[k], p0, m0, gp_rng.derive(static_cast<std::uint64_t>(k)).seed(), opt.fit);
                auto j = gp::params_to_json(fit.model.params(), fit.model.mean_function());
                j["lml"] = fit.lml;
                j["warning"] = fit.warning;
                snap["models"].push_back(std::move(j));
                fitted.push_back(std::move(fit.model));
            }
            surrogates.models = std::move(fitted);
            res.log.hyperparameters.push_back(std::move(snap));
        } else {
            for (std::size_t k = 0; k <= m; ++k) surrogates.models[k] = surrogates.models[k].with_data(x, ys[k]);
        }
        run_trial(propose_next(surrogates, space, archive, spec, opt.pool, propose_rng, opt.perturb_sd, opt.resample_prob), Phase::bo);
    }
    res.front = archive.front();
    return res;
}

} // namespace cure::mobo
