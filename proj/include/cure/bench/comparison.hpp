#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cure/bench/env.hpp"
#include "cure/bench/ridge.hpp"
#include "cure/pipeline.hpp"

namespace cure::bench {

enum class Method { cure, mobo, ridge_mobo };

inline const char* to_string(Method m) {
    switch (m) {
    case Method::cure: return "cure";
    case Method::mobo: return "mobo";
    case Method::ridge_mobo: return "ridge_mobo";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    if (s == "cure") return Method::cure;
    if (s == "mobo") return Method::mobo;
    if (s == "ridge_mobo" || s == "ridge+mobo" || s == "ridge") return Method::ridge_mobo;
    throw UsageError("unknown method '" + std::string(s) + "'");
}

struct ComparisonOptions {
    int level = 1;
    std::vector<std::uint64_t> seeds{0};
    std::vector<Method> methods{Method::cure, Method::mobo, Method::ridge_mobo};
    std::size_t source_rows = 1000;
    std::size_t top_k = 5;
    causal::LearnOptions learn{};
    EffectOptions effects{};
    mobo::BoOptions bo{};
    mobo::ObjectiveSpec spec = objective_spec();
    std::size_t ridge_folds = 5;

    nlohmann::json to_json() const {
        std::vector<std::string> ms;
        for (auto m : methods) ms.push_back(to_string(m));
        return {{"level", level},
                {"seeds", seeds},
                {"methods", ms},
                {"source_rows", source_rows},
                {"top_k", top_k},
                {"alpha", learn.alpha},
                {"bins", learn.bins},
                {"budget", bo.budget},
                {"init_trials", bo.n_init},
                {"relearn_every", bo.relearn_every},
                {"pool", bo.pool},
                {"gp_restarts", bo.fit.restarts},
                {"objectives", spec.to_json()}};
    }
};

struct RunRecord {
    Method method = Method::cure;
    std::uint64_t seed = 0;
    std::vector<std::string> selected;
    mobo::TrialLog log;
    double final_hv = 0.0;
    double efficiency_literal = 0.0;
    double efficiency_alt = 0.0;
    std::size_t violations = 0;
    std::size_t failures = 0;
    std::size_t faults = 0;

    /// First trial count at which the HV series reaches `level`, or 0 if never.
    std::size_t trials_to_reach(double level) const {
        const auto& s = log.stats;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i].hv >= level) return i + 1;
        return 0;
    }
};

/// Seeds of every stream a comparison run draws from.
struct RunSeeds {
    std::uint64_t scenario, source, optimize;
    explicit RunSeeds(std::uint64_t seed) {
        const Rng root(seed);
        scenario = root.derive("scenario").seed();
        source = root.derive("source").seed();
        optimize = root.derive("optimize").seed();
    }
};

inline RunRecord finish_record(Method m, std::uint64_t seed, std::vector<std::string> selected, mobo::OptimizationResult res) {
    RunRecord r;
    r.method = m;
    r.seed = seed;
    r.selected = std::move(selected);
    r.log = std::move(res.log);
    if (!r.log.stats.empty()) {
        const auto& last = r.log.stats.back();
        r.final_hv = last.hv;
        r.efficiency_literal = last.efficiency_literal;
        r.efficiency_alt = last.efficiency_alt;
        r.violations = last.violations;
        r.failures = last.failures;
        r.faults = last.faults;
    }
    return r;
}

/// One method on one seed: CURE learns on the source environment's
/// observational data and optimizes the target; MOBO searches the full
/// space; ridge+MOBO searches the ridge-screened space.
inline RunRecord run_method(Method method, std::uint64_t seed, const ComparisonOptions& opt) {
    const RunSeeds seeds(seed);
    const auto scenario = make_scenario(opt.level, seeds.scenario);
    const auto& space = scenario.target.space();
    auto bo = opt.bo;
    bo.seed = seeds.optimize;
    const auto evaluator = scenario.target.evaluator();
    switch (method) {
    case Method::mobo: {
        auto full = ReducedSpace::full(space);
        return finish_record(method, seed, full.selected(), mobo::run_optimization(full, evaluator, opt.spec, bo));
    }
    case Method::cure: {
        const auto source = generate_observational(scenario.source, opt.source_rows, seeds.source);
        CureOptions co{opt.top_k, opt.learn, opt.effects, bo};
        co.learn.seed = seed;
        auto res = run_cure(source, evaluator, space, opt.spec, co);
        return finish_record(method, seed, res.reduction.selected, std::move(res.optimization));
    }
    case Method::ridge_mobo: {
        const auto source = generate_observational(scenario.source, opt.source_rows, seeds.source);
        const auto screen = ridge_screen(source, ranking_targets(source, opt.spec), opt.top_k, space, opt.ridge_folds);
        ReducedSpace reduced(space, screen.selected);
        return finish_record(method, seed, screen.selected, mobo::run_optimization(reduced, evaluator, opt.spec, bo));
    }
    }
    throw UsageError("unknown method");
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct ComparisonReport {
    ComparisonOptions options;
    std::vector<RunRecord> runs;

    const RunRecord& find(Method m, std::uint64_t seed) const {
        for (const auto& r : runs)
            if (r.method == m && r.seed == seed) return r;
        throw UsageError(std::string("no run for method ") + to_string(m));
    }

    /// Per-method medians and head-to-head counts of seeds where the first
    /// method's final HV is at least the second's.
    nlohmann::json summary() const {
        nlohmann::json j;
        j["options"] = options.to_json();
        j["methods"] = nlohmann::json::object();
        for (auto m : options.methods) {
            std::vector<double> hv, el, ea, viol, fail, faults, sel;
            for (const auto& r : runs) {
                if (r.method != m) continue;
                hv.push_back(r.final_hv);
                el.push_back(r.efficiency_literal);
                ea.push_back(r.efficiency_alt);
                viol.push_back(static_cast<double>(r.violations));
                fail.push_back(static_cast<double>(r.failures));
                faults.push_back(static_cast<double>(r.faults));
                sel.push_back(static_cast<double>(r.selected.size()));
            }
            j["methods"][to_string(m)] = {{"median_final_hv", median(hv)},
                                          {"median_efficiency_literal", median(el)},
                                          {"median_efficiency_alt", median(ea)},
                                          {"median_violations", median(viol)},
                                          {"median_failures", median(fail)},
                                          {"median_faults", median(faults)},
                                          {"median_selected", median(sel)},
                                          {"final_hv", hv}};
        }
        j["wins"] = nlohmann::json::object();
        for (auto a : options.methods)
            for (auto b : options.methods) {
                if (a == b) continue;
                int wins = 0;
                for (auto seed : options.seeds)
                    if (find(a, seed).final_hv >= find(b, seed).final_hv) ++wins;
                j["wins"][std::string(to_string(a)) + "_vs_" + to_string(b)] = wins;
            }
        return j;
    }

    /// Trial logs, summary.json and plot-ready CSVs under `dir`.
    void write(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir / "runs");
        for (const auto& r : runs) {
            std::ofstream out(dir / "runs" / (std::string(to_string(r.method)) + "_seed" + std::to_string(r.seed) + ".csv"));
            r.log.write_csv(out);
        }
        std::ofstream(dir / "summary.json") << summary().dump(2) << '\n';
        std::ofstream hv(dir / "hv_vs_iteration.csv");
        std::ofstream eff(dir / "efficiency_vs_iteration.csv");
        std::ofstream bars(dir / "violations.csv");
        hv << "method,seed,iter,hv\n";
        eff << "method,seed,iter,efficiency_literal,efficiency_alt\n";
        bars << "method,seed,violations,failures,faults,selected\n";
        for (const auto& r : runs) {
            for (std::size_t i = 0; i < r.log.stats.size(); ++i) {
                const auto& s = r.log.stats[i];
                hv << to_string(r.method) << ',' << r.seed << ',' << i << ',' << format_double(s.hv) << '\n';
                eff << to_string(r.method) << ',' << r.seed << ',' << i << ',' << format_double(s.efficiency_literal) << ','
                    << format_double(s.efficiency_alt) << '\n';
            }
            bars << to_string(r.method) << ',' << r.seed << ',' << r.violations << ',' << r.failures << ',' << r.faults << ','
                 << r.selected.size() << '\n';
        }
    }
};

inline ComparisonReport run_comparison(const ComparisonOptions& opt) {
    if (opt.seeds.empty()) throw UsageError("comparison needs at least one seed");
    if (opt.methods.empty()) throw UsageError("comparison needs at least one method");
    ComparisonReport rep;
    rep.options = opt;
    for (auto seed : opt.seeds)
        for (auto m : opt.methods) rep.runs.push_back(run_method(m, seed, opt));
    return rep;
}

} // namespace cure::bench
