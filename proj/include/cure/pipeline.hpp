#pragma once

#include <string>
#include <vector>

#include "cure/causal/learn.hpp"
#include "cure/effects.hpp"
#include "cure/mobo/optimizer.hpp"

namespace cure {

struct CureOptions {
    std::size_t top_k = 5;
    causal::LearnOptions learn{};
    EffectOptions effects{};
    mobo::BoOptions bo{};
};

struct CureResult {
    causal::Admg model;
    AceTable ace;
    Reduction reduction;
    mobo::OptimizationResult optimization;
};

/// Targets ranked for reduction: the objectives, the constraint metric and
/// the success flag, whichever the dataset has.
inline std::vector<std::string> ranking_targets(const Dataset& ds, const mobo::ObjectiveSpec& spec) {
    std::vector<std::string> out = spec.objectives;
    if (ds.has(spec.constraint)) out.push_back(spec.constraint);
    for (const auto& n : ds.names_with_role(Role::success_flag)) out.push_back(n);
    return out;
}

/// Reduction from an already learned model.
inline Reduction reduce_with_model(const Dataset& source, const causal::Admg& model, const ConfigSpace& space, const mobo::ObjectiveSpec& spec,
                                   std::size_t top_k, const EffectOptions& eff, AceTable* table_out = nullptr) {
    auto table = ace_table(source, model, ranking_targets(source, spec), eff);
    auto r = rank_and_reduce(table, top_k, space);
    if (table_out) *table_out = std::move(table);
    return r;
}

/// Phase I on the source data (structure, effects, top-K reduction), then
/// Phase II on the target system inside the reduced space.
inline CureResult run_cure(const Dataset& source, const mobo::Evaluator& target, const ConfigSpace& space, const mobo::ObjectiveSpec& spec,
                           const CureOptions& opt) {
    CureResult res;
    res.model = causal::learn_causal_model(source, opt.learn).graph;
    res.reduction = reduce_with_model(source, res.model, space, spec, opt.top_k, opt.effects, &res.ace);
    res.optimization = mobo::run_optimization(res.reduction.space, target, spec, opt.bo);
    return res;
}

} // namespace cure
