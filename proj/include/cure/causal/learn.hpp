#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cure/causal/entropic.hpp"
#include "cure/causal/graph.hpp"
#include "cure/causal/orient.hpp"
#include "cure/causal/skeleton.hpp"
#include "cure/data.hpp"
#include "cure/rng.hpp"

namespace cure::causal {

struct LearnOptions {
    double alpha = 0.05;
    std::size_t bins = 5;
    std::size_t max_cond = 3;
    double theta = 0.8;
    std::uint64_t seed = 0;
    LatentSearchOptions latent{};
};

struct LearnDiagnostics {
    std::size_t ci_tests = 0;
    std::size_t skeleton_edges = 0;
    std::size_t entropic_resolutions = 0;
    std::size_t ties = 0;
    std::size_t cycle_repairs = 0;
    std::size_t unconverged_latents = 0;
    std::vector<std::string> notes;

    nlohmann::json to_json() const {
        return {{"ci_tests", ci_tests},
                {"skeleton_edges", skeleton_edges},
                {"entropic_resolutions", entropic_resolutions},
                {"ties", ties},
                {"cycle_repairs", cycle_repairs},
                {"unconverged_latents", unconverged_latents},
                {"notes", notes}};
    }
};

struct LearnResult {
    Admg graph;
    Pag pag{Skeleton{}};
    LearnDiagnostics diagnostics;

    nlohmann::json meta(const LearnOptions& opt) const {
        nlohmann::json m{{"alpha", opt.alpha}, {"bins", opt.bins}, {"seed", opt.seed}, {"max_cond", opt.max_cond}};
        m["directed_edges"] = graph.directed().size();
        m["bidirected_edges"] = graph.bidirected().size();
        m["diagnostics"] = diagnostics.to_json();
        return m;
    }
};

/// Skeleton -> PAG -> ADMG. Endpoints the orientation rules leave open are
/// settled entropically; a directed cycle is broken by demoting its least
/// confident edge to bidirected.
inline LearnResult learn_causal_model(const Dataset& ds, const StructuralConstraints& constraints, const LearnOptions& opt = {}) {
    if (ds.cols() < 2) throw DataError("causal learning needs at least two variables");
    if (ds.rows() < 50) throw DataError("causal learning needs at least 50 rows");
    const auto vertices = ds.names();
    LearnResult out;
    const auto skeleton = learn_skeleton(ds, vertices, constraints, {opt.alpha, opt.max_cond});
    out.diagnostics.ci_tests = skeleton.tests_run;
    out.diagnostics.skeleton_edges = skeleton.edge_count();
    out.pag = orient_pag(skeleton, constraints);
    const auto& pag = out.pag;

    std::map<std::size_t, std::vector<int>> codes;
    auto codes_of = [&](std::size_t v) -> const std::vector<int>& {
        auto it = codes.find(v);
        if (it == codes.end()) it = codes.emplace(v, discretize(ds.values(vertices[v]), opt.bins)).first;
        return it->second;
    };

    Admg g(vertices);
    // confidence of each directed edge; rule-derived edges are never demoted first
    std::map<std::pair<std::size_t, std::size_t>, double> gap;
    const Rng root(opt.seed);

    for (const auto& [a, b, at_a, at_b] : pag.edges()) {
        const auto& na = vertices[a];
        const auto& nb = vertices[b];
        auto add = [&](std::size_t from, std::size_t to, double confidence) {
            g.add_directed(from, to);
            gap[{from, to}] = confidence;
        };
        const double inf = std::numeric_limits<double>::infinity();
        if (at_a == Mark::tail && at_b == Mark::arrow) add(a, b, inf);
        else if (at_a == Mark::arrow && at_b == Mark::tail) add(b, a, inf);
        else if (at_a == Mark::arrow && at_b == Mark::arrow) g.add_bidirected(a, b);
        else if (at_a == Mark::tail && at_b != Mark::arrow) add(a, b, inf);
        else if (at_b == Mark::tail && at_a != Mark::arrow) add(b, a, inf);
        else {
            ResolveOptions ro;
            ro.bins = opt.bins;
            ro.theta = opt.theta;
            ro.latent = opt.latent;
            // an arrowhead already in place rules out the opposite direction
            ro.allow_forward = at_a != Mark::arrow && !constraints.forbids_direction(na, nb);
            ro.allow_backward = at_b != Mark::arrow && !constraints.forbids_direction(nb, na);
            ro.allow_bidirected = !constraints.is_source(na) && !constraints.is_source(nb);
            if (!ro.allow_forward && !ro.allow_backward && !ro.allow_bidirected) {
                out.diagnostics.notes.push_back("edge " + na + " - " + nb + " admits no orientation; dropped");
                continue;
            }
            const auto seed = root.derive(na + "|" + nb).seed();
            const auto r = resolve_codes(codes_of(a), codes_of(b), ro, seed, na < nb);
            ++out.diagnostics.entropic_resolutions;
            if (r.tie) {
                ++out.diagnostics.ties;
                out.diagnostics.notes.push_back("tie on " + na + " - " + nb + " broken by name order");
            }
            if (!r.latent_converged) ++out.diagnostics.unconverged_latents;
            if (r.kind == EdgeKind::bidirected) g.add_bidirected(a, b);
            else if (r.kind == EdgeKind::forward) add(a, b, r.gap());
            else add(b, a, r.gap());
        }
    }

    for (auto cycle = g.find_cycle(); !cycle.empty(); cycle = g.find_cycle()) {
        std::pair<std::size_t, std::size_t> weakest{cycle[0], cycle[1 % cycle.size()]};
        double lowest = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            const std::pair<std::size_t, std::size_t> e{cycle[i], cycle[(i + 1) % cycle.size()]};
            const double v = gap.count(e) ? gap[e] : std::numeric_limits<double>::infinity();
            if (!found || v < lowest) {
                weakest = e;
                lowest = v;
                found = true;
            }
        }
        g.remove_directed(weakest.first, weakest.second);
        g.add_bidirected(weakest.first, weakest.second);
        ++out.diagnostics.cycle_repairs;
        out.diagnostics.notes.push_back("cycle broken at " + vertices[weakest.first] + " -> " + vertices[weakest.second]);
    }
    out.graph = std::move(g);
    return out;
}

inline LearnResult learn_causal_model(const Dataset& ds, const LearnOptions& opt = {}) {
    return learn_causal_model(ds, StructuralConstraints::from_roles(ds), opt);
}

} // namespace cure::causal
