// cure: causal dimension reduction + constrained multi-objective BO, from the command line.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cure/cure.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cure::cli {

enum Exit { ok = 0, internal = 1, usage = 2, data = 3, numerical = 4 };

/// Names the pipeline stage in error messages.
struct Stage {
    std::string name = "parse";
};

inline Stage& stage() {
    static Stage s;
    return s;
}

inline void set_stage(std::string s) { stage().name = std::move(s); }

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

/// Objective spec derived from dataset roles, with bench thresholds as defaults.
mobo::ObjectiveSpec spec_from_roles(const RoleMap& roles) {
    auto spec = bench::objective_spec();
    std::vector<std::string> objectives;
    std::string constraint;
    for (const auto& [name, role] : roles) {
        if (role == Role::objective) objectives.push_back(name);
        if (role == Role::constraint_metric) constraint = name;
    }
    if (!objectives.empty()) spec.objectives = objectives;
    if (!constraint.empty()) spec.constraint = constraint;
    return spec;
}

json reduction_to_json(const Reduction& r) {
    json j;
    j["selected"] = r.selected;
    j["pinned"] = json::object();
    const auto& parent = r.space.parent();
    for (const auto& o : parent.options())
        if (!r.space.is_selected(o.name)) j["pinned"][o.name] = format_value(o, r.space.pinned().at(o.name));
    j["top"] = r.top;
    j["degenerate_targets"] = r.degenerate_targets;
    j["space"] = config_spec_to_json(ConfigSpec{std::make_shared<const ConfigSpace>(parent), {}});
    return j;
}

ReducedSpace reduction_from_json(const json& j) {
    try {
        const auto spec = config_spec_from_json(j.at("space"));
        return ReducedSpace(*spec.space, j.at("selected").get<std::vector<std::string>>());
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed reduced-space JSON: ") + e.what());
    }
}

struct Common {
    std::string out_dir;
    std::uint64_t seed = 0;
};

void add_out(CLI::App* cmd, Common& c) {
    cmd->add_option("--out-dir,--out_dir,-o", c.out_dir, "Output directory")->required();
    cmd->add_option("--seed", c.seed, "Root seed; every random stream derives from it");
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
    Common c;
    int level = 0;
    std::size_t rows = 1000;
    bool target = false;
};

void run_generate(const GenerateArgs& a, RunManifest& m) {
    m.flag("level", a.level);
    m.flag("rows", a.rows);
    m.flag("target", a.target);
    m.seed(a.c.seed);
    m.begin();
    set_stage("generate");
    const bench::RunSeeds seeds(a.c.seed);
    const auto sc = bench::make_scenario(a.level, seeds.scenario);
    const auto& env = a.target ? sc.target : sc.source;
    const auto ds = bench::generate_observational(env, a.rows, seeds.source);
    set_stage("write");
    const fs::path out(a.c.out_dir);
    save_dataset(ds, (out / "data.csv").string());
    write_text(out / "config_space.json", config_spec_to_json(ConfigSpec{env.space_ptr(), env.roles()}).dump(2) + "\n");
    json envj = env.to_json();
    envj["level"] = a.level;
    envj["ground_truth"] = env.ground_truth().to_json();
    write_text(out / "env.json", envj.dump(2) + "\n");
}

// ---- learn ------------------------------------------------------------------

struct LearnArgs {
    Common c;
    std::string train_data, spec;
    double alpha = 0.05;
    std::size_t bins = 5, max_cond = 3;
};

void run_learn(const LearnArgs& a, RunManifest& m) {
    m.flag("alpha", a.alpha);
    m.flag("bins", a.bins);
    m.flag("max_cond", a.max_cond);
    m.seed(a.c.seed);
    set_stage("load");
    m.input(a.spec);
    m.input(a.train_data);
    m.begin();
    const auto cs = load_config_spec(a.spec);
    const auto ds = load_dataset(a.train_data, cs.space, cs.roles);
    set_stage("learn");
    causal::LearnOptions lo;
    lo.alpha = a.alpha;
    lo.bins = a.bins;
    lo.max_cond = a.max_cond;
    lo.seed = a.c.seed;
    const auto res = causal::learn_causal_model(ds, lo);
    set_stage("write");
    write_text(fs::path(a.c.out_dir) / "model.json", res.graph.to_json(res.meta(lo)).dump(2) + "\n");
    std::cout << "learned " << res.graph.directed().size() << " directed and " << res.graph.bidirected().size()
              << " bidirected edges from " << res.diagnostics.ci_tests << " CI tests\n";
}

// ---- rank -------------------------------------------------------------------

struct RankArgs {
    Common c;
    std::string model, train_data, spec, ace_table, targets;
    std::size_t top_k = 5;
    std::size_t grid = 10;
};

void run_rank(const RankArgs& a, RunManifest& m) {
    m.flag("top_k", a.top_k);
    m.flag("targets", a.targets);
    m.flag("grid", a.grid);
    set_stage("load");
    m.input(a.spec);
    if (!a.ace_table.empty()) m.input(a.ace_table);
    else {
        m.input(a.model);
        m.input(a.train_data);
    }
    m.begin();
    const auto cs = load_config_spec(a.spec);
    AceTable table;
    if (!a.ace_table.empty()) {
        std::ifstream in(a.ace_table);
        if (!in) throw DataError("cannot open '" + a.ace_table + "'");
        table = read_ace_csv(in);
        if (!a.targets.empty()) {
            const auto wanted = split_list(a.targets);
            for (const auto& t : wanted)
                if (!table.values.count(t)) throw UsageError("unknown target '" + t + "'");
            table.targets = wanted;
        }
    } else {
        const auto g = causal::Admg::from_json(read_json_file(a.model));
        const auto ds = load_dataset(a.train_data, cs.space, cs.roles);
        for (const auto& v : g.vertices())
            if (!ds.has(v)) throw DataError("model vertex '" + v + "' is not a dataset column");
        const auto targets = a.targets.empty() ? ranking_targets(ds, spec_from_roles(cs.roles)) : split_list(a.targets);
        set_stage("effects");
        EffectOptions eo;
        eo.grid_size = a.grid;
        table = ace_table(ds, g, targets, eo);
    }
    set_stage("reduce");
    const auto red = rank_and_reduce(table, a.top_k, *cs.space);
    set_stage("write");
    const fs::path out(a.c.out_dir);
    std::ofstream csv(out / "ace.csv", std::ios::binary);
    write_ace_csv(table, red.selected, csv);
    csv.close();
    write_text(out / "reduced_space.json", reduction_to_json(red).dump(2) + "\n");
    std::cout << "selected " << red.selected.size() << " of " << cs.space->free_names().size() << " free options\n";
    for (const auto& t : red.degenerate_targets) std::cerr << "warning: every ACE is zero for target '" << t << "'\n";
}

// ---- optimize ---------------------------------------------------------------

struct SpecArgs {
    double ref_f1 = 70.0, ref_f2 = 2.0, pref_f1 = 40.0, pref_f2 = 0.6;
    double th1 = 0.25, th2 = 0.18, theta = 0.8;

    mobo::ObjectiveSpec build() const {
        auto s = bench::objective_spec();
        s.reference = {ref_f1, ref_f2};
        s.preferences = {pref_f1, pref_f2};
        s.th1 = th1;
        s.th2 = th2;
        s.theta = theta;
        s.check();
        return s;
    }
    void record(RunManifest& m) const { m.flag("objectives", build().to_json()); }
};

void add_spec(CLI::App* cmd, SpecArgs& s) {
    cmd->add_option("--hv-ref-f1,--hv_ref_f1", s.ref_f1, "Hypervolume reference, first objective");
    cmd->add_option("--hv-ref-f2,--hv_ref_f2", s.ref_f2, "Hypervolume reference, second objective");
    cmd->add_option("--pref-f1,--pref_f1,--f1-pref,--f1_pref", s.pref_f1, "Preference limit, first objective");
    cmd->add_option("--pref-f2,--pref_f2,--f2-pref,--f2_pref", s.pref_f2, "Preference limit, second objective");
    cmd->add_option("--th1,--sc", s.th1, "Soft constraint threshold");
    cmd->add_option("--th2", s.th2, "Hard constraint threshold");
    cmd->add_option("--theta,--tcr", s.theta, "Safety threshold on the mean penalty");
}

struct BoArgs {
    std::size_t budget = 100, init = 15, relearn = 10, pool = 1000, gp_restarts = 3;

    mobo::BoOptions build(std::uint64_t seed) const {
        mobo::BoOptions o;
        o.budget = budget;
        o.n_init = init;
        o.relearn_every = relearn;
        o.pool = pool;
        o.fit.restarts = gp_restarts;
        o.seed = seed;
        o.check();
        return o;
    }
    void record(RunManifest& m) const {
        m.flag("budget", budget);
        m.flag("init_trials", init);
        m.flag("relearn_every", relearn);
        m.flag("pool", pool);
        m.flag("gp_restarts", gp_restarts);
    }
};

void add_bo(CLI::App* cmd, BoArgs& b, CLI::Option** budget_out = nullptr) {
    auto* budget = cmd->add_option("--budget", b.budget, "Total trials including the initial design");
    if (budget_out) *budget_out = budget;
    cmd->add_option("--init-trials,--init_trials,--n-init,--n_init", b.init, "Random initial trials");
    cmd->add_option("--relearn-every,--relearn_every", b.relearn, "Hyperparameter refit cadence");
    cmd->add_option("--pool", b.pool, "Random candidates scored per proposal");
    cmd->add_option("--gp-restarts,--gp_restarts", b.gp_restarts, "Hyperparameter search restarts");
}

struct OptimizeArgs {
    Common c;
    std::string reduced, model, train_data, spec_file, out = "trials.csv";
    std::size_t top_k = 5;
    int level = 0;
    std::uint64_t scenario_seed = 0;
    SpecArgs spec;
    BoArgs bo;
};

void run_optimize(const OptimizeArgs& a, RunManifest& m) {
    m.flag("level", a.level);
    m.flag("scenario_seed", a.scenario_seed);
    a.spec.record(m);
    a.bo.record(m);
    m.seed(a.c.seed);
    m.flag("top_k", a.top_k);
    m.flag("out", a.out);
    set_stage("load");
    if (!a.reduced.empty()) m.input(a.reduced);
    if (!a.model.empty()) {
        m.input(a.model);
        m.input(a.train_data);
        m.input(a.spec_file);
    }
    m.begin();
    const auto sc = bench::make_scenario(a.level, bench::RunSeeds(a.scenario_seed).scenario);
    auto space = ReducedSpace::full(sc.target.space());
    if (!a.reduced.empty()) space = reduction_from_json(read_json_file(a.reduced));
    if (!a.model.empty()) {
        const auto cs = load_config_spec(a.spec_file);
        const auto ds = load_dataset(a.train_data, cs.space, cs.roles);
        const auto g = causal::Admg::from_json(read_json_file(a.model));
        set_stage("effects");
        space = reduce_with_model(ds, g, *cs.space, a.spec.build(), a.top_k, EffectOptions{}).space;
    }
    if (space.parent().names() != sc.target.space().names()) throw DataError("reduced space does not match the environment's options");
    set_stage("optimize");
    const auto res = mobo::run_optimization(space, sc.target.evaluator(), a.spec.build(), a.bo.build(a.c.seed));
    set_stage("write");
    const fs::path out(a.c.out_dir);
    if (fs::path(a.out).has_parent_path()) throw UsageError("--out names a file inside the output directory");
    std::ofstream csv(out / a.out, std::ios::binary);
    res.log.write_csv(csv);
    csv.close();
    json front = json::array();
    for (auto i : res.front) {
        const auto& t = res.log.trials[i];
        json cfg;
        for (const auto& o : space.parent().options()) cfg[o.name] = format_value(o, t.config.at(o.name));
        front.push_back({{"trial", i}, {"objectives", t.objectives}, {"h", t.h}, {"config", cfg}});
    }
    const auto& last = res.log.stats.back();
    json summary{{"selected", space.selected()},
                 {"final_hv", last.hv},
                 {"efficiency_literal", last.efficiency_literal},
                 {"efficiency_alt", last.efficiency_alt},
                 {"violations", last.violations},
                 {"failures", last.failures},
                 {"faults", last.faults},
                 {"front", front},
                 {"hyperparameters", res.log.hyperparameters}};
    write_text(out / "summary.json", summary.dump(2) + "\n");
    std::cout << "final hypervolume " << format_double(last.hv) << " after " << res.log.trials.size() << " trials\n";
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
    Common c;
    std::string preset, methods = "cure,mobo,ridge_mobo", seeds;
    int level = 1;
    std::size_t num_seeds = 3, rows = 1000, top_k = 5;
    SpecArgs spec;
    BoArgs bo;
};

bench::ComparisonOptions bench_options(BenchArgs a) {
    if (a.preset == "rq1") {
        a.level = 0;
        a.bo.budget = 100;
        a.methods = "cure,mobo";
    } else if (a.preset == "rq2") {
        a.level = 2;
        a.bo.budget = 50;
        a.bo.init = 15;
        a.methods = "cure,ridge_mobo";
    } else if (a.preset == "e1") {
        a.level = 0;
        a.bo.budget = 200;
    } else if (!a.preset.empty())
        throw UsageError("unknown preset '" + a.preset + "' (rq1, rq2, e1)");
    bench::ComparisonOptions o;
    o.level = a.level;
    o.source_rows = a.rows;
    o.top_k = a.top_k;
    o.spec = a.spec.build();
    o.bo = a.bo.build(0);
    o.methods.clear();
    for (const auto& m : split_list(a.methods)) o.methods.push_back(bench::parse_method(m));
    o.seeds.clear();
    if (!a.seeds.empty())
        for (const auto& s : split_list(a.seeds)) o.seeds.push_back(std::stoull(s));
    else
        for (std::size_t s = 0; s < a.num_seeds; ++s) o.seeds.push_back(a.c.seed + s);
    return o;
}

void run_bench(const BenchArgs& a, RunManifest& m) {
    const auto opt = bench_options(a);
    m.flag("preset", a.preset);
    m.flag("comparison", opt.to_json());
    m.seed(a.c.seed);
    m.begin();
    set_stage("bench");
    const auto rep = bench::run_comparison(opt);
    set_stage("write");
    rep.write(a.c.out_dir);
    const auto s = rep.summary();
    for (const auto& [name, v] : s["methods"].items())
        std::cout << name << ": median final HV " << format_double(v["median_final_hv"].get<double>()) << '\n';
}

// ---- report -----------------------------------------------------------------

int run_report(const std::string& dir) {
    set_stage("load");
    const fs::path p = fs::path(dir) / "summary.json";
    if (!fs::exists(p)) throw DataError("no summary.json in '" + dir + "'");
    const auto s = read_json_file(p.string());
    if (!s.contains("methods") || s["methods"].empty()) throw DataError("summary in '" + dir + "' lists no methods");
    std::printf("%-12s %12s %12s %12s %8s %8s %8s\n", "method", "final_hv", "eff_literal", "eff_alt", "theta_V", "T_F", "|sel|");
    for (const auto& [name, v] : s["methods"].items())
        std::printf("%-12s %12.4f %12.4f %12.4f %8.1f %8.1f %8.1f\n", name.c_str(), v["median_final_hv"].get<double>(),
                    v["median_efficiency_literal"].get<double>(), v["median_efficiency_alt"].get<double>(),
                    v["median_violations"].get<double>(), v["median_failures"].get<double>(), v["median_selected"].get<double>());
    if (s.contains("wins"))
        for (const auto& [k, v] : s["wins"].items()) std::printf("wins %s: %d\n", k.c_str(), v.get<int>());
    return ok;
}

// ---- dispatch ---------------------------------------------------------------

int dispatch(const std::vector<std::string>& argv, bool allow_replay = true);

int run_replay(const std::string& manifest_path, const std::string& out_dir) {
    set_stage("load");
    const auto mj = read_json_file(manifest_path);
    if (mj.value("status", "") != "complete") throw DataError("manifest '" + manifest_path + "' records an unfinished run");
    for (const auto& [path, digest] : mj.at("inputs").items()) {
        const fs::path in = fs::path(path).is_absolute() ? fs::path(path) : fs::path(mj.at("cwd").get<std::string>()) / path;
        if (sha256_file(in) != digest.get<std::string>()) throw DataError("input '" + path + "' changed since the recorded run");
    }
    const fs::path target = fs::absolute(out_dir.empty() ? fs::path(manifest_path).parent_path() / "replay" : fs::path(out_dir));
    std::vector<std::string> argv;
    const auto orig = mj.at("argv").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < orig.size(); ++i) {
        const auto& a = orig[i];
        if (a == "--out-dir" || a == "--out_dir" || a == "-o") {
            ++i;
            continue;
        }
        if (a.rfind("--out-dir=", 0) == 0 || a.rfind("--out_dir=", 0) == 0) continue;
        argv.push_back(a);
    }
    argv.push_back("--out-dir");
    argv.push_back(target.string());
    const auto cwd = fs::current_path();
    fs::current_path(mj.at("cwd").get<std::string>());
    const int rc = dispatch(argv, false);
    fs::current_path(cwd);
    if (rc != ok) return rc;
    set_stage("compare");
    const auto fresh = read_json_file((target / RunManifest::file_name).string());
    int mismatches = 0;
    for (const auto& [name, digest] : mj.at("outputs").items()) {
        const auto it = fresh.at("outputs").find(name);
        if (it == fresh.at("outputs").end() || *it != digest) {
            std::cerr << "differs: " << name << '\n';
            ++mismatches;
        }
    }
    if (fresh.at("outputs").size() != mj.at("outputs").size()) ++mismatches;
    if (mismatches) throw DataError("replay produced " + std::to_string(mismatches) + " differing output(s)");
    std::cout << "replay identical: " << mj.at("outputs").size() << " output(s)\n";
    return ok;
}

int dispatch(const std::vector<std::string>& argv, bool allow_replay) {
    CLI::App app{"Causal dimension reduction and constrained multi-objective optimization of configurable systems", "cure"};
    app.set_version_flag("--version", CURE_VERSION);
    app.require_subcommand(1);

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "Write observational data sampled from a benchmark environment");
    add_out(gen, ga.c);
    gen->add_option("--level", ga.level, "Transfer severity of the scenario (0, 1, 2)")->check(CLI::Range(0, 2));
    gen->add_option("--rows,-n", ga.rows, "Rows to sample")->check(CLI::PositiveNumber);
    gen->add_flag("--target", ga.target, "Sample the target environment instead of the source");

    LearnArgs la;
    auto* learn = app.add_subcommand("learn", "Learn a causal model from observational data");
    add_out(learn, la.c);
    learn->add_option("--train-data,--train_data", la.train_data, "Dataset CSV")->required();
    learn->add_option("--spec", la.spec, "Config-space spec with column roles (JSON or TOML)")->required();
    learn->add_option("--alpha", la.alpha, "CI test level")->check(CLI::Range(0.0, 1.0));
    learn->add_option("--bins", la.bins, "Discretization bins for entropic resolution")->check(CLI::Range(2, 1000));
    learn->add_option("--max-cond,--max_cond", la.max_cond, "Largest conditioning set");

    RankArgs ra;
    auto* rank = app.add_subcommand("rank", "Average causal effects and the top-K reduced space");
    add_out(rank, ra.c);
    rank->add_option("--spec", ra.spec, "Config-space spec (JSON or TOML)")->required();
    auto* model = rank->add_option("--model", ra.model, "Model JSON from learn");
    auto* td = rank->add_option("--train-data,--train_data", ra.train_data, "Dataset CSV");
    auto* at = rank->add_option("--ace-table,--ace_table", ra.ace_table, "Rank a precomputed ACE CSV instead");
    rank->add_option("--targets", ra.targets, "Comma-separated targets (default: objectives, constraint, success flag)");
    rank->add_option("--top-k,--top_k", ra.top_k, "Options kept per target")->check(CLI::PositiveNumber);
    rank->add_option("--grid", ra.grid, "Intervention grid size")->check(CLI::PositiveNumber);
    at->excludes(model)->excludes(td);
    model->needs(td);
    td->needs(model);

    OptimizeArgs oa;
    auto* optimize = app.add_subcommand("optimize", "Constrained multi-objective BO on a benchmark target");
    add_out(optimize, oa.c);
    auto* ored = optimize->add_option("--reduced", oa.reduced, "Reduced-space JSON from rank (default: every free option)");
    optimize->add_option("--level", oa.level, "Transfer severity of the target (0, 1, 2)")->check(CLI::Range(0, 2));
    optimize->add_option("--scenario-seed,--scenario_seed", oa.scenario_seed, "Seed that fixes the target environment");
    auto* omodel = optimize->add_option("--model", oa.model, "Model JSON from learn; reduces the space inline");
    auto* otrain = optimize->add_option("--train-data,--train_data", oa.train_data, "Source dataset CSV for the inline reduction");
    auto* ospec = optimize->add_option("--spec", oa.spec_file, "Config-space spec of the source dataset");
    optimize->add_option("--top-k,--top_k", oa.top_k, "Options kept per target in the inline reduction")->check(CLI::PositiveNumber);
    optimize->add_option("--out", oa.out, "Trial-log CSV file name inside the output directory");
    omodel->needs(otrain)->needs(ospec)->excludes(ored);
    otrain->needs(omodel);
    ospec->needs(omodel);
    add_spec(optimize, oa.spec);
    add_bo(optimize, oa.bo);

    BenchArgs ba;
    auto* bench_cmd = app.add_subcommand("bench", "Compare CURE with MOBO and ridge-screened MOBO");
    add_out(bench_cmd, ba.c);
    auto* preset = bench_cmd->add_option("--preset", ba.preset, "rq1, rq2 or e1");
    auto* level = bench_cmd->add_option("--level", ba.level, "Transfer severity (0, 1, 2)")->check(CLI::Range(0, 2));
    auto* methods = bench_cmd->add_option("--methods", ba.methods, "Comma-separated: cure, mobo, ridge_mobo");
    auto* seeds = bench_cmd->add_option("--seeds", ba.seeds, "Comma-separated seed list");
    auto* nseeds = bench_cmd->add_option("--num-seeds,--num_seeds", ba.num_seeds, "Consecutive seeds starting at --seed");
    bench_cmd->add_option("--rows", ba.rows, "Source observational rows")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--top-k,--top_k", ba.top_k, "Options kept per target")->check(CLI::PositiveNumber);
    add_spec(bench_cmd, ba.spec);
    CLI::Option* budget = nullptr;
    add_bo(bench_cmd, ba.bo, &budget);
    preset->excludes(level)->excludes(methods)->excludes(budget);
    seeds->excludes(nseeds);

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Print the summary table of a bench run");
    report->add_option("--run-dir,--run_dir,dir", report_dir, "Directory written by bench")->required();

    std::string manifest_path, replay_out;
    auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest and compare outputs");
    replay->add_option("manifest", manifest_path, "manifest.json of the run")->required();
    replay->add_option("--out-dir,--out_dir,-o", replay_out, "Where to write the replayed outputs");

    try {
        std::vector<std::string> rev(argv.rbegin(), argv.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "report") return run_report(report_dir);
    if (name == "replay") {
        if (!allow_replay) throw UsageError("a manifest cannot replay another replay");
        return run_replay(manifest_path, replay_out);
    }

    const auto run = [&](const Common& c, auto&& body) {
        set_stage("setup");
        RunManifest m(name, argv, c.out_dir);
        body(m);
        m.finish();
        return ok;
    };
    if (name == "generate") return run(ga.c, [&](RunManifest& m) { run_generate(ga, m); });
    if (name == "learn") return run(la.c, [&](RunManifest& m) { run_learn(la, m); });
    if (name == "rank") {
        if (ra.ace_table.empty() && ra.model.empty()) throw UsageError("rank needs --model and --train-data, or --ace-table");
        return run(ra.c, [&](RunManifest& m) { run_rank(ra, m); });
    }
    if (name == "optimize") return run(oa.c, [&](RunManifest& m) { run_optimize(oa, m); });
    if (name == "bench") {
        (void)bench_options(ba); // usage errors surface before any output is written
        return run(ba.c, [&](RunManifest& m) { run_bench(ba, m); });
    }
    throw UsageError("unknown command '" + name + "'");
}

} // namespace cure::cli

int main(int argc, char** argv) {
    using namespace cure::cli;
    const std::vector<std::string> args(argv + 1, argv + argc);
    const std::string cmd = args.empty() ? "cure" : "cure " + args.front();
    try {
        return dispatch(args);
    } catch (const cure::UsageError& e) {
        std::cerr << cmd << ": " << stage().name << ": " << e.what() << '\n';
        return usage;
    } catch (const cure::DataError& e) {
        std::cerr << cmd << ": " << stage().name << ": " << e.what() << '\n';
        return data;
    } catch (const cure::NumericalError& e) {
        std::cerr << cmd << ": " << stage().name << ": " << e.what() << '\n';
        return numerical;
    } catch (const std::exception& e) {
        std::cerr << cmd << ": " << stage().name << ": " << e.what() << '\n';
        return internal;
    }
}
