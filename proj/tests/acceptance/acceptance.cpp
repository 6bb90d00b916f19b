// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <cure-cli> <work-dir>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cure/cure.hpp"
#include "cure/io/config_spec.hpp"

namespace fs = std::filesystem;
using namespace cure;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) { return bench::median(std::move(v)); }

template <class... Args>
std::string fmt(const char* f, Args... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, static_cast<double>(args)...);
    return buf;
}

// ---- 1 and 2: structure and ranking on the default environment ----------------

struct Learned {
    Dataset ds;
    causal::Admg graph;
    double seconds = 0.0;
};

std::vector<Learned> learn_default_env() {
    std::vector<Learned> out;
    const bench::SyntheticEnv env;
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto ds = bench::generate_observational(env, 2000, 1000 + s);
        causal::LearnOptions lo;
        lo.alpha = 0.05;
        lo.seed = s;
        const auto t0 = Clock::now();
        auto g = causal::learn_causal_model(ds, lo).graph;
        out.push_back({std::move(ds), std::move(g), seconds_since(t0)});
    }
    return out;
}

Verdict structure_recovery(const std::vector<Learned>& runs) {
    const auto truth = causal::adjacencies(bench::SyntheticEnv().ground_truth());
    std::vector<double> recall, spurious;
    double slowest = 0.0;
    for (const auto& r : runs) {
        const auto learned = causal::adjacencies(r.graph);
        double common = 0;
        for (const auto& e : learned) common += truth.count(e);
        recall.push_back(common / static_cast<double>(truth.size()));
        spurious.push_back(learned.empty() ? 0.0 : (static_cast<double>(learned.size()) - common) / static_cast<double>(learned.size()));
        slowest = std::max(slowest, r.seconds);
    }
    const double mr = median(recall), ms = median(spurious);
    return {mr >= 0.8 && ms <= 0.2 && slowest <= 60.0,
            fmt("median adjacency recall %.3f (>= 0.8), median spurious %.3f (<= 0.2), slowest seed %.1f s (<= 60)", mr, ms, slowest)};
}

Verdict ace_ranking(const std::vector<Learned>& runs) {
    const bench::SyntheticEnv env;
    const auto truth = env.ground_truth();
    int good = 0;
    std::string misses;
    for (std::size_t s = 0; s < runs.size(); ++s) {
        const auto targets = ranking_targets(runs[s].ds, bench::objective_spec());
        const auto table = ace_table(runs[s].ds, runs[s].graph, targets);
        bool ok = true;
        for (const auto& t : targets) {
            double decoy = 0.0;
            for (const auto& d : env.decoy_options()) decoy = std::max(decoy, table.at(t, d));
            for (const auto& c : env.causal_options())
                if (has_causal_path(truth, c, t) && !(table.at(t, c) > decoy)) ok = false;
        }
        good += ok;
        if (!ok) misses += " " + std::to_string(s);
    }
    return {good >= 9, fmt("causal options outrank every decoy in %.0f/10 seeds (>= 9)", good) + (misses.empty() ? "" : "; failing seeds:" + misses)};
}

// ---- 3: reduction fixture --------------------------------------------------------

Verdict reduction_fixture() {
    const auto spec = load_config_spec(std::string(CURE_DATA_DIR) + "/husky_config_space.json");
    std::ifstream in(std::string(CURE_DATA_DIR) + "/husky_ace_table.csv");
    if (!in) return {false, "ACE fixture missing"};
    const auto table = read_ace_csv(in);
    const auto r = rank_and_reduce(table, 5, *spec.space);
    const auto n = spec.space->free_names().size();
    return {n == 34 && table.targets.size() == 4 && r.selected.size() == 10,
            fmt("%.0f free options, %.0f targets, K=5 keeps %.0f (expected 34 -> 10)", static_cast<double>(n),
                static_cast<double>(table.targets.size()), static_cast<double>(r.selected.size()))};
}

// ---- 4 and 5: optimizer comparisons --------------------------------------------

Verdict rq1() {
    bench::ComparisonOptions o;
    o.level = 0;
    o.bo.budget = 100;
    o.seeds.clear();
    for (std::uint64_t s = 0; s < 10; ++s) o.seeds.push_back(s);
    o.methods = {bench::Method::cure, bench::Method::mobo};
    const auto t0 = Clock::now();
    const auto rep = bench::run_comparison(o);
    const double secs = seconds_since(t0);
    int wins = 0, fast = 0;
    for (auto s : o.seeds) {
        const auto& c = rep.find(bench::Method::cure, s);
        const auto& m = rep.find(bench::Method::mobo, s);
        wins += c.final_hv >= m.final_hv;
        fast += c.trials_to_reach(m.final_hv) <= 70;
    }
    return {wins >= 8 && fast >= 7 && secs <= 600.0,
            fmt("CURE HV >= MOBO in %.0f/10 (>= 8); reaches MOBO's final HV within 70 trials in %.0f/10 (>= 7); %.0f s (<= 600)", wins, fast, secs)};
}

Verdict rq2() {
    bench::ComparisonOptions o;
    o.level = 2;
    o.bo.budget = 50;
    o.bo.n_init = 15;
    o.seeds.clear();
    for (std::uint64_t s = 0; s < 10; ++s) o.seeds.push_back(s);
    o.methods = {bench::Method::cure, bench::Method::ridge_mobo};
    const auto rep = bench::run_comparison(o);
    int wins = 0;
    std::vector<double> bad_c, bad_r;
    for (auto s : o.seeds) {
        const auto& c = rep.find(bench::Method::cure, s);
        const auto& r = rep.find(bench::Method::ridge_mobo, s);
        wins += c.final_hv > r.final_hv;
        bad_c.push_back(static_cast<double>(c.violations + c.failures));
        bad_r.push_back(static_cast<double>(r.violations + r.failures));
    }
    const double mc = median(bad_c), mr = median(bad_r);
    return {wins >= 8 && mc < mr,
            fmt("CURE HV > ridge+MOBO in %.0f/10 (>= 8); median violations+failures %.1f vs %.1f (strictly fewer)", wins, mc, mr)};
}

// ---- 6 and 7: EHVI and hypervolume --------------------------------------------

Verdict ehvi_vs_mc() {
    Rng rng(606);
    const mobo::Point ref{4.0, 4.0};
    double worst = 0.0, worst_z = 0.0, worst_rse = 0.0;
    for (int f = 0; f < 20; ++f) {
        std::vector<double> xs{rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)}, ys{rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)};
        std::sort(xs.begin(), xs.end());
        std::sort(ys.rbegin(), ys.rend());
        std::vector<mobo::Point> front{{xs[0], ys[0]}, {xs[1], ys[1]}, {xs[2], ys[2]}};
        const mobo::Point mean{rng.uniform(0.5, 3.5), rng.uniform(0.5, 3.5)}, sd{rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0)};
        const double exact = mobo::ehvi(mean, sd, front, ref);
        const double base = mobo::hypervolume(front, ref);
        Rng mc(10000 + static_cast<std::uint64_t>(f));
        double sum = 0.0, sq = 0.0;
        const int n = 1000000;
        for (int i = 0; i < n; ++i) {
            auto pts = front;
            pts.push_back({mc.normal(mean[0], sd[0]), mc.normal(mean[1], sd[1])});
            const double d = mobo::hypervolume(pts, ref) - base;
            sum += d;
            sq += d * d;
        }
        const double est = sum / n;
        const double se = std::sqrt((sq / n - est * est) / n);
        worst = std::max(worst, std::abs(exact - est) / est);
        worst_z = std::max(worst_z, std::abs(exact - est) / se);
        worst_rse = std::max(worst_rse, se / est);
    }
    return {worst <= 0.01, fmt("worst relative gap to 10^6-sample Monte Carlo over 20 fixtures %.4f (<= 0.01); "
                               "largest gap in oracle standard errors %.2f, largest oracle relative standard error %.4f",
                               worst, worst_z, worst_rse)};
}

double grid_hv(const std::vector<mobo::Point>& pts, const mobo::Point& ref, int n) {
    const double sx = ref[0] / n, sy = ref[1] / n;
    std::size_t hit = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a = (i + 0.5) * sx, b = (j + 0.5) * sy;
            for (const auto& p : pts)
                if (p[0] <= a && p[1] <= b) {
                    ++hit;
                    break;
                }
        }
    return static_cast<double>(hit) * sx * sy;
}

Verdict hypervolume_checks() {
    const std::vector<mobo::Point> stair{{1, 3}, {2, 2}, {3, 1}};
    const double hv = mobo::hypervolume(stair, {4, 4});
    const double oracle = grid_hv(stair, {4, 4}, 1000);
    bool ok = std::abs(hv - 6.0) <= 0.01 && std::abs(hv - oracle) <= 0.01;
    Rng rng(707);
    double worst = 0.0;
    for (int f = 0; f < 20; ++f) {
        std::vector<mobo::Point> pts;
        const int k = 2 + static_cast<int>(rng.index(8));
        for (int i = 0; i < k; ++i) pts.push_back({rng.uniform(), rng.uniform()});
        worst = std::max(worst, std::abs(mobo::hypervolume(pts, {1, 1}) - grid_hv(pts, {1, 1}, 1000)));
    }
    ok = ok && worst <= 0.01;
    std::vector<mobo::Point> pts;
    double prev = 0.0;
    int broken = 0;
    for (int i = 0; i < 1000; ++i) {
        mobo::Point p{rng.uniform(), rng.uniform()};
        bool dominated = false;
        for (const auto& q : pts) dominated = dominated || (q[0] <= p[0] && q[1] <= p[1]);
        pts.push_back(p);
        const double v = mobo::hypervolume(pts, {1, 1});
        if (v < prev || (dominated && v != prev) || (!dominated && !(v > prev))) ++broken;
        prev = v;
    }
    ok = ok && broken == 0;
    return {ok, fmt("staircase %.6f (grid %.6f, expected 6.0); worst random-front gap %.5f (<= 0.01); %.0f monotonicity breaks in 1000 insertions", hv,
                    oracle, worst, broken)};
}

// ---- 8: GP numerics ---------------------------------------------------------------

Eigen::MatrixXd random_inputs(Eigen::Index n, Eigen::Index numeric, Eigen::Index cat, Rng& rng) {
    Eigen::MatrixXd x(n, numeric + cat);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index d = 0; d < x.cols(); ++d) x(i, d) = d < numeric ? rng.uniform() : static_cast<double>(rng.index(3));
    return x;
}

gp::KernelParams random_params(const gp::InputLayout& layout, Rng& rng, double noise) {
    auto p = gp::KernelParams::defaults(layout);
    p.theta0 = rng.uniform(0.5, 2.0);
    for (Eigen::Index i = 0; i < p.lambda.size(); ++i) p.lambda(i) = rng.uniform(0.5, 5.0);
    for (Eigen::Index i = 0; i < p.cat_scale.size(); ++i) p.cat_scale(i) = rng.uniform(0.2, 2.0);
    p.noise = noise;
    return p;
}

gp::LinearMean random_mean(const gp::InputLayout& layout, Rng& rng) {
    auto m = gp::LinearMean::zero(layout);
    for (Eigen::Index i = 0; i < m.slope.size(); ++i) m.slope(i) = rng.normal();
    m.offset = rng.normal();
    return m;
}

Eigen::VectorXd random_targets(Eigen::Index n, Rng& rng) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.normal();
    return y;
}

Verdict gp_numerics() {
    Rng rng(808);
    double interp = 0.0, lml_gap = 0.0, grad_gap = 0.0;
    for (int t = 0; t < 10; ++t) {
        const auto layout = gp::InputLayout::raw(2, 1);
        const auto x = random_inputs(20, 2, 1, rng);
        const auto mu = random_mean(layout, rng);
        const Eigen::VectorXd y = random_targets(20, rng);

        const gp::GpModel exact(layout, x, y, random_params(layout, rng, 0.0), mu);
        interp = std::max(interp, (exact.posterior(x).mean - y).cwiseAbs().maxCoeff());

        const auto p = random_params(layout, rng, rng.uniform(0.01, 0.5));
        const gp::GpModel m(layout, x, y, p, mu);
        Eigen::MatrixXd c = gp::gram(layout, p, x);
        c.diagonal().array() += p.noise + m.jitter();
        const Eigen::VectorXd r = y - m.prior_mean(x);
        const double dense = -0.5 * r.dot(c.inverse() * r) - 0.5 * std::log(c.determinant()) - 10.0 * std::log(2.0 * std::numbers::pi);
        lml_gap = std::max(lml_gap, std::abs(m.log_marginal_likelihood() - dense));

        const Eigen::VectorXd g = m.lml_gradient();
        const Eigen::VectorXd v = gp::pack(p, mu);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            const double h = 1e-5;
            Eigen::VectorXd up = v, down = v;
            up(i) += h;
            down(i) -= h;
            const auto [pu, mu_up] = gp::unpack(layout, up);
            const auto [pd, mu_down] = gp::unpack(layout, down);
            const double fd = (gp::GpModel(layout, x, y, pu, mu_up).log_marginal_likelihood() -
                               gp::GpModel(layout, x, y, pd, mu_down).log_marginal_likelihood()) / (2.0 * h);
            grad_gap = std::max(grad_gap, std::abs(g(i) - fd) / std::max(1.0, std::abs(fd)));
        }
    }
    return {interp <= 1e-6 && lml_gap <= 1e-8 && grad_gap <= 1e-4,
            fmt("interpolation error %.2e (<= 1e-6); LML gap to dense inverse %.2e (<= 1e-8); gradient relative gap %.2e (<= 1e-4)", interp, lml_gap,
                grad_gap)};
}

// ---- 9: penalty and margin arithmetic --------------------------------------------

Verdict penalty_arithmetic() {
    bool ok = mobo::penalty(0.30, 0.25, 0.18) == 0.0 && mobo::penalty(0.18, 0.25, 0.18) == 1.0 &&
              std::abs(mobo::penalty(0.215, 0.25, 0.18) - 0.5) <= 1e-12 && mobo::penalty(0.25, 0.25, 0.18) == 0.0;
    const auto a = mobo::safety_satisfied(1.0, {0.0, 0.0, 0.0}, 0.8);
    const auto b = mobo::safety_satisfied(0.9, {0.2, 0.2}, 0.8);
    const auto c = mobo::safety_satisfied(0.75, {0.0, 0.25, 0.5, 0.25}, 0.5);
    ok = ok && a.satisfied && a.margin == 1.0 && !b.satisfied && std::abs(b.margin - 0.7) <= 1e-12 && c.satisfied && c.margin == 0.5;
    return {ok, fmt("penalty(0.30, 0.18, 0.215) = %.3g, %.3g, %.3g; margins %.3g, %.3g", mobo::penalty(0.30, 0.25, 0.18),
                    mobo::penalty(0.18, 0.25, 0.18), mobo::penalty(0.215, 0.25, 0.18), a.margin, b.margin)};
}

// ---- 10: CLI replay -------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::string& cmd) {
    std::cout << "  $ " << cmd << '\n' << std::flush;
    return std::system((cmd + " > /dev/null").c_str());
}

Verdict cli_replay(const std::string& cli, const fs::path& work) {
    fs::remove_all(work);
    fs::create_directories(work);
    const auto w = [&](const std::string& s) { return (work / s).string(); };
    const std::string q = "\"" + cli + "\"";
    struct Case {
        std::string name, cmd, primary;
    };
    if (run(q + " generate --rows 600 --seed 3 -o " + w("gen")) != 0) return {false, "generate failed"};
    const std::vector<Case> cases{
        {"learn", " learn --train-data " + w("gen/data.csv") + " --spec " + w("gen/config_space.json") + " --seed 3", "model.json"},
        {"optimize",
         " optimize --train_data " + w("gen/data.csv") + " --spec " + w("gen/config_space.json") + " --model " + w("learn/model.json") +
             " --top_k 5 --budget 20 --init-trials 8 --f1-pref 40 --f2-pref 0.6 --sc 0.25 --tcr 0.8 --seed 3 --out trials.csv",
         "trials.csv"},
        {"bench", " bench --methods cure,mobo,ridge_mobo --seeds 0,1 --rows 400 --budget 12 --init-trials 6 --pool 200", "summary.json"},
    };
    std::string detail;
    bool ok = true;
    for (const auto& c : cases) {
        const bool ran = run(q + c.cmd + " -o " + w(c.name)) == 0;
        const bool replayed = ran && run(q + " replay " + w(c.name + "/manifest.json") + " -o " + w(c.name + "_replay")) == 0;
        const bool same = replayed && slurp(work / c.name / c.primary) == slurp(work / (c.name + "_replay") / c.primary);
        ok = ok && same;
        detail += c.name + (same ? " identical" : ran ? " differs" : " failed to run") + "; ";
    }
    return {ok, detail + "replay compares every recorded output digest"};
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <cure-cli> <work-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = argv[2];

    std::vector<Learned> learned;
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"structure recovery", [&] {
             learned = learn_default_env();
             return structure_recovery(learned);
         }},
        {"ACE ranking", [&] { return ace_ranking(learned); }},
        {"reduction fixture", reduction_fixture},
        {"RQ1 analog", rq1},
        {"RQ2 analog", rq2},
        {"EHVI correctness", ehvi_vs_mc},
        {"hypervolume correctness", hypervolume_checks},
        {"GP numerics", gp_numerics},
        {"penalty arithmetic", penalty_arithmetic},
        {"determinism", [&] { return cli_replay(cli, work); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first << "): " << v.detail << " ["
                  << fmt("%.1f s", seconds_since(t0)) << "]\n"
                  << std::flush;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria pass\n";
    return failed ? 1 : 0;
}
