#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cure/causal/graph.hpp"
#include "cure/data.hpp"
#include "cure/mobo/optimizer.hpp"
#include "cure/rng.hpp"
#include "cure/space.hpp"

namespace cure::bench {

/// Roles an option can play in the structural equations.
enum Slot : std::size_t { speed, samples, planner, inflation, horizon, frequency, slot_count };

inline constexpr std::array<const char*, slot_count> slot_names{"speed", "samples", "planner", "inflation", "horizon", "frequency"};

/// Column names of the simulated robot's measurements.
inline const std::string kM1 = "nav_load";
inline const std::string kM2 = "tracking_lag";
inline const std::string kEnergy = "energy";
inline const std::string kPose = "pose_error";
inline const std::string kObstacle = "obstacle_distance";
inline const std::string kSuccess = "success";

/// Twelve navigation options: six drive the equations, six are decoys.
inline ConfigSpace default_space() {
    return ConfigSpace({
        OptionDef::continuous("max_vel_x", 0.3, 0.75, 0.525),
        OptionDef::integer("vx_samples", 3, 20, 12),
        OptionDef::categorical("local_planner", {"dwa", "trajectory", "eband"}, 0),
        OptionDef::continuous("inflation_radius", 0.3, 1.5, 0.9),
        OptionDef::continuous("sim_time", 0.5, 3.5, 2.0),
        OptionDef::continuous("controller_frequency", 3.0, 7.0, 5.0),
        OptionDef::continuous("publish_frequency", 1.0, 6.0, 3.5),
        OptionDef::continuous("transform_tolerance", 0.2, 2.0, 1.1),
        OptionDef::continuous("theta_stopped_vel", 0.05, 0.15, 0.1),
        OptionDef::continuous("yaw_goal_tolerance", 0.05, 0.3, 0.175),
        OptionDef::integer("vy_samples", 0, 15, 8),
        OptionDef::categorical("recovery_behavior", {"clear", "rotate", "backoff"}, 0),
    });
}

/// Coefficients of the structural equations. Inputs are options mapped to
/// [0, 1] (categorical levels through a fixed offset table).
struct Coefficients {
    // nav_load = m1_speed u_s + m1_samples u_n + m1_inter u_s u_n + m1_planner u_p
    double m1_speed = 1.2, m1_samples = 0.8, m1_inter = 0.6, m1_planner = 0.9;
    // tracking_lag = m2_inflation u_i + m2_horizon (u_t − 0.35)² + m2_frequency (1 − u_f)
    double m2_inflation = 1.0, m2_horizon = 2.0, m2_frequency = 0.8;
    // energy = 10 + e_load nav_load + e_frequency u_f + e_horizon u_t + e_duration (1 − u_s)²
    double e_load = 10.0, e_frequency = 6.0, e_horizon = 4.0, e_duration = 8.0;
    // pose = 0.05 + p_lag tracking_lag + p_samples (1 − u_n) + p_speed u_s²
    double p_lag = 0.4, p_samples = 0.3, p_speed = 0.25;
    // clearance = 0.3 + h_inflation u_i − h_speed u_s
    double h_inflation = 0.15, h_speed = 0.1;
    // success ~ logistic(s_bias + s_clearance (h − 0.18) − s_energy (energy − 40))
    double s_bias = -4.0, s_clearance = 30.0, s_energy = 0.3;

    /// Structural coefficients (the success link excluded), for rescaling.
    std::vector<double*> structural() {
        return {&m1_speed, &m1_samples, &m1_inter, &m1_planner, &m2_inflation, &m2_horizon, &m2_frequency, &e_load,
                &e_frequency, &e_horizon, &e_duration, &p_lag, &p_samples, &p_speed, &h_inflation, &h_speed};
    }
    std::vector<double> values() const {
        auto copy = *this;
        std::vector<double> out;
        for (double* v : copy.structural()) out.push_back(*v);
        out.insert(out.end(), {s_bias, s_clearance, s_energy});
        return out;
    }
};

struct Noise {
    double metric = 0.25;
    double energy = 2.5; ///< about 5% of the energy range
    double pose = 0.08;  ///< half-normal, about 5% of the pose range
    double clearance = 0.015;
};

/// Simulated measurements of one mission.
struct Measurement {
    double m1 = 0.0, m2 = 0.0, energy = 0.0, pose = 0.0, clearance = 0.0;
    double success_probability = 0.0;
    bool success = false;
};

class SyntheticEnv {
public:
    SyntheticEnv() : SyntheticEnv(default_space()) {}

    explicit SyntheticEnv(ConfigSpace space) : space_(std::make_shared<const ConfigSpace>(std::move(space))) {
        const auto names = space_->names();
        if (names.size() < slot_count) throw UsageError("synthetic environment needs at least six options");
        for (std::size_t s = 0; s < slot_count; ++s) drivers_[s] = names[s];
    }

    const ConfigSpace& space() const { return *space_; }
    const std::shared_ptr<const ConfigSpace>& space_ptr() const { return space_; }
    Coefficients& coefficients() { return coef_; }
    const Coefficients& coefficients() const { return coef_; }
    Noise& noise() { return noise_; }
    const Noise& noise() const { return noise_; }
    bool noise_free() const { return noise_free_; }
    void set_noise_free(bool on) { noise_free_ = on; }

    /// Option driving each slot.
    const std::array<std::string, slot_count>& drivers() const { return drivers_; }
    void set_drivers(const std::array<std::string, slot_count>& d) {
        for (const auto& n : d) (void)space_->at(n);
        drivers_ = d;
    }
    /// Additive shift of each slot's normalized input.
    const std::array<double, slot_count>& shifts() const { return shift_; }
    void set_shifts(const std::array<double, slot_count>& s) { shift_ = s; }

    std::vector<std::string> causal_options() const { return {drivers_.begin(), drivers_.end()}; }
    std::vector<std::string> decoy_options() const {
        std::vector<std::string> out;
        for (const auto& n : space_->names())
            if (std::find(drivers_.begin(), drivers_.end(), n) == drivers_.end()) out.push_back(n);
        return out;
    }

    /// Option value mapped to [0, 1]; categorical levels via {0, 0.55, 1, ...}.
    double normalized(const std::string& option, const Configuration& c) const {
        const auto& def = space_->at(option);
        const double v = to_numeric(c.at(option));
        if (def.has_levels()) {
            static constexpr std::array<double, 3> offsets{0.0, 0.55, 1.0};
            const auto idx = static_cast<std::size_t>(v);
            return idx < offsets.size() ? offsets[idx] : 1.0;
        }
        return def.hi > def.lo ? (v - def.lo) / (def.hi - def.lo) : 0.0;
    }

    Measurement measure(const Configuration& c, std::uint64_t trial_seed) const {
        space_->check(c);
        std::array<double, slot_count> u{};
        for (std::size_t s = 0; s < slot_count; ++s) u[s] = normalized(drivers_[s], c) + shift_[s];
        Rng rng(trial_seed);
        auto gauss = [&](double sd) { return noise_free_ ? 0.0 : rng.normal(0.0, sd); };
        const auto& k = coef_;
        Measurement m;
        m.m1 = k.m1_speed * u[speed] + k.m1_samples * u[samples] + k.m1_inter * u[speed] * u[samples] + k.m1_planner * u[planner] +
               gauss(noise_.metric);
        m.m2 = k.m2_inflation * u[inflation] + k.m2_horizon * (u[horizon] - 0.35) * (u[horizon] - 0.35) + k.m2_frequency * (1.0 - u[frequency]) +
               gauss(noise_.metric);
        m.energy = 10.0 + k.e_load * m.m1 + k.e_frequency * u[frequency] + k.e_horizon * u[horizon] +
                   k.e_duration * (1.0 - u[speed]) * (1.0 - u[speed]) + gauss(noise_.energy);
        m.pose = 0.05 + k.p_lag * m.m2 + k.p_samples * (1.0 - u[samples]) + k.p_speed * u[speed] * u[speed] + std::abs(gauss(noise_.pose));
        m.clearance = 0.3 + k.h_inflation * u[inflation] - k.h_speed * u[speed] + gauss(noise_.clearance);
        const double z = k.s_bias + k.s_clearance * (m.clearance - 0.18) - k.s_energy * (m.energy - 40.0);
        m.success_probability = 1.0 / (1.0 + std::exp(-z));
        m.success = noise_free_ ? m.success_probability >= 0.5 : rng.uniform() < m.success_probability;
        return m;
    }

    mobo::Outcome evaluate(const Configuration& c, std::uint64_t trial_seed) const {
        const auto m = measure(c, trial_seed);
        return {{m.energy, m.pose}, m.clearance, m.success};
    }

    mobo::Evaluator evaluator() const {
        return [env = *this](const Configuration& c, std::uint64_t seed) { return env.evaluate(c, seed); };
    }

    /// Column names of generated datasets, options first.
    std::vector<std::string> columns() const {
        auto out = space_->names();
        for (const auto& n : {kM1, kM2, kEnergy, kPose, kObstacle, kSuccess}) out.push_back(n);
        return out;
    }

    RoleMap roles() const {
        return {{kM1, Role::system_metric}, {kM2, Role::system_metric}, {kEnergy, Role::objective},
                {kPose, Role::objective},   {kObstacle, Role::constraint_metric}, {kSuccess, Role::success_flag}};
    }

    /// The graph the structural equations imply.
    causal::Admg ground_truth() const {
        causal::Admg g(columns());
        const auto& d = drivers_;
        for (auto s : {speed, samples, planner}) g.add_directed(d[s], kM1);
        for (auto s : {inflation, horizon, frequency}) g.add_directed(d[s], kM2);
        g.add_directed(kM1, kEnergy);
        g.add_directed(d[frequency], kEnergy);
        g.add_directed(d[horizon], kEnergy);
        g.add_directed(d[speed], kEnergy);
        g.add_directed(kM2, kPose);
        g.add_directed(d[samples], kPose);
        g.add_directed(d[speed], kPose);
        g.add_directed(d[inflation], kObstacle);
        g.add_directed(d[speed], kObstacle);
        g.add_directed(kObstacle, kSuccess);
        g.add_directed(kEnergy, kSuccess);
        return g;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["drivers"] = drivers_;
        j["shifts"] = shift_;
        j["coefficients"] = coef_.values();
        j["noise"] = {noise_.metric, noise_.energy, noise_.pose, noise_.clearance};
        j["noise_free"] = noise_free_;
        return j;
    }

private:
    std::shared_ptr<const ConfigSpace> space_;
    std::array<std::string, slot_count> drivers_{};
    std::array<double, slot_count> shift_{};
    Coefficients coef_{};
    Noise noise_{};
    bool noise_free_ = false;
};

/// n uniformly drawn configurations, each run once, as a dataset with roles.
inline Dataset generate_observational(const SyntheticEnv& env, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw UsageError("observational sample needs at least one row");
    const Rng root(seed);
    Rng config_rng = root.derive("configs");
    const Rng eval_root = root.derive("eval");
    const auto configs = sample_uniform(env.space(), n, config_rng);
    const auto names = env.columns();
    const auto options = env.space().names();
    std::vector<std::vector<double>> cols(names.size(), std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        const auto m = env.measure(configs[r], eval_root.derive(static_cast<std::uint64_t>(r)).seed());
        for (std::size_t o = 0; o < options.size(); ++o) cols[o][r] = to_numeric(configs[r].at(options[o]));
        const double extra[] = {m.m1, m.m2, m.energy, m.pose, m.clearance, m.success ? 1.0 : 0.0};
        for (std::size_t k = 0; k < 6; ++k) cols[options.size() + k][r] = extra[k];
    }
    const auto roles = env.roles();
    std::vector<Column> columns;
    for (std::size_t c = 0; c < names.size(); ++c)
        columns.push_back({names[c], c < options.size() ? Role::option : roles.at(names[c]), std::move(cols[c])});
    return Dataset(std::move(columns), env.space_ptr());
}

struct TransferScenario {
    SyntheticEnv source;
    SyntheticEnv target;
    int level = 0;
};

/// Level 0: target equals source. Level 1: every coefficient rescaled by
/// U[0.7, 1.3] and noise doubled. Level 2: additionally the causal options
/// swap slots and each slot input is shifted by U[-0.2, 0.2].
inline TransferScenario make_scenario(int level, std::uint64_t seed) {
    if (level < 0 || level > 2) throw UsageError("transfer severity must be 0, 1 or 2");
    TransferScenario sc;
    sc.level = level;
    sc.target = sc.source;
    if (level == 0) return sc;
    Rng rng = Rng(seed).derive("scenario");
    auto& k = sc.target.coefficients();
    for (double* c : k.structural()) *c *= rng.uniform(0.7, 1.3);
    auto& nz = sc.target.noise();
    nz.metric *= 2.0;
    nz.energy *= 2.0;
    nz.pose *= 2.0;
    nz.clearance *= 2.0;
    if (level == 2) {
        auto d = sc.target.drivers();
        for (std::size_t i = d.size() - 1; i > 0; --i) std::swap(d[i], d[rng.index(i + 1)]);
        sc.target.set_drivers(d);
        std::array<double, slot_count> shift{};
        for (auto& s : shift) s = rng.uniform(-0.2, 0.2);
        sc.target.set_shifts(shift);
    }
    return sc;
}

/// Objectives, thresholds and reference point used on the benchmark.
inline mobo::ObjectiveSpec objective_spec() {
    mobo::ObjectiveSpec s;
    s.objectives = {kEnergy, kPose};
    s.preferences = {40.0, 0.6};
    s.reference = {70.0, 2.0};
    s.constraint = kObstacle;
    s.th1 = 0.25;
    s.th2 = 0.18;
    s.theta = 0.8;
    return s;
}

} // namespace cure::bench
