#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cure/error.hpp"
#include "cure/rng.hpp"

namespace cure {

enum class OptionKind { continuous, integer, boolean, categorical };

inline std::string_view to_string(OptionKind kind) {
    switch (kind) {
    case OptionKind::continuous: return "continuous";
    case OptionKind::integer: return "integer";
    case OptionKind::boolean: return "boolean";
    case OptionKind::categorical: return "categorical";
    }
    return "?";
}

inline OptionKind parse_option_kind(std::string_view s) {
    if (s == "continuous" || s == "real" || s == "float") return OptionKind::continuous;
    if (s == "integer" || s == "int") return OptionKind::integer;
    if (s == "boolean" || s == "bool") return OptionKind::boolean;
    if (s == "categorical" || s == "nominal") return OptionKind::categorical;
    throw DataError("unknown option kind '" + std::string(s) + "'");
}

inline bool is_numeric(OptionKind kind) { return kind == OptionKind::continuous || kind == OptionKind::integer; }

/// Index into the level list of a boolean or categorical option.
struct Level {
    std::size_t index = 0;
    friend auto operator<=>(const Level&, const Level&) = default;
};

/// Tagged option value. Continuous options hold a double, integer options an
/// int64 and boolean/categorical options a level index; no implicit coercion.
using Value = std::variant<double, std::int64_t, Level>;

struct OptionDef {
    std::string name;
    OptionKind kind = OptionKind::continuous;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::string> levels;
    Value default_value = 0.0;
    bool fixed = false;

    static OptionDef continuous(std::string name, double lo, double hi, double def, bool fixed = false) {
        return {std::move(name), OptionKind::continuous, lo, hi, {}, def, fixed};
    }
    static OptionDef integer(std::string name, std::int64_t lo, std::int64_t hi, std::int64_t def, bool fixed = false) {
        return {std::move(name), OptionKind::integer, static_cast<double>(lo), static_cast<double>(hi), {}, def, fixed};
    }
    static OptionDef boolean(std::string name, bool def, bool fixed = false) {
        return {std::move(name), OptionKind::boolean, 0.0, 1.0, {"false", "true"}, Level{def ? 1u : 0u}, fixed};
    }
    static OptionDef categorical(std::string name, std::vector<std::string> levels, std::size_t def, bool fixed = false) {
        const double hi = levels.empty() ? 0.0 : static_cast<double>(levels.size() - 1);
        return {std::move(name), OptionKind::categorical, 0.0, hi, std::move(levels), Level{def}, fixed};
    }

    bool has_levels() const { return !is_numeric(kind); }
    std::size_t level_count() const { return levels.size(); }
};

/// True when the value has the alternative matching the option kind and lies in the domain.
inline bool in_domain(const OptionDef& def, const Value& v) {
    switch (def.kind) {
    case OptionKind::continuous: {
        const auto* x = std::get_if<double>(&v);
        return x && std::isfinite(*x) && *x >= def.lo && *x <= def.hi;
    }
    case OptionKind::integer: {
        const auto* x = std::get_if<std::int64_t>(&v);
        return x && static_cast<double>(*x) >= def.lo && static_cast<double>(*x) <= def.hi;
    }
    case OptionKind::boolean:
    case OptionKind::categorical: {
        const auto* x = std::get_if<Level>(&v);
        return x && x->index < def.levels.size();
    }
    }
    return false;
}

inline void validate(const OptionDef& def) {
    if (def.name.empty()) throw DataError("option with empty name");
    if (is_numeric(def.kind)) {
        if (!std::isfinite(def.lo) || !std::isfinite(def.hi)) throw DataError("option '" + def.name + "': non-finite bounds");
        // a fixed option may carry a single-point domain
        if (!(def.lo < def.hi) && !(def.fixed && def.lo == def.hi))
            throw DataError("option '" + def.name + "': requires lo < hi");
        if (def.kind == OptionKind::integer && (def.lo != std::floor(def.lo) || def.hi != std::floor(def.hi)))
            throw DataError("option '" + def.name + "': integer bounds must be integral");
    } else {
        if (def.levels.empty()) throw DataError("option '" + def.name + "': empty level list");
        std::set<std::string> seen(def.levels.begin(), def.levels.end());
        if (seen.size() != def.levels.size()) throw DataError("option '" + def.name + "': duplicate levels");
    }
    if (!in_domain(def, def.default_value)) throw DataError("option '" + def.name + "': default outside domain");
}

/// Numeric view of a value: the double itself, the integer, or the level index.
inline double to_numeric(const Value& v) {
    return std::visit([](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Level>) return static_cast<double>(x.index);
        else return static_cast<double>(x);
    }, v);
}

/// Inverse of to_numeric for a given option; throws when the number is not a valid value.
inline Value from_numeric(const OptionDef& def, double x) {
    Value v;
    switch (def.kind) {
    case OptionKind::continuous: v = x; break;
    case OptionKind::integer:
        if (x != std::round(x)) throw DataError("option '" + def.name + "': non-integral value");
        v = static_cast<std::int64_t>(std::llround(x));
        break;
    default:
        if (x != std::round(x) || x < 0) throw DataError("option '" + def.name + "': invalid level code");
        v = Level{static_cast<std::size_t>(std::llround(x))};
    }
    if (!in_domain(def, v)) throw DataError("option '" + def.name + "': value outside domain");
    return v;
}

inline std::string format_double(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string format_value(const OptionDef& def, const Value& v) {
    if (const auto* l = std::get_if<Level>(&v)) return def.levels.at(l->index);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    return format_double(std::get<double>(v));
}

/// Parses a textual cell. Level options accept the level name or its integer code.
inline Value parse_value(const OptionDef& def, std::string_view text) {
    if (def.has_levels()) {
        for (std::size_t i = 0; i < def.levels.size(); ++i)
            if (def.levels[i] == text) return Level{i};
        if (def.kind == OptionKind::boolean) {
            if (text == "True" || text == "TRUE") return Level{1};
            if (text == "False" || text == "FALSE") return Level{0};
        }
    }
    double x = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw DataError("option '" + def.name + "': cannot parse '" + std::string(text) + "'");
    return from_numeric(def, x);
}

/// A concrete assignment of values to named options.
class Configuration {
public:
    using Map = std::map<std::string, Value, std::less<>>;

    Configuration() = default;
    explicit Configuration(Map values) : values_(std::move(values)) {}

    const Value& at(std::string_view name) const {
        auto it = values_.find(name);
        if (it == values_.end()) throw UsageError("configuration has no option '" + std::string(name) + "'");
        return it->second;
    }
    bool contains(std::string_view name) const { return values_.find(name) != values_.end(); }
    void set(std::string name, Value v) { values_[std::move(name)] = v; }
    std::size_t size() const { return values_.size(); }
    const Map& values() const { return values_; }
    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    Map values_;
};

class ConfigSpace {
public:
    ConfigSpace() = default;
    explicit ConfigSpace(std::vector<OptionDef> options) : options_(std::move(options)) {
        for (std::size_t i = 0; i < options_.size(); ++i) {
            validate(options_[i]);
            if (!index_.emplace(options_[i].name, i).second)
                throw DataError("duplicate option name '" + options_[i].name + "'");
        }
    }

    const std::vector<OptionDef>& options() const { return options_; }
    std::size_t size() const { return options_.size(); }
    bool empty() const { return options_.empty(); }

    const OptionDef* find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        return it == index_.end() ? nullptr : &options_[it->second];
    }
    const OptionDef& at(std::string_view name) const {
        if (const auto* def = find(name)) return *def;
        throw UsageError("unknown option '" + std::string(name) + "'");
    }
    std::size_t index_of(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) throw UsageError("unknown option '" + std::string(name) + "'");
        return it->second;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& o : options_) out.push_back(o.name);
        return out;
    }
    /// Options an optimizer may vary (everything not fixed to its default).
    std::vector<std::string> free_names() const {
        std::vector<std::string> out;
        for (const auto& o : options_)
            if (!o.fixed) out.push_back(o.name);
        return out;
    }

    Configuration defaults() const {
        Configuration c;
        for (const auto& o : options_) c.set(o.name, o.default_value);
        return c;
    }

    void check(const Configuration& c) const {
        if (c.size() != options_.size()) throw UsageError("configuration does not assign every option exactly once");
        for (const auto& o : options_) {
            if (!c.contains(o.name)) throw UsageError("configuration misses option '" + o.name + "'");
            if (!in_domain(o, c.at(o.name))) throw UsageError("value of '" + o.name + "' outside its domain");
        }
    }

private:
    std::vector<OptionDef> options_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Draws one value uniformly from an option's domain.
inline Value sample_value(const OptionDef& def, Rng& rng) {
    if (def.fixed) return def.default_value;
    switch (def.kind) {
    case OptionKind::continuous: return def.lo + (def.hi - def.lo) * rng.uniform();
    case OptionKind::integer:
        return rng.uniform_int(static_cast<std::int64_t>(def.lo), static_cast<std::int64_t>(def.hi));
    default: return Level{rng.index(def.levels.size())};
    }
}

inline std::vector<Configuration> sample_uniform(const ConfigSpace& space, std::size_t n, Rng& rng) {
    if (space.empty()) throw UsageError("cannot sample from an empty configuration space");
    if (n == 0) throw UsageError("sample count must be at least 1");
    std::vector<Configuration> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Configuration c;
        for (const auto& o : space.options()) c.set(o.name, sample_value(o, rng));
        out.push_back(std::move(c));
    }
    return out;
}

inline std::vector<Configuration> sample_uniform(const ConfigSpace& space, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return sample_uniform(space, n, rng);
}

/// Subspace searched after dimension reduction: selected options vary, the
/// rest stay pinned to their defaults.
class ReducedSpace {
public:
    ReducedSpace() = default;

    ReducedSpace(ConfigSpace parent, const std::vector<std::string>& selected) : parent_(std::move(parent)) {
        std::set<std::string, std::less<>> chosen;
        for (const auto& name : selected) {
            const auto& def = parent_.at(name);
            if (def.fixed) throw UsageError("fixed option '" + name + "' cannot be selected");
            chosen.insert(name);
        }
        for (const auto& o : parent_.options()) {
            if (chosen.count(o.name)) selected_.push_back(o.name);
            else pinned_.set(o.name, o.default_value);
        }
    }

    /// Reduction that keeps every free option.
    static ReducedSpace full(const ConfigSpace& space) { return ReducedSpace(space, space.free_names()); }

    const ConfigSpace& parent() const { return parent_; }
    /// Selected option names, in parent order.
    const std::vector<std::string>& selected() const { return selected_; }
    const Configuration& pinned() const { return pinned_; }
    bool is_selected(std::string_view name) const {
        return std::find(selected_.begin(), selected_.end(), name) != selected_.end();
    }

    Configuration embed(const Configuration& partial) const {
        if (partial.size() != selected_.size()) throw UsageError("partial configuration must assign exactly the selected options");
        Configuration full = pinned_;
        for (const auto& name : selected_) {
            if (!partial.contains(name)) throw UsageError("partial configuration misses selected option '" + name + "'");
            const auto& v = partial.at(name);
            if (!in_domain(parent_.at(name), v)) throw UsageError("value of '" + name + "' outside its domain");
            full.set(name, v);
        }
        return full;
    }

    Configuration restrict(const Configuration& full) const {
        Configuration partial;
        for (const auto& name : selected_) partial.set(name, full.at(name));
        return partial;
    }

    std::vector<Configuration> sample(std::size_t n, Rng& rng) const {
        if (selected_.empty()) throw UsageError("cannot sample from an empty reduced space");
        if (n == 0) throw UsageError("sample count must be at least 1");
        std::vector<Configuration> out;
        out.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            Configuration c = pinned_;
            for (const auto& name : selected_) c.set(name, sample_value(parent_.at(name), rng));
            out.push_back(std::move(c));
        }
        return out;
    }

private:
    ConfigSpace parent_;
    std::vector<std::string> selected_;
    Configuration pinned_;
};

inline Configuration embed(const ReducedSpace& reduced, const Configuration& partial) { return reduced.embed(partial); }

} // namespace cure
