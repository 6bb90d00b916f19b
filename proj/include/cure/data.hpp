#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cure/error.hpp"
#include "cure/space.hpp"

namespace cure {

enum class Role { option, system_metric, objective, constraint_metric, success_flag };

inline std::string_view to_string(Role role) {
    switch (role) {
    case Role::option: return "option";
    case Role::system_metric: return "system-metric";
    case Role::objective: return "objective";
    case Role::constraint_metric: return "constraint-metric";
    case Role::success_flag: return "success-flag";
    }
    return "?";
}

inline Role parse_role(std::string_view s) {
    if (s == "option") return Role::option;
    if (s == "system-metric" || s == "system_metric" || s == "metric") return Role::system_metric;
    if (s == "objective") return Role::objective;
    if (s == "constraint-metric" || s == "constraint_metric" || s == "constraint") return Role::constraint_metric;
    if (s == "success-flag" || s == "success_flag" || s == "success") return Role::success_flag;
    throw DataError("unknown variable role '" + std::string(s) + "'");
}

using RoleMap = std::map<std::string, Role, std::less<>>;

struct Column {
    std::string name;
    Role role = Role::system_metric;
    std::vector<double> values;
};

/// Role-tagged observation table. Level-valued options are stored as integer
/// codes; every other column is numeric.
class Dataset {
public:
    Dataset() = default;

    Dataset(std::vector<Column> columns, std::shared_ptr<const ConfigSpace> space = nullptr)
        : columns_(std::move(columns)), space_(std::move(space)) {
        rows_ = columns_.empty() ? 0 : columns_.front().values.size();
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            const auto& col = columns_[c];
            if (col.values.size() != rows_) throw DataError("column '" + col.name + "' has a different length");
            if (!index_.emplace(col.name, c).second) throw DataError("duplicate column '" + col.name + "'");
            for (std::size_t r = 0; r < rows_; ++r)
                if (!std::isfinite(col.values[r]))
                    throw DataError("column '" + col.name + "' row " + std::to_string(r) + ": missing or non-finite value");
            if (col.role == Role::success_flag)
                for (double v : col.values)
                    if (v != 0.0 && v != 1.0) throw DataError("success flag '" + col.name + "' must be 0 or 1");
        }
        if (space_) {
            for (const auto& col : columns_) {
                const auto* def = space_->find(col.name);
                if ((def != nullptr) != (col.role == Role::option))
                    throw DataError("column '" + col.name + "': option role does not match the configuration space");
                if (!def) continue;
                for (std::size_t r = 0; r < rows_; ++r) {
                    try {
                        (void)from_numeric(*def, col.values[r]);
                    } catch (const DataError& e) {
                        throw DataError(std::string(e.what()) + " at row " + std::to_string(r));
                    }
                }
            }
            for (const auto& o : space_->options())
                if (!o.fixed && !has(o.name)) throw DataError("dataset lacks option column '" + o.name + "'");
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return columns_.size(); }
    const std::vector<Column>& columns() const { return columns_; }
    const std::shared_ptr<const ConfigSpace>& space() const { return space_; }

    bool has(std::string_view name) const { return index_.count(std::string(name)) != 0; }
    std::size_t index_of(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) throw UsageError("dataset has no column '" + std::string(name) + "'");
        return it->second;
    }
    const Column& column(std::string_view name) const { return columns_[index_of(name)]; }
    std::span<const double> values(std::string_view name) const { return column(name).values; }
    Role role(std::string_view name) const { return column(name).role; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& c : columns_) out.push_back(c.name);
        return out;
    }
    std::vector<std::string> names_with_role(Role role) const {
        std::vector<std::string> out;
        for (const auto& c : columns_)
            if (c.role == role) out.push_back(c.name);
        return out;
    }

    /// Option assignment recorded in a row; options absent from the table take their defaults.
    Configuration configuration(std::size_t row) const {
        if (!space_) throw UsageError("dataset has no attached configuration space");
        Configuration c = space_->defaults();
        for (const auto& col : columns_)
            if (col.role == Role::option) c.set(col.name, from_numeric(space_->at(col.name), col.values[row]));
        return c;
    }

    friend bool operator==(const Dataset& a, const Dataset& b) {
        if (a.cols() != b.cols() || a.rows() != b.rows()) return false;
        for (const auto& col : a.columns_) {
            if (!b.has(col.name)) return false;
            const auto& other = b.column(col.name);
            if (other.role != col.role || other.values != col.values) return false;
        }
        return true;
    }

private:
    std::vector<Column> columns_;
    std::unordered_map<std::string, std::size_t> index_;
    std::shared_ptr<const ConfigSpace> space_;
    std::size_t rows_ = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_number(std::string_view text, std::string_view column, std::size_t row) {
    double x = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(x))
        throw DataError("row " + std::to_string(row) + ", column '" + std::string(column) + "': cannot parse '" +
                        std::string(text) + "'");
    return x;
}

} // namespace detail

/// Reads a comma-separated table with a mandatory header row. Columns named
/// after options of `space` take the option role; every other column needs
/// an entry in `roles`.
inline Dataset read_dataset(std::istream& in, std::shared_ptr<const ConfigSpace> space, const RoleMap& roles) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line).empty()) throw DataError("missing header row");
    const auto header = detail::split_csv_line(line);

    std::vector<Column> columns;
    for (const auto& name : header) {
        Column col;
        col.name = name;
        const bool is_option = space && space->find(name);
        auto it = roles.find(name);
        if (is_option) {
            if (it != roles.end() && it->second != Role::option)
                throw DataError("column '" + name + "' is an option but the role map says " + std::string(to_string(it->second)));
            col.role = Role::option;
        } else if (it != roles.end()) {
            if (it->second == Role::option) throw DataError("unknown column '" + name + "': not an option of the configuration space");
            col.role = it->second;
        } else {
            throw DataError("role missing for column '" + name + "'");
        }
        columns.push_back(std::move(col));
    }
    for (const auto& [name, role] : roles)
        if (std::find(header.begin(), header.end(), name) == header.end() && role != Role::option)
            throw DataError("unknown column '" + name + "': named in the role map but absent from the file");

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            auto& col = columns[c];
            if (col.role == Role::option) {
                try {
                    col.values.push_back(to_numeric(parse_value(space->at(col.name), cells[c])));
                } catch (const DataError& e) {
                    throw DataError("row " + std::to_string(row) + ": " + e.what());
                }
            } else {
                col.values.push_back(detail::parse_number(cells[c], col.name, row));
            }
        }
        ++row;
    }
    if (row == 0) throw DataError("table has no data rows");
    return Dataset(std::move(columns), std::move(space));
}

inline Dataset load_dataset(const std::string& path, std::shared_ptr<const ConfigSpace> space, const RoleMap& roles) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_dataset(in, std::move(space), roles);
}

inline void write_dataset(const Dataset& ds, std::ostream& out) {
    const auto& cols = ds.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c].name;
    out << '\n';
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out << ',';
            const auto& col = cols[c];
            if (col.role == Role::option && ds.space()) {
                const auto& def = ds.space()->at(col.name);
                out << format_value(def, from_numeric(def, col.values[r]));
            } else {
                out << format_double(col.values[r]);
            }
        }
        out << '\n';
    }
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_dataset(ds, out);
}

struct ColumnScaling {
    std::string name;
    double mean = 0.0;
    double sd = 1.0;
};

struct Standardized {
    Dataset data;
    std::vector<ColumnScaling> scaling;
};

inline double sample_mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

inline double sample_sd(std::span<const double> x) {
    const double m = sample_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// z-scores the named columns (sample sd, denominator n-1). Transformed option
/// columns no longer live in their domains, so the result carries no space.
inline Standardized standardize(const Dataset& ds, const std::vector<std::string>& names) {
    if (ds.rows() < 2) throw DataError("standardize needs at least two rows");
    std::vector<Column> cols = ds.columns();
    std::vector<ColumnScaling> scaling;
    bool touched_option = false;
    for (const auto& name : names) {
        auto& col = cols[ds.index_of(name)];
        const double m = sample_mean(col.values);
        const double sd = sample_sd(col.values);
        if (!(sd > 0.0)) throw DataError("column '" + name + "' is constant and cannot be standardized");
        for (double& v : col.values) v = (v - m) / sd;
        scaling.push_back({name, m, sd});
        touched_option = touched_option || col.role == Role::option;
    }
    return {Dataset(std::move(cols), touched_option ? nullptr : ds.space()), std::move(scaling)};
}

inline Dataset unstandardize(const Dataset& ds, const std::vector<ColumnScaling>& scaling,
                             std::shared_ptr<const ConfigSpace> space = nullptr) {
    std::vector<Column> cols = ds.columns();
    for (const auto& s : scaling)
        for (double& v : cols[ds.index_of(s.name)].values) v = v * s.sd + s.mean;
    return Dataset(std::move(cols), space ? std::move(space) : ds.space());
}

} // namespace cure
