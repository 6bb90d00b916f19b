#pragma once

// TOML documents converted to nlohmann::json, so config specs have one reader.

#include <string>
#include <string_view>

#include <json.hpp>
#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "cure/error.hpp"

namespace cure::toml_io {

inline nlohmann::json to_json(const toml::node& node) {
    if (const auto* t = node.as_table()) {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, v] : *t) j[std::string(k.str())] = to_json(v);
        return j;
    }
    if (const auto* a = node.as_array()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& v : *a) j.push_back(to_json(v));
        return j;
    }
    if (const auto* s = node.as_string()) return s->get();
    if (const auto* i = node.as_integer()) return i->get();
    if (const auto* f = node.as_floating_point()) return f->get();
    if (const auto* b = node.as_boolean()) return b->get();
    throw DataError("unsupported TOML value (dates and times are not accepted)");
}

inline nlohmann::json parse(std::string_view text) {
    try {
        return to_json(toml::parse(text));
    } catch (const toml::parse_error& e) {
        const auto& where = e.source().begin;
        throw DataError("TOML line " + std::to_string(where.line) + ": " + std::string(e.description()));
    }
}

} // namespace cure::toml_io
