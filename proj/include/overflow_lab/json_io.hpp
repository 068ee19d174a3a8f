#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "lattice.hpp"
#include "rational.hpp"
#include "series.hpp"

namespace overflow_lab {

using Json = nlohmann::json;

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "\"nan\"";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void emit(const Json& j, std::string& out, int indent) {
    const std::string pad(std::size_t(indent + 2), ' ');
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        // nlohmann's default object is an ordered std::map, so keys come out sorted
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + Json(it.key()).dump() + ": ";
            emit(it.value(), out, indent + 2);
        }
        out += "\n" + std::string(std::size_t(indent), ' ') + "}";
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            emit(j[i], out, indent + 2);
        }
        out += "\n" + std::string(std::size_t(indent), ' ') + "]";
        return;
    }
    case Json::value_t::number_float:
        out += format_double(j.get<double>());
        return;
    default:
        out += j.dump();
    }
}

}  // namespace detail

// Byte-stable text: sorted keys, two-space indent, doubles with 17 significant digits.
inline std::string to_stable_json(const Json& j) {
    std::string out;
    detail::emit(j, out, 0);
    out += "\n";
    return out;
}

inline Json rational_json(const Rational& q) { return to_string(q); }

inline Json rational_array_json(const std::vector<Rational>& v) {
    Json a = Json::array();
    for (const auto& q : v) a.push_back(to_string(q));
    return a;
}

// A series literal element: a string parsed exactly, or a JSON number.
inline Rational rational_from_json(const Json& j, const std::string& where) {
    if (j.is_string()) {
        try {
            return parse_rational(j.get<std::string>());
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what(), e.position());
        }
    }
    if (j.is_number_integer()) return Rational(Integer(long(j.get<long long>())));
    if (j.is_number_float()) return Rational(j.get<double>());
    throw ParseError(where + ": expected a rational string or a number", 0);
}

// ["0", "1/3", "2"] -> 0 + X/3 + 2X^2, order = length - 1.
inline RationalSeries series_from_json(const Json& j, const std::string& name = "series") {
    if (!j.is_array() || j.empty()) throw ParseError(name + ": expected a nonempty array of coefficients", 0);
    std::vector<Rational> c;
    for (std::size_t i = 0; i < j.size(); ++i) c.push_back(rational_from_json(j[i], name + "[" + std::to_string(i) + "]"));
    return RationalSeries(c);
}

inline Json series_to_json(const RationalSeries& s) { return rational_array_json(s.coefficients()); }

// {labels, matrix, c, cc}
inline IntersectionLattice lattice_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("lattice: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "labels" && it.key() != "matrix" && it.key() != "c" && it.key() != "cc")
            throw ConfigError("lattice: unknown key '" + it.key() + "'");
    if (!j.contains("matrix") || !j.contains("c")) throw ConfigError("lattice: 'matrix' and 'c' are required");
    IntersectionLattice L;
    const Json& m = j.at("matrix");
    if (!m.is_array()) throw ConfigError("lattice: 'matrix' must be an array of arrays");
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i].is_array()) throw ConfigError("lattice: matrix row " + std::to_string(i) + " is not an array");
        RationalVector row;
        for (std::size_t k = 0; k < m[i].size(); ++k)
            row.push_back(rational_from_json(m[i][k], "matrix[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
        L.M.push_back(row);
    }
    const Json& c = j.at("c");
    if (!c.is_array()) throw ConfigError("lattice: 'c' must be an array");
    for (std::size_t i = 0; i < c.size(); ++i) L.c.push_back(rational_from_json(c[i], "c[" + std::to_string(i) + "]"));
    if (j.contains("cc")) L.CC = rational_from_json(j.at("cc"), "cc");
    if (j.contains("labels")) {
        if (!j.at("labels").is_array()) throw ConfigError("lattice: 'labels' must be an array of strings");
        for (const auto& l : j.at("labels")) {
            if (!l.is_string()) throw ConfigError("lattice: labels must be strings");
            L.labels.push_back(l.get<std::string>());
        }
    }
    L.validate();
    return L;
}

inline Json lattice_to_json(const IntersectionLattice& L) {
    Json j;
    j["labels"] = L.labels;
    Json m = Json::array();
    for (const auto& row : L.M) m.push_back(rational_array_json(row));
    j["matrix"] = m;
    j["c"] = rational_array_json(L.c);
    j["cc"] = to_string(L.CC);
    return j;
}

}  // namespace overflow_lab
