#pragma once

#include <cctype>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

namespace inchsim {

// Scale factors to SI for the unit suffixes the config format accepts.
inline const std::unordered_map<std::string, double>& unit_table() {
    static const std::unordered_map<std::string, double> table = {
        {"m", 1.0},       {"cm", 1e-2},     {"mm", 1e-3},    {"um", 1e-6},
        {"nm", 1e-9},     {"pm", 1e-12},
        {"Pa", 1.0},      {"kPa", 1e3},     {"MPa", 1e6},    {"GPa", 1e9},
        {"kg/m3", 1.0},   {"g/cm3", 1e3},
        {"m/V", 1.0},     {"nm/V", 1e-9},   {"pm/V", 1e-12},
        {"V", 1.0},       {"kV", 1e3},
        {"kg", 1.0},      {"g", 1e-3},      {"mg", 1e-6},
        {"s", 1.0},       {"ms", 1e-3},
        {"Hz", 1.0},
        {"N", 1.0},       {"mN", 1e-3},
        {"kg/m", 1.0},    {"g/cm", 1e-1},
    };
    return table;
}

/// Parses "300 um", "1.5GPa", "-960 V", or a bare number (treated as SI).
inline double parse_quantity(std::string_view text) {
    std::string s(text);
    const char* p = s.c_str();
    char* end = nullptr;
    double value = std::strtod(p, &end);
    if (end == p)
        throw std::invalid_argument("parse_quantity: no number in '" + s + "'");
    while (*end && std::isspace(static_cast<unsigned char>(*end)))
        ++end;
    std::string unit(end);
    while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back())))
        unit.pop_back();
    if (unit.empty())
        return value;
    auto it = unit_table().find(unit);
    if (it == unit_table().end())
        throw std::invalid_argument("parse_quantity: unknown unit '" + unit + "' in '" + s + "'");
    return value * it->second;
}

}  // namespace inchsim
