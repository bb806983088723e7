#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "inchsim/gait.hpp"
#include "inchsim/materials.hpp"
#include "inchsim/units.hpp"

namespace inchsim {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Flat key = value document with '#' comments; values are quantity strings.
inline std::map<std::string, std::string> parse_keyvalue(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const char* ws = " \t\r\n";
            const auto b = s.find_first_not_of(ws);
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(ws);
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        kv[key] = val;
    }
    return kv;
}

/// Loads a trimorph stack description. Canonical keys: piezo.E, piezo.rho,
/// piezo.h, piezo.nu (optional), epoxy.*, substrate.*, d31, d_pitch, L, width;
/// optional plane_strain (on/off), bend_direction (up/down), v_min, v_max.
inline TrimorphStack parse_stack(const std::map<std::string, std::string>& kv) {
    auto need = [&kv](const std::string& key) -> double {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing key '" + key + "'");
        try {
            return parse_quantity(it->second);
        } catch (const std::exception& e) {
            throw ConfigError("key '" + key + "': " + e.what());
        }
    };
    auto layer = [&](const std::string& name) {
        LayerSpec l;
        l.youngs_modulus = need(name + ".E");
        l.density = need(name + ".rho");
        l.thickness = need(name + ".h");
        auto it = kv.find(name + ".nu");
        if (it != kv.end()) l.poisson_ratio = parse_quantity(it->second);
        return l;
    };
    TrimorphStack stack;
    stack.piezo = layer("piezo");
    stack.epoxy = layer("epoxy");
    stack.substrate = layer("substrate");
    stack.d31 = need("d31");
    stack.electrode_pitch = need("d_pitch");
    stack.actuator_length = need("L");
    stack.width = need("width");
    if (auto it = kv.find("plane_strain"); it != kv.end())
        stack.plane_strain_correction = (it->second == "on" || it->second == "true" ||
                                         it->second == "1");
    if (auto it = kv.find("bend_direction"); it != kv.end()) {
        if (it->second == "up")
            stack.bend_direction = +1;
        else if (it->second == "down")
            stack.bend_direction = -1;
        else
            throw ConfigError("bend_direction must be 'up' or 'down'");
    }
    if (kv.count("v_min") && kv.count("v_max"))
        stack.voltage_range = {need("v_min"), need("v_max")};
    stack.validate();
    return stack;
}

inline TrimorphStack load_stack(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return parse_stack(parse_keyvalue(is));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// Gait sequence file: one step per line, five voltages with unit suffixes and
/// an optional dwell, e.g. "0V 300V -1500V 300V 0V 4s".
inline GaitSequence parse_gait_sequence(std::istream& is) {
    GaitSequence g;
    g.label = "custom";
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens.size() != 5 && tokens.size() != 6)
            throw ConfigError("gait line " + std::to_string(lineno) +
                              ": expected 5 voltages and an optional dwell");
        GaitStep step;
        try {
            for (int i = 0; i < 5; ++i) step.voltages[i] = parse_quantity(tokens[i]);
            if (tokens.size() == 6) step.dwell = parse_quantity(tokens[5]);
        } catch (const std::exception& e) {
            throw ConfigError("gait line " + std::to_string(lineno) + ": " + e.what());
        }
        g.steps.push_back(step);
    }
    g.validate();
    return g;
}

inline GaitSequence load_gait_sequence(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open gait file '" + path + "'");
    return parse_gait_sequence(is);
}

}  // namespace inchsim
