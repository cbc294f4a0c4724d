#include "halflap/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace halflap {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

const std::map<std::string, std::set<std::string>>& schema_common() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"domain", {"n", "R", "height", "h", "base", "m", "L"}},
        {"nonlinearity", {"name", "fpoly"}},
        {"solver", {"max_iterations", "energy_tol", "residual_tol"}},
        {"experiment", {"radii", "eps", "geometry", "boundary", "angle",
                        "source", "profile", "kind", "levels", "modes", "samples"}},
    };
    return s;
}

// keys each subcommand accepts, as section.key
const std::map<std::string, std::set<std::string>>& subcommand_keys() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"layer", {"domain.R", "domain.height", "domain.h", "domain.n", "domain.base",
                   "nonlinearity.name", "nonlinearity.fpoly",
                   "solver.max_iterations", "solver.energy_tol", "solver.residual_tol"}},
        {"minimize", {"domain.n", "domain.R", "domain.height", "domain.h", "domain.base",
                      "nonlinearity.name", "nonlinearity.fpoly",
                      "solver.max_iterations", "solver.energy_tol", "solver.residual_tol",
                      "experiment.boundary", "experiment.radii"}},
        {"saddle", {"domain.m", "domain.R", "domain.L", "domain.h",
                    "nonlinearity.name", "nonlinearity.fpoly",
                    "solver.max_iterations", "solver.energy_tol", "solver.residual_tol",
                    "experiment.radii"}},
        {"energy-scan", {"domain.n", "domain.R", "domain.height", "domain.h", "domain.base",
                         "nonlinearity.name", "nonlinearity.fpoly",
                         "experiment.radii", "experiment.source"}},
        {"hhalf", {"experiment.geometry", "experiment.eps", "domain.h"}},
        {"symmetry", {"domain.R", "domain.height", "domain.h",
                      "experiment.angle"}},
        {"extend", {"domain.R", "domain.height", "domain.h", "domain.n",
                    "experiment.profile", "experiment.kind"}},
        {"selftest", {}},
    };
    return s;
}

} // namespace

bool ParsedConfig::has(const std::string& sec, const std::string& key) const {
    const auto it = sections.find(sec);
    if (it == sections.end()) return false;
    return it->second.count(key) != 0;
}

std::string ParsedConfig::get(const std::string& sec, const std::string& key,
                              const std::string& fallback) const {
    const auto it = sections.find(sec);
    if (it == sections.end()) return fallback;
    const auto kt = it->second.find(key);
    return kt == it->second.end() ? fallback : kt->second;
}

double ParsedConfig::get_double(const std::string& sec, const std::string& key,
                                double fallback) const {
    const std::string v = get(sec, key, "");
    if (v.empty()) return fallback;
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw ConfigError("bad number");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("config: " + sec + "." + key + " is not a number: " + v);
    }
}

int ParsedConfig::get_int(const std::string& sec, const std::string& key, int fallback) const {
    const std::string v = get(sec, key, "");
    if (v.empty()) return fallback;
    try {
        std::size_t used = 0;
        const int x = std::stoi(v, &used);
        if (used != v.size()) throw ConfigError("bad integer");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("config: " + sec + "." + key + " is not an integer: " + v);
    }
}

std::vector<double> ParsedConfig::get_list(const std::string& sec, const std::string& key) const {
    const std::string v = get(sec, key, "");
    std::vector<double> out;
    if (v.empty()) return out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) throw ConfigError("config: empty list element in " + sec + "." + key);
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw ConfigError("config: " + sec + "." + key + " has a bad element: " + tok);
        }
    }
    return out;
}

ParsedConfig parse_config_text(const std::string& text) {
    ParsedConfig cfg;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
            cfg.sections[section]; // section may legitimately stay empty
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": key outside a section");
        if (cfg.sections[section].count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key " + key);
        cfg.sections[section][key] = val;
    }
    return cfg;
}

ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void validate_config_keys(const ParsedConfig& cfg, const std::string& subcommand) {
    const auto& subs = subcommand_keys();
    const auto it = subs.find(subcommand);
    if (it == subs.end()) throw ConfigError("unknown subcommand: " + subcommand);
    const auto& common = schema_common();
    for (const auto& [sec, kv] : cfg.sections) {
        const auto sct = common.find(sec);
        if (sct == common.end()) throw ConfigError("config: unknown section [" + sec + "]");
        for (const auto& [key, val] : kv) {
            (void)val;
            if (!sct->second.count(key))
                throw ConfigError("config: unknown key " + sec + "." + key);
            if (!it->second.count(sec + "." + key))
                throw ConfigError("config: key " + sec + "." + key +
                                  " is not accepted by subcommand " + subcommand);
        }
    }
}

} // namespace halflap
