#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace halflap {

/// Raised on any configuration problem; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key=value file with [section] headers, '#' comments, no nesting.
struct ParsedConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& sec, const std::string& key) const;
    std::string get(const std::string& sec, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& sec, const std::string& key, double fallback) const;
    int get_int(const std::string& sec, const std::string& key, int fallback) const;
    std::vector<double> get_list(const std::string& sec, const std::string& key) const;
};

ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

/// Schema check: every present section/key must be known for the
/// subcommand; unknown entries are rejected (no silent typos).
void validate_config_keys(const ParsedConfig& cfg, const std::string& subcommand);

/// Fully validated experiment description.
struct ExperimentConfig {
    std::string subcommand;
    ParsedConfig raw;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

} // namespace halflap
