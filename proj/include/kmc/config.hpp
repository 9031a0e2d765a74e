#pragma once

#include <map>
#include <string>
#include <vector>

#include "kmc/engine.hpp"

namespace kmc {

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Flat sectioned key=value document ([section] headers, '#' comments).
// Parsing is total on valid documents; unknown sections or keys are rejected
// with their line number.
struct ConfigFile {
    // section -> ordered key/value pairs
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections;

    static ConfigFile parse_text(const std::string& text);
    static ConfigFile parse_file(const std::string& path);
    std::string serialize() const;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_number(const std::string& section, const std::string& key, double fallback) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
};

struct PilotSettings {
    bool enabled = false;
    std::vector<JumpLaw> grid;
    long long pilot_samples = 0;
};

struct OutputSettings {
    std::string path;    // empty = stdout only
    std::string format;  // "csv"
};

// Build the engine configuration (and pilot/output settings) from a document.
RunConfig build_run_config(const ConfigFile& doc);
PilotSettings build_pilot_settings(const ConfigFile& doc);
OutputSettings build_output_settings(const ConfigFile& doc);

// "key=value" override applied as "section.key=value".
void apply_override(ConfigFile& doc, const std::string& assignment);

std::string csv_header();
std::string csv_row(const std::string& quantity, const EstimateReport& rep);

} // namespace kmc
