#pragma once

#include <map>
#include <string>
#include <vector>

#include "bandit/experiment.hpp"
#include "bandit/mc.hpp"
#include "bandit/sim_finite.hpp"

namespace bandit {

// One entry of the line-oriented `[section]` / `key = value` configuration.
// The schema is the single source of truth: parsing rejects unknown keys and
// --help output is generated from it, so undocumented keys cannot exist.
struct SchemaEntry {
    const char* section;
    const char* key;
    const char* default_value;
    const char* help;
};

const std::vector<SchemaEntry>& config_schema();

class CliConfig {
public:
    CliConfig();  // all defaults

    static CliConfig parse_file(const std::string& path);
    static CliConfig parse_text(const std::string& text);
    static CliConfig preset(const std::string& name);
    static std::vector<std::string> preset_names();

    void set(const std::string& section, const std::string& key, const std::string& value);

    const std::string& get(const std::string& section, const std::string& key) const;
    double get_real(const std::string& section, const std::string& key) const;
    std::int64_t get_int(const std::string& section, const std::string& key) const;
    std::vector<double> get_reals(const std::string& section, const std::string& key) const;

    // Effective configuration (defaults resolved), fixed order, for output
    // headers.
    std::vector<std::string> echo_lines() const;

private:
    std::map<std::string, std::string> values_;  // "section.key" -> value
};

// Parse "a,b,c" or "start:stop:step" into a numeric grid.
std::vector<double> parse_grid(const std::string& text);

// Domain-object assembly. Throws config_error on inconsistent settings.
struct SimSetup {
    ExperimentConfig config;
    MabPolicy mab_policy;
    CmabPolicy cmab_policy;
    Centering centering = Centering::known_global;
    bool contextual = false;
    SdeGrid grid{100};
    ContextMoments moments;
    double j1 = 1.0, j2 = 1.0;
};
SimSetup sim_setup_from_config(const CliConfig& cfg);

McPlan plan_from_config(const CliConfig& cfg, McPlan::Generator generator);

}  // namespace bandit
