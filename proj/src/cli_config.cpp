#include "bandit/cli_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bandit/errors.hpp"

namespace bandit {

const std::vector<SchemaEntry>& config_schema() {
    static const std::vector<SchemaEntry> schema = {
        {"experiment", "kind", "mab", "experiment family: mab or cmab"},
        {"experiment", "horizon", "200", "rounds T of the finite-sample experiment"},
        {"experiment", "p", "1", "context dimension (cmab)"},
        {"experiment", "mu", "0", "global mean (mab)"},
        {"experiment", "beta", "0", "global coefficient vector (cmab, comma list)"},
        {"experiment", "m1", "0", "arm-1 local drift (mab)"},
        {"experiment", "m2", "0", "arm-2 local drift (mab)"},
        {"experiment", "b1", "0", "arm-1 local drift vector (cmab, comma list)"},
        {"experiment", "b2", "0", "arm-2 local drift vector (cmab, comma list)"},
        {"experiment", "j1", "1", "arm-1 Fisher information (limit mab)"},
        {"experiment", "j2", "1", "arm-2 Fisher information (limit mab)"},
        {"experiment", "innovation", "gaussian", "innovation law: gaussian, uniform, three-point"},
        {"experiment", "centering", "known", "reward centering: known or raw"},
        {"experiment", "grid", "0", "limit-experiment grid points (0 = 100 mab / 200 cmab)"},
        {"experiment", "moments", "monte-carlo", "context moment strategy: analytic or monte-carlo"},
        {"experiment", "n_ctx", "1024", "contexts per step for monte-carlo moments"},
        {"experiment", "seed", "0", "base seed"},
        {"policy", "name", "ti-thompson", "sampling scheme"},
        {"policy", "b", "0.05", "Thompson prior scale"},
        {"policy", "alpha", "1", "softmax temperature"},
        {"policy", "delta", "1", "UCB confidence level, in (0,1]"},
        {"policy", "lambda", "1", "LinUCB bonus coefficient"},
        {"policy", "ucb_bonus", "limit", "tempered-UCB bonus: limit or log-horizon"},
        {"mc", "generator", "limit", "generator for power-curve/ks-report: limit or finite"},
        {"mc", "reps", "50000", "Monte Carlo replications"},
        {"mc", "alpha", "0.05", "test level"},
        {"mc", "statistics", "", "comma list of statistic names"},
        {"mc", "alt", "0:5:0.5", "alternative grid: comma list or start:stop:step"},
        {"mc", "alt_kind", "auto", "alternative scale: auto, m2, delta, zeta"},
        {"mc", "zeta_direction", "", "cmab alternative direction (comma list)"},
        {"mc", "nuisance", "0,50", "nuisance drift values for ks-report"},
        {"mc", "critical", "auto", "critical values: auto, normal, simulate"},
        {"mc", "np_bound", "false", "include the oracle power bound in power-curve"},
        {"output", "digits", "17", "significant digits in CSV output"},
    };
    return schema;
}

namespace {

const SchemaEntry* find_entry(const std::string& section, const std::string& key) {
    for (const auto& e : config_schema())
        if (section == e.section && key == e.key) return &e;
    return nullptr;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

CliConfig::CliConfig() {
    for (const auto& e : config_schema())
        values_[std::string(e.section) + "." + e.key] = e.default_value;
}

CliConfig CliConfig::parse_text(const std::string& text) {
    CliConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw config_error("line " + std::to_string(lineno) + ": key outside a section");
        cfg.set(section, key, value);
    }
    return cfg;
}

CliConfig CliConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

void CliConfig::set(const std::string& section, const std::string& key,
                    const std::string& value) {
    if (!find_entry(section, key))
        throw config_error("unknown config key '" + section + "." + key + "'");
    values_[section + "." + key] = value;
}

const std::string& CliConfig::get(const std::string& section, const std::string& key) const {
    const auto it = values_.find(section + "." + key);
    if (it == values_.end())
        throw config_error("unknown config key '" + section + "." + key + "'");
    return it->second;
}

double CliConfig::get_real(const std::string& section, const std::string& key) const {
    const std::string& text = get(section, key);
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw config_error("key '" + section + "." + key + "': bad number '" + text + "'");
    }
}

std::int64_t CliConfig::get_int(const std::string& section, const std::string& key) const {
    const std::string& text = get(section, key);
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw config_error("key '" + section + "." + key + "': bad integer '" + text + "'");
    }
}

std::vector<double> CliConfig::get_reals(const std::string& section,
                                         const std::string& key) const {
    const std::string& text = get(section, key);
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok = trim(
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (tok.empty())
            throw config_error("key '" + section + "." + key + "': bad list '" + text + "'");
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw config_error("key '" + section + "." + key + "': bad list '" + text + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> CliConfig::echo_lines() const {
    std::vector<std::string> out;
    for (const auto& e : config_schema()) {
        const std::string dotted = std::string(e.section) + "." + e.key;
        out.push_back(dotted + " = " + values_.at(dotted));
    }
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        std::vector<double> out;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto comma = text.find(',', pos);
            const std::string tok = trim(text.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (tok.empty()) throw config_error("bad grid '" + text + "'");
            try {
                std::size_t used = 0;
                out.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw config_error("bad grid '" + text + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return out;
    }
    const auto colon2 = text.find(':', colon + 1);
    if (colon2 == std::string::npos) throw config_error("bad grid '" + text + "'");
    double start, stop, step;
    try {
        start = std::stod(text.substr(0, colon));
        stop = std::stod(text.substr(colon + 1, colon2 - colon - 1));
        step = std::stod(text.substr(colon2 + 1));
    } catch (const std::exception&) {
        throw config_error("bad grid '" + text + "'");
    }
    if (!(step > 0.0) || stop < start) throw config_error("bad grid '" + text + "'");
    std::vector<double> out;
    for (double v = start; v <= stop + 1e-12; v += step) out.push_back(v);
    return out;
}

namespace {

bool config_is_contextual(const CliConfig& cfg) {
    const std::string& kind = cfg.get("experiment", "kind");
    if (kind == "mab") return false;
    if (kind == "cmab") return true;
    throw config_error("experiment.kind must be mab or cmab");
}

Centering centering_from(const CliConfig& cfg) {
    const std::string& c = cfg.get("experiment", "centering");
    if (c == "known") return Centering::known_global;
    if (c == "raw") return Centering::raw;
    throw config_error("experiment.centering must be known or raw");
}

ContextMoments moments_from(const CliConfig& cfg) {
    ContextMoments m;
    const std::string& strategy = cfg.get("experiment", "moments");
    if (strategy == "analytic") {
        m.strategy = ContextMoments::Strategy::analytic;
    } else if (strategy == "monte-carlo") {
        m.strategy = ContextMoments::Strategy::monte_carlo;
    } else {
        throw config_error("experiment.moments must be analytic or monte-carlo");
    }
    m.n_ctx = static_cast<int>(cfg.get_int("experiment", "n_ctx"));
    return m;
}

SdeGrid grid_from(const CliConfig& cfg, bool contextual) {
    SdeGrid g;
    const std::int64_t n = cfg.get_int("experiment", "grid");
    g.n_steps = (n == 0) ? (contextual ? 200 : 100) : static_cast<int>(n);
    return g;
}

void fill_policies(const CliConfig& cfg, bool contextual, std::int64_t horizon,
                   MabPolicy* mab, CmabPolicy* cmab) {
    const std::string& name = cfg.get("policy", "name");
    const std::string& bonus = cfg.get("policy", "ucb_bonus");
    if (bonus != "limit" && bonus != "log-horizon")
        throw config_error("policy.ucb_bonus must be limit or log-horizon");
    if (!contextual) {
        mab->kind = mab_policy_from_name(name);
        mab->b = cfg.get_real("policy", "b");
        mab->alpha = cfg.get_real("policy", "alpha");
        mab->delta = cfg.get_real("policy", "delta");
        mab->ucb_log_horizon = (bonus == "log-horizon");
        mab->horizon = horizon;
    } else {
        cmab->kind = cmab_policy_from_name(name);
        cmab->b = cfg.get_real("policy", "b");
        cmab->alpha = cfg.get_real("policy", "alpha");
        cmab->lambda = cfg.get_real("policy", "lambda");
        cmab->horizon = horizon;
    }
}

}  // namespace

SimSetup sim_setup_from_config(const CliConfig& cfg) {
    SimSetup s;
    s.contextual = config_is_contextual(cfg);
    const int p = s.contextual ? static_cast<int>(cfg.get_int("experiment", "p")) : 1;

    s.config.horizon = cfg.get_int("experiment", "horizon");
    s.config.context_dim = p;
    s.config.contextual = s.contextual;
    s.config.innovation = innovation_from_name(cfg.get("experiment", "innovation"));
    s.config.seed = static_cast<std::uint64_t>(cfg.get_int("experiment", "seed"));
    if (!s.contextual) {
        s.config.global_param = {cfg.get_real("experiment", "mu")};
        s.config.local1 = {cfg.get_real("experiment", "m1")};
        s.config.local2 = {cfg.get_real("experiment", "m2")};
    } else {
        s.config.global_param = cfg.get_reals("experiment", "beta");
        s.config.local1 = cfg.get_reals("experiment", "b1");
        s.config.local2 = cfg.get_reals("experiment", "b2");
        auto expand = [p](std::vector<double>& v) {
            if (static_cast<int>(v.size()) == 1 && p > 1) v.assign(p, v[0]);
        };
        expand(s.config.global_param);
        expand(s.config.local1);
        expand(s.config.local2);
    }
    s.centering = centering_from(cfg);
    s.grid = grid_from(cfg, s.contextual);
    s.moments = moments_from(cfg);
    s.j1 = cfg.get_real("experiment", "j1");
    s.j2 = cfg.get_real("experiment", "j2");

    fill_policies(cfg, s.contextual, s.config.horizon, &s.mab_policy, &s.cmab_policy);
    s.mab_policy.mode = PolicyMode::finite_sample;
    s.cmab_policy.mode = PolicyMode::finite_sample;
    s.config.validate();
    return s;
}

McPlan plan_from_config(const CliConfig& cfg, McPlan::Generator generator) {
    McPlan plan;
    plan.generator = generator;
    plan.contextual = config_is_contextual(cfg);
    plan.p = plan.contextual ? static_cast<int>(cfg.get_int("experiment", "p")) : 1;
    plan.horizon = cfg.get_int("experiment", "horizon");
    plan.grid = grid_from(cfg, plan.contextual);
    plan.moments = moments_from(cfg);
    plan.innovation = innovation_from_name(cfg.get("experiment", "innovation"));
    plan.centering = centering_from(cfg);
    plan.reps = cfg.get_int("mc", "reps");
    plan.alpha = cfg.get_real("mc", "alpha");
    plan.base_seed = static_cast<std::uint64_t>(cfg.get_int("experiment", "seed"));
    plan.mu = cfg.get_real("experiment", "mu");
    plan.m1 = cfg.get_real("experiment", "m1");
    plan.m2 = cfg.get_real("experiment", "m2");
    plan.j1 = cfg.get_real("experiment", "j1");
    plan.j2 = cfg.get_real("experiment", "j2");
    if (plan.contextual) {
        plan.beta = cfg.get_reals("experiment", "beta");
        plan.b1 = cfg.get_reals("experiment", "b1");
        plan.b2 = cfg.get_reals("experiment", "b2");
        auto expand = [&](std::vector<double>& v) {
            if (static_cast<int>(v.size()) == 1 && plan.p > 1) v.assign(plan.p, v[0]);
        };
        expand(plan.beta);
        expand(plan.b1);
        expand(plan.b2);
    }
    fill_policies(cfg, plan.contextual, plan.horizon, &plan.mab_policy, &plan.cmab_policy);

    const std::string& stats_text = cfg.get("mc", "statistics");
    if (!stats_text.empty()) {
        std::size_t pos = 0;
        while (pos <= stats_text.size()) {
            const auto comma = stats_text.find(',', pos);
            std::string tok = stats_text.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            // wald directions use ':' args with ';' separating components
            std::replace(tok.begin(), tok.end(), ';', ',');
            const auto b = tok.find_first_not_of(" \t");
            if (b == std::string::npos) throw config_error("empty statistic name");
            const auto e = tok.find_last_not_of(" \t");
            plan.statistics.push_back(StatisticSpec::parse(tok.substr(b, e - b + 1)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }

    const std::string& alt_kind = cfg.get("mc", "alt_kind");
    if (alt_kind == "m2") {
        plan.alt_kind = McPlan::AltKind::one_arm_m2;
    } else if (alt_kind == "delta") {
        plan.alt_kind = McPlan::AltKind::two_sample_delta;
    } else if (alt_kind == "zeta") {
        plan.alt_kind = McPlan::AltKind::cmab_zeta;
    } else if (alt_kind == "auto") {
        if (plan.contextual) {
            plan.alt_kind = McPlan::AltKind::cmab_zeta;
        } else {
            const bool one_arm = !plan.statistics.empty() &&
                                 (plan.statistics[0].kind == StatisticSpec::Kind::one_arm_t ||
                                  plan.statistics[0].kind == StatisticSpec::Kind::one_arm_aw ||
                                  plan.statistics[0].kind == StatisticSpec::Kind::one_arm_ipw ||
                                  plan.statistics[0].kind == StatisticSpec::Kind::np);
            plan.alt_kind =
                one_arm ? McPlan::AltKind::one_arm_m2 : McPlan::AltKind::two_sample_delta;
        }
    } else {
        throw config_error("mc.alt_kind must be auto, m2, delta or zeta");
    }

    plan.alt_grid = parse_grid(cfg.get("mc", "alt"));
    const std::string& dir = cfg.get("mc", "zeta_direction");
    if (!dir.empty()) {
        plan.zeta_direction = parse_grid(dir);
    } else if (plan.contextual) {
        // default: the first Wald contrast direction, else the intercept
        plan.zeta_direction.assign(static_cast<std::size_t>(plan.p), 0.0);
        plan.zeta_direction[0] = 1.0;
        for (const auto& s : plan.statistics) {
            if (!s.G.empty() && static_cast<int>(s.G.size()) == plan.p) {
                plan.zeta_direction = s.G;
                break;
            }
        }
    }

    const std::string& critical = cfg.get("mc", "critical");
    if (critical == "auto") {
        plan.critical = McPlan::CriticalMode::auto_normal;
    } else if (critical == "normal") {
        plan.critical = McPlan::CriticalMode::normal;
    } else if (critical == "simulate") {
        plan.critical = McPlan::CriticalMode::simulate;
    } else {
        throw config_error("mc.critical must be auto, normal or simulate");
    }
    return plan;
}

namespace {

struct PresetDef {
    std::string name;
    std::vector<std::array<std::string, 3>> overrides;
};

std::vector<PresetDef> build_presets() {
    std::vector<PresetDef> out;
    const std::array<std::pair<const char*, const char*>, 3> policies = {{
        {"thompsoninv", "ti-thompson"},
        {"temperedgreedy", "ti-tempered-greedy"},
        {"tempereducb", "ti-tempered-ucb"},
    }};
    for (const auto& [tag, policy] : policies) {
        for (const char* T : {"50", "100", "200", "500"}) {
            PresetDef p;
            p.name = std::string("table3-") + tag + "-T" + T;
            p.overrides = {
                {"experiment", "horizon", T},
                {"policy", "name", policy},
                {"mc", "statistics", "aw,ts-t,ts-aw,ts-ipw"},
                {"mc", "alt_kind", "delta"},
            };
            out.push_back(std::move(p));
        }
        PresetDef fig4;
        fig4.name = std::string("fig4-aw-power-") + tag;
        fig4.overrides = {
            {"policy", "name", policy},
            {"mc", "statistics", "aw"},
            {"mc", "alt_kind", "m2"},
            {"mc", "alt", "0:5:0.5"},
            {"mc", "np_bound", "true"},
        };
        out.push_back(std::move(fig4));
    }
    PresetDef fig9;
    fig9.name = "fig9-ts-power-thompsoninv";
    fig9.overrides = {
        {"policy", "name", "ti-thompson"},
        {"mc", "statistics", "ts-t,ts-aw,ts-ipw"},
        {"mc", "alt_kind", "delta"},
        {"mc", "alt", "0:5:0.5"},
    };
    out.push_back(std::move(fig9));
    PresetDef fig3;
    fig3.name = "fig3-freeness-thompsoninv";
    fig3.overrides = {
        {"policy", "name", "ti-thompson"},
        {"mc", "statistics", "freq,ts-t,ts-aw,ts-ipw"},
        {"mc", "alt_kind", "delta"},
        {"mc", "nuisance", "0,50"},
    };
    out.push_back(std::move(fig3));
    PresetDef fig5;
    fig5.name = "fig5-freeness-thompson";
    fig5.overrides = {
        {"policy", "name", "thompson"},
        {"mc", "statistics", "freq,ts-t,ts-aw,ts-ipw"},
        {"mc", "alt_kind", "delta"},
        {"mc", "nuisance", "0,50"},
    };
    out.push_back(std::move(fig5));
    PresetDef fig7;
    fig7.name = "fig7-cmab-freeness-thompsoninv";
    fig7.overrides = {
        {"experiment", "kind", "cmab"},
        {"experiment", "p", "2"},
        {"experiment", "beta", "0,0"},
        {"experiment", "b1", "0,0"},
        {"experiment", "b2", "0,0"},
        {"experiment", "moments", "analytic"},
        {"policy", "name", "ti-thompson-lin"},
        {"mc", "statistics", "freq,ts-wald:1;0,ts-wald:0;1,ts-aw-wald:1;0,ts-aw-wald:0;1"},
        {"mc", "nuisance", "0,100"},
    };
    out.push_back(std::move(fig7));
    return out;
}

}  // namespace

CliConfig CliConfig::preset(const std::string& name) {
    static const std::vector<PresetDef> presets = build_presets();
    for (const auto& p : presets) {
        if (p.name == name) {
            CliConfig cfg;
            for (const auto& kv : p.overrides) cfg.set(kv[0], kv[1], kv[2]);
            return cfg;
        }
    }
    throw config_error("unknown preset '" + name + "'");
}

std::vector<std::string> CliConfig::preset_names() {
    static const std::vector<PresetDef> presets = build_presets();
    std::vector<std::string> names;
    for (const auto& p : presets) names.push_back(p.name);
    return names;
}

}  // namespace bandit
