#include <omp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bandit/cli_config.hpp"
#include "bandit/errors.hpp"
#include "bandit/mc.hpp"
#include "bandit/sim_finite.hpp"
#include "bandit/sim_limit.hpp"
#include "bandit/stats.hpp"

namespace {

using namespace bandit;

int g_digits = 17;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", g_digits, v);
    return buf;
}

int digits_from(const CliConfig& cfg) {
    const std::int64_t digits = cfg.get_int("output", "digits");
    if (digits < 6 || digits > 17)
        throw config_error("output.digits must be between 6 and 17");
    return static_cast<int>(digits);
}

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_path;
    std::int64_t seed = -1;
    int threads = 0;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool need_out = true) {
    cmd->add_option("--config", args->config_path, "configuration file");
    cmd->add_option("--preset", args->preset, "named configuration preset");
    auto* out = cmd->add_option("--out", args->out_path, "output CSV path");
    if (need_out) out->required();
    cmd->add_option("--seed", args->seed, "override experiment.seed");
    cmd->add_option("--threads", args->threads, "worker threads (default: all)");
    cmd->add_flag("--verbose", args->verbose, "print progress to stdout");
    std::string footer = "Config keys (defaults):\n";
    for (const auto& e : config_schema()) {
        footer += "  " + std::string(e.section) + "." + e.key + " = " + e.default_value +
                  "  (" + e.help + ")\n";
    }
    footer += "Presets:\n";
    for (const auto& name : CliConfig::preset_names()) footer += "  " + name + "\n";
    cmd->footer(footer);
}

CliConfig load_config(const CommonArgs& args) {
    CliConfig cfg;
    if (!args.preset.empty() && !args.config_path.empty())
        throw config_error("--preset and --config are mutually exclusive");
    if (!args.preset.empty()) {
        cfg = CliConfig::preset(args.preset);
    } else if (!args.config_path.empty()) {
        cfg = CliConfig::parse_file(args.config_path);
    }
    if (args.seed >= 0) cfg.set("experiment", "seed", std::to_string(args.seed));
    g_digits = digits_from(cfg);
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open output file '" + path + "'");
    return out;
}

void write_header(std::ostream& os, const std::string& command, const CliConfig& cfg) {
    os << "# command = " << command << "\n";
    for (const auto& line : cfg.echo_lines()) os << "# " << line << "\n";
}

int run_trajectory(const CommonArgs& args, bool contextual) {
    CliConfig cfg = load_config(args);
    cfg.set("experiment", "kind", contextual ? "cmab" : "mab");
    SimSetup setup = sim_setup_from_config(cfg);
    RngStream rng = setup.config.stream();
    Trajectory traj = contextual
                          ? run_cmab(setup.config, setup.cmab_policy, setup.centering, rng)
                          : run_mab(setup.config, setup.mab_policy, setup.centering, rng);
    std::ofstream out = open_out(args.out_path);
    std::vector<std::string> header{"command = " + std::string(contextual ? "cmab-sim" : "mab-sim")};
    for (const auto& line : cfg.echo_lines()) header.push_back(line);
    write_trajectory_csv(out, traj, header, g_digits);
    return 0;
}

void write_mab_terminal_columns(std::ostream& os, bool with_scores) {
    os << "D_1,D_2,R_1,R_2,Rhalf_1,Rhalf_2,Rone_1,Rone_2,Dhalf_1,Dhalf_2,Done_1,Done_2";
    if (with_scores) os << ",Delta_1,Delta_2,Q_1,Q_2";
    os << "\n";
}

void write_mab_terminal_row(std::ostream& os, const MabSdeTerminals& t, bool with_scores) {
    os << fmt(t.d[0]) << "," << fmt(t.d[1]) << "," << fmt(t.r[0]) << "," << fmt(t.r[1]) << ","
       << fmt(t.rw_half[0]) << "," << fmt(t.rw_half[1]) << "," << fmt(t.rw_one[0]) << ","
       << fmt(t.rw_one[1]) << "," << fmt(t.dw_half[0]) << "," << fmt(t.dw_half[1]) << ","
       << fmt(t.dw_one[0]) << "," << fmt(t.dw_one[1]);
    if (with_scores)
        os << "," << fmt(t.delta[0]) << "," << fmt(t.delta[1]) << "," << fmt(t.q[0]) << ","
           << fmt(t.q[1]);
    os << "\n";
}

int run_limit_sim(const CommonArgs& args, std::int64_t paths, bool terminal_only) {
    CliConfig cfg = load_config(args);
    SimSetup setup = sim_setup_from_config(cfg);
    if (paths < 1) throw config_error("--paths must be positive");
    if (!terminal_only && paths != 1)
        throw config_error("full path export requires --paths 1 (use --terminal-only)");

    std::ofstream out = open_out(args.out_path);
    write_header(out, "limit-sim", cfg);
    const bool with_scores = setup.j1 > 1.0 || setup.j2 > 1.0;

    if (!setup.contextual) {
        MabPolicy policy = setup.mab_policy;
        policy.mode = PolicyMode::limit;
        policy.ucb_log_horizon = false;  // finite-sample sequence option only
        const double m1 = setup.config.local1[0], m2 = setup.config.local2[0];
        if (!terminal_only) {
            RngStream rng = setup.config.stream();
            const MabSdePath path =
                simulate_mab_limit(policy, m1, m2, setup.j1, setup.j2, setup.grid, rng);
            out << "u,";
            write_mab_terminal_columns(out, with_scores);
            for (std::size_t i = 0; i < path.u.size(); ++i) {
                MabSdeTerminals row;
                for (int k = 0; k < 2; ++k) {
                    row.d[k] = path.d[k][i];
                    row.r[k] = path.r[k][i];
                    row.rw_half[k] = path.rw_half[k][i];
                    row.rw_one[k] = path.rw_one[k][i];
                    row.dw_half[k] = path.dw_half[k][i];
                    row.dw_one[k] = path.dw_one[k][i];
                    row.delta[k] = path.delta[k][i];
                    row.q[k] = path.q[k][i];
                }
                out << fmt(path.u[i]) << ",";
                write_mab_terminal_row(out, row, with_scores);
            }
            return 0;
        }
        std::vector<MabSdeTerminals> terminals(static_cast<std::size_t>(paths));
        const int threads = args.threads > 0 ? args.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t i = 0; i < paths; ++i) {
            RngStream rng(setup.config.seed, static_cast<std::uint64_t>(i));
            terminals[static_cast<std::size_t>(i)] = simulate_mab_limit_terminals(
                policy, m1, m2, setup.j1, setup.j2, setup.grid, rng);
        }
        write_mab_terminal_columns(out, with_scores);
        for (const auto& t : terminals) write_mab_terminal_row(out, t, with_scores);
        return 0;
    }

    CmabPolicy policy = setup.cmab_policy;
    policy.mode = PolicyMode::limit;
    const int p = setup.config.context_dim;
    const Eigen::Map<const Eigen::VectorXd> b1(setup.config.local1.data(), p);
    const Eigen::Map<const Eigen::VectorXd> b2(setup.config.local2.data(), p);

    auto column_names = [&](std::ostream& os) {
        bool first = true;
        auto emit = [&](const std::string& name) {
            if (!first) os << ",";
            os << name;
            first = false;
        };
        for (int k = 1; k <= 2; ++k)
            for (int i = 1; i <= p; ++i) {
                emit("C_" + std::to_string(k) + "_" + std::to_string(i));
                emit("Chalf_" + std::to_string(k) + "_" + std::to_string(i));
            }
        for (int k = 1; k <= 2; ++k)
            for (int i = 1; i <= p; ++i)
                for (int j = 1; j <= p; ++j) {
                    const std::string ij = std::to_string(i) + std::to_string(j);
                    emit("S_" + std::to_string(k) + "_" + ij);
                    emit("Shalf_" + std::to_string(k) + "_" + ij);
                }
        os << "\n";
    };
    auto write_row = [&](std::ostream& os, const CmabSdeTerminals& t) {
        bool first = true;
        auto emit = [&](double v) {
            if (!first) os << ",";
            os << fmt(v);
            first = false;
        };
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < p; ++i) {
                emit(t.C[k](i));
                emit(t.C_half[k](i));
            }
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j) {
                    emit(t.S[k](i, j));
                    emit(t.S_half[k](i, j));
                }
        os << "\n";
    };

    if (!terminal_only) {
        RngStream rng = setup.config.stream();
        const CmabSdePath path =
            simulate_cmab_limit(policy, b1, b2, setup.moments, setup.grid, rng);
        out << "u,";
        column_names(out);
        const int pp = p * p;
        for (std::size_t i = 0; i < path.u.size(); ++i) {
            CmabSdeTerminals row;
            for (int k = 0; k < 2; ++k) {
                row.C[k] = Eigen::VectorXd(p);
                row.C_half[k] = Eigen::VectorXd(p);
                row.S[k] = Eigen::MatrixXd(p, p);
                row.S_half[k] = Eigen::MatrixXd(p, p);
                for (int q = 0; q < p; ++q) {
                    row.C[k](q) = path.C[k][i * p + q];
                    row.C_half[k](q) = path.C_half[k][i * p + q];
                }
                for (int a = 0; a < p; ++a)
                    for (int c = 0; c < p; ++c) {
                        row.S[k](a, c) = path.S[k][i * pp + a * p + c];
                        row.S_half[k](a, c) = path.S_half[k][i * pp + a * p + c];
                    }
            }
            out << fmt(path.u[i]) << ",";
            write_row(out, row);
        }
        return 0;
    }
    std::vector<CmabSdeTerminals> terminals(static_cast<std::size_t>(paths));
    const int threads = args.threads > 0 ? args.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t i = 0; i < paths; ++i) {
        RngStream rng(setup.config.seed, static_cast<std::uint64_t>(i));
        terminals[static_cast<std::size_t>(i)] = simulate_cmab_limit_terminals(
            policy, b1, b2, setup.moments, setup.grid, rng);
    }
    column_names(out);
    for (const auto& t : terminals) write_row(out, t);
    return 0;
}

McPlan::Generator generator_from(const CliConfig& cfg) {
    const std::string& g = cfg.get("mc", "generator");
    if (g == "limit") return McPlan::Generator::limit;
    if (g == "finite") return McPlan::Generator::finite;
    throw config_error("mc.generator must be limit or finite");
}

int run_size_table(const CommonArgs& args) {
    CliConfig cfg = load_config(args);
    McPlan plan = plan_from_config(cfg, McPlan::Generator::finite);
    plan.threads = args.threads;
    plan.verbose = args.verbose;
    const auto rows = size_table(plan);
    std::ofstream out = open_out(args.out_path);
    write_header(out, "size-table", cfg);
    out << "statistic,size,stderr,critical_value,critical_source\n";
    for (const auto& row : rows)
        out << row.statistic << "," << fmt(row.size) << "," << fmt(row.std_error) << ","
            << fmt(row.critical_value) << "," << row.critical_source << "\n";
    return 0;
}

int run_power_curve(const CommonArgs& args) {
    CliConfig cfg = load_config(args);
    McPlan plan = plan_from_config(cfg, generator_from(cfg));
    plan.threads = args.threads;
    plan.verbose = args.verbose;
    const std::string& np_text = cfg.get("mc", "np_bound");
    bool np_bound;
    if (np_text == "true") {
        np_bound = true;
    } else if (np_text == "false") {
        np_bound = false;
    } else {
        throw config_error("mc.np_bound must be true or false");
    }
    const auto rows = power_curve(plan, np_bound);
    std::ofstream out = open_out(args.out_path);
    write_header(out, "power-curve", cfg);
    out << "statistic,alternative,rate,stderr\n";
    for (const auto& row : rows)
        out << row.statistic << "," << fmt(row.alt) << "," << fmt(row.rate) << ","
            << fmt(row.std_error) << "\n";
    return 0;
}

int run_null_sample(const CommonArgs& args) {
    CliConfig cfg = load_config(args);
    McPlan plan = plan_from_config(cfg, generator_from(cfg));
    plan.threads = args.threads;
    plan.verbose = args.verbose;
    plan.validate();
    const SampleMatrix m = run_replications(plan, plan.statistics, null_drift(plan));
    std::ofstream out = open_out(args.out_path);
    write_header(out, "null-sample", cfg);
    for (std::size_t s = 0; s < plan.statistics.size(); ++s)
        out << (s ? "," : "") << plan.statistics[s].name();
    out << "\n";
    for (std::int64_t i = 0; i < m.reps; ++i) {
        for (int s = 0; s < m.n_stats; ++s) out << (s ? "," : "") << fmt(m.at(i, s));
        out << "\n";
    }
    return 0;
}

int run_ks_report(const CommonArgs& args) {
    CliConfig cfg = load_config(args);
    McPlan plan = plan_from_config(cfg, generator_from(cfg));
    plan.threads = args.threads;
    plan.verbose = args.verbose;
    const std::vector<double> nuisance = cfg.get_reals("mc", "nuisance");
    if (nuisance.size() < 2)
        throw config_error("ks-report needs at least two nuisance values");
    const auto rows = distribution_freeness_report(plan, nuisance);
    std::ofstream out = open_out(args.out_path);
    write_header(out, "ks-report", cfg);
    out << "statistic,label_a,label_b,distance\n";
    for (const auto& row : rows)
        out << row.statistic << "," << row.label_a << "," << row.label_b << ","
            << fmt(row.distance) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive two-arm experiment simulator and inference harness"};
    app.require_subcommand(1);

    CommonArgs mab_args, cmab_args, limit_args, size_args, power_args, ks_args, null_args;
    std::int64_t paths = 1;
    bool terminal_only = false;

    auto* mab = app.add_subcommand("mab-sim", "simulate one finite-sample two-arm run");
    add_common(mab, &mab_args);
    auto* cmab = app.add_subcommand("cmab-sim", "simulate one finite-sample contextual run");
    add_common(cmab, &cmab_args);
    auto* limit = app.add_subcommand("limit-sim", "simulate the limit-experiment SDE system");
    add_common(limit, &limit_args);
    limit->add_option("--paths", paths, "number of paths");
    limit->add_flag("--terminal-only", terminal_only, "one row of terminal values per path");
    auto* size = app.add_subcommand("size-table", "finite-sample rejection rates at the null");
    add_common(size, &size_args);
    auto* power = app.add_subcommand("power-curve", "rejection rates over the alternative grid");
    add_common(power, &power_args);
    auto* ks = app.add_subcommand("ks-report", "null-distribution shifts across nuisance values");
    add_common(ks, &ks_args);
    auto* nulls = app.add_subcommand("null-sample", "per-replication statistic values at the null");
    add_common(nulls, &null_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (mab->parsed()) return run_trajectory(mab_args, false);
        if (cmab->parsed()) return run_trajectory(cmab_args, true);
        if (limit->parsed()) return run_limit_sim(limit_args, paths, terminal_only);
        if (size->parsed()) return run_size_table(size_args);
        if (power->parsed()) return run_power_curve(power_args);
        if (ks->parsed()) return run_ks_report(ks_args);
        if (nulls->parsed()) return run_null_sample(null_args);
    } catch (const bandit::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
