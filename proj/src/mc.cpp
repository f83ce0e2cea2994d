#include "bandit/mc.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bandit/errors.hpp"
#include "bandit/sim_finite.hpp"

namespace bandit {

namespace {

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

double binom_se(double rate, std::int64_t n) {
    return std::sqrt(std::max(rate * (1.0 - rate), 0.0) / static_cast<double>(n));
}

}  // namespace

void McPlan::validate() const {
    if (reps < 1) throw config_error("reps must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must be in (0,1)");
    if (generator == Generator::limit) grid.validate();
    if (generator == Generator::finite && horizon < 2)
        throw config_error("horizon too small for forced initialization");
    if (statistics.empty()) throw config_error("no statistics requested");
    if (contextual) {
        if (p < 1) throw config_error("context dimension must be positive");
        if (static_cast<int>(beta.size()) != p || static_cast<int>(b1.size()) != p ||
            static_cast<int>(b2.size()) != p)
            throw config_error("contextual drift vectors must have length p");
        if (alt_kind == AltKind::cmab_zeta && !alt_grid.empty() &&
            static_cast<int>(zeta_direction.size()) != p)
            throw config_error("zeta direction must have length p");
        moments.validate(p);
    }
    if (j1 < 1.0 || j2 < 1.0) throw config_error("fisher information must be >= 1");
    for (const auto& s : statistics) {
        if (s.contextual() != contextual && s.kind != StatisticSpec::Kind::freq)
            throw config_error("statistic '" + s.name() + "' does not match the experiment kind");
        if (s.oracle() && generator != Generator::limit)
            throw numeric_error("oracle defined in limit experiment");
    }
}

std::vector<std::pair<std::string, std::string>> McPlan::serialize() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("generator", generator == Generator::finite ? "finite" : "limit");
    kv.emplace_back("reps", std::to_string(reps));
    kv.emplace_back("alpha", fmt_num(alpha));
    kv.emplace_back("seed", std::to_string(base_seed));
    kv.emplace_back("stream_offset", std::to_string(stream_offset));
    if (generator == Generator::finite) kv.emplace_back("horizon", std::to_string(horizon));
    if (generator == Generator::limit) kv.emplace_back("grid", std::to_string(grid.n_steps));
    kv.emplace_back("contextual", contextual ? "true" : "false");
    kv.emplace_back("p", std::to_string(p));
    kv.emplace_back("innovation", innovation_info(innovation).name);
    kv.emplace_back("centering", centering == Centering::known_global ? "known" : "raw");
    if (!contextual) {
        kv.emplace_back("policy", mab_policy_name(mab_policy.kind));
        kv.emplace_back("b", fmt_num(mab_policy.b));
        kv.emplace_back("alpha_temper", fmt_num(mab_policy.alpha));
        kv.emplace_back("delta", fmt_num(mab_policy.delta));
        kv.emplace_back("ucb_bonus", mab_policy.ucb_log_horizon ? "log-horizon" : "limit");
        kv.emplace_back("mu", fmt_num(mu));
        kv.emplace_back("m1", fmt_num(m1));
        kv.emplace_back("m2", fmt_num(m2));
        kv.emplace_back("j1", fmt_num(j1));
        kv.emplace_back("j2", fmt_num(j2));
    } else {
        kv.emplace_back("policy", cmab_policy_name(cmab_policy.kind));
        kv.emplace_back("b", fmt_num(cmab_policy.b));
        kv.emplace_back("alpha_temper", fmt_num(cmab_policy.alpha));
        kv.emplace_back("lambda", fmt_num(cmab_policy.lambda));
        auto join = [](const std::vector<double>& v) {
            std::string out;
            for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt_num(v[i]);
            return out;
        };
        kv.emplace_back("beta", join(beta));
        kv.emplace_back("b1", join(b1));
        kv.emplace_back("b2", join(b2));
        kv.emplace_back("moments", moments.strategy == ContextMoments::Strategy::analytic
                                       ? "analytic"
                                       : "monte-carlo");
        if (moments.strategy == ContextMoments::Strategy::monte_carlo)
            kv.emplace_back("n_ctx", std::to_string(moments.n_ctx));
    }
    std::string stats;
    for (std::size_t i = 0; i < statistics.size(); ++i)
        stats += (i ? "," : "") + statistics[i].name();
    kv.emplace_back("statistics", stats);
    switch (alt_kind) {
        case AltKind::one_arm_m2: kv.emplace_back("alt_kind", "m2"); break;
        case AltKind::two_sample_delta: kv.emplace_back("alt_kind", "delta"); break;
        case AltKind::cmab_zeta: kv.emplace_back("alt_kind", "zeta"); break;
    }
    std::string grid_str;
    for (std::size_t i = 0; i < alt_grid.size(); ++i)
        grid_str += (i ? "," : "") + fmt_num(alt_grid[i]);
    kv.emplace_back("alt_grid", grid_str);
    return kv;
}

DriftPoint null_drift(const McPlan& plan) {
    DriftPoint d;
    d.m1 = plan.m1;
    d.m2 = plan.m2;
    d.b1 = plan.b1;
    d.b2 = plan.b2;
    return d;
}

DriftPoint alternative_drift(const McPlan& plan, double alt) {
    DriftPoint d = null_drift(plan);
    switch (plan.alt_kind) {
        case McPlan::AltKind::one_arm_m2:
            d.m2 = alt;
            break;
        case McPlan::AltKind::two_sample_delta:
            d.m1 = plan.m1 - alt;
            d.m2 = plan.m2 + alt;
            break;
        case McPlan::AltKind::cmab_zeta:
            for (std::size_t i = 0; i < d.b2.size(); ++i)
                d.b2[i] += alt * plan.zeta_direction[i];
            break;
    }
    return d;
}

EmpiricalDistribution SampleMatrix::column(int stat) const {
    std::vector<double> col(static_cast<std::size_t>(reps));
    for (std::int64_t i = 0; i < reps; ++i) col[static_cast<std::size_t>(i)] = at(i, stat);
    return EmpiricalDistribution(std::move(col));
}

namespace {

void replicate_once(const McPlan& plan, const std::vector<StatisticSpec>& stats,
                    const DriftPoint& drift, std::int64_t rep, double* out) {
    RngStream rng(plan.base_seed, plan.stream_offset + static_cast<std::uint64_t>(rep));
    if (!plan.contextual) {
        MabTerminals terms;
        if (plan.generator == McPlan::Generator::finite) {
            ExperimentConfig cfg;
            cfg.horizon = plan.horizon;
            cfg.context_dim = 1;
            cfg.contextual = false;
            cfg.global_param = {plan.mu};
            cfg.local1 = {drift.m1};
            cfg.local2 = {drift.m2};
            cfg.innovation = plan.innovation;
            cfg.seed = plan.base_seed;
            cfg.replication_index = plan.stream_offset + static_cast<std::uint64_t>(rep);
            MabPolicy pol = plan.mab_policy;
            pol.mode = PolicyMode::finite_sample;
            pol.horizon = plan.horizon;
            RunOptions opts;
            opts.keep_rounds = false;
            terms = mab_terminals(run_mab(cfg, pol, plan.centering, rng, opts));
        } else {
            MabPolicy pol = plan.mab_policy;
            pol.mode = PolicyMode::limit;
            pol.ucb_log_horizon = false;  // finite-sample sequence option only
            terms = mab_terminals(simulate_mab_limit_terminals(pol, drift.m1, drift.m2,
                                                               plan.j1, plan.j2, plan.grid,
                                                               rng));
        }
        for (std::size_t s = 0; s < stats.size(); ++s) out[s] = evaluate(stats[s], terms);
    } else {
        CmabTerminals terms;
        if (plan.generator == McPlan::Generator::finite) {
            ExperimentConfig cfg;
            cfg.horizon = plan.horizon;
            cfg.context_dim = plan.p;
            cfg.contextual = true;
            cfg.global_param = plan.beta;
            cfg.local1 = drift.b1;
            cfg.local2 = drift.b2;
            cfg.innovation = plan.innovation;
            cfg.seed = plan.base_seed;
            cfg.replication_index = plan.stream_offset + static_cast<std::uint64_t>(rep);
            CmabPolicy pol = plan.cmab_policy;
            pol.mode = PolicyMode::finite_sample;
            pol.horizon = plan.horizon;
            RunOptions opts;
            opts.keep_rounds = false;
            terms = cmab_terminals(run_cmab(cfg, pol, plan.centering, rng, opts));
        } else {
            CmabPolicy pol = plan.cmab_policy;
            pol.mode = PolicyMode::limit;
            terms = cmab_terminals(simulate_cmab_limit_terminals(
                pol, to_vec(drift.b1), to_vec(drift.b2), plan.moments, plan.grid, rng));
        }
        for (std::size_t s = 0; s < stats.size(); ++s) out[s] = evaluate(stats[s], terms);
    }
}

}  // namespace

SampleMatrix run_replications_serial(const McPlan& plan,
                                     const std::vector<StatisticSpec>& stats,
                                     const DriftPoint& drift) {
    plan.validate();
    SampleMatrix m;
    m.reps = plan.reps;
    m.n_stats = static_cast<int>(stats.size());
    m.values.resize(static_cast<std::size_t>(plan.reps) * stats.size());
    for (std::int64_t rep = 0; rep < plan.reps; ++rep)
        replicate_once(plan, stats, drift, rep,
                       m.values.data() + static_cast<std::size_t>(rep) * stats.size());
    return m;
}

SampleMatrix run_replications(const McPlan& plan, const std::vector<StatisticSpec>& stats,
                              const DriftPoint& drift) {
    plan.validate();
    SampleMatrix m;
    m.reps = plan.reps;
    m.n_stats = static_cast<int>(stats.size());
    m.values.resize(static_cast<std::size_t>(plan.reps) * stats.size());

    const int threads = plan.threads > 0 ? plan.threads : omp_get_max_threads();
    std::atomic<std::int64_t> done{0};
    std::atomic<bool> failed{false};
    std::string error_message;

#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t rep = 0; rep < plan.reps; ++rep) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
            replicate_once(plan, stats, drift, rep,
                           m.values.data() + static_cast<std::size_t>(rep) * stats.size());
        } catch (const std::exception& e) {
            bool expected = false;
            if (failed.compare_exchange_strong(expected, true)) {
#pragma omp critical(bandit_mc_error)
                error_message = "replication " + std::to_string(rep) + ": " + e.what();
            }
        }
        if (plan.verbose) {
            const std::int64_t n = done.fetch_add(1) + 1;
            const std::int64_t decile = std::max<std::int64_t>(plan.reps / 10, 1);
            if (n % decile == 0) {
#pragma omp critical(bandit_mc_progress)
                std::printf("progress: %lld%% (%lld/%lld replications)\n",
                            static_cast<long long>(100 * n / plan.reps),
                            static_cast<long long>(n), static_cast<long long>(plan.reps));
            }
        }
    }
    if (failed.load()) throw numeric_error(error_message);
    return m;
}

namespace {

double resolve_critical(const McPlan& plan, const StatisticSpec& spec,
                        const EmpiricalDistribution& null_sample, bool* analytic) {
    const bool use_normal =
        plan.critical == McPlan::CriticalMode::normal ||
        (plan.critical == McPlan::CriticalMode::auto_normal && spec.analytic_normal_null());
    if (analytic) *analytic = use_normal;
    if (use_normal) return normal_quantile(1.0 - plan.alpha);
    return null_sample.quantile(1.0 - plan.alpha);
}

bool monotone_within(const std::vector<McSummary::PowerPoint>& pts, double slack_se) {
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double tol = slack_se * std::hypot(pts[i].std_error, pts[i - 1].std_error);
        if (pts[i].rate + tol < pts[i - 1].rate) return false;
    }
    return true;
}

}  // namespace

std::vector<McSummary> null_distribution(const McPlan& plan) {
    plan.validate();
    if (plan.reps < 1000)
        throw config_error("null distribution estimates need at least 1000 replications");
    const SampleMatrix m = run_replications(plan, plan.statistics, null_drift(plan));
    std::vector<McSummary> out;
    out.reserve(plan.statistics.size());
    for (int s = 0; s < m.n_stats; ++s) {
        McSummary sum;
        sum.statistic = plan.statistics[static_cast<std::size_t>(s)];
        sum.null_distribution = m.column(s);
        sum.degenerate_null =
            sum.null_distribution.max() - sum.null_distribution.min() < 1e-15;
        sum.critical_value = sum.degenerate_null
                                 ? sum.null_distribution.max()
                                 : resolve_critical(plan, sum.statistic,
                                                    sum.null_distribution,
                                                    &sum.analytic_critical);
        out.push_back(std::move(sum));
    }
    return out;
}

std::vector<McSummary> size_and_power(const McPlan& plan,
                                      const std::vector<double>& critical_values) {
    plan.validate();
    if (critical_values.size() != plan.statistics.size())
        throw config_error("one critical value per statistic is required");
    std::vector<McSummary> out(plan.statistics.size());
    for (std::size_t s = 0; s < plan.statistics.size(); ++s) {
        out[s].statistic = plan.statistics[s];
        out[s].critical_value = critical_values[s];
    }
    for (double alt : plan.alt_grid) {
        const SampleMatrix m =
            run_replications(plan, plan.statistics, alternative_drift(plan, alt));
        for (std::size_t s = 0; s < plan.statistics.size(); ++s) {
            std::int64_t hits = 0;
            for (std::int64_t i = 0; i < m.reps; ++i)
                if (m.at(i, static_cast<int>(s)) > critical_values[s]) ++hits;
            const double rate = static_cast<double>(hits) / static_cast<double>(m.reps);
            out[s].power.push_back({alt, rate, binom_se(rate, m.reps)});
        }
    }
    for (auto& sum : out) sum.power_monotone_2se = monotone_within(sum.power, 2.0);
    return out;
}

McSummary np_power_bound(const McPlan& plan, double par1, double par2) {
    plan.validate();
    if (plan.generator != McPlan::Generator::limit)
        throw numeric_error("oracle defined in limit experiment");
    if (plan.contextual) throw config_error("the oracle bound covers the non-contextual case");

    StatisticSpec spec;
    DriftPoint null_pt, alt_pt;
    if (plan.alt_kind == McPlan::AltKind::one_arm_m2) {
        spec.kind = StatisticSpec::Kind::np;
        spec.m2_bar = par2;
        null_pt.m1 = par1;
        null_pt.m2 = 0.0;
        alt_pt.m1 = par1;
        alt_pt.m2 = par2;
    } else {
        spec.kind = StatisticSpec::Kind::ts_np;
        spec.m_bar = par1;
        spec.delta_bar = par2;
        null_pt.m1 = par1;
        null_pt.m2 = par1;
        alt_pt.m1 = par1 - par2;
        alt_pt.m2 = par1 + par2;
    }

    McSummary sum;
    sum.statistic = spec;
    const std::vector<StatisticSpec> stats{spec};
    const SampleMatrix null_m = run_replications(plan, stats, null_pt);
    sum.null_distribution = null_m.column(0);
    sum.degenerate_null = sum.null_distribution.max() - sum.null_distribution.min() < 1e-15;
    if (sum.degenerate_null) {
        // Degenerate boundary: the most powerful level-alpha test randomizes
        // and has power exactly alpha.
        sum.critical_value = sum.null_distribution.max();
        sum.power.push_back({par2, plan.alpha, 0.0});
        return sum;
    }
    sum.critical_value = sum.null_distribution.quantile(1.0 - plan.alpha);
    const SampleMatrix alt_m = run_replications(plan, stats, alt_pt);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < alt_m.reps; ++i)
        if (alt_m.at(i, 0) > sum.critical_value) ++hits;
    const double rate = static_cast<double>(hits) / static_cast<double>(alt_m.reps);
    sum.power.push_back({par2, rate, binom_se(rate, alt_m.reps)});
    return sum;
}

std::vector<KsRow> distribution_freeness_report(const McPlan& plan,
                                                const std::vector<double>& nuisance) {
    plan.validate();
    if (nuisance.size() < 2)
        throw config_error("freeness report needs at least two nuisance values");
    std::vector<SampleMatrix> samples;
    std::vector<std::string> labels;
    for (double nu : nuisance) {
        DriftPoint d;
        if (plan.contextual) {
            d.b1.assign(static_cast<std::size_t>(plan.p), nu);
            d.b2 = d.b1;
        } else if (plan.alt_kind == McPlan::AltKind::one_arm_m2) {
            d.m1 = nu;
            d.m2 = plan.m2;
        } else {
            d.m1 = nu;
            d.m2 = nu;
        }
        samples.push_back(run_replications(plan, plan.statistics, d));
        labels.push_back(fmt_num(nu));
    }
    std::vector<KsRow> out;
    for (std::size_t s = 0; s < plan.statistics.size(); ++s) {
        for (std::size_t i = 0; i < samples.size(); ++i) {
            for (std::size_t j = i + 1; j < samples.size(); ++j) {
                KsRow row;
                row.statistic = plan.statistics[s].name();
                row.label_a = labels[i];
                row.label_b = labels[j];
                row.distance = ks_distance(samples[i].column(static_cast<int>(s)),
                                           samples[j].column(static_cast<int>(s)));
                out.push_back(std::move(row));
            }
        }
    }
    return out;
}

namespace {

// Limit-experiment twin used to calibrate critical values for finite-sample
// runs: same policy, statistics and null point, limit generator.
McPlan limit_null_twin(const McPlan& plan) {
    McPlan twin = plan;
    twin.generator = McPlan::Generator::limit;
    twin.stream_offset = plan.stream_offset + 1000003;  // disjoint stream block
    return twin;
}

}  // namespace

std::vector<SizeTableRow> size_table(const McPlan& plan) {
    plan.validate();
    std::vector<double> criticals(plan.statistics.size(), 0.0);
    std::vector<std::string> sources(plan.statistics.size());
    std::vector<std::size_t> simulated;
    for (std::size_t s = 0; s < plan.statistics.size(); ++s) {
        const bool analytic =
            plan.critical == McPlan::CriticalMode::normal ||
            (plan.critical == McPlan::CriticalMode::auto_normal &&
             plan.statistics[s].analytic_normal_null());
        if (analytic) {
            criticals[s] = normal_quantile(1.0 - plan.alpha);
            sources[s] = "normal";
        } else {
            simulated.push_back(s);
            sources[s] = "limit-simulation";
        }
    }
    if (!simulated.empty()) {
        McPlan twin = limit_null_twin(plan);
        twin.critical = McPlan::CriticalMode::simulate;
        const auto null_sums = null_distribution(twin);
        for (std::size_t s : simulated) criticals[s] = null_sums[s].critical_value;
    }

    McPlan at_null = plan;
    at_null.alt_grid = {0.0};
    const auto sums = size_and_power(at_null, criticals);
    std::vector<SizeTableRow> rows;
    for (std::size_t s = 0; s < sums.size(); ++s) {
        SizeTableRow row;
        row.statistic = plan.statistics[s].name();
        row.size = sums[s].power.front().rate;
        row.std_error = sums[s].power.front().std_error;
        row.critical_value = criticals[s];
        row.critical_source = sources[s];
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PowerCurveRow> power_curve(const McPlan& plan, bool include_np_bound) {
    plan.validate();
    if (plan.alt_grid.empty()) throw config_error("power curve needs an alternative grid");
    if (include_np_bound &&
        (plan.generator != McPlan::Generator::limit || plan.contextual))
        throw numeric_error("oracle defined in limit experiment");

    // Null-run statistic list: the plan's statistics plus one oracle spec per
    // grid point (the oracle statistic changes with the alternative).
    std::vector<StatisticSpec> null_stats = plan.statistics;
    std::vector<std::size_t> np_index;
    if (include_np_bound) {
        for (double alt : plan.alt_grid) {
            StatisticSpec spec;
            if (plan.alt_kind == McPlan::AltKind::one_arm_m2) {
                spec.kind = StatisticSpec::Kind::np;
                spec.m2_bar = alt;
            } else {
                spec.kind = StatisticSpec::Kind::ts_np;
                spec.m_bar = plan.m1;
                spec.delta_bar = alt;
            }
            np_index.push_back(null_stats.size());
            null_stats.push_back(spec);
        }
    }

    const SampleMatrix null_m = run_replications(plan, null_stats, null_drift(plan));
    std::vector<double> criticals(null_stats.size(), 0.0);
    std::vector<bool> degenerate(null_stats.size(), false);
    for (std::size_t s = 0; s < null_stats.size(); ++s) {
        const EmpiricalDistribution col = null_m.column(static_cast<int>(s));
        if (col.max() - col.min() < 1e-15) {
            degenerate[s] = true;
            criticals[s] = col.max();
            continue;
        }
        criticals[s] = resolve_critical(plan, null_stats[s], col, nullptr);
    }

    std::vector<PowerCurveRow> rows;
    for (std::size_t a = 0; a < plan.alt_grid.size(); ++a) {
        const double alt = plan.alt_grid[a];
        std::vector<StatisticSpec> alt_stats = plan.statistics;
        if (include_np_bound) alt_stats.push_back(null_stats[np_index[a]]);
        const SampleMatrix alt_m =
            run_replications(plan, alt_stats, alternative_drift(plan, alt));
        for (std::size_t s = 0; s < alt_stats.size(); ++s) {
            const bool is_np = include_np_bound && s == alt_stats.size() - 1;
            const std::size_t crit_idx = is_np ? np_index[a] : s;
            PowerCurveRow row;
            row.statistic = is_np ? "np-bound" : alt_stats[s].name();
            row.alt = alt;
            if (degenerate[crit_idx]) {
                row.rate = plan.alpha;
                row.std_error = 0.0;
            } else {
                std::int64_t hits = 0;
                for (std::int64_t i = 0; i < alt_m.reps; ++i)
                    if (alt_m.at(i, static_cast<int>(s)) > criticals[crit_idx]) ++hits;
                row.rate = static_cast<double>(hits) / static_cast<double>(alt_m.reps);
                row.std_error = binom_se(row.rate, alt_m.reps);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace bandit
