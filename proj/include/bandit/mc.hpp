#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bandit/experiment.hpp"
#include "bandit/numeric.hpp"
#include "bandit/policy_cmab.hpp"
#include "bandit/policy_mab.hpp"
#include "bandit/sim_limit.hpp"
#include "bandit/stats.hpp"

namespace bandit {

// One Monte Carlo study: a generator (finite-sample experiment or the limit
// experiment), a policy, a statistic list, a null drift point, and an
// alternative grid. Replication i always runs on stream_id = stream_offset+i,
// so results are identical for any worker count.
struct McPlan {
    std::int64_t reps = 50000;
    double alpha = 0.05;
    std::uint64_t base_seed = 0;
    std::uint64_t stream_offset = 0;
    int threads = 0;  // 0 = all available
    bool verbose = false;

    enum class Generator { finite, limit };
    Generator generator = Generator::limit;
    std::int64_t horizon = 200;
    SdeGrid grid{100};
    ContextMoments moments{};

    bool contextual = false;
    int p = 1;
    Innovation innovation = Innovation::gaussian;
    Centering centering = Centering::known_global;

    // Null drift point and nuisance values.
    double mu = 0.0;
    double m1 = 0.0, m2 = 0.0;
    double j1 = 1.0, j2 = 1.0;
    std::vector<double> beta, b1, b2;  // contextual analogues

    // Policy (one of the two, per `contextual`); mode fields are overridden
    // to match the generator.
    MabPolicy mab_policy = MabPolicy::limit_policy(MabPolicyKind::ti_thompson);
    CmabPolicy cmab_policy;

    std::vector<StatisticSpec> statistics;

    enum class AltKind { one_arm_m2, two_sample_delta, cmab_zeta };
    AltKind alt_kind = AltKind::two_sample_delta;
    std::vector<double> alt_grid;          // statistic-family specific scale
    std::vector<double> zeta_direction;    // cmab: alternative = b2 + alt * dir

    enum class CriticalMode { auto_normal, normal, simulate };
    CriticalMode critical = CriticalMode::auto_normal;

    void validate() const;
    // Effective-configuration echo for output headers, in a fixed key order.
    std::vector<std::pair<std::string, std::string>> serialize() const;
};

// Local drift at which replications are generated.
struct DriftPoint {
    double m1 = 0.0, m2 = 0.0;
    std::vector<double> b1, b2;
};

DriftPoint null_drift(const McPlan& plan);
DriftPoint alternative_drift(const McPlan& plan, double alt);

// Row-major reps x statistics value matrix.
struct SampleMatrix {
    std::int64_t reps = 0;
    int n_stats = 0;
    std::vector<double> values;
    double at(std::int64_t rep, int stat) const {
        return values[static_cast<std::size_t>(rep) * n_stats + stat];
    }
    EmpiricalDistribution column(int stat) const;
};

// Parallel (OpenMP over replications) and serial reference runners; both are
// kept because the serial loop is the correctness baseline the parallel one
// is tested against, and the benchmark tool compares them.
SampleMatrix run_replications(const McPlan& plan, const std::vector<StatisticSpec>& stats,
                              const DriftPoint& drift);
SampleMatrix run_replications_serial(const McPlan& plan,
                                     const std::vector<StatisticSpec>& stats,
                                     const DriftPoint& drift);

struct McSummary {
    StatisticSpec statistic;
    EmpiricalDistribution null_distribution;
    double critical_value = 0.0;
    bool analytic_critical = false;
    bool degenerate_null = false;  // constant statistic: randomized NP boundary

    struct PowerPoint {
        double alt = 0.0;
        double rate = 0.0;
        double std_error = 0.0;
    };
    std::vector<PowerPoint> power;
    bool power_monotone_2se = true;

    std::vector<std::tuple<std::string, std::string, double>> ks_diagnostics;
};

// Simulates the plan's statistics under the null and derives (1-alpha)
// critical values (analytic N(0,1) quantile for the aw family unless the plan
// forces simulation).
std::vector<McSummary> null_distribution(const McPlan& plan);

// Rejection rates over the alternative grid at user-supplied critical values
// (one per plan statistic). Also fills the null rejection rate at alt = the
// null point when the grid contains it.
std::vector<McSummary> size_and_power(const McPlan& plan,
                                      const std::vector<double>& critical_values);

// Neyman-Pearson oracle power in the limit experiment at one alternative:
// one-arm (m1_bar, m2_bar) when alt_kind == one_arm_m2, two-sample
// (m_bar, delta_bar) otherwise. The degenerate boundary (zero drift) reports
// power alpha, the randomized-test convention.
McSummary np_power_bound(const McPlan& plan, double par1, double par2);

struct KsRow {
    std::string statistic;
    std::string label_a, label_b;
    double distance = 0.0;
};

// Pairwise KS distances between null samples across nuisance drift values
// (common drift m for two-sample kinds, arm-1 drift for the one-arm kind,
// common vector b*1 for contextual plans).
std::vector<KsRow> distribution_freeness_report(const McPlan& plan,
                                                const std::vector<double>& nuisance);

// High-level drivers shared by the CLI and the acceptance suite.
struct SizeTableRow {
    std::string statistic;
    double size = 0.0;
    double std_error = 0.0;
    double critical_value = 0.0;
    std::string critical_source;  // "normal" or "limit-simulation"
};
std::vector<SizeTableRow> size_table(const McPlan& plan);

struct PowerCurveRow {
    std::string statistic;
    double alt = 0.0;
    double rate = 0.0;
    double std_error = 0.0;
};
std::vector<PowerCurveRow> power_curve(const McPlan& plan, bool include_np_bound);

}  // namespace bandit
