#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "bandit/errors.hpp"
#include "bandit/sim_finite.hpp"
#include "bandit/stats.hpp"
#include "doctest.h"

using namespace bandit;

namespace {

ExperimentConfig mab_config(std::int64_t T, double mu, double m1, double m2,
                            Innovation innovation = Innovation::gaussian) {
    ExperimentConfig cfg;
    cfg.horizon = T;
    cfg.global_param = {mu};
    cfg.local1 = {m1};
    cfg.local2 = {m2};
    cfg.innovation = innovation;
    return cfg;
}

MabPolicy near_constant_policy(std::int64_t T) {
    // alpha -> 0 surrogate: psi == 1/2 up to ~1e-12
    MabPolicy p = MabPolicy::finite_policy(MabPolicyKind::ti_tempered_greedy, T);
    p.alpha = 1e-12;
    return p;
}

// Independent recomputation of every weighted terminal from the stored
// rounds, same rescaling conventions as the simulator.
struct Recomputed {
    std::array<double, 2> d{}, r{}, rw_half{}, rw_one{}, dw_half{}, dw_one{};
};
Recomputed recompute_from_rounds(const Trajectory& traj) {
    Recomputed out;
    const double mu = traj.global_param[0];
    for (const auto& row : traj.rounds) {
        const int k = row.arm - 1;
        const double centered =
            (traj.centering == Centering::known_global) ? row.reward - mu : row.reward;
        out.d[k] += 1.0;
        out.r[k] += centered;
        out.rw_half[k] += centered / std::sqrt(row.propensity);
        out.rw_one[k] += centered / row.propensity;
        out.dw_half[k] += 1.0 / std::sqrt(row.propensity);
        out.dw_one[k] += 1.0 / row.propensity;
    }
    const double T = static_cast<double>(traj.horizon);
    for (int k = 0; k < 2; ++k) {
        out.d[k] /= T;
        out.r[k] /= std::sqrt(T);
        out.rw_half[k] /= std::sqrt(T);
        out.rw_one[k] /= std::sqrt(T);
        out.dw_half[k] /= T;
        out.dw_one[k] /= T;
    }
    return out;
}

}  // namespace

TEST_CASE("forced initialization pulls each arm once") {
    auto cfg = mab_config(2, 0.3, 1.0, -1.0);
    MabPolicy pol = MabPolicy::finite_policy(MabPolicyKind::ti_thompson, 2);
    RngStream rng(1, 0);
    const Trajectory traj = run_mab(cfg, pol, Centering::known_global, rng);
    REQUIRE(traj.rounds.size() == 2);
    CHECK(traj.rounds[0].arm == 1);
    CHECK(traj.rounds[1].arm == 2);
    CHECK(traj.rounds[0].propensity == 0.5);
    CHECK(traj.rounds[1].propensity == 0.5);
    CHECK(traj.pulls[0] == 1);
    CHECK(traj.pulls[1] == 1);
    CHECK(traj.d[0] == 0.5);
    CHECK(traj.d[1] == 0.5);
    CHECK(traj.d[0] + traj.d[1] == 1.0);
}

TEST_CASE("martingale zero mean under a constant policy") {
    const std::int64_t T = 100;
    const int reps = 50000;
    auto cfg = mab_config(T, 0.0, 0.0, 0.0);
    MabPolicy pol = near_constant_policy(T);
    RunOptions opts;
    opts.keep_rounds = false;
    double sum = 0.0;
    for (int i = 0; i < reps; ++i) {
        cfg.replication_index = static_cast<std::uint64_t>(i);
        RngStream rng = cfg.stream();
        sum += run_mab(cfg, pol, Centering::known_global, rng, opts).r[1];
    }
    CHECK(std::fabs(sum / reps) < 3.0 * std::sqrt(0.5 / reps));
}

TEST_CASE("inverse-propensity weighted frequency has unit mean") {
    const std::int64_t T = 100;
    const int reps = 50000;
    auto cfg = mab_config(T, 0.0, 1.0, -0.5);
    MabPolicy pol = MabPolicy::finite_policy(MabPolicyKind::ti_thompson, T);
    RunOptions opts;
    opts.keep_rounds = false;
    double sum = 0.0;
    for (int i = 0; i < reps; ++i) {
        cfg.replication_index = static_cast<std::uint64_t>(i);
        RngStream rng = cfg.stream();
        sum += run_mab(cfg, pol, Centering::known_global, rng, opts).dw_one[1];
    }
    CHECK(std::fabs(sum / reps - 1.0) < 0.02);
}

TEST_CASE("three-point enumeration oracle at T=3") {
    // With three-point innovations the path space of a T=3 run is finite:
    // forced arms in rounds 1-2, one policy decision in round 3, three
    // innovation levels per round. The enumeration is an independent oracle
    // for the accumulated statistics.
    const std::int64_t T = 3;
    const double v = std::sqrt(1.5);
    const double levels[3] = {-v, 0.0, v};
    MabPolicy pol = MabPolicy::finite_policy(MabPolicyKind::ti_thompson, T);
    const double sqt = 1.0 / std::sqrt(3.0);

    // Oracle: path probabilities, Lambda values, and E[inverse-propensity
    // frequency of arm 2].
    struct PathInfo {
        double prob;
        double lambda11;   // Lambda(1,1)
        double lambda_mix; // Lambda(0.7,-0.3)
    };
    std::map<std::array<int, 4>, PathInfo> oracle;  // (i1,i2,arm3,i3) -> info
    double total_prob = 0.0, e_dw_one = 0.0;
    auto lambda_direct = [&](double m1, double m2, const std::array<int, 3>& eps,
                             int arm3) {
        // direct per-round log-likelihood sum on a null path (y_t = eps_t)
        double sum = 0.0;
        const int arms[3] = {1, 2, arm3};
        for (int t = 0; t < 3; ++t) {
            const double m = (arms[t] == 1) ? m1 : m2;
            sum += m * levels[eps[t]] * sqt - 0.5 * m * m / 3.0;
        }
        return sum;
    };
    for (int i1 = 0; i1 < 3; ++i1) {
        for (int i2 = 0; i2 < 3; ++i2) {
            MabPolicyState st;
            st.d1 = 1.0 / 3.0;
            st.d2 = 1.0 / 3.0;
            st.r1 = levels[i1] * sqt;
            st.r2 = levels[i2] * sqt;
            const double psi2 = prob_arm2(pol, st);
            for (int arm3 = 1; arm3 <= 2; ++arm3) {
                const double arm_prob = (arm3 == 2) ? psi2 : 1.0 - psi2;
                for (int i3 = 0; i3 < 3; ++i3) {
                    const double prob = (1.0 / 27.0) * arm_prob;
                    PathInfo info;
                    info.prob = prob;
                    info.lambda11 = lambda_direct(1.0, 1.0, {i1, i2, i3}, arm3);
                    info.lambda_mix = lambda_direct(0.7, -0.3, {i1, i2, i3}, arm3);
                    oracle[{i1, i2, arm3, i3}] = info;
                    total_prob += prob;
                    const double dw_one =
                        (2.0 + ((arm3 == 2) ? 1.0 / psi2 : 0.0)) / 3.0;
                    e_dw_one += prob * dw_one;
                }
            }
        }
    }
    CHECK(std::fabs(total_prob - 1.0) < 1e-12);
    CHECK(std::fabs(e_dw_one - 1.0) < 1e-12);  // exact identity, enumerated

    // Simulator paths must reproduce the oracle Lambda values exactly.
    auto cfg = mab_config(T, 0.0, 0.0, 0.0, Innovation::three_point);
    auto classify = [&](double y) {
        for (int i = 0; i < 3; ++i)
            if (std::fabs(y - levels[i]) < 1e-9) return i;
        FAIL("unexpected reward level");
        return -1;
    };
    int matched = 0;
    for (int rep = 0; rep < 300; ++rep) {
        cfg.replication_index = static_cast<std::uint64_t>(rep);
        RngStream rng = cfg.stream();
        const Trajectory traj = run_mab(cfg, pol, Centering::known_global, rng);
        const std::array<int, 4> key{classify(traj.rounds[0].reward),
                                     classify(traj.rounds[1].reward), traj.rounds[2].arm,
                                     classify(traj.rounds[2].reward)};
        const auto it = oracle.find(key);
        REQUIRE(it != oracle.end());
        // terminal-form Lambda against the per-round oracle
        const double lam11 =
            traj.r[0] + traj.r[1] - 0.5 * (traj.d[0] + traj.d[1]);
        const double lam_mix = 0.7 * traj.r[0] - 0.3 * traj.r[1] -
                               0.5 * (0.49 * traj.d[0] + 0.09 * traj.d[1]);
        CHECK(std::fabs(lam11 - it->second.lambda11) < 1e-12);
        CHECK(std::fabs(lam_mix - it->second.lambda_mix) < 1e-12);
        ++matched;
    }
    CHECK(matched == 300);

    // the likelihood-ratio helper refuses non-gaussian innovations
    cfg.replication_index = 0;
    RngStream rng = cfg.stream();
    const Trajectory traj = run_mab(cfg, pol, Centering::known_global, rng);
    CHECK_THROWS_WITH_AS(gaussian_loglik_ratio(traj, 1.0, 1.0),
                         "likelihood ratio requires gaussian", numeric_error);
}

TEST_CASE("exp(loglik ratio) has mean one under the gaussian null") {
    const std::int64_t T = 200;
    const int reps = 20000;
    auto cfg = mab_config(T, 0.0, 0.0, 0.0);
    MabPolicy pol = MabPolicy::finite_policy(MabPolicyKind::ti_thompson, T);
    RunOptions opts;
    opts.keep_rounds = false;
    double sum = 0.0;
    for (int i = 0; i < reps; ++i) {
        cfg.replication_index = static_cast<std::uint64_t>(i);
        RngStream rng = cfg.stream();
        sum += std::exp(gaussian_loglik_ratio(run_mab(cfg, pol, Centering::known_global,
                                                      rng, opts),
                                              1.0, 1.0));
    }
    CHECK(std::fabs(sum / reps - 1.0) < 0.08);
}

TEST_CASE("loglik ratio arithmetic") {
    auto cfg = mab_config(50, 0.0, 0.0, 0.0);
    MabPolicy pol = MabPolicy::finite_policy(MabPolicyKind::ti_thompson, 50);
    RngStream rng(9, 5);
    Trajectory traj = run_mab(cfg, pol, Centering::known_global, rng);
    CHECK(gaussian_loglik_ratio(traj, 0.0, 0.0) == 0.0);
    traj.r = {0.0, 0.5};
    traj.d = {0.5, 0.5};
    CHECK(gaussian_loglik_ratio(traj, 0.0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("mu-shift leaves ti-policy runs identical under raw centering") {
    const std::int64_t T = 200;
    for (double c : {-3.0, 7.0}) {
        for (MabPolicyKind kind : {MabPolicyKind::ti_thompson, MabPolicyKind::ti_tempered_greedy,
                                   MabPolicyKind::ti_tempered_ucb}) {
            MabPolicy pol = MabPolicy::finite_policy(kind, T);
            auto cfg0 = mab_config(T, 0.0, 0.5, -0.2);
            auto cfg1 = mab_config(T, c, 0.5, -0.2);
            cfg0.seed = cfg1.seed = 77;
            cfg0.replication_index = cfg1.replication_index = 3;
            RngStream r0 = cfg0.stream(), r1 = cfg1.stream();
            const Trajectory t0 = run_mab(cfg0, pol, Centering::raw, r0);
            const Trajectory t1 = run_mab(cfg1, pol, Centering::raw, r1);
            for (std::int64_t t = 0; t < T; ++t) {
                CHECK(t0.rounds[static_cast<std::size_t>(t)].arm ==
                      t1.rounds[static_cast<std::size_t>(t)].arm);
            }
            // TS-DF statistics are unchanged by the common shift
            for (double r : {0.0, 0.5, 1.0}) {
                const double v0 = ts_df(mab_terminals(t0), r).value;
                const double v1 = ts_df(mab_terminals(t1), r).value;
                CHECK(std::fabs(v0 - v1) < 1e-9);
            }
        }
    }
}

TEST_CASE("mu-shift changes classical thompson arm sequences") {
    const std::int64_t T = 500;
    MabPolicy pol = MabPolicy::finite_policy(MabPolicyKind::classical_thompson, T);
    auto cfg0 = mab_config(T, 0.0, 0.0, 0.0);
    auto cfg1 = mab_config(T, 10.0, 0.0, 0.0);
    cfg0.seed = cfg1.seed = 13;
    RngStream r0 = cfg0.stream(), r1 = cfg1.stream();
    const Trajectory t0 = run_mab(cfg0, pol, Centering::raw, r0);
    const Trajectory t1 = run_mab(cfg1, pol, Centering::raw, r1);
    int diffs = 0;
    for (std::int64_t t = 0; t < T; ++t)
        if (t0.rounds[static_cast<std::size_t>(t)].arm !=
            t1.rounds[static_cast<std::size_t>(t)].arm)
            ++diffs;
    CHECK(diffs > 0);
}

TEST_CASE("incremental terminals equal post-hoc recomputation") {
    const std::int64_t T = 500;
    for (Centering centering : {Centering::known_global, Centering::raw}) {
        auto cfg = mab_config(T, 0.4, 1.0, 2.0);
        cfg.seed = 5;
        MabPolicy pol = MabPolicy::finite_policy(MabPolicyKind::ti_tempered_ucb, T);
        RngStream rng = cfg.stream();
        const Trajectory traj = run_mab(cfg, pol, centering, rng);
        const Recomputed rec = recompute_from_rounds(traj);
        for (int k = 0; k < 2; ++k) {
            CHECK(std::fabs(traj.d[k] - rec.d[k]) < 1e-12);
            CHECK(std::fabs(traj.r[k] - rec.r[k]) < 1e-12);
            CHECK(std::fabs(traj.rw_half[k] - rec.rw_half[k]) < 1e-12);
            CHECK(std::fabs(traj.rw_one[k] - rec.rw_one[k]) < 1e-12);
            CHECK(std::fabs(traj.dw_half[k] - rec.dw_half[k]) < 1e-12);
            CHECK(std::fabs(traj.dw_one[k] - rec.dw_one[k]) < 1e-12);
        }
        CHECK(traj.pulls[0] + traj.pulls[1] == T);
        for (const auto& row : traj.rounds) {
            CHECK(row.propensity > 0.0);
            CHECK(row.propensity < 1.0);
        }
    }
}

TEST_CASE("cmab with p=1 reproduces the scalar run round-for-round") {
    const std::int64_t T = 200;
    ExperimentConfig mab = mab_config(T, 0.25, 0.8, -0.4);
    mab.seed = 21;
    ExperimentConfig cmab = mab;
    cmab.contextual = true;

    MabPolicy mab_pol = MabPolicy::finite_policy(MabPolicyKind::ti_tempered_greedy, T);
    CmabPolicy cmab_pol;
    cmab_pol.kind = CmabPolicyKind::ti_tempered_greedy;
    cmab_pol.mode = PolicyMode::finite_sample;
    cmab_pol.horizon = T;

    RngStream r0 = mab.stream(), r1 = cmab.stream();
    const Trajectory t0 = run_mab(mab, mab_pol, Centering::known_global, r0);
    const Trajectory t1 = run_cmab(cmab, cmab_pol, Centering::known_global, r1);
    REQUIRE(t1.rounds.size() == t0.rounds.size());
    for (std::size_t i = 0; i < t0.rounds.size(); ++i) {
        CHECK(t0.rounds[i].arm == t1.rounds[i].arm);
        CHECK(t0.rounds[i].reward == t1.rounds[i].reward);
        CHECK(t0.rounds[i].propensity == doctest::Approx(t1.rounds[i].propensity).epsilon(1e-12));
    }
    for (int k = 0; k < 2; ++k) {
        CHECK(t1.S[k](0, 0) == doctest::Approx(t0.d[k]).epsilon(1e-12));
        CHECK(t1.C[k](0) == doctest::Approx(t0.r[k]).epsilon(1e-12));
        CHECK(t1.S_half[k](0, 0) == doctest::Approx(t0.dw_half[k]).epsilon(1e-12));
        CHECK(t1.C_half[k](0) == doctest::Approx(t0.rw_half[k]).epsilon(1e-12));
        CHECK(t1.S_one[k](0, 0) == doctest::Approx(t0.dw_one[k]).epsilon(1e-12));
    }
}

TEST_CASE("cmab gram partition and centered-score mean") {
    const std::int64_t T = 300;
    ExperimentConfig cfg;
    cfg.contextual = true;
    cfg.context_dim = 2;
    cfg.horizon = T;
    cfg.global_param = {0.0, 0.0};
    cfg.local1 = {0.0, 0.0};
    cfg.local2 = {0.0, 0.0};
    cfg.seed = 31;
    CmabPolicy pol;
    pol.kind = CmabPolicyKind::ti_thompson;
    pol.mode = PolicyMode::finite_sample;
    pol.horizon = T;

    Eigen::Vector2d mean_C = Eigen::Vector2d::Zero();
    const int reps = 2000;
    for (int i = 0; i < reps; ++i) {
        cfg.replication_index = static_cast<std::uint64_t>(i);
        RngStream rng = cfg.stream();
        RunOptions opts;
        opts.keep_rounds = false;
        const Trajectory traj = run_cmab(cfg, pol, Centering::known_global, rng, opts);
        const Eigen::MatrixXd sum = traj.S[0] + traj.S[1];
        CHECK((sum - traj.xx_total).cwiseAbs().maxCoeff() < 1e-12);
        mean_C += traj.C[0] + traj.C[1];
        CHECK(traj.pulls[0] + traj.pulls[1] == T);
    }
    mean_C /= reps;
    CHECK(mean_C.cwiseAbs().maxCoeff() < 3.5 * std::sqrt(1.0 / reps));
}

TEST_CASE("beta-shift leaves contextual ti runs identical under raw centering") {
    const std::int64_t T = 150;
    ExperimentConfig cfg0;
    cfg0.contextual = true;
    cfg0.context_dim = 2;
    cfg0.horizon = T;
    cfg0.global_param = {0.0, 0.0};
    cfg0.local1 = {0.3, -0.2};
    cfg0.local2 = {0.0, 0.5};
    cfg0.seed = 43;
    ExperimentConfig cfg1 = cfg0;
    cfg1.global_param = {5.0, -2.0};
    CmabPolicy pol;
    pol.kind = CmabPolicyKind::ti_tempered_linucb;
    pol.mode = PolicyMode::finite_sample;
    pol.horizon = T;
    RngStream r0 = cfg0.stream(), r1 = cfg1.stream();
    const Trajectory t0 = run_cmab(cfg0, pol, Centering::raw, r0);
    const Trajectory t1 = run_cmab(cfg1, pol, Centering::raw, r1);
    for (std::size_t i = 0; i < t0.rounds.size(); ++i)
        CHECK(t0.rounds[i].arm == t1.rounds[i].arm);
}

TEST_CASE("configuration errors are typed") {
    auto cfg = mab_config(1, 0.0, 0.0, 0.0);
    MabPolicy pol = MabPolicy::finite_policy(MabPolicyKind::ti_thompson, 1);
    RngStream rng(0, 0);
    CHECK_THROWS_AS(run_mab(cfg, pol, Centering::known_global, rng), config_error);

    auto ok = mab_config(10, 0.0, 0.0, 0.0);
    MabPolicy limit_pol = MabPolicy::limit_policy(MabPolicyKind::ti_thompson);
    CHECK_THROWS_AS(run_mab(ok, limit_pol, Centering::known_global, rng), config_error);
}
