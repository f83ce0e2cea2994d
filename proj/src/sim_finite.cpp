#include "bandit/sim_finite.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

std::string fmt(double v, int digits = 17) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

bool spd_well_conditioned(const Eigen::MatrixXd& S, double cap) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) return false;
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    return lmin > 0.0 && lmax / lmin <= cap;
}

}  // namespace

Trajectory run_mab(const ExperimentConfig& config, const MabPolicy& policy,
                   Centering centering, RngStream& rng, const RunOptions& options) {
    config.validate();
    policy.validate();
    if (config.contextual || config.context_dim != 1)
        throw config_error("run_mab requires a non-contextual configuration");
    if (policy.mode != PolicyMode::finite_sample || policy.horizon != config.horizon)
        throw config_error("policy must be in finite-sample mode at the experiment horizon");

    const std::int64_t T = config.horizon;
    const double mu = config.global_param[0];
    const double m1 = config.local1[0], m2 = config.local2[0];
    const double sqt = 1.0 / std::sqrt(static_cast<double>(T));

    Trajectory traj;
    traj.horizon = T;
    traj.p = 1;
    traj.contextual = false;
    traj.centering = centering;
    traj.innovation = config.innovation;
    traj.global_param = config.global_param;
    if (options.keep_rounds) traj.rounds.reserve(static_cast<std::size_t>(T));

    std::array<std::int64_t, 2> pulls{0, 0};
    std::array<double, 2> sum_r{0.0, 0.0};
    std::array<double, 2> sum_rw_half{0.0, 0.0}, sum_rw_one{0.0, 0.0};
    std::array<double, 2> sum_dw_half{0.0, 0.0}, sum_dw_one{0.0, 0.0};

    for (std::int64_t t = 1; t <= T; ++t) {
        int arm;
        double psi_used;
        if (t <= 2) {
            arm = static_cast<int>(t);
            psi_used = 0.5;
        } else {
            MabPolicyState state;
            state.d1 = static_cast<double>(pulls[0]) / static_cast<double>(T);
            state.d2 = static_cast<double>(pulls[1]) / static_cast<double>(T);
            state.r1 = sum_r[0] * sqt;
            state.r2 = sum_r[1] * sqt;
            state.t_over_T = static_cast<double>(t - 1) / static_cast<double>(T);
            const double psi2 = prob_arm2(policy, state);
            arm = (rng.uniform01() < psi2) ? 2 : 1;
            psi_used = (arm == 2) ? psi2 : 1.0 - psi2;
        }
        const double eps = draw_innovation(config.innovation, rng);
        const double m_arm = (arm == 1) ? m1 : m2;
        const double y = mu + m_arm * sqt + eps;
        const double centered = (centering == Centering::known_global) ? y - mu : y;

        const int k = arm - 1;
        const double inv_sqrt_psi = 1.0 / std::sqrt(psi_used);
        const double inv_psi = 1.0 / psi_used;
        ++pulls[k];
        sum_r[k] += centered;
        sum_rw_half[k] += inv_sqrt_psi * centered;
        sum_rw_one[k] += inv_psi * centered;
        sum_dw_half[k] += inv_sqrt_psi;
        sum_dw_one[k] += inv_psi;

        if (options.keep_rounds)
            traj.rounds.push_back({t, {1.0}, arm, psi_used, y});
    }

    traj.pulls = pulls;
    for (int k = 0; k < 2; ++k) {
        traj.d[k] = static_cast<double>(pulls[k]) / static_cast<double>(T);
        traj.r[k] = sum_r[k] * sqt;
        traj.rw_half[k] = sum_rw_half[k] * sqt;
        traj.rw_one[k] = sum_rw_one[k] * sqt;
        traj.dw_half[k] = sum_dw_half[k] / static_cast<double>(T);
        traj.dw_one[k] = sum_dw_one[k] / static_cast<double>(T);
    }
    return traj;
}

Trajectory run_cmab(const ExperimentConfig& config, const CmabPolicy& policy,
                    Centering centering, RngStream& rng, const RunOptions& options) {
    config.validate();
    policy.validate();
    if (!config.contextual) throw config_error("run_cmab requires a contextual configuration");
    if (policy.mode != PolicyMode::finite_sample || policy.horizon != config.horizon)
        throw config_error("policy must be in finite-sample mode at the experiment horizon");

    const int p = config.context_dim;
    const std::int64_t T = config.horizon;
    const double sqt = 1.0 / std::sqrt(static_cast<double>(T));
    const Eigen::Map<const Eigen::VectorXd> beta(config.global_param.data(), p);
    const Eigen::Map<const Eigen::VectorXd> b1(config.local1.data(), p);
    const Eigen::Map<const Eigen::VectorXd> b2(config.local2.data(), p);

    Trajectory traj;
    traj.horizon = T;
    traj.p = p;
    traj.contextual = true;
    traj.centering = centering;
    traj.innovation = config.innovation;
    traj.global_param = config.global_param;
    if (options.keep_rounds) traj.rounds.reserve(static_cast<std::size_t>(T));

    std::array<Eigen::MatrixXd, 2> S, S_half, S_one;
    std::array<Eigen::VectorXd, 2> C, C_half;
    for (int k = 0; k < 2; ++k) {
        S[k] = Eigen::MatrixXd::Zero(p, p);
        S_half[k] = Eigen::MatrixXd::Zero(p, p);
        S_one[k] = Eigen::MatrixXd::Zero(p, p);
        C[k] = Eigen::VectorXd::Zero(p);
        C_half[k] = Eigen::VectorXd::Zero(p);
    }
    Eigen::MatrixXd xx_total = Eigen::MatrixXd::Zero(p, p);
    std::array<std::int64_t, 2> pulls{0, 0};

    auto draw_context = [&](Eigen::VectorXd& x) {
        x(0) = 1.0;
        for (int i = 1; i < p; ++i) x(i) = rng.normal();
    };
    Eigen::VectorXd x(p);

    auto play_round = [&](std::int64_t t, int arm, double psi_used) {
        const double eps = draw_innovation(config.innovation, rng);
        const Eigen::VectorXd& b_arm = (arm == 1) ? b1 : b2;
        const double y = x.dot(beta + sqt * b_arm) + eps;
        const double centered =
            (centering == Centering::known_global) ? y - x.dot(beta) : y;

        const int k = arm - 1;
        const double inv_sqrt_psi = 1.0 / std::sqrt(psi_used);
        const double inv_psi = 1.0 / psi_used;
        const Eigen::MatrixXd xxt = x * x.transpose();
        ++pulls[k];
        S[k] += xxt;
        S_half[k] += inv_sqrt_psi * xxt;
        S_one[k] += inv_psi * xxt;
        C[k] += centered * x;
        C_half[k] += (inv_sqrt_psi * centered) * x;
        xx_total += xxt;

        if (options.keep_rounds) {
            Trajectory::Round row;
            row.t = t;
            row.x.assign(x.data(), x.data() + p);
            row.arm = arm;
            row.propensity = psi_used;
            row.reward = y;
            traj.rounds.push_back(std::move(row));
        }
    };

    // Forced block: arms alternate for the first 2p rounds; if the resulting
    // Gram matrices are not invertible the whole block is redrawn.
    const std::int64_t forced = 2 * static_cast<std::int64_t>(p);
    for (int attempt = 0;; ++attempt) {
        for (std::int64_t t = 1; t <= forced; ++t) {
            draw_context(x);
            play_round(t, (t % 2 == 1) ? 1 : 2, 0.5);
        }
        if (spd_well_conditioned(S[0], policy.condition_cap) &&
            spd_well_conditioned(S[1], policy.condition_cap))
            break;
        if (attempt >= 100)
            throw numeric_error("singular design after forced initialization");
        for (int k = 0; k < 2; ++k) {
            S[k].setZero();
            S_half[k].setZero();
            S_one[k].setZero();
            C[k].setZero();
            C_half[k].setZero();
        }
        xx_total.setZero();
        pulls = {0, 0};
        traj.rounds.clear();
    }

    const double invT = 1.0 / static_cast<double>(T);
    for (std::int64_t t = forced + 1; t <= T; ++t) {
        const PreparedCmabPolicy prepared(policy, invT * S[0], invT * S[1], sqt * C[0],
                                          sqt * C[1]);
        draw_context(x);
        const double psi2 = prepared.prob_arm2(x);
        const int arm = (rng.uniform01() < psi2) ? 2 : 1;
        play_round(t, arm, (arm == 2) ? psi2 : 1.0 - psi2);
    }

    traj.pulls = pulls;
    for (int k = 0; k < 2; ++k) {
        traj.d[k] = static_cast<double>(pulls[k]) * invT;
        traj.S[k] = invT * S[k];
        traj.S_half[k] = invT * S_half[k];
        traj.S_one[k] = invT * S_one[k];
        traj.C[k] = sqt * C[k];
        traj.C_half[k] = sqt * C_half[k];
    }
    traj.xx_total = invT * xx_total;
    return traj;
}

namespace {
void require_gaussian_known(const Trajectory& traj) {
    if (traj.innovation != Innovation::gaussian)
        throw numeric_error("likelihood ratio requires gaussian");
    if (traj.centering != Centering::known_global)
        throw numeric_error("likelihood ratio requires known-mean centering");
}
}  // namespace

double gaussian_loglik_ratio(const Trajectory& traj, double m1, double m2) {
    require_gaussian_known(traj);
    if (traj.contextual)
        throw config_error("scalar drift arguments require a non-contextual trajectory");
    return m1 * traj.r[0] + m2 * traj.r[1] -
           0.5 * (m1 * m1 * traj.d[0] + m2 * m2 * traj.d[1]);
}

double gaussian_loglik_ratio(const Trajectory& traj, const Eigen::VectorXd& b1,
                             const Eigen::VectorXd& b2) {
    require_gaussian_known(traj);
    if (!traj.contextual)
        throw config_error("vector drift arguments require a contextual trajectory");
    double out = b1.dot(traj.C[0]) - 0.5 * b1.dot(traj.S[0] * b1);
    out += b2.dot(traj.C[1]) - 0.5 * b2.dot(traj.S[1] * b2);
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& header_lines, int digits) {
    for (const auto& line : header_lines) os << "# " << line << "\n";
    os << "t";
    for (int i = 1; i <= traj.p; ++i) os << ",x_" << i;
    os << ",arm,propensity,reward\n";
    for (const auto& row : traj.rounds) {
        os << row.t;
        for (double xi : row.x) os << "," << fmt(xi, digits);
        os << "," << row.arm << "," << fmt(row.propensity, digits) << ","
           << fmt(row.reward, digits) << "\n";
    }
    auto kv = [&](const std::string& key, double value) {
        os << "# " << key << " = " << fmt(value, digits) << "\n";
    };
    if (!traj.contextual) {
        for (int k = 0; k < 2; ++k) {
            const std::string a = std::to_string(k + 1);
            kv("D_" + a, traj.d[k]);
            kv("R_" + a, traj.r[k]);
            kv("Rhalf_" + a, traj.rw_half[k]);
            kv("Rone_" + a, traj.rw_one[k]);
            kv("Dhalf_" + a, traj.dw_half[k]);
            kv("Done_" + a, traj.dw_one[k]);
        }
    } else {
        for (int k = 0; k < 2; ++k) {
            const std::string a = std::to_string(k + 1);
            for (int i = 0; i < traj.p; ++i) {
                kv("C_" + a + "_" + std::to_string(i + 1), traj.C[k](i));
                kv("Chalf_" + a + "_" + std::to_string(i + 1), traj.C_half[k](i));
                for (int j = 0; j < traj.p; ++j) {
                    const std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
                    kv("S_" + a + "_" + ij, traj.S[k](i, j));
                    kv("Shalf_" + a + "_" + ij, traj.S_half[k](i, j));
                    kv("Sone_" + a + "_" + ij, traj.S_one[k](i, j));
                }
            }
        }
    }
}

}  // namespace bandit
