#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bandit/experiment.hpp"
#include "bandit/policy_cmab.hpp"
#include "bandit/policy_mab.hpp"

namespace bandit {

// Full record of one finite-sample bandit run. Per-round rows are kept only
// when requested (Monte Carlo loops skip them); the accumulated terminal
// statistics are always filled. Rescaling conventions: D-type quantities
// carry 1/T, R/C-type quantities carry 1/sqrt(T).
struct Trajectory {
    std::int64_t horizon = 0;
    int p = 1;
    bool contextual = false;
    Centering centering = Centering::known_global;
    Innovation innovation = Innovation::gaussian;
    std::vector<double> global_param;  // mu or beta, echoed for recomputation

    struct Round {
        std::int64_t t;
        std::vector<double> x;
        int arm;            // 1 or 2
        double propensity;  // probability of the pulled arm, at decision time
        double reward;
    };
    std::vector<Round> rounds;

    // Non-contextual terminals, indexed by arm-1.
    std::array<std::int64_t, 2> pulls{};
    std::array<double, 2> d{}, r{};
    std::array<double, 2> rw_half{}, rw_one{};  // psi^{-1/2}, psi^{-1} weighted rewards
    std::array<double, 2> dw_half{}, dw_one{};  // weighted frequencies

    // Contextual terminals.
    std::array<Eigen::MatrixXd, 2> S, S_half, S_one;
    std::array<Eigen::VectorXd, 2> C, C_half;
    Eigen::MatrixXd xx_total;  // (1/T) sum_t x_t x_t'
};

struct RunOptions {
    bool keep_rounds = true;
};

// Runs T rounds of the two-arm non-contextual experiment. Rounds 1 and 2 pull
// arms 1 and 2 deterministically with recorded propensity 1/2; afterwards arm
// 2 is drawn with probability prob_arm2 evaluated on the state accumulated
// through the previous round. Rewards are mu + m_arm/sqrt(T) + innovation.
Trajectory run_mab(const ExperimentConfig& config, const MabPolicy& policy,
                   Centering centering, RngStream& rng, const RunOptions& options = {});

// Linear contextual analogue. Contexts are drawn i.i.d. with first coordinate
// 1 and remaining coordinates standard normal; the first 2p rounds alternate
// arms so both Gram matrices are invertible.
Trajectory run_cmab(const ExperimentConfig& config, const CmabPolicy& policy,
                    Centering centering, RngStream& rng, const RunOptions& options = {});

// Exact Gaussian log-likelihood ratio of the local drift (m1,m2) (or (b1,b2))
// against zero drift: sum_k m_k R_k - m_k^2 D_k / 2, with no remainder term.
double gaussian_loglik_ratio(const Trajectory& traj, double m1, double m2);
double gaussian_loglik_ratio(const Trajectory& traj, const Eigen::VectorXd& b1,
                             const Eigen::VectorXd& b2);

// CSV export: `# key = value` header lines, one row per round, terminal
// statistics in a `# key = value` footer block. Deterministic formatting at
// the requested number of significant digits (17 round-trips doubles).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& header_lines, int digits = 17);

}  // namespace bandit
