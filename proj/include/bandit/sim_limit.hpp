#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "bandit/policy_cmab.hpp"
#include "bandit/policy_mab.hpp"
#include "bandit/rng.hpp"

namespace bandit {

struct SdeGrid {
    int n_steps = 100;
    double dt() const { return 1.0 / static_cast<double>(n_steps); }
    void validate() const;
};

// Terminal values at u = 1 of the non-contextual limit-experiment processes.
// delta/q are the score and information processes; they coincide with r/d
// when the Fisher information J_k is 1 (Gaussian innovations).
struct MabSdeTerminals {
    std::array<double, 2> d{}, r{};
    std::array<double, 2> rw_half{}, rw_one{};
    std::array<double, 2> dw_half{}, dw_one{};
    std::array<double, 2> delta{}, q{};
};

struct MabSdePath {
    int n_steps = 0;
    double m1 = 0.0, m2 = 0.0, j1 = 1.0, j2 = 1.0;
    std::vector<double> u;  // n_steps + 1 grid points including u = 0
    std::array<std::vector<double>, 2> d, r, rw_half, rw_one, dw_half, dw_one, delta, q;
    MabSdeTerminals terminals;
};

// Euler simulation of the coupled two-arm system: per step, both arms advance
// with the same policy probabilities evaluated on the current (D, R) state
// (psi = 1/2 on the first step), one Brownian increment per arm shared by all
// of that arm's processes, and independent increments across arms. Requires a
// limit-mode policy and J_k >= 1.
MabSdeTerminals simulate_mab_limit_terminals(const MabPolicy& policy, double m1, double m2,
                                             double j1, double j2, const SdeGrid& grid,
                                             RngStream& rng);
MabSdePath simulate_mab_limit(const MabPolicy& policy, double m1, double m2, double j1,
                              double j2, const SdeGrid& grid, RngStream& rng);

// How the contextual drift/diffusion coefficients E[psi_k^a(S,C,X) X X'] are
// evaluated: fixed 64-node Gauss-Hermite quadrature (exact context model with
// an intercept and one standard-normal slope), or a fresh Monte Carlo context
// sample each step, frozen across both arms within the step.
struct ContextMoments {
    enum class Strategy { analytic, monte_carlo };
    Strategy strategy = Strategy::monte_carlo;
    int n_ctx = 1024;
    void validate(int p) const;
};

struct CmabSdeTerminals {
    std::array<Eigen::MatrixXd, 2> S, S_half, S_one;
    std::array<Eigen::VectorXd, 2> C, C_half;
    Eigen::MatrixXd xx_integral;  // integral of the per-step context second moment
    int clamp_events = 0;         // negative-eigenvalue clamps in matrix square roots
};

struct CmabSdePath {
    int n_steps = 0;
    int p = 0;
    std::vector<double> u;
    // Flattened per-step snapshots (row-major p*p for matrices, length p for
    // vectors), one entry per grid point including u = 0.
    std::array<std::vector<double>, 2> S, S_half, C, C_half;
    CmabSdeTerminals terminals;
};

// Gaussian linear-contextual limit experiment (unit Fisher information).
CmabSdeTerminals simulate_cmab_limit_terminals(const CmabPolicy& policy,
                                               const Eigen::VectorXd& b1,
                                               const Eigen::VectorXd& b2,
                                               const ContextMoments& moments,
                                               const SdeGrid& grid, RngStream& rng);
CmabSdePath simulate_cmab_limit(const CmabPolicy& policy, const Eigen::VectorXd& b1,
                                const Eigen::VectorXd& b2, const ContextMoments& moments,
                                const SdeGrid& grid, RngStream& rng);

// Closed-form Neyman-Pearson statistics on terminal values.
double np_oracle_one_arm(const MabSdeTerminals& t, double m2_bar);
double np_oracle_two_sample(const MabSdeTerminals& t, double m_bar, double delta_bar);

// Gauss-Hermite nodes/weights for integrating against the standard normal
// density (probabilists' convention); exposed for tests.
void gauss_hermite_normal(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace bandit
