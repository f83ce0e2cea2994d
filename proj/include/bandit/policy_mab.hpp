#pragma once

#include <cstdint>
#include <string>

#include "bandit/experiment.hpp"
#include "bandit/rng.hpp"

namespace bandit {

// Two-arm sampling schemes as pure probability maps on the rescaled summary
// statistics (D_{1,t}, D_{2,t}, R_{1,t}, R_{2,t}). The ti_* kinds satisfy
// psi(d, r + c*d) = psi(d, r) for every shift c, which is what makes them
// usable without knowledge of the common reward level; classical Thompson
// deliberately violates it when its prior precision b is positive.
enum class MabPolicyKind {
    ti_thompson,
    ti_tempered_greedy,
    ti_tempered_ucb,
    classical_thompson,
};

struct MabPolicyState {
    double d1 = 0.0;
    double d2 = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
    double t_over_T = 1.0;  // elapsed fraction; unused by the fixed schemes
};

struct MabPolicy {
    MabPolicyKind kind = MabPolicyKind::ti_thompson;
    PolicyMode mode = PolicyMode::limit;

    // Limiting hyperparameters. In finite_sample mode the pre-limit sequences
    // are taken limit-consistent (b_T = b*sqrt(T), alpha_T = alpha*sqrt(T),
    // delta_T = delta*T), under which the finite-sample formulas coincide
    // with the limiting ones.
    double b = 1.0 / 20.0;   // Thompson prior scale, b >= 0
    double alpha = 1.0;      // softmax temperature, > 0
    double delta = 1.0;      // UCB confidence, in (0, 1]

    std::int64_t horizon = 0;  // required in finite_sample mode

    // Tempered-UCB only: use the fixed-confidence sequence delta_T = delta,
    // whose finite-sample bonus log(T/delta) grows with the horizon instead
    // of converging to log(1/delta).
    bool ucb_log_horizon = false;

    // d -> 0 cap scale for the UCB bonus in limit mode (1/grid points).
    double limit_d_floor = 0.01;

    static MabPolicy limit_policy(MabPolicyKind kind);
    static MabPolicy finite_policy(MabPolicyKind kind, std::int64_t horizon);

    void validate() const;
    bool translation_invariant() const { return kind != MabPolicyKind::classical_thompson; }
};

const char* mab_policy_name(MabPolicyKind kind);
MabPolicyKind mab_policy_from_name(const std::string& name);

// Probability of selecting arm 2 given the current state; psi_1 = 1 - psi_2.
// Returns a value strictly inside (0,1). Boundary states with d_k = 0 use the
// continuous extension (1/2 at the origin; zero average-reward terms and a
// capped UCB bonus for an unexplored arm).
double prob_arm2(const MabPolicy& policy, const MabPolicyState& state);

// Max |psi(d, r + c*d) - psi(d, r)| over `trials` random states and shifts.
// Bounded by ~1e-13 for ti_* kinds; strictly positive for classical Thompson
// with b > 0.
double check_translation_invariance(const MabPolicy& policy, int trials, RngStream& rng);

}  // namespace bandit
