#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "bandit/experiment.hpp"
#include "bandit/rng.hpp"

namespace bandit {

// Linear contextual two-arm schemes as pure maps of (S_1, S_2, C_1, C_2, x).
// The ti_* kinds depend on C only through S_2^{-1}C_2 - S_1^{-1}C_1 and hence
// satisfy psi(s, c + s*e, x) = psi(s, c, x) for every vector e.
enum class CmabPolicyKind {
    ti_thompson,
    ti_tempered_greedy,
    ti_tempered_linucb,
    classical_thompson,
};

struct CmabPolicyState {
    Eigen::MatrixXd S1, S2;  // p x p, symmetric positive definite
    Eigen::VectorXd C1, C2;  // p
    Eigen::VectorXd x;       // incoming context
};

struct CmabPolicy {
    CmabPolicyKind kind = CmabPolicyKind::ti_thompson;
    PolicyMode mode = PolicyMode::limit;
    double b = 1.0 / 20.0;           // Thompson prior scale, >= 0
    double alpha = 1.0;              // softmax temperature, > 0
    double lambda = 1.0;             // LinUCB bonus coefficient, > 0
    std::int64_t horizon = 0;        // finite-sample mode only
    double condition_cap = 1e12;     // S_k condition-number guard

    void validate() const;
    bool translation_invariant() const { return kind != CmabPolicyKind::classical_thompson; }
};

const char* cmab_policy_name(CmabPolicyKind kind);
CmabPolicyKind cmab_policy_from_name(const std::string& name);

// Factorizations of one (S, C) state, reused across many context vectors.
// Construction throws on singular or ill-conditioned design matrices.
class PreparedCmabPolicy {
public:
    PreparedCmabPolicy(const CmabPolicy& policy, const Eigen::MatrixXd& S1,
                       const Eigen::MatrixXd& S2, const Eigen::VectorXd& C1,
                       const Eigen::VectorXd& C2);

    double prob_arm2(const Eigen::VectorXd& x) const;

private:
    CmabPolicyKind kind_;
    double alpha_ = 0.0;
    double lambda_ = 0.0;
    Eigen::VectorXd thompson_v_;     // M * A * zeta_hat
    Eigen::MatrixXd thompson_M_;     // (A + b^2 I)^{-1}
    Eigen::VectorXd zeta_hat_;       // S2^{-1}C2 - S1^{-1}C1
    Eigen::MatrixXd S1_inv_, S2_inv_;
    Eigen::VectorXd classical_diff_;  // (S2+b^2I)^{-1}C2 - (S1+b^2I)^{-1}C1
    Eigen::MatrixXd classical_V_;     // sum of ridge inverses
};

double prob_arm2_ctx(const CmabPolicy& policy, const CmabPolicyState& state);

// Max |psi(s, c + s*e, x) - psi(s, c, x)| over random states and shifts e.
double check_translation_invariance_ctx(const CmabPolicy& policy, int p, int trials,
                                        RngStream& rng);

}  // namespace bandit
