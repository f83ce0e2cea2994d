#include "bandit/policy_cmab.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "bandit/errors.hpp"
#include "bandit/numeric.hpp"

namespace bandit {

namespace {

inline double clamp_open01(double p) {
    const double lo = std::numeric_limits<double>::min();
    const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    if (p < lo) return lo;
    if (p > hi) return hi;
    return p;
}

inline double logistic(double z) {
    if (z >= 0.0) return clamp_open01(1.0 / (1.0 + std::exp(-z)));
    const double e = std::exp(z);
    return clamp_open01(e / (1.0 + e));
}

// Inverse of a symmetric positive definite design matrix with an explicit
// eigenvalue guard; converts numerical blow-ups into typed errors.
Eigen::MatrixXd guarded_spd_inverse(const Eigen::MatrixXd& S, double condition_cap) {
    if (!S.allFinite()) throw numeric_error("invalid policy state");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw numeric_error("uninitialized design matrix");
    const auto& vals = es.eigenvalues();
    const double lmin = vals.minCoeff();
    const double lmax = vals.maxCoeff();
    if (!(lmin > 0.0)) throw numeric_error("uninitialized design matrix");
    if (lmax / lmin > condition_cap) throw numeric_error("ill-conditioned state");
    return es.eigenvectors() * vals.cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace

void CmabPolicy::validate() const {
    if (b < 0.0) throw config_error("thompson prior scale b must be >= 0");
    if (kind == CmabPolicyKind::ti_tempered_greedy || kind == CmabPolicyKind::ti_tempered_linucb) {
        if (!(alpha > 0.0)) throw config_error("softmax temperature alpha must be > 0");
    }
    if (kind == CmabPolicyKind::ti_tempered_linucb && !(lambda > 0.0))
        throw config_error("linucb bonus coefficient lambda must be > 0");
    if (mode == PolicyMode::finite_sample && horizon < 2)
        throw config_error("finite-sample policy requires horizon >= 2");
    if (!(condition_cap > 1.0)) throw config_error("condition cap must exceed 1");
}

const char* cmab_policy_name(CmabPolicyKind kind) {
    switch (kind) {
        case CmabPolicyKind::ti_thompson: return "ti-thompson-lin";
        case CmabPolicyKind::ti_tempered_greedy: return "ti-tempered-greedy-lin";
        case CmabPolicyKind::ti_tempered_linucb: return "ti-tempered-linucb";
        case CmabPolicyKind::classical_thompson: return "thompson-lin";
    }
    return "?";
}

CmabPolicyKind cmab_policy_from_name(const std::string& name) {
    if (name == "ti-thompson-lin") return CmabPolicyKind::ti_thompson;
    if (name == "ti-tempered-greedy-lin") return CmabPolicyKind::ti_tempered_greedy;
    if (name == "ti-tempered-linucb") return CmabPolicyKind::ti_tempered_linucb;
    if (name == "thompson-lin") return CmabPolicyKind::classical_thompson;
    throw config_error("unknown policy '" + name + "'");
}

PreparedCmabPolicy::PreparedCmabPolicy(const CmabPolicy& policy, const Eigen::MatrixXd& S1,
                                       const Eigen::MatrixXd& S2, const Eigen::VectorXd& C1,
                                       const Eigen::VectorXd& C2)
    : kind_(policy.kind), alpha_(policy.alpha), lambda_(policy.lambda) {
    if (!C1.allFinite() || !C2.allFinite()) throw numeric_error("invalid policy state");
    const double bb = policy.b * policy.b;
    const int p = static_cast<int>(S1.rows());
    S1_inv_ = guarded_spd_inverse(S1, policy.condition_cap);
    S2_inv_ = guarded_spd_inverse(S2, policy.condition_cap);
    zeta_hat_ = S2_inv_ * C2 - S1_inv_ * C1;
    switch (kind_) {
        case CmabPolicyKind::ti_thompson: {
            const Eigen::MatrixXd A = guarded_spd_inverse(S1_inv_ + S2_inv_, policy.condition_cap);
            thompson_M_ = guarded_spd_inverse(
                A + bb * Eigen::MatrixXd::Identity(p, p), policy.condition_cap);
            thompson_v_ = thompson_M_ * (A * zeta_hat_);
            break;
        }
        case CmabPolicyKind::classical_thompson: {
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(p, p);
            const Eigen::MatrixXd A1 = guarded_spd_inverse(S1 + bb * I, policy.condition_cap);
            const Eigen::MatrixXd A2 = guarded_spd_inverse(S2 + bb * I, policy.condition_cap);
            classical_diff_ = A2 * C2 - A1 * C1;
            classical_V_ = A1 + A2;
            break;
        }
        default:
            break;
    }
}

double PreparedCmabPolicy::prob_arm2(const Eigen::VectorXd& x) const {
    if (!x.allFinite()) throw numeric_error("invalid policy state");
    switch (kind_) {
        case CmabPolicyKind::ti_thompson: {
            const double num = x.dot(thompson_v_);
            const double den = std::sqrt(x.dot(thompson_M_ * x));
            return clamp_open01(normal_cdf(num / den));
        }
        case CmabPolicyKind::ti_tempered_greedy:
            return logistic(alpha_ * x.dot(zeta_hat_));
        case CmabPolicyKind::ti_tempered_linucb: {
            const double bonus2 = std::sqrt(x.dot(S2_inv_ * x));
            const double bonus1 = std::sqrt(x.dot(S1_inv_ * x));
            return logistic(alpha_ * (x.dot(zeta_hat_) + lambda_ * (bonus2 - bonus1)));
        }
        case CmabPolicyKind::classical_thompson: {
            const double num = x.dot(classical_diff_);
            const double den = std::sqrt(x.dot(classical_V_ * x));
            return clamp_open01(normal_cdf(num / den));
        }
    }
    throw numeric_error("invalid policy kind");
}

double prob_arm2_ctx(const CmabPolicy& policy, const CmabPolicyState& state) {
    PreparedCmabPolicy prepared(policy, state.S1, state.S2, state.C1, state.C2);
    return prepared.prob_arm2(state.x);
}

double check_translation_invariance_ctx(const CmabPolicy& policy, int p, int trials,
                                        RngStream& rng) {
    if (trials < 1) throw config_error("trials must be >= 1");
    if (p < 1) throw config_error("context dimension must be positive");
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        // Random well-conditioned SPD Gram matrices at mixed scales, so the
        // probe set includes early-experiment states where the classical
        // ridge term matters.
        CmabPolicyState s;
        auto random_spd = [&](double scale) {
            Eigen::MatrixXd A(p, p);
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j) A(i, j) = rng.normal();
            Eigen::MatrixXd M = scale * (A * A.transpose());
            M += (0.05 * scale) * Eigen::MatrixXd::Identity(p, p);
            return M;
        };
        const double scale1 = 0.02 + 0.4 * rng.uniform01();
        const double scale2 = 0.02 + 0.4 * rng.uniform01();
        s.S1 = random_spd(scale1);
        s.S2 = random_spd(scale2);
        s.C1 = Eigen::VectorXd(p);
        s.C2 = Eigen::VectorXd(p);
        s.x = Eigen::VectorXd(p);
        for (int i = 0; i < p; ++i) {
            s.C1(i) = 0.3 * rng.normal();
            s.C2(i) = 0.3 * rng.normal();
            s.x(i) = (i == 0) ? 1.0 : rng.normal();
        }
        Eigen::VectorXd e(p);
        if (trial % 3 == 0) {
            e.setConstant(10.0);
        } else if (trial % 3 == 1) {
            e.setZero();
            e(trial % p) = 1.0;
        } else {
            for (int i = 0; i < p; ++i) e(i) = 20.0 * (rng.uniform01() - 0.5);
        }
        const double base = prob_arm2_ctx(policy, s);
        CmabPolicyState shifted = s;
        shifted.C1 = s.C1 + s.S1 * e;
        shifted.C2 = s.C2 + s.S2 * e;
        const double dev = std::fabs(prob_arm2_ctx(policy, shifted) - base);
        if (dev > worst) worst = dev;
    }
    return worst;
}

}  // namespace bandit
