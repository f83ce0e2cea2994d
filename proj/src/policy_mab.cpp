#include "bandit/policy_mab.hpp"

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

inline bool bad(double x) { return !std::isfinite(x); }

}  // namespace

MabPolicy MabPolicy::limit_policy(MabPolicyKind kind) {
    MabPolicy p;
    p.kind = kind;
    p.mode = PolicyMode::limit;
    return p;
}

MabPolicy MabPolicy::finite_policy(MabPolicyKind kind, std::int64_t horizon) {
    MabPolicy p;
    p.kind = kind;
    p.mode = PolicyMode::finite_sample;
    p.horizon = horizon;
    return p;
}

void MabPolicy::validate() const {
    if (mode == PolicyMode::finite_sample && horizon < 2)
        throw config_error("finite-sample policy requires horizon >= 2");
    if (b < 0.0) throw config_error("thompson prior scale b must be >= 0");
    if (kind == MabPolicyKind::ti_tempered_greedy || kind == MabPolicyKind::ti_tempered_ucb) {
        if (!(alpha > 0.0)) throw config_error("softmax temperature alpha must be > 0");
    }
    if (kind == MabPolicyKind::ti_tempered_ucb) {
        if (!(delta > 0.0 && delta <= 1.0))
            throw config_error("ucb confidence delta must be in (0,1]");
        if (ucb_log_horizon && mode != PolicyMode::finite_sample)
            throw config_error("log-horizon ucb bonus is a finite-sample option");
    }
    if (!(limit_d_floor > 0.0)) throw config_error("limit d floor must be positive");
}

const char* mab_policy_name(MabPolicyKind kind) {
    switch (kind) {
        case MabPolicyKind::ti_thompson: return "ti-thompson";
        case MabPolicyKind::ti_tempered_greedy: return "ti-tempered-greedy";
        case MabPolicyKind::ti_tempered_ucb: return "ti-tempered-ucb";
        case MabPolicyKind::classical_thompson: return "thompson";
    }
    return "?";
}

MabPolicyKind mab_policy_from_name(const std::string& name) {
    if (name == "ti-thompson") return MabPolicyKind::ti_thompson;
    if (name == "ti-tempered-greedy") return MabPolicyKind::ti_tempered_greedy;
    if (name == "ti-tempered-ucb") return MabPolicyKind::ti_tempered_ucb;
    if (name == "thompson") return MabPolicyKind::classical_thompson;
    throw config_error("unknown policy '" + name + "'");
}

double prob_arm2(const MabPolicy& policy, const MabPolicyState& state) {
    const double d1 = state.d1, d2 = state.d2, r1 = state.r1, r2 = state.r2;
    if (bad(d1) || bad(d2) || bad(r1) || bad(r2) || d1 < 0.0 || d2 < 0.0)
        throw numeric_error("invalid policy state");

    const bool z1 = (d1 == 0.0), z2 = (d2 == 0.0);
    if (z1 && z2) return 0.5;

    const double bb = policy.b * policy.b;  // b_T^2/T with b_T = b*sqrt(T)
    const double avg1 = z1 ? 0.0 : r1 / d1;
    const double avg2 = z2 ? 0.0 : r2 / d2;

    switch (policy.kind) {
        case MabPolicyKind::ti_thompson: {
            if (z1 || z2) return 0.5;
            const double h = d1 * d2 / (d1 + d2);
            return clamp_open01(normal_cdf(h * (avg2 - avg1) / std::sqrt(h + bb)));
        }
        case MabPolicyKind::ti_tempered_greedy:
            return logistic(policy.alpha * (avg2 - avg1));
        case MabPolicyKind::ti_tempered_ucb: {
            double log_term;
            if (policy.mode == PolicyMode::finite_sample && policy.ucb_log_horizon) {
                log_term = std::log(static_cast<double>(policy.horizon) / policy.delta);
            } else {
                log_term = std::log(1.0 / policy.delta);
            }
            const double floor = (policy.mode == PolicyMode::finite_sample)
                                     ? 1.0 / static_cast<double>(policy.horizon)
                                     : policy.limit_d_floor;
            const double e1 = z1 ? floor : d1;
            const double e2 = z2 ? floor : d2;
            const double bonus1 = std::sqrt(log_term / (2.0 * e1));
            const double bonus2 = std::sqrt(log_term / (2.0 * e2));
            return logistic(policy.alpha * (avg2 - avg1 + bonus2 - bonus1));
        }
        case MabPolicyKind::classical_thompson: {
            if (bb == 0.0 && (z1 || z2)) return 0.5;
            const double num = r2 / (d2 + bb) - r1 / (d1 + bb);
            const double den = std::sqrt(1.0 / (d1 + bb) + 1.0 / (d2 + bb));
            return clamp_open01(normal_cdf(num / den));
        }
    }
    throw numeric_error("invalid policy kind");
}

double check_translation_invariance(const MabPolicy& policy, int trials, RngStream& rng) {
    if (trials < 1) throw config_error("trials must be >= 1");
    static const double probes[] = {-3.0, 1.0, 100.0};
    double worst = 0.0;
    for (int i = 0; i < trials; ++i) {
        MabPolicyState s;
        s.d1 = 0.05 + 0.55 * rng.uniform01();
        s.d2 = 0.05 + 0.55 * rng.uniform01();
        s.r1 = 1.5 * rng.normal();
        s.r2 = 1.5 * rng.normal();
        const double c = (i % 2 == 0) ? probes[(i / 2) % 3] : 200.0 * (rng.uniform01() - 0.5);
        const double base = prob_arm2(policy, s);
        MabPolicyState shifted = s;
        shifted.r1 += c * s.d1;
        shifted.r2 += c * s.d2;
        const double dev = std::fabs(prob_arm2(policy, shifted) - base);
        if (dev > worst) worst = dev;
    }
    return worst;
}

}  // namespace bandit
