#include <Eigen/Dense>
#include <cmath>

#include "bandit/errors.hpp"
#include "bandit/policy_cmab.hpp"
#include "bandit/policy_mab.hpp"
#include "bandit/rng.hpp"
#include "doctest.h"

using namespace bandit;

namespace {

CmabPolicyState scalar_state(double s1, double s2, double c1, double c2, double x) {
    CmabPolicyState st;
    st.S1 = Eigen::MatrixXd::Constant(1, 1, s1);
    st.S2 = Eigen::MatrixXd::Constant(1, 1, s2);
    st.C1 = Eigen::VectorXd::Constant(1, c1);
    st.C2 = Eigen::VectorXd::Constant(1, c2);
    st.x = Eigen::VectorXd::Constant(1, x);
    return st;
}

CmabPolicyState frozen_p2_state() {
    CmabPolicyState st;
    st.S1 = Eigen::MatrixXd(2, 2);
    st.S1 << 0.04, 0.01, 0.01, 0.03;
    st.S2 = Eigen::MatrixXd(2, 2);
    st.S2 << 0.20, -0.02, -0.02, 0.15;
    st.C1 = Eigen::VectorXd(2);
    st.C1 << 0.02, -0.01;
    st.C2 = Eigen::VectorXd(2);
    st.C2 << 0.05, 0.03;
    st.x = Eigen::VectorXd(2);
    st.x << 1.0, 0.5;
    return st;
}

}  // namespace

TEST_CASE("ti thompson contextual formula values") {
    CmabPolicy p;
    p.kind = CmabPolicyKind::ti_thompson;
    CHECK(prob_arm2_ctx(p, scalar_state(0.5, 0.5, 0.0, 0.0, 1.0)) ==
          doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("ti tempered greedy contextual formula values") {
    CmabPolicy p;
    p.kind = CmabPolicyKind::ti_tempered_greedy;
    p.alpha = 1.0;
    // x' S2^{-1} C2 = 0.5, softmax -> e^{1/2}/(1+e^{1/2})
    const double got = prob_arm2_ctx(p, scalar_state(0.5, 0.5, 0.0, 0.25, 1.0));
    CHECK(std::fabs(got - 0.6224593312018546) < 1e-14);
}

TEST_CASE("translation identity for contextual ti kinds") {
    RngStream rng(57, 0);
    for (CmabPolicyKind kind :
         {CmabPolicyKind::ti_thompson, CmabPolicyKind::ti_tempered_greedy,
          CmabPolicyKind::ti_tempered_linucb}) {
        CmabPolicy p;
        p.kind = kind;
        RngStream r = rng.substream(static_cast<std::uint64_t>(kind));
        CHECK(check_translation_invariance_ctx(p, 2, 500, r) <= 1e-10);
    }
    CmabPolicy p1;
    p1.kind = CmabPolicyKind::ti_thompson;
    RngStream r1 = rng.substream(77);
    CHECK(check_translation_invariance_ctx(p1, 1, 500, r1) <= 1e-10);
}

TEST_CASE("classical linear thompson is not translation invariant") {
    CmabPolicy p;
    p.kind = CmabPolicyKind::classical_thompson;
    p.mode = PolicyMode::finite_sample;
    p.horizon = 200;

    const auto st = frozen_p2_state();
    const double base = prob_arm2_ctx(p, st);
    CHECK(base == doctest::Approx(0.5030773757566004).epsilon(1e-10));
    Eigen::VectorXd e = Eigen::VectorXd::Constant(2, 10.0);
    CmabPolicyState shifted = st;
    shifted.C1 = st.C1 + st.S1 * e;
    shifted.C2 = st.C2 + st.S2 * e;
    const double moved = prob_arm2_ctx(p, shifted);
    CHECK(moved == doctest::Approx(0.5392651156821716).epsilon(1e-10));
    CHECK(std::fabs(moved - base) > 0.01);

    RngStream rng(61, 0);
    CHECK(check_translation_invariance_ctx(p, 2, 500, rng) > 0.01);
}

TEST_CASE("p=1 constant-context reduction agrees with the scalar policies") {
    RngStream rng(63, 0);
    for (int i = 0; i < 300; ++i) {
        const double d1 = 0.05 + 0.6 * rng.uniform01();
        const double d2 = 0.05 + 0.6 * rng.uniform01();
        const double r1 = rng.normal(), r2 = rng.normal();
        const auto st = scalar_state(d1, d2, r1, r2, 1.0);
        MabPolicyState ms;
        ms.d1 = d1;
        ms.d2 = d2;
        ms.r1 = r1;
        ms.r2 = r2;

        CmabPolicy cg;
        cg.kind = CmabPolicyKind::ti_tempered_greedy;
        MabPolicy mg = MabPolicy::limit_policy(MabPolicyKind::ti_tempered_greedy);
        CHECK(std::fabs(prob_arm2_ctx(cg, st) - prob_arm2(mg, ms)) <= 1e-12);

        CmabPolicy ct;
        ct.kind = CmabPolicyKind::ti_thompson;
        MabPolicy mt = MabPolicy::limit_policy(MabPolicyKind::ti_thompson);
        CHECK(std::fabs(prob_arm2_ctx(ct, st) - prob_arm2(mt, ms)) <= 1e-12);

        CmabPolicy cc;
        cc.kind = CmabPolicyKind::classical_thompson;
        MabPolicy mc = MabPolicy::limit_policy(MabPolicyKind::classical_thompson);
        CHECK(std::fabs(prob_arm2_ctx(cc, st) - prob_arm2(mc, ms)) <= 1e-12);
    }
}

TEST_CASE("singular and ill-conditioned design matrices raise typed errors") {
    CmabPolicy p;
    p.kind = CmabPolicyKind::ti_thompson;
    CmabPolicyState st = frozen_p2_state();
    st.S2 = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_WITH_AS(prob_arm2_ctx(p, st), "uninitialized design matrix", numeric_error);

    st = frozen_p2_state();
    st.S1(0, 0) = 1.0;
    st.S1(1, 1) = 1e-14;
    st.S1(0, 1) = st.S1(1, 0) = 0.0;
    CHECK_THROWS_WITH_AS(prob_arm2_ctx(p, st), "ill-conditioned state", numeric_error);
}

TEST_CASE("contextual policy names round trip") {
    for (CmabPolicyKind kind :
         {CmabPolicyKind::ti_thompson, CmabPolicyKind::ti_tempered_greedy,
          CmabPolicyKind::ti_tempered_linucb, CmabPolicyKind::classical_thompson}) {
        CHECK(cmab_policy_from_name(cmab_policy_name(kind)) == kind);
    }
}
