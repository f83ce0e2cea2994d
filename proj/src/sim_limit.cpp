#include "bandit/sim_limit.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "bandit/errors.hpp"

namespace bandit {

void SdeGrid::validate() const {
    if (n_steps < 10) throw config_error("sde grid needs at least 10 steps");
}

void ContextMoments::validate(int p) const {
    if (strategy == Strategy::monte_carlo && n_ctx < 256)
        throw config_error("monte-carlo context moments need n_ctx >= 256");
    if (strategy == Strategy::analytic && p > 2)
        throw config_error("analytic context moments cover only the intercept+slope model");
}

namespace {

struct MabState {
    std::array<double, 2> d{}, r{}, rw_half{}, rw_one{}, dw_half{}, dw_one{}, delta{}, q{};
};

template <typename Record>
MabSdeTerminals mab_euler(const MabPolicy& policy_in, double m1, double m2, double j1,
                          double j2, const SdeGrid& grid, RngStream& rng, Record&& record) {
    grid.validate();
    policy_in.validate();
    if (policy_in.mode != PolicyMode::limit)
        throw config_error("limit simulation requires a limit-mode policy");
    if (j1 < 1.0 || j2 < 1.0) throw config_error("fisher information must be >= 1");

    MabPolicy policy = policy_in;
    policy.limit_d_floor = grid.dt();

    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    const std::array<double, 2> m{m1, m2};
    const std::array<double, 2> j{j1, j2};
    std::array<RngStream, 2> arm_rng{rng.substream(1), rng.substream(2)};

    MabState s;
    record(0, 0.0, s);
    for (int i = 0; i < grid.n_steps; ++i) {
        double psi2;
        if (i == 0) {
            psi2 = 0.5;
        } else {
            MabPolicyState ps;
            ps.d1 = s.d[0];
            ps.d2 = s.d[1];
            ps.r1 = s.r[0];
            ps.r2 = s.r[1];
            ps.t_over_T = static_cast<double>(i) * dt;
            psi2 = prob_arm2(policy, ps);
        }
        const std::array<double, 2> psi{1.0 - psi2, psi2};
        for (int k = 0; k < 2; ++k) {
            const double sqpsi = std::sqrt(psi[k]);
            const double z = arm_rng[k].normal();
            const double dWe = m[k] * sqpsi * dt + sqdt * z;
            s.r[k] += sqpsi * dWe;
            s.rw_half[k] += dWe;
            s.rw_one[k] += dWe / sqpsi;
            s.d[k] += psi[k] * dt;
            s.dw_half[k] += sqpsi * dt;
            s.dw_one[k] += dt;
            if (j[k] > 1.0) {
                const double zp = arm_rng[k].normal();
                const double dWl =
                    m[k] * j[k] * sqpsi * dt + sqdt * (z + std::sqrt(j[k] - 1.0) * zp);
                s.delta[k] += sqpsi * dWl;
                s.q[k] += j[k] * psi[k] * dt;
            } else {
                s.delta[k] = s.r[k];
                s.q[k] = s.d[k];
            }
        }
        record(i + 1, static_cast<double>(i + 1) * dt, s);
    }

    MabSdeTerminals out;
    out.d = s.d;
    out.r = s.r;
    out.rw_half = s.rw_half;
    out.rw_one = s.rw_one;
    out.dw_half = s.dw_half;
    out.dw_one = s.dw_one;
    out.delta = s.delta;
    out.q = s.q;
    return out;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& A, int& clamp_events) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw numeric_error("matrix square root failed");
    Eigen::VectorXd vals = es.eigenvalues();
    for (int i = 0; i < vals.size(); ++i) {
        if (vals(i) < 0.0) {
            if (vals(i) < -1e-8) throw numeric_error("matrix square root failed");
            vals(i) = 0.0;
            ++clamp_events;
        }
    }
    return es.eigenvectors() * vals.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

struct CmabState {
    std::array<Eigen::MatrixXd, 2> S, S_half, S_one;
    std::array<Eigen::VectorXd, 2> C, C_half;
    Eigen::MatrixXd xx_integral;
};

struct StepMoments {
    std::array<Eigen::MatrixXd, 2> G, G_half;
    Eigen::MatrixXd E;
};

template <typename Record>
CmabSdeTerminals cmab_euler(const CmabPolicy& policy, const Eigen::VectorXd& b1,
                            const Eigen::VectorXd& b2, const ContextMoments& moments,
                            const SdeGrid& grid, RngStream& rng, Record&& record) {
    grid.validate();
    policy.validate();
    if (policy.mode != PolicyMode::limit)
        throw config_error("limit simulation requires a limit-mode policy");
    const int p = static_cast<int>(b1.size());
    if (b2.size() != p || p < 1) throw config_error("drift vectors must share the context dimension");
    moments.validate(p);

    const double dt = grid.dt();
    const double sqdt = std::sqrt(dt);
    std::array<RngStream, 2> arm_rng{rng.substream(1), rng.substream(2)};
    RngStream ctx_rng = rng.substream(3);

    std::vector<double> nodes, weights;
    if (moments.strategy == ContextMoments::Strategy::analytic && p == 2)
        gauss_hermite_normal(64, nodes, weights);

    CmabState s;
    for (int k = 0; k < 2; ++k) {
        s.S[k] = Eigen::MatrixXd::Zero(p, p);
        s.S_half[k] = Eigen::MatrixXd::Zero(p, p);
        s.S_one[k] = Eigen::MatrixXd::Zero(p, p);
        s.C[k] = Eigen::VectorXd::Zero(p);
        s.C_half[k] = Eigen::VectorXd::Zero(p);
    }
    s.xx_integral = Eigen::MatrixXd::Zero(p, p);
    int clamp_events = 0;
    const std::array<Eigen::VectorXd, 2> b{b1, b2};

    record(0, 0.0, s);
    Eigen::VectorXd x(p);
    for (int i = 0; i < grid.n_steps; ++i) {
        StepMoments mom;
        for (int k = 0; k < 2; ++k) {
            mom.G[k] = Eigen::MatrixXd::Zero(p, p);
            mom.G_half[k] = Eigen::MatrixXd::Zero(p, p);
        }
        mom.E = Eigen::MatrixXd::Zero(p, p);

        const bool first = (i == 0);
        const PreparedCmabPolicy* prepared = nullptr;
        PreparedCmabPolicy prepared_storage =
            first ? PreparedCmabPolicy(policy, Eigen::MatrixXd::Identity(p, p),
                                       Eigen::MatrixXd::Identity(p, p),
                                       Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p))
                  : PreparedCmabPolicy(policy, s.S[0], s.S[1], s.C[0], s.C[1]);
        prepared = &prepared_storage;

        auto accumulate = [&](const Eigen::VectorXd& xi, double w) {
            const double psi2 = first ? 0.5 : prepared->prob_arm2(xi);
            const double psi1 = 1.0 - psi2;
            const Eigen::MatrixXd xxt = xi * xi.transpose();
            mom.G[0] += (w * psi1) * xxt;
            mom.G[1] += (w * psi2) * xxt;
            mom.G_half[0] += (w * std::sqrt(psi1)) * xxt;
            mom.G_half[1] += (w * std::sqrt(psi2)) * xxt;
            mom.E += w * xxt;
        };

        if (p == 1) {
            x(0) = 1.0;
            accumulate(x, 1.0);
        } else if (moments.strategy == ContextMoments::Strategy::analytic) {
            for (std::size_t n = 0; n < nodes.size(); ++n) {
                x(0) = 1.0;
                x(1) = nodes[n];
                accumulate(x, weights[n]);
            }
        } else {
            const double w = 1.0 / static_cast<double>(moments.n_ctx);
            for (int n = 0; n < moments.n_ctx; ++n) {
                x(0) = 1.0;
                for (int q = 1; q < p; ++q) x(q) = ctx_rng.normal();
                accumulate(x, w);
            }
        }

        const Eigen::MatrixXd sqrtE = psd_sqrt(mom.E, clamp_events);
        for (int k = 0; k < 2; ++k) {
            const Eigen::MatrixXd sqrtG = psd_sqrt(mom.G[k], clamp_events);
            Eigen::VectorXd z(p);
            for (int q = 0; q < p; ++q) z(q) = arm_rng[k].normal();
            const Eigen::VectorXd dB = sqdt * z;
            // Exact per-process moments: drift E[psi^{1-r} X X'] b_k and
            // diffusion sqrt(E[psi^{1-2r} X X']), with the arm's Gaussian
            // shared across its processes. In particular the half-weighted
            // score drifts by (dS_half/du) b_k, which is what cancels a
            // common drift in the AW contrast.
            s.C[k] += mom.G[k] * b[k] * dt + sqrtG * dB;
            s.C_half[k] += mom.G_half[k] * b[k] * dt + sqrtE * dB;
            s.S[k] += mom.G[k] * dt;
            s.S_half[k] += mom.G_half[k] * dt;
            s.S_one[k] += mom.E * dt;
        }
        s.xx_integral += mom.E * dt;
        record(i + 1, static_cast<double>(i + 1) * dt, s);
    }

    CmabSdeTerminals out;
    out.S = s.S;
    out.S_half = s.S_half;
    out.S_one = s.S_one;
    out.C = s.C;
    out.C_half = s.C_half;
    out.xx_integral = s.xx_integral;
    out.clamp_events = clamp_events;
    return out;
}

}  // namespace

MabSdeTerminals simulate_mab_limit_terminals(const MabPolicy& policy, double m1, double m2,
                                             double j1, double j2, const SdeGrid& grid,
                                             RngStream& rng) {
    return mab_euler(policy, m1, m2, j1, j2, grid, rng, [](int, double, const MabState&) {});
}

MabSdePath simulate_mab_limit(const MabPolicy& policy, double m1, double m2, double j1,
                              double j2, const SdeGrid& grid, RngStream& rng) {
    MabSdePath path;
    path.n_steps = grid.n_steps;
    path.m1 = m1;
    path.m2 = m2;
    path.j1 = j1;
    path.j2 = j2;
    auto record = [&](int, double u, const MabState& s) {
        path.u.push_back(u);
        for (int k = 0; k < 2; ++k) {
            path.d[k].push_back(s.d[k]);
            path.r[k].push_back(s.r[k]);
            path.rw_half[k].push_back(s.rw_half[k]);
            path.rw_one[k].push_back(s.rw_one[k]);
            path.dw_half[k].push_back(s.dw_half[k]);
            path.dw_one[k].push_back(s.dw_one[k]);
            path.delta[k].push_back(s.delta[k]);
            path.q[k].push_back(s.q[k]);
        }
    };
    path.terminals = mab_euler(policy, m1, m2, j1, j2, grid, rng, record);
    return path;
}

CmabSdeTerminals simulate_cmab_limit_terminals(const CmabPolicy& policy,
                                               const Eigen::VectorXd& b1,
                                               const Eigen::VectorXd& b2,
                                               const ContextMoments& moments,
                                               const SdeGrid& grid, RngStream& rng) {
    return cmab_euler(policy, b1, b2, moments, grid, rng,
                      [](int, double, const CmabState&) {});
}

CmabSdePath simulate_cmab_limit(const CmabPolicy& policy, const Eigen::VectorXd& b1,
                                const Eigen::VectorXd& b2, const ContextMoments& moments,
                                const SdeGrid& grid, RngStream& rng) {
    CmabSdePath path;
    path.n_steps = grid.n_steps;
    path.p = static_cast<int>(b1.size());
    auto record = [&](int, double u, const CmabState& s) {
        path.u.push_back(u);
        for (int k = 0; k < 2; ++k) {
            for (int i = 0; i < s.S[k].rows(); ++i)
                for (int j = 0; j < s.S[k].cols(); ++j) {
                    path.S[k].push_back(s.S[k](i, j));
                    path.S_half[k].push_back(s.S_half[k](i, j));
                }
            for (int i = 0; i < s.C[k].size(); ++i) {
                path.C[k].push_back(s.C[k](i));
                path.C_half[k].push_back(s.C_half[k](i));
            }
        }
    };
    path.terminals = cmab_euler(policy, b1, b2, moments, grid, rng, record);
    return path;
}

double np_oracle_one_arm(const MabSdeTerminals& t, double m2_bar) {
    return m2_bar * t.r[1] - 0.5 * m2_bar * m2_bar * t.d[1];
}

double np_oracle_two_sample(const MabSdeTerminals& t, double m_bar, double delta_bar) {
    return delta_bar * (t.r[1] - t.r[0]) - 0.5 * delta_bar * delta_bar +
           m_bar * delta_bar * (t.d[0] - t.d[1]);
}

void gauss_hermite_normal(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    // Golub-Welsch on the probabilists' Hermite recurrence: Jacobi matrix has
    // zero diagonal and off-diagonal sqrt(k); eigenvalues are the nodes and
    // the squared first eigenvector components the N(0,1) weights.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = std::sqrt(static_cast<double>(k));
        J(k - 1, k) = off;
        J(k, k - 1) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success) throw numeric_error("gauss-hermite rule failed");
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        weights[i] = v * v;
    }
}

}  // namespace bandit
