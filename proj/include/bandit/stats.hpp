#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "bandit/experiment.hpp"
#include "bandit/sim_finite.hpp"
#include "bandit/sim_limit.hpp"

namespace bandit {

enum class StatSource { finite, limit };

// Common denominator of a finite-sample Trajectory and a limit-experiment
// terminal snapshot: every registered statistic is one formula on these.
struct MabTerminals {
    std::array<double, 2> d{}, r{};
    std::array<double, 2> rw_half{}, rw_one{};
    std::array<double, 2> dw_half{}, dw_one{};
    StatSource source = StatSource::finite;
    Centering centering = Centering::known_global;
};

struct CmabTerminals {
    std::array<Eigen::MatrixXd, 2> S, S_half;
    std::array<Eigen::VectorXd, 2> C, C_half;
    Eigen::MatrixXd xx;  // second-moment plug-in: (1/T) sum x x' or its integral
    double freq_arm2 = 0.0;
    StatSource source = StatSource::finite;
    Centering centering = Centering::known_global;
};

MabTerminals mab_terminals(const Trajectory& traj);
MabTerminals mab_terminals(const MabSdeTerminals& t);
CmabTerminals cmab_terminals(const Trajectory& traj);
CmabTerminals cmab_terminals(const CmabSdeTerminals& t);

struct TestResult {
    std::string name;
    double value = 0.0;
    StatSource source = StatSource::finite;
};

// One-arm statistics (evaluate arm 2 against the known baseline; refuse raw
// centering).
TestResult one_arm_t(const MabTerminals& s);
TestResult one_arm_aw(const MabTerminals& s);
TestResult one_arm_ipw(const MabTerminals& s);

// Distribution-free two-sample family and its standardized members.
TestResult ts_df(const MabTerminals& s, double r);
TestResult ts_df(const Trajectory& traj, double r);  // arbitrary r from stored rounds
TestResult ts_t(const MabTerminals& s);
TestResult ts_aw(const MabTerminals& s);
TestResult ts_ipw(const MabTerminals& s);

// Oracle statistics, defined in the limit experiment.
TestResult np_one_arm(const MabTerminals& s, double m2_bar);
TestResult np_two_sample(const MabTerminals& s, double m_bar, double delta_bar);

// Contextual Wald statistics along the contrast direction G.
TestResult ts_wald(const CmabTerminals& s, const Eigen::VectorXd& G);
TestResult ts_aw_wald(const CmabTerminals& s, const Eigen::VectorXd& G);

// Closed statistic registry addressable by CLI names: t, aw, ipw, ts-t,
// ts-aw, ts-ipw, ts-df:<r>, ts-wald:<g,...>, ts-aw-wald:<g,...>, np:<m2>,
// ts-np:<m,delta>, plus the arm-2 frequency diagnostic `freq`.
struct StatisticSpec {
    enum class Kind {
        one_arm_t,
        one_arm_aw,
        one_arm_ipw,
        ts_t,
        ts_aw,
        ts_ipw,
        ts_df,
        ts_wald,
        ts_aw_wald,
        np,
        ts_np,
        freq,
    };
    Kind kind = Kind::ts_t;
    double r = 0.0;                    // ts_df
    double m2_bar = 0.0;               // np
    double m_bar = 0.0, delta_bar = 0.0;  // ts_np
    std::vector<double> G;             // wald direction

    static StatisticSpec parse(const std::string& text);
    std::string name() const;
    bool contextual() const { return kind == Kind::ts_wald || kind == Kind::ts_aw_wald; }
    bool oracle() const { return kind == Kind::np || kind == Kind::ts_np; }
    // Statistics whose null law is standard normal, where the analytic
    // critical value applies.
    bool analytic_normal_null() const {
        return kind == Kind::one_arm_aw || kind == Kind::ts_aw || kind == Kind::ts_aw_wald;
    }
};

double evaluate(const StatisticSpec& spec, const MabTerminals& s);
double evaluate(const StatisticSpec& spec, const CmabTerminals& s);

}  // namespace bandit
