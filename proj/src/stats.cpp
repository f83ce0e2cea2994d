#include "bandit/stats.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>

#include "bandit/errors.hpp"

namespace bandit {

namespace {

void require_known(const MabTerminals& s, const char* what) {
    if (s.centering != Centering::known_global)
        throw config_error(std::string(what) + " requires known-mean centering");
}

void require_limit(StatSource source) {
    if (source != StatSource::limit)
        throw numeric_error("oracle defined in limit experiment");
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& S) {
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw numeric_error("uninitialized design matrix");
    return llt.solve(Eigen::MatrixXd::Identity(S.rows(), S.cols()));
}

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

MabTerminals mab_terminals(const Trajectory& traj) {
    if (traj.contextual) throw config_error("trajectory is contextual");
    MabTerminals s;
    s.d = traj.d;
    s.r = traj.r;
    s.rw_half = traj.rw_half;
    s.rw_one = traj.rw_one;
    s.dw_half = traj.dw_half;
    s.dw_one = traj.dw_one;
    s.source = StatSource::finite;
    s.centering = traj.centering;
    return s;
}

MabTerminals mab_terminals(const MabSdeTerminals& t) {
    MabTerminals s;
    s.d = t.d;
    s.r = t.r;
    s.rw_half = t.rw_half;
    s.rw_one = t.rw_one;
    s.dw_half = t.dw_half;
    s.dw_one = t.dw_one;
    s.source = StatSource::limit;
    s.centering = Centering::known_global;
    return s;
}

CmabTerminals cmab_terminals(const Trajectory& traj) {
    if (!traj.contextual) throw config_error("trajectory is not contextual");
    CmabTerminals s;
    s.S = traj.S;
    s.S_half = traj.S_half;
    s.C = traj.C;
    s.C_half = traj.C_half;
    s.xx = traj.xx_total;
    s.freq_arm2 = traj.d[1];
    s.source = StatSource::finite;
    s.centering = traj.centering;
    return s;
}

CmabTerminals cmab_terminals(const CmabSdeTerminals& t) {
    CmabTerminals s;
    s.S = t.S;
    s.S_half = t.S_half;
    s.C = t.C;
    s.C_half = t.C_half;
    s.xx = t.xx_integral;
    s.freq_arm2 = t.S[1](0, 0);
    s.source = StatSource::limit;
    s.centering = Centering::known_global;
    return s;
}

TestResult one_arm_t(const MabTerminals& s) {
    require_known(s, "one-arm statistic");
    if (!(s.d[1] > 0.0)) throw numeric_error("arm never pulled");
    return {"t", s.r[1] / std::sqrt(s.d[1]), s.source};
}

TestResult one_arm_aw(const MabTerminals& s) {
    require_known(s, "one-arm statistic");
    return {"aw", s.rw_half[1], s.source};
}

TestResult one_arm_ipw(const MabTerminals& s) {
    require_known(s, "one-arm statistic");
    return {"ipw", s.rw_one[1], s.source};
}

namespace {
double ts_df_value(const std::array<double, 2>& rw, const std::array<double, 2>& dw) {
    if (!(dw[0] > 0.0 && dw[1] > 0.0)) throw numeric_error("arm never pulled");
    return rw[1] / dw[1] - rw[0] / dw[0];
}
}  // namespace

TestResult ts_df(const MabTerminals& s, double r) {
    double value;
    if (r == 0.0) {
        value = ts_df_value(s.r, s.d);
    } else if (r == 0.5) {
        value = ts_df_value(s.rw_half, s.dw_half);
    } else if (r == 1.0) {
        value = ts_df_value(s.rw_one, s.dw_one);
    } else {
        throw config_error("terminal statistics precompute r in {0, 1/2, 1} only");
    }
    return {"ts-df:" + fmt_num(r), value, s.source};
}

TestResult ts_df(const Trajectory& traj, double r) {
    if (traj.contextual) throw config_error("trajectory is contextual");
    if (traj.rounds.empty()) throw config_error("per-round records were not kept");
    const double mu = traj.global_param.empty() ? 0.0 : traj.global_param[0];
    std::array<double, 2> rw{0.0, 0.0}, dw{0.0, 0.0};
    for (const auto& row : traj.rounds) {
        const double w = std::pow(row.propensity, -r);
        const double centered =
            (traj.centering == Centering::known_global) ? row.reward - mu : row.reward;
        rw[row.arm - 1] += w * centered;
        dw[row.arm - 1] += w;
    }
    const double T = static_cast<double>(traj.horizon);
    for (int k = 0; k < 2; ++k) {
        rw[k] /= std::sqrt(T);
        dw[k] /= T;
    }
    return {"ts-df:" + fmt_num(r), ts_df_value(rw, dw), StatSource::finite};
}

TestResult ts_t(const MabTerminals& s) {
    if (!(s.d[0] > 0.0 && s.d[1] > 0.0)) throw numeric_error("arm never pulled");
    const double value =
        ts_df_value(s.r, s.d) / std::sqrt(1.0 / s.d[0] + 1.0 / s.d[1]);
    return {"ts-t", value, s.source};
}

TestResult ts_aw(const MabTerminals& s) {
    if (!(s.dw_half[0] > 0.0 && s.dw_half[1] > 0.0)) throw numeric_error("arm never pulled");
    const double denom = std::sqrt(1.0 / (s.dw_half[1] * s.dw_half[1]) +
                                   1.0 / (s.dw_half[0] * s.dw_half[0]));
    return {"ts-aw", ts_df_value(s.rw_half, s.dw_half) / denom, s.source};
}

TestResult ts_ipw(const MabTerminals& s) {
    // Self-normalized form; the weighted frequencies equal 1 identically in
    // the limit experiment, and only in expectation at finite horizons.
    return {"ts-ipw", ts_df_value(s.rw_one, s.dw_one), s.source};
}

TestResult np_one_arm(const MabTerminals& s, double m2_bar) {
    require_limit(s.source);
    return {"np:" + fmt_num(m2_bar), m2_bar * s.r[1] - 0.5 * m2_bar * m2_bar * s.d[1],
            s.source};
}

TestResult np_two_sample(const MabTerminals& s, double m_bar, double delta_bar) {
    require_limit(s.source);
    const double value = delta_bar * (s.r[1] - s.r[0]) - 0.5 * delta_bar * delta_bar +
                         m_bar * delta_bar * (s.d[0] - s.d[1]);
    return {"ts-np:" + fmt_num(m_bar) + "," + fmt_num(delta_bar), value, s.source};
}

TestResult ts_wald(const CmabTerminals& s, const Eigen::VectorXd& G) {
    const Eigen::MatrixXd S1i = spd_inverse(s.S[0]);
    const Eigen::MatrixXd S2i = spd_inverse(s.S[1]);
    const Eigen::VectorXd zeta = S2i * s.C[1] - S1i * s.C[0];
    const double var = G.dot((S1i + S2i) * G);
    if (!(var > 0.0)) throw numeric_error("ill-conditioned state");
    return {"ts-wald", G.dot(zeta) / std::sqrt(var), s.source};
}

TestResult ts_aw_wald(const CmabTerminals& s, const Eigen::VectorXd& G) {
    const Eigen::MatrixXd M1i = spd_inverse(s.S_half[0]);
    const Eigen::MatrixXd M2i = spd_inverse(s.S_half[1]);
    const Eigen::VectorXd zeta = M2i * s.C_half[1] - M1i * s.C_half[0];
    const double var = G.dot((M2i * s.xx * M2i + M1i * s.xx * M1i) * G);
    if (!(var > 0.0)) throw numeric_error("ill-conditioned state");
    return {"ts-aw-wald", G.dot(zeta) / std::sqrt(var), s.source};
}

StatisticSpec StatisticSpec::parse(const std::string& text) {
    StatisticSpec spec;
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string args = (colon == std::string::npos) ? "" : text.substr(colon + 1);
    auto parse_list = [&](const std::string& str) {
        std::vector<double> out;
        std::size_t pos = 0;
        while (pos <= str.size()) {
            const auto comma = str.find(',', pos);
            const std::string tok =
                str.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (tok.empty()) throw config_error("bad statistic arguments '" + str + "'");
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw config_error("bad statistic arguments '" + str + "'");
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return out;
    };
    if (head == "t") {
        spec.kind = Kind::one_arm_t;
    } else if (head == "aw") {
        spec.kind = Kind::one_arm_aw;
    } else if (head == "ipw") {
        spec.kind = Kind::one_arm_ipw;
    } else if (head == "ts-t") {
        spec.kind = Kind::ts_t;
    } else if (head == "ts-aw") {
        spec.kind = Kind::ts_aw;
    } else if (head == "ts-ipw") {
        spec.kind = Kind::ts_ipw;
    } else if (head == "ts-df") {
        spec.kind = Kind::ts_df;
        const auto v = parse_list(args);
        if (v.size() != 1) throw config_error("ts-df takes one weight exponent");
        spec.r = v[0];
    } else if (head == "ts-wald" || head == "ts-aw-wald") {
        spec.kind = (head == "ts-wald") ? Kind::ts_wald : Kind::ts_aw_wald;
        const auto v = parse_list(args);
        if (v.empty()) throw config_error(head + " needs a contrast direction");
        spec.G = v;
    } else if (head == "np") {
        spec.kind = Kind::np;
        const auto v = parse_list(args);
        if (v.size() != 1) throw config_error("np takes one drift argument");
        spec.m2_bar = v[0];
    } else if (head == "ts-np") {
        spec.kind = Kind::ts_np;
        const auto v = parse_list(args);
        if (v.size() != 2) throw config_error("ts-np takes (m, delta)");
        spec.m_bar = v[0];
        spec.delta_bar = v[1];
    } else if (head == "freq") {
        spec.kind = Kind::freq;
    } else {
        throw config_error("unknown statistic '" + text + "'");
    }
    return spec;
}

std::string StatisticSpec::name() const {
    switch (kind) {
        case Kind::one_arm_t: return "t";
        case Kind::one_arm_aw: return "aw";
        case Kind::one_arm_ipw: return "ipw";
        case Kind::ts_t: return "ts-t";
        case Kind::ts_aw: return "ts-aw";
        case Kind::ts_ipw: return "ts-ipw";
        case Kind::ts_df: return "ts-df:" + fmt_num(r);
        case Kind::ts_wald:
        case Kind::ts_aw_wald: {
            std::string out = (kind == Kind::ts_wald) ? "ts-wald:" : "ts-aw-wald:";
            for (std::size_t i = 0; i < G.size(); ++i)
                out += (i ? "," : "") + fmt_num(G[i]);
            return out;
        }
        case Kind::np: return "np:" + fmt_num(m2_bar);
        case Kind::ts_np: return "ts-np:" + fmt_num(m_bar) + "," + fmt_num(delta_bar);
        case Kind::freq: return "freq";
    }
    return "?";
}

double evaluate(const StatisticSpec& spec, const MabTerminals& s) {
    switch (spec.kind) {
        case StatisticSpec::Kind::one_arm_t: return one_arm_t(s).value;
        case StatisticSpec::Kind::one_arm_aw: return one_arm_aw(s).value;
        case StatisticSpec::Kind::one_arm_ipw: return one_arm_ipw(s).value;
        case StatisticSpec::Kind::ts_t: return ts_t(s).value;
        case StatisticSpec::Kind::ts_aw: return ts_aw(s).value;
        case StatisticSpec::Kind::ts_ipw: return ts_ipw(s).value;
        case StatisticSpec::Kind::ts_df: return ts_df(s, spec.r).value;
        case StatisticSpec::Kind::np: return np_one_arm(s, spec.m2_bar).value;
        case StatisticSpec::Kind::ts_np:
            return np_two_sample(s, spec.m_bar, spec.delta_bar).value;
        case StatisticSpec::Kind::freq: return s.d[1];
        case StatisticSpec::Kind::ts_wald:
        case StatisticSpec::Kind::ts_aw_wald:
            throw config_error("contextual statistic on a non-contextual run");
    }
    throw config_error("unknown statistic kind");
}

double evaluate(const StatisticSpec& spec, const CmabTerminals& s) {
    switch (spec.kind) {
        case StatisticSpec::Kind::ts_wald:
        case StatisticSpec::Kind::ts_aw_wald: {
            if (static_cast<int>(spec.G.size()) != s.S[0].rows())
                throw config_error("contrast direction has the wrong dimension");
            const Eigen::Map<const Eigen::VectorXd> G(spec.G.data(),
                                                      static_cast<int>(spec.G.size()));
            return (spec.kind == StatisticSpec::Kind::ts_wald) ? ts_wald(s, G).value
                                                               : ts_aw_wald(s, G).value;
        }
        case StatisticSpec::Kind::freq:
            return s.freq_arm2;
        default:
            throw config_error("statistic '" + spec.name() + "' is not contextual");
    }
}

}  // namespace bandit
