#include "bandit/experiment.hpp"

#include <cmath>

#include "bandit/errors.hpp"

namespace bandit {

namespace {
constexpr double kThreePointValue = 1.2247448713915890491;  // sqrt(3/2)
constexpr double kUniformHalfWidth = 1.7320508075688772935;  // sqrt(3)

const InnovationInfo kRegistry[] = {
    {"gaussian", 0.0, 1.0},
    {"uniform", 0.0, 1.0},
    {"three-point", 0.0, 1.0},
};
}  // namespace

const InnovationInfo& innovation_info(Innovation kind) {
    return kRegistry[static_cast<int>(kind)];
}

Innovation innovation_from_name(const std::string& name) {
    if (name == "gaussian") return Innovation::gaussian;
    if (name == "uniform") return Innovation::uniform;
    if (name == "three-point") return Innovation::three_point;
    throw config_error("unknown innovation '" + name + "'");
}

double draw_innovation(Innovation kind, RngStream& rng) {
    switch (kind) {
        case Innovation::gaussian:
            return rng.normal();
        case Innovation::uniform:
            return (2.0 * rng.uniform01() - 1.0) * kUniformHalfWidth;
        case Innovation::three_point: {
            const double u = rng.uniform01();
            if (u < 1.0 / 3.0) return -kThreePointValue;
            if (u < 2.0 / 3.0) return 0.0;
            return kThreePointValue;
        }
    }
    throw config_error("unknown innovation kind");
}

void ExperimentConfig::validate() const {
    const int p = context_dim;
    if (p < 1) throw config_error("context dimension must be positive");
    if (!contextual && p != 1) throw config_error("non-contextual experiment requires p = 1");
    const std::int64_t min_horizon = contextual ? 2 * static_cast<std::int64_t>(p) : 2;
    if (horizon < min_horizon)
        throw config_error("horizon too small for forced initialization");
    const std::size_t expect = static_cast<std::size_t>(p);
    if (local1.size() != expect || local2.size() != expect)
        throw config_error("local parameter size must equal context dimension");
    if (global_param.size() != expect)
        throw config_error("global parameter size must equal context dimension");
    const InnovationInfo& info = innovation_info(innovation);
    if (info.mean != 0.0 || info.variance != 1.0)
        throw config_error("innovation must have mean 0 and unit variance");
}

}  // namespace bandit
