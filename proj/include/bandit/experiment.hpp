#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bandit/rng.hpp"

namespace bandit {

// Closed registry of unit-variance innovation laws. `three_point` puts mass
// 1/3 on each of {-sqrt(3/2), 0, +sqrt(3/2)}; it exists so that short-horizon
// runs have an enumerable path space for validation.
enum class Innovation { gaussian, uniform, three_point };

struct InnovationInfo {
    const char* name;
    double mean;
    double variance;
};

const InnovationInfo& innovation_info(Innovation kind);
Innovation innovation_from_name(const std::string& name);
double draw_innovation(Innovation kind, RngStream& rng);

// Whether a policy runs in its finite-sample form (pre-limit hyperparameter
// sequences at a fixed horizon) or as the limiting sampling scheme.
enum class PolicyMode { finite_sample, limit };

// Whether rewards are centered at the known global parameter (mu or x'beta)
// before entering the accumulated statistics, or left raw. One-arm statistics
// require known centering; two-sample statistics are valid under either.
enum class Centering { known_global, raw };

struct ExperimentConfig {
    std::int64_t horizon = 200;  // T
    int context_dim = 1;         // p (1 for the non-contextual problem)

    // Local drift parameters: scalars m1,m2 when p==1 and non-contextual,
    // p-vectors b1,b2 otherwise.
    std::vector<double> local1{0.0};
    std::vector<double> local2{0.0};

    // Global parameter: mu (size 1) or beta (size p).
    std::vector<double> global_param{0.0};

    Innovation innovation = Innovation::gaussian;
    std::uint64_t seed = 0;
    std::uint64_t replication_index = 0;

    bool contextual = false;

    // Throws config_error on violated invariants (horizon too small for the
    // forced initial draws, mismatched vector sizes).
    void validate() const;

    RngStream stream() const { return RngStream(seed, replication_index); }
};

}  // namespace bandit
