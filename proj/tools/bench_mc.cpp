// Compares the serial reference replication loop against the OpenMP loop on a
// fixed plan and verifies they produce identical samples.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "bandit/mc.hpp"

using namespace bandit;

namespace {

McPlan bench_plan(bool limit, std::int64_t reps) {
    McPlan plan;
    plan.reps = reps;
    plan.generator = limit ? McPlan::Generator::limit : McPlan::Generator::finite;
    plan.horizon = 200;
    plan.grid.n_steps = 100;
    plan.mab_policy = MabPolicy::limit_policy(MabPolicyKind::ti_thompson);
    plan.statistics = {StatisticSpec::parse("ts-t"), StatisticSpec::parse("ts-aw"),
                       StatisticSpec::parse("ts-ipw")};
    return plan;
}

double run_case(const char* label, const McPlan& plan) {
    using clock = std::chrono::steady_clock;
    const DriftPoint drift = null_drift(plan);

    const auto t0 = clock::now();
    const SampleMatrix serial = run_replications_serial(plan, plan.statistics, drift);
    const auto t1 = clock::now();
    const SampleMatrix parallel = run_replications(plan, plan.statistics, drift);
    const auto t2 = clock::now();

    double max_diff = 0.0;
    for (std::size_t i = 0; i < serial.values.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(serial.values[i] - parallel.values[i]));

    const double serial_s = std::chrono::duration<double>(t1 - t0).count();
    const double parallel_s = std::chrono::duration<double>(t2 - t1).count();
    std::printf("%-18s reps=%-7lld serial %8.3fs  openmp %8.3fs  speedup %5.2fx  max|diff| %g\n",
                label, static_cast<long long>(plan.reps), serial_s, parallel_s,
                serial_s / parallel_s, max_diff);
    return max_diff;
}

}  // namespace

int main(int argc, char** argv) {
    std::int64_t reps = 20000;
    if (argc > 1) reps = std::stoll(argv[1]);
    std::printf("threads available: %d\n", omp_get_max_threads());
    double worst = 0.0;
    worst = std::max(worst, run_case("finite T=200", bench_plan(false, reps)));
    worst = std::max(worst, run_case("limit grid=100", bench_plan(true, reps)));
    if (worst != 0.0) {
        std::printf("FAIL: serial and parallel runs differ\n");
        return 1;
    }
    std::printf("serial and parallel samples identical\n");
    return 0;
}
