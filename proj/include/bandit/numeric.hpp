#pragma once

#include <functional>
#include <vector>

namespace bandit {

// Standard normal CDF, absolute error below 1e-12 everywhere.
double normal_cdf(double x);

// Inverse of normal_cdf on (0,1) (Wichura's PPND16 rational approximation).
double normal_quantile(double p);

// Sorted sample with interpolated quantiles. Immutable after construction.
class EmpiricalDistribution {
public:
    EmpiricalDistribution() = default;
    explicit EmpiricalDistribution(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const std::vector<double>& values() const { return values_; }

    // Type-7 (linear order-statistic) quantile, q in (0,1).
    double quantile(double q) const;

    double min() const;
    double max() const;

private:
    std::vector<double> values_;  // ascending
};

// Kolmogorov-Smirnov sup distance between two empirical CDFs, evaluated
// exactly at the jump points of the merged sample.
double ks_distance(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

// KS distance between an empirical CDF and an analytic CDF.
double ks_distance(const EmpiricalDistribution& a, const std::function<double(double)>& cdf);

}  // namespace bandit
