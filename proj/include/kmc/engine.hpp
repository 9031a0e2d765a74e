#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "kmc/estimators.hpp"

namespace kmc {

enum class Quantity { value, ibp, bel, density_dz, density_dx };

std::string to_string(Quantity q);
Quantity quantity_from_string(const std::string& s);

struct RunConfig {
    Model model;
    TestFunction test_function;
    Quantity quantity = Quantity::value;
    JumpLaw sampler = JumpLaw::exponential(1.0);
    long long samples = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    double z_point = std::numeric_limits<double>::quiet_NaN(); // density quantities
    bool collect_mean_abs_dev = false; // runs a second deterministic pass
};

struct EstimateReport {
    double mean = 0.0;
    double sample_variance = 0.0;
    double std_error = 0.0;
    double ci95_halfwidth = 0.0;
    double mean_abs_dev = std::numeric_limits<double>::quiet_NaN();
    long long samples = 0;
    double runtime_seconds = 0.0;
    std::string sampler_spec;
    std::uint64_t seed = 0;
};

// Streaming mean/variance accumulator with an exact merge, so any grouping of
// disjoint chunks reproduces the single-pass result.
struct Welford {
    long long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    void merge(const Welford& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const double n1 = static_cast<double>(count), n2 = static_cast<double>(o.count);
        const double n = n1 + n2;
        mean += d * n2 / n;
        m2 += o.m2 + d * d * n1 * n2 / n;
        count += o.count;
    }
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

// Evaluate one replication of the configured quantity.
double replicate(const RunConfig& cfg, const Normalization& norm, std::uint64_t replication);

// Monte Carlo driver. Replications are keyed by (seed, replication index) and
// accumulated in fixed-size blocks merged in index order, so the report is
// bit-identical for any worker count.
EstimateReport run(const RunConfig& cfg);

struct PilotResult {
    JumpLaw chosen = JumpLaw::exponential(1.0);
    std::vector<std::pair<std::string, double>> variances; // spec -> pilot variance
    std::string note;
};

// Variance-minimizing sampler selection over a grid; ties keep grid order.
PilotResult pilot_tune(const RunConfig& base, const std::vector<JumpLaw>& grid,
                       long long pilot_samples);

} // namespace kmc
