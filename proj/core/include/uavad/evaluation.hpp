#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uavad/ingest.hpp"
#include "uavad/thresholding.hpp"

namespace uavad {

// Evaluation subset of one flight: every anomalous frame plus an equal
// number of uniformly sampled non-anomalous frames. A sample is accepted
// only if its per-feature five-number summary stays close to the full
// non-anomalous population (within 15% of the population IQR per
// statistic); otherwise it is redrawn, up to 20 attempts.
struct BalancedSample {
    std::vector<std::size_t> anomalous;
    std::vector<std::size_t> sampled_normal;
    std::uint64_t seed = 0;
    int attempts = 0;  // draws consumed until acceptance
};

BalancedSample balanced_sample(const FrameSeries& frames, std::uint64_t seed);

struct MetricsReport {
    std::string variant;  // "st", "dt" or "dt+dw"
    std::string flight_id;
    int run = 0;
    std::uint64_t seed = 0;

    long tp = 0, fp = 0, tn = 0, fn = 0;
    std::optional<double> precision;
    std::optional<double> recall;
    double accuracy = 0.0;
    // Seconds from the first true anomalous frame to the first correctly
    // flagged one, over the full unsampled trace; absent when the flight
    // has no anomalous frame or none was caught.
    std::optional<double> detection_delay_s;
};

// Confusion counts come from the balanced subset; the delay is computed
// on the complete trace.
MetricsReport compute_metrics(const DetectionTrace& trace, std::span<const std::uint8_t> labels,
                              const BalancedSample& sample);

struct MetricAggregate {
    std::optional<double> mean;
    std::optional<double> stddev;  // denominator n
    std::size_t count = 0;
};

struct AggregateRow {
    std::string variant;
    MetricAggregate precision, recall, accuracy, delay_s;
    std::size_t delay_undefined = 0;  // reports whose delay was absent
    std::size_t reports = 0;
};

struct AggregateReport {
    std::vector<AggregateRow> rows;  // fixed order: st, dt, dt+dw
};

AggregateReport aggregate_runs(std::span<const MetricsReport> reports);

// Fixed presentation order of the threshold variants.
inline constexpr const char* kVariantStatic = "st";
inline constexpr const char* kVariantDynamic = "dt";
inline constexpr const char* kVariantDynamicWeighted = "dt+dw";

}  // namespace uavad
