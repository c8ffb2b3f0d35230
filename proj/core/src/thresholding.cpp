#include "uavad/thresholding.hpp"

#include <cmath>
#include <string>

#include "uavad/errors.hpp"

namespace uavad {

const char* to_string(ThresholdMode m) {
    return m == ThresholdMode::Static ? "static" : "dynamic";
}

ThresholdMode threshold_mode_from_string(std::string_view s) {
    if (s == "static") return ThresholdMode::Static;
    if (s == "dynamic") return ThresholdMode::Dynamic;
    throw DataError("unknown threshold mode: " + std::string(s));
}

double static_threshold(const TrainLossStats& stats) { return stats.mean + stats.stddev; }

ThresholdEngine::ThresholdEngine(const ThresholdConfig& cfg, double static_level)
    : cfg_(cfg), level_(static_level) {
    if (cfg.window < 2) throw DataError("threshold window must be at least 2");
    if (cfg.weight_static < 0.0 || cfg.weight_rolling < 0.0)
        throw DataError("threshold weights must be non-negative");
}

double ThresholdEngine::next_threshold() const {
    if (cfg_.mode == ThresholdMode::Static) return level_;
    if (window_.empty()) return level_;

    const double n = static_cast<double>(window_.size());
    double mean = 0.0;
    for (double l : window_) mean += l;
    mean /= n;
    double var = 0.0;
    for (double l : window_) var += (l - mean) * (l - mean);
    const double sd = std::sqrt(var / n);
    return cfg_.weight_static * level_ + cfg_.weight_rolling * (mean + sd);
}

void ThresholdEngine::push(double loss, bool flagged) {
    if (cfg_.exclude_flagged && flagged) return;
    window_.push_back(loss);
    while (window_.size() > static_cast<std::size_t>(cfg_.window)) window_.pop_front();
}

void ThresholdEngine::reset() { window_.clear(); }

DetectionTrace classify_flight(std::span<const double> losses,
                               std::span<const std::int64_t> timestamps, ThresholdEngine& engine) {
    if (losses.size() != timestamps.size())
        throw DataError("classify_flight: losses and timestamps differ in length");
    engine.reset();

    DetectionTrace trace;
    trace.timestamps.assign(timestamps.begin(), timestamps.end());
    trace.losses.assign(losses.begin(), losses.end());
    trace.thresholds.resize(losses.size());
    trace.verdicts.resize(losses.size());
    for (std::size_t n = 0; n < losses.size(); ++n) {
        if (!std::isfinite(losses[n])) throw NumericError("classify_flight: loss is not finite");
        const double threshold = engine.next_threshold();
        const bool verdict = losses[n] > threshold;
        trace.thresholds[n] = threshold;
        trace.verdicts[n] = verdict ? 1 : 0;
        engine.push(losses[n], verdict);
    }
    return trace;
}

}  // namespace uavad
