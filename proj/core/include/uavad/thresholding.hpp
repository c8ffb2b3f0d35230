#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "uavad/linalg.hpp"
#include "uavad/training.hpp"

namespace uavad {

enum class ThresholdMode { Static, Dynamic };

const char* to_string(ThresholdMode m);
ThresholdMode threshold_mode_from_string(std::string_view s);

struct ThresholdConfig {
    ThresholdMode mode = ThresholdMode::Dynamic;
    double weight_static = 0.3;   // W_y, scales the training constant L
    double weight_rolling = 0.7;  // W_z, scales the rolling M + S term
    int window = 100;             // j, number of previous losses considered
    // When set, flagged losses never enter the rolling window. Off by
    // default: the plain trailing window is the faithful reading.
    bool exclude_flagged = false;
};

// Static threshold constant L = mean + std of the training losses.
double static_threshold(const TrainLossStats& stats);

// Per-flight threshold state. The window only ever holds losses of frames
// preceding the current one, so a frame's own loss never influences its
// verdict. One engine instance serves exactly one flight at a time.
class ThresholdEngine {
public:
    ThresholdEngine(const ThresholdConfig& cfg, double static_level);

    // Threshold for the upcoming frame. Static mode: always L. Dynamic
    // mode: W_y*L + W_z*(M+S) over the trailing window; while the window
    // is still empty this degenerates to L itself.
    double next_threshold() const;

    void push(double loss, bool flagged);
    void reset();

    double static_level() const { return level_; }
    const ThresholdConfig& config() const { return cfg_; }

private:
    ThresholdConfig cfg_;
    double level_;
    std::deque<double> window_;
};

struct DetectionTrace {
    std::vector<std::int64_t> timestamps;
    Vec losses;
    Vec thresholds;
    std::vector<std::uint8_t> verdicts;  // verdict = loss > threshold

    std::size_t size() const { return losses.size(); }
};

// Walks the flight in order: threshold, verdict, then push the loss.
// The engine must be fresh; it is reset on entry to keep that true.
DetectionTrace classify_flight(std::span<const double> losses,
                               std::span<const std::int64_t> timestamps, ThresholdEngine& engine);

}  // namespace uavad
