#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "uavad/linalg.hpp"

namespace uavad {

// Fault taxonomy of the supported flight corpora. "none" marks a clean
// flight, which is also what routes a flight into the training split.
enum class FaultType {
    engine,
    rudder,
    elevator,
    aileron_left,
    aileron_right,
    aileron_both,
    rudder_and_aileron,
    none,
};

std::string to_string(FaultType t);
FaultType fault_type_from_string(std::string_view s);

struct Sample {
    std::int64_t t_ms = 0;  // milliseconds since flight start
    double value = 0.0;
};

struct LabelSample {
    std::int64_t t_ms = 0;
    bool anomalous = false;
};

// One flight's raw telemetry: independently sampled channels plus the
// ground-truth anomaly labels. Streams are keyed by feature name; map
// order (sorted names) is the canonical feature order everywhere else.
struct SensorStreamSet {
    std::string flight_id;
    FaultType fault_type = FaultType::none;
    std::map<std::string, std::vector<Sample>> streams;
    std::vector<LabelSample> fault_labels;
};

struct PoolingConfig {
    std::int64_t stride_ms = 100;   // grid increment
    std::int64_t max_gap_ms = 100;  // per-feature nearest-sample limit
};

// Time-aligned fixed-width frames: the unit of all downstream math.
// Rows of `frames` correspond one-to-one with `timestamps` and `labels`.
struct FrameSeries {
    std::string flight_id;
    std::vector<std::string> feature_names;
    std::vector<std::int64_t> timestamps;
    Matrix frames;  // n_frames x n_features
    std::vector<std::uint8_t> labels;

    std::size_t frame_count() const { return timestamps.size(); }
    std::size_t feature_count() const { return feature_names.size(); }
};

// Reads one stream file per feature (`<feature>.csv`, header
// `timestamp_ms,value`) plus `labels.csv` from flight_dir. Rows out of
// order are sorted; duplicate timestamps collapse to the row that appears
// last in the file. Unparseable rows fail with file and line number.
SensorStreamSet load_streams(const std::filesystem::path& flight_dir,
                             const std::string& flight_id, FaultType fault_type);

struct FeatureRejection {
    std::string feature;
    int rule = 0;  // 1 = rejected by pattern, 2 = unstable/degenerate signal
    std::string detail;
};

struct SelectionResult {
    SensorStreamSet set;
    std::vector<FeatureRejection> rejected;
};

// Drops (rule 1) features matching any reject pattern and (rule 2)
// features with fewer than min_distinct distinct values or containing
// null markers (non-finite samples). Fails if nothing survives.
SelectionResult select_features(const SensorStreamSet& set,
                                std::span<const std::string> reject_patterns,
                                int min_distinct);

// Aligns the multi-rate streams onto the stride grid: each feature takes
// its sample nearest to the grid point (ties resolve to the earlier
// sample); a frame where any feature's nearest sample is farther than
// max_gap_ms is discarded whole. Frame labels come from the nearest label
// entry, equidistant neighbours resolving to the anomalous one.
FrameSeries pool_timestamps(const SensorStreamSet& set, const PoolingConfig& cfg);

struct FlightEntry {
    std::string id;
    std::filesystem::path dir;
    FaultType fault_type = FaultType::none;

    bool is_training() const { return fault_type == FaultType::none; }
};

struct FlightManifest {
    std::vector<FlightEntry> flights;
};

// Manifest JSON: {"format_version":1,"flights":[{"id","dir","fault_type"}]}.
// Relative flight dirs resolve against the manifest's own directory.
FlightManifest load_manifest(const std::filesystem::path& manifest_path);
void save_manifest(const FlightManifest& manifest, const std::filesystem::path& manifest_path);

}  // namespace uavad
