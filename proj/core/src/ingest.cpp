#include "uavad/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "uavad/errors.hpp"
#include "uavad/text.hpp"

namespace uavad {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(FaultType t) {
    switch (t) {
        case FaultType::engine: return "engine";
        case FaultType::rudder: return "rudder";
        case FaultType::elevator: return "elevator";
        case FaultType::aileron_left: return "aileron_left";
        case FaultType::aileron_right: return "aileron_right";
        case FaultType::aileron_both: return "aileron_both";
        case FaultType::rudder_and_aileron: return "rudder_and_aileron";
        case FaultType::none: return "none";
    }
    return "none";
}

FaultType fault_type_from_string(std::string_view s) {
    for (FaultType t : {FaultType::engine, FaultType::rudder, FaultType::elevator,
                        FaultType::aileron_left, FaultType::aileron_right,
                        FaultType::aileron_both, FaultType::rudder_and_aileron,
                        FaultType::none}) {
        if (to_string(t) == s) return t;
    }
    throw DataError("unknown fault type: " + std::string(s));
}

namespace {

std::vector<std::string> read_lines(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

[[noreturn]] void row_error(const fs::path& file, std::size_t line_no, const std::string& what) {
    throw DataError(file.string() + ":" + std::to_string(line_no) + ": " + what);
}

// Sort by timestamp (stable, so file order survives among equal stamps)
// then keep the last row per timestamp.
template <class T>
void sort_dedup(std::vector<T>& rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const T& a, const T& b) { return a.t_ms < b.t_ms; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r + 1 < rows.size() && rows[r + 1].t_ms == rows[r].t_ms) continue;
        rows[w++] = rows[r];
    }
    rows.resize(w);
}

std::vector<Sample> load_stream_file(const fs::path& file, const std::string& feature) {
    auto lines = read_lines(file);
    if (lines.empty()) throw DataError("stream file for feature '" + feature + "' is empty: " + file.string());
    std::vector<Sample> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto line = trim(lines[i]);
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 2) row_error(file, i + 1, "expected 2 columns, got " + std::to_string(cells.size()));
        auto t = parse_int(cells[0]);
        if (!t) row_error(file, i + 1, "bad timestamp '" + std::string(cells[0]) + "'");
        double value;
        if (trim(cells[1]).empty()) {
            value = std::numeric_limits<double>::quiet_NaN();  // null marker
        } else {
            auto v = parse_double(cells[1]);
            if (!v) row_error(file, i + 1, "bad value '" + std::string(cells[1]) + "'");
            value = *v;
        }
        rows.push_back({*t, value});
    }
    if (rows.empty()) throw DataError("stream file for feature '" + feature + "' has no samples: " + file.string());
    sort_dedup(rows);
    return rows;
}

std::vector<LabelSample> load_label_file(const fs::path& file) {
    auto lines = read_lines(file);
    std::vector<LabelSample> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto line = trim(lines[i]);
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 2) row_error(file, i + 1, "expected 2 columns, got " + std::to_string(cells.size()));
        auto t = parse_int(cells[0]);
        auto a = parse_int(cells[1]);
        if (!t) row_error(file, i + 1, "bad timestamp '" + std::string(cells[0]) + "'");
        if (!a || (*a != 0 && *a != 1)) row_error(file, i + 1, "anomalous flag must be 0 or 1");
        rows.push_back({*t, *a == 1});
    }
    if (rows.empty()) throw DataError("label file has no rows: " + file.string());
    sort_dedup(rows);
    return rows;
}

}  // namespace

SensorStreamSet load_streams(const fs::path& flight_dir, const std::string& flight_id,
                             FaultType fault_type) {
    if (!fs::is_directory(flight_dir)) throw DataError("flight directory missing: " + flight_dir.string());
    const fs::path label_path = flight_dir / "labels.csv";
    if (!fs::exists(label_path)) throw DataError("label file missing: " + label_path.string());

    SensorStreamSet set;
    set.flight_id = flight_id;
    set.fault_type = fault_type;
    set.fault_labels = load_label_file(label_path);

    std::vector<fs::path> stream_files;
    for (const auto& entry : fs::directory_iterator(flight_dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        if (p.extension() != ".csv" || p.filename() == "labels.csv") continue;
        stream_files.push_back(p);
    }
    std::sort(stream_files.begin(), stream_files.end());
    if (stream_files.empty()) throw DataError("no stream files in " + flight_dir.string());

    for (const auto& file : stream_files) {
        const std::string feature = file.stem().string();
        set.streams[feature] = load_stream_file(file, feature);
    }
    return set;
}

SelectionResult select_features(const SensorStreamSet& set,
                                std::span<const std::string> reject_patterns,
                                int min_distinct) {
    SelectionResult out;
    out.set.flight_id = set.flight_id;
    out.set.fault_type = set.fault_type;
    out.set.fault_labels = set.fault_labels;

    for (const auto& [name, samples] : set.streams) {
        bool pattern_hit = false;
        std::string hit;
        for (const auto& pat : reject_patterns) {
            if (glob_match(pat, name)) {
                pattern_hit = true;
                hit = pat;
                break;
            }
        }
        if (pattern_hit) {
            out.rejected.push_back({name, 1, "matches reject pattern '" + hit + "'"});
            continue;
        }

        bool has_null = false;
        std::set<double> distinct;
        for (const auto& s : samples) {
            if (!std::isfinite(s.value)) {
                has_null = true;
                break;
            }
            if (distinct.size() < static_cast<std::size_t>(min_distinct)) distinct.insert(s.value);
        }
        if (has_null) {
            out.rejected.push_back({name, 2, "contains null markers"});
            continue;
        }
        if (distinct.size() < static_cast<std::size_t>(min_distinct)) {
            out.rejected.push_back({name, 2, "only " + std::to_string(distinct.size()) +
                                                 " distinct value(s), need " + std::to_string(min_distinct)});
            continue;
        }
        out.set.streams[name] = samples;
    }

    if (out.set.streams.empty())
        throw DataError("feature selection rejected every stream of flight " + set.flight_id);
    return out;
}

namespace {

// Nearest sample to t; equidistant neighbours resolve to the earlier one.
template <class T>
const T& nearest_row(const std::vector<T>& rows, std::int64_t t) {
    auto it = std::lower_bound(rows.begin(), rows.end(), t,
                               [](const T& r, std::int64_t v) { return r.t_ms < v; });
    if (it == rows.begin()) return *it;
    if (it == rows.end()) return rows.back();
    const T& after = *it;
    const T& before = *std::prev(it);
    return (after.t_ms - t < t - before.t_ms) ? after : before;
}

bool nearest_label(const std::vector<LabelSample>& rows, std::int64_t t) {
    auto it = std::lower_bound(rows.begin(), rows.end(), t,
                               [](const LabelSample& r, std::int64_t v) { return r.t_ms < v; });
    if (it == rows.begin()) return it->anomalous;
    if (it == rows.end()) return rows.back().anomalous;
    const LabelSample& after = *it;
    const LabelSample& before = *std::prev(it);
    if (after.t_ms - t == t - before.t_ms) return before.anomalous || after.anomalous;
    return (after.t_ms - t < t - before.t_ms) ? after.anomalous : before.anomalous;
}

}  // namespace

FrameSeries pool_timestamps(const SensorStreamSet& set, const PoolingConfig& cfg) {
    if (cfg.stride_ms <= 0 || cfg.max_gap_ms <= 0) throw DataError("pooling stride and max gap must be positive");
    if (set.streams.empty()) throw DataError("no streams to pool for flight " + set.flight_id);
    if (set.fault_labels.empty()) throw DataError("no fault labels for flight " + set.flight_id);

    FrameSeries out;
    out.flight_id = set.flight_id;
    for (const auto& [name, _] : set.streams) out.feature_names.push_back(name);

    std::int64_t t_max = 0;
    for (const auto& [_, samples] : set.streams) t_max = std::max(t_max, samples.back().t_ms);

    const std::size_t n_features = out.feature_names.size();
    std::vector<std::int64_t> kept_ts;
    std::vector<double> kept_values;  // row-major staging
    Vec row(n_features);

    for (std::int64_t t = 0; t <= t_max; t += cfg.stride_ms) {
        bool keep = true;
        std::size_t f = 0;
        for (const auto& [_, samples] : set.streams) {
            const Sample& s = nearest_row(samples, t);
            if (std::abs(s.t_ms - t) > cfg.max_gap_ms) {
                keep = false;
                break;
            }
            row[f++] = s.value;
        }
        if (!keep) continue;
        kept_ts.push_back(t);
        kept_values.insert(kept_values.end(), row.begin(), row.end());
        out.labels.push_back(nearest_label(set.fault_labels, t) ? 1 : 0);
    }

    if (kept_ts.empty())
        throw DataError("pooling discarded every frame of flight " + set.flight_id);

    out.timestamps = std::move(kept_ts);
    out.frames = Matrix(out.timestamps.size(), n_features);
    std::copy(kept_values.begin(), kept_values.end(), out.frames.flat().begin());
    return out;
}

FlightManifest load_manifest(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest: " + manifest_path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("bad manifest JSON: " + std::string(e.what()));
    }
    if (!j.contains("flights")) throw DataError("manifest missing 'flights': " + manifest_path.string());

    FlightManifest m;
    const fs::path base = manifest_path.parent_path();
    for (const auto& f : j["flights"]) {
        FlightEntry e;
        e.id = f.at("id").get<std::string>();
        fs::path dir = f.at("dir").get<std::string>();
        e.dir = dir.is_absolute() ? dir : base / dir;
        e.fault_type = fault_type_from_string(f.at("fault_type").get<std::string>());
        m.flights.push_back(std::move(e));
    }
    if (m.flights.empty()) throw DataError("manifest lists no flights: " + manifest_path.string());
    return m;
}

void save_manifest(const FlightManifest& manifest, const fs::path& manifest_path) {
    json flights = json::array();
    const fs::path base = manifest_path.parent_path();
    for (const auto& e : manifest.flights) {
        flights.push_back({{"id", e.id},
                           {"dir", e.dir.lexically_relative(base).generic_string()},
                           {"fault_type", to_string(e.fault_type)}});
    }
    json j{{"format_version", 1}, {"flights", flights}};
    std::ofstream out(manifest_path);
    if (!out) throw DataError("cannot write manifest: " + manifest_path.string());
    out << j.dump(2) << "\n";
}

}  // namespace uavad
