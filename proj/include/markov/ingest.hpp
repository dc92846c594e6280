#pragma once

#include "markov/core.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace markov {

enum class Channel : std::size_t { LeadX = 0, LeadY = 1, FollowX = 2, FollowY = 3 };

/// Planar records carry metres; geodetic records carry degrees with
/// X = longitude and Y = latitude.
enum class Coordinates { Planar, Geodetic };

struct RawRecord {
    double time = 0.0;
    std::array<std::optional<double>, 4> values;

    std::optional<double> operator[](Channel c) const { return values[static_cast<std::size_t>(c)]; }
    std::optional<double>& operator[](Channel c) { return values[static_cast<std::size_t>(c)]; }
};

struct RawSeries {
    Coordinates coordinates = Coordinates::Planar;
    std::vector<RawRecord> records;
};

enum class SegmentMode { FixedLength, MinLength };

struct IngestConfig {
    double resample_dt = 1.0;
    double segment_length = 120.0;
    double min_length = 70.0;
    double trim_head = 0.0;
    double trim_tail = 0.0;
    double earth_radius = 6'371'000.0;
    SegmentMode mode = SegmentMode::FixedLength;

    /// Throws InvalidConfig.
    void validate() const;
};

/// Column names for the four position channels and the timestamp.
struct CsvSchema {
    Coordinates coordinates = Coordinates::Planar;
    std::string time = "time_s";
    std::string lead_x = "lead_x";
    std::string lead_y = "lead_y";
    std::string follow_x = "follow_x";
    std::string follow_y = "follow_y";

    static CsvSchema planar();
    static CsvSchema geodetic();  // lead_lon/lead_lat/follow_lon/follow_lat
};

struct LocalPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Equirectangular projection about (origin_lat, origin_lon).
/// Throws PolarLatitude when |lat| or |origin_lat| >= 89 degrees.
LocalPoint latlon_to_local(double lat, double lon, double origin_lat, double origin_lon,
                           double earth_radius = 6'371'000.0);

/// Fills interior gaps of each channel linearly in time and drops leading
/// and trailing records in which any channel is still missing. Throws
/// InsufficientData when a channel has no known sample at all.
std::vector<RawRecord> interpolate_gaps(const std::vector<RawRecord>& records);

/// Linear resampling onto t0, t0 + dt, ... up to the last record. Grid
/// instants within 1e-9 s of an input timestamp take that record's values
/// verbatim. Throws InsufficientSpan when the records span less than dt.
std::vector<RawRecord> resample(const std::vector<RawRecord>& records, double dt);

/// Forward differences divided by dt. Throws InsufficientData for < 2 values.
std::vector<double> differentiate(std::span<const double> values, double dt);

/// Projects geodetic records to metres about the first follower position;
/// planar records are returned unchanged.
std::vector<RawRecord> to_local_frame(const RawSeries& series, double earth_radius);

struct PathPositions {
    std::vector<double> time;
    std::vector<double> lead;
    std::vector<double> follow;
};

/// One-dimensional positions along the road: cumulative path length of
/// each vehicle, with the leader offset by the initial leader-follower
/// distance so that lead - follow is the gap. Records must be complete.
PathPositions path_positions(const std::vector<RawRecord>& records);

/// Car-following states [v0, v1, gap] and follower accelerations a1.
/// With v = differentiate(position), the state at raw instant i (2 <= i < n)
/// is [v0[i-1], v1[i-1], lead[i] - follow[i]] and its action is
/// (v1[i-1] - v1[i-2]) / dt, so T = n - 2. Throws NegativeGap when the
/// follower is ahead of the leader and InsufficientData for n < 3.
Trajectory derive_state_series(std::span<const double> lead, std::span<const double> follow,
                               double dt, std::string id = {}, Metadata metadata = {});

/// Trims head/tail (rounded to whole samples) and then either cuts
/// consecutive non-overlapping segments of segment_length (ids
/// "<id>_s<k>", remainder discarded) or keeps the whole trajectory iff its
/// duration T*dt exceeds min_length.
std::vector<Trajectory> segment(const Trajectory& traj, const IngestConfig& cfg);

/// Reads a position CSV. Without a schema the header decides between the
/// planar and geodetic defaults. Empty, NA and NaN cells are missing.
/// Throws FileNotFound, SchemaMismatch, UnparsableRow (1-based data row) or
/// InvalidInput for timestamps that do not increase.
RawSeries parse_csv(const std::filesystem::path& path,
                    const std::optional<CsvSchema>& schema = std::nullopt);

/// parse -> interpolate -> project -> resample -> derive -> segment.
std::vector<Trajectory> ingest_file(const std::filesystem::path& path, const IngestConfig& cfg,
                                    const std::string& id, const Metadata& metadata = {},
                                    const std::optional<CsvSchema>& schema = std::nullopt);

// Canonical trajectory files: "<id>.csv" with columns time_s, state
// columns (v0, v1, gap for three-dimensional data with actions, otherwise
// x0..x{d-1}) and an optional a1, plus a "<id>.json" sidecar with id, dt,
// dim, columns and metadata.

std::string canonical_csv(const Trajectory& traj);
std::string sidecar_json(const Trajectory& traj);
/// Writes both files into `dir` (created if needed); returns the CSV path.
std::filesystem::path write_canonical(const Trajectory& traj, const std::filesystem::path& dir);
/// Reads a canonical CSV and its sidecar when present.
Trajectory read_canonical(const std::filesystem::path& csv_path);
/// Every canonical trajectory in `dir`, ordered by file name. Throws
/// FileNotFound when `dir` does not exist.
std::vector<Trajectory> load_trajectory_dir(const std::filesystem::path& dir);

}  // namespace markov
