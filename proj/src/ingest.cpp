#include "markov/ingest.hpp"

#include "markov/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace markov {

namespace fs = std::filesystem;

namespace {

constexpr double kSnapTolerance = 1e-9;
constexpr std::array<Channel, 4> kChannels{Channel::LeadX, Channel::LeadY, Channel::FollowX,
                                           Channel::FollowY};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' ||
                          s.back() == '\r' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

bool is_missing_marker(std::string_view s) {
    if (s.empty()) return true;
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lower == "na" || lower == "nan" || lower == "null" || lower == "none";
}

std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool complete(const RawRecord& r) {
    return std::all_of(r.values.begin(), r.values.end(), [](const auto& v) { return v.has_value(); });
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

}  // namespace

void IngestConfig::validate() const {
    if (!(resample_dt > 0.0)) throw Error(Errc::InvalidConfig, "resample_dt must be > 0");
    if (!(min_length > 0.0)) throw Error(Errc::InvalidConfig, "min_length must be > 0");
    if (!(segment_length >= min_length)) {
        throw Error(Errc::InvalidConfig, "segment_length must be >= min_length");
    }
    if (!(trim_head >= 0.0) || !(trim_tail >= 0.0)) {
        throw Error(Errc::InvalidConfig, "trim durations must be >= 0");
    }
    if (!(earth_radius > 0.0)) throw Error(Errc::InvalidConfig, "earth_radius must be > 0");
}

CsvSchema CsvSchema::planar() { return {}; }

CsvSchema CsvSchema::geodetic() {
    CsvSchema s;
    s.coordinates = Coordinates::Geodetic;
    s.lead_x = "lead_lon";
    s.lead_y = "lead_lat";
    s.follow_x = "follow_lon";
    s.follow_y = "follow_lat";
    return s;
}

LocalPoint latlon_to_local(double lat, double lon, double origin_lat, double origin_lon,
                           double earth_radius) {
    if (!(std::abs(lat) < 89.0) || !(std::abs(origin_lat) < 89.0)) {
        throw Error(Errc::PolarLatitude,
                    fmt::format("latitude {} / origin {} outside (-89, 89)", lat, origin_lat));
    }
    constexpr double deg = std::numbers::pi / 180.0;
    return {earth_radius * (lon - origin_lon) * deg * std::cos(origin_lat * deg),
            earth_radius * (lat - origin_lat) * deg};
}

std::vector<RawRecord> interpolate_gaps(const std::vector<RawRecord>& records) {
    std::vector<RawRecord> filled = records;
    for (Channel c : kChannels) {
        std::vector<std::size_t> known;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i][c]) known.push_back(i);
        }
        if (known.empty()) {
            throw Error(Errc::InsufficientData, "a position channel has no known samples");
        }
        for (std::size_t k = 0; k + 1 < known.size(); ++k) {
            const std::size_t a = known[k], b = known[k + 1];
            const double ta = records[a].time, tb = records[b].time;
            const double va = *records[a][c], vb = *records[b][c];
            for (std::size_t i = a + 1; i < b; ++i) {
                const double w = (records[i].time - ta) / (tb - ta);
                filled[i][c] = va + w * (vb - va);
            }
        }
    }
    std::vector<RawRecord> out;
    for (const auto& r : filled) {
        if (complete(r)) out.push_back(r);
    }
    return out;
}

std::vector<RawRecord> resample(const std::vector<RawRecord>& records, double dt) {
    if (!(dt > 0.0)) throw Error(Errc::NonPositiveDt, "resampling interval must be > 0");
    if (records.empty()) throw Error(Errc::InsufficientSpan, "no records to resample");
    for (const auto& r : records) {
        if (!complete(r)) throw Error(Errc::InvalidInput, "resample needs gap-free records");
    }
    const double t0 = records.front().time;
    const double span = records.back().time - t0;
    if (span + kSnapTolerance < dt) {
        throw Error(Errc::InsufficientSpan,
                    fmt::format("records span {} s, less than dt = {} s", span, dt));
    }
    const auto n_grid = static_cast<std::size_t>(std::floor(span / dt + kSnapTolerance)) + 1;
    std::vector<RawRecord> out;
    out.reserve(n_grid);
    std::size_t j = 0;
    for (std::size_t n = 0; n < n_grid; ++n) {
        const double t = t0 + static_cast<double>(n) * dt;
        while (j + 1 < records.size() && records[j + 1].time <= t + kSnapTolerance) ++j;
        if (std::abs(records[j].time - t) <= kSnapTolerance || j + 1 == records.size()) {
            out.push_back(records[j]);
            continue;
        }
        const RawRecord& a = records[j];
        const RawRecord& b = records[j + 1];
        const double w = (t - a.time) / (b.time - a.time);
        RawRecord r;
        r.time = t;
        for (std::size_t c = 0; c < 4; ++c) {
            r.values[c] = *a.values[c] + w * (*b.values[c] - *a.values[c]);
        }
        out.push_back(r);
    }
    return out;
}

std::vector<double> differentiate(std::span<const double> values, double dt) {
    if (values.size() < 2) throw Error(Errc::InsufficientData, "differentiate needs >= 2 values");
    if (!(dt > 0.0)) throw Error(Errc::NonPositiveDt, "dt must be > 0");
    std::vector<double> out(values.size() - 1);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) out[i] = (values[i + 1] - values[i]) / dt;
    return out;
}

std::vector<RawRecord> to_local_frame(const RawSeries& series, double earth_radius) {
    if (series.coordinates == Coordinates::Planar) return series.records;
    if (series.records.empty()) return {};
    const RawRecord& first = series.records.front();
    if (!first[Channel::FollowX] || !first[Channel::FollowY]) {
        throw Error(Errc::InvalidInput, "projection origin has a missing follower position");
    }
    const double lat0 = *first[Channel::FollowY], lon0 = *first[Channel::FollowX];
    std::vector<RawRecord> out = series.records;
    for (auto& r : out) {
        for (auto [xc, yc] : {std::pair{Channel::LeadX, Channel::LeadY},
                              std::pair{Channel::FollowX, Channel::FollowY}}) {
            if (!r[xc] || !r[yc]) {
                r[xc].reset();
                r[yc].reset();
                continue;
            }
            const LocalPoint p = latlon_to_local(*r[yc], *r[xc], lat0, lon0, earth_radius);
            r[xc] = p.x;
            r[yc] = p.y;
        }
    }
    return out;
}

PathPositions path_positions(const std::vector<RawRecord>& records) {
    PathPositions p;
    if (records.empty()) return p;
    for (const auto& r : records) {
        if (!complete(r)) throw Error(Errc::InvalidInput, "path positions need gap-free records");
    }
    auto xy = [](const RawRecord& r, Channel x, Channel y) { return std::pair{*r[x], *r[y]}; };
    const auto [lx0, ly0] = xy(records.front(), Channel::LeadX, Channel::LeadY);
    const auto [fx0, fy0] = xy(records.front(), Channel::FollowX, Channel::FollowY);
    double d0 = std::hypot(lx0 - fx0, ly0 - fy0);
    // The leader is behind when it lies against the follower's first heading.
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto [fx, fy] = xy(records[i], Channel::FollowX, Channel::FollowY);
        const double hx = fx - fx0, hy = fy - fy0;
        if (hx != 0.0 || hy != 0.0) {
            if ((lx0 - fx0) * hx + (ly0 - fy0) * hy < 0.0) d0 = -d0;
            break;
        }
    }
    double lead = d0, follow = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i > 0) {
            const auto [lx, ly] = xy(records[i], Channel::LeadX, Channel::LeadY);
            const auto [plx, ply] = xy(records[i - 1], Channel::LeadX, Channel::LeadY);
            const auto [fx, fy] = xy(records[i], Channel::FollowX, Channel::FollowY);
            const auto [pfx, pfy] = xy(records[i - 1], Channel::FollowX, Channel::FollowY);
            lead += std::hypot(lx - plx, ly - ply);
            follow += std::hypot(fx - pfx, fy - pfy);
        }
        p.time.push_back(records[i].time);
        p.lead.push_back(lead);
        p.follow.push_back(follow);
    }
    return p;
}

Trajectory derive_state_series(std::span<const double> lead, std::span<const double> follow,
                               double dt, std::string id, Metadata metadata) {
    if (lead.size() != follow.size()) {
        throw Error(Errc::LengthMismatch, "lead and follow positions differ in length");
    }
    if (lead.size() < 3) throw Error(Errc::InsufficientData, "need >= 3 positions");
    for (std::size_t i = 0; i < lead.size(); ++i) {
        if (lead[i] - follow[i] < 0.0) {
            throw Error(Errc::NegativeGap, fmt::format("follower ahead of leader at sample {}", i));
        }
    }
    const std::vector<double> v0 = differentiate(lead, dt);
    const std::vector<double> v1 = differentiate(follow, dt);
    const std::vector<double> a1 = differentiate(v1, dt);
    const std::size_t n = lead.size();
    std::vector<double> flat;
    flat.reserve((n - 2) * 3);
    std::vector<double> actions;
    actions.reserve(n - 2);
    for (std::size_t i = 2; i < n; ++i) {
        flat.push_back(v0[i - 1]);
        flat.push_back(v1[i - 1]);
        flat.push_back(lead[i] - follow[i]);
        actions.push_back(a1[i - 2]);
    }
    return make_trajectory_flat(std::move(flat), 3, dt, std::move(actions), std::move(id),
                                std::move(metadata));
}

std::vector<Trajectory> segment(const Trajectory& traj, const IngestConfig& cfg) {
    cfg.validate();
    const double dt = traj.dt();
    const auto head = static_cast<std::size_t>(std::llround(cfg.trim_head / dt));
    const auto tail = static_cast<std::size_t>(std::llround(cfg.trim_tail / dt));
    const std::size_t total = traj.length();
    if (head + tail >= total) return {};
    const std::size_t begin = head, end = total - tail;
    const std::size_t remaining = end - begin;
    std::vector<Trajectory> out;
    if (cfg.mode == SegmentMode::MinLength) {
        if (static_cast<double>(remaining) * dt > cfg.min_length && remaining >= 2) {
            out.push_back(traj.slice(begin, end, traj.id()));
        }
        return out;
    }
    const auto seg = static_cast<std::size_t>(std::llround(cfg.segment_length / dt));
    if (seg < 2) {
        throw Error(Errc::InvalidConfig, "segment_length must cover at least two samples");
    }
    for (std::size_t k = 0; k < remaining / seg; ++k) {
        const std::size_t b = begin + k * seg;
        out.push_back(traj.slice(b, b + seg, fmt::format("{}_s{}", traj.id(), k))
                          .with_metadata("segment", std::to_string(k)));
    }
    return out;
}

RawSeries parse_csv(const fs::path& path, const std::optional<CsvSchema>& schema) {
    if (!fs::exists(path)) throw Error(Errc::FileNotFound, "no such file: " + path.string());
    const auto lines = lines_of(read_file(path));
    if (lines.empty()) throw Error(Errc::SchemaMismatch, path.string() + " has no header row");
    const auto header = split_csv(lines.front());
    auto has = [&](std::string_view name) {
        return std::find(header.begin(), header.end(), name) != header.end();
    };
    const CsvSchema s = schema ? *schema
                               : (has("lead_lat") || has("follow_lat") ? CsvSchema::geodetic()
                                                                       : CsvSchema::planar());
    std::array<std::size_t, 5> col{};
    const std::array<const std::string*, 5> names{&s.time, &s.lead_x, &s.lead_y, &s.follow_x,
                                                  &s.follow_y};
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto it = std::find(header.begin(), header.end(), *names[k]);
        if (it == header.end()) {
            throw Error(Errc::SchemaMismatch,
                        fmt::format("{}: header lacks column '{}'", path.string(), *names[k]));
        }
        col[k] = static_cast<std::size_t>(it - header.begin());
    }
    const std::size_t needed = *std::max_element(col.begin(), col.end()) + 1;

    RawSeries series;
    series.coordinates = s.coordinates;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t row = li;
        if (trim(lines[li]).empty()) continue;
        const auto cells = split_csv(lines[li]);
        if (cells.size() < needed) {
            throw Error(Errc::UnparsableRow, fmt::format("row {}: too few fields", row), row);
        }
        RawRecord r;
        const auto t = parse_double(cells[col[0]]);
        if (!t) throw Error(Errc::UnparsableRow, fmt::format("row {}: bad timestamp", row), row);
        r.time = *t;
        for (std::size_t c = 0; c < 4; ++c) {
            const std::string_view cell = cells[col[c + 1]];
            if (is_missing_marker(cell)) continue;
            const auto v = parse_double(cell);
            if (!v) {
                throw Error(Errc::UnparsableRow,
                            fmt::format("row {}: cannot parse '{}' in column '{}'", row, cell,
                                        *names[c + 1]),
                            row);
            }
            r.values[c] = *v;
        }
        if (!series.records.empty() && !(r.time > series.records.back().time)) {
            throw Error(Errc::InvalidInput,
                        fmt::format("row {}: timestamps must strictly increase", row));
        }
        series.records.push_back(r);
    }
    return series;
}

std::vector<Trajectory> ingest_file(const fs::path& path, const IngestConfig& cfg,
                                    const std::string& id, const Metadata& metadata,
                                    const std::optional<CsvSchema>& schema) {
    cfg.validate();
    const RawSeries raw = parse_csv(path, schema);
    const RawSeries filled{raw.coordinates, interpolate_gaps(raw.records)};
    const auto grid = resample(to_local_frame(filled, cfg.earth_radius), cfg.resample_dt);
    const PathPositions pos = path_positions(grid);
    Metadata meta = metadata;
    meta["source"] = path.filename().string();
    const Trajectory traj = derive_state_series(pos.lead, pos.follow, cfg.resample_dt, id, meta);
    return segment(traj, cfg);
}

namespace {

std::vector<std::string> column_names(const Trajectory& traj) {
    std::vector<std::string> cols;
    if (traj.dim() == 3 && traj.actions()) {
        cols = {"v0", "v1", "gap"};
    } else {
        for (std::size_t j = 0; j < traj.dim(); ++j) cols.push_back(fmt::format("x{}", j));
    }
    return cols;
}

}  // namespace

std::string canonical_csv(const Trajectory& traj) {
    const auto cols = column_names(traj);
    std::string out = "time_s";
    for (const auto& c : cols) out += "," + c;
    if (traj.actions()) out += ",a1";
    out += "\n";
    for (std::size_t t = 0; t < traj.length(); ++t) {
        out += fmt::format("{}", static_cast<double>(t) * traj.dt());
        for (double v : traj.state(t)) out += fmt::format(",{}", v);
        if (traj.actions()) out += fmt::format(",{}", (*traj.actions())[t]);
        out += "\n";
    }
    return out;
}

std::string sidecar_json(const Trajectory& traj) {
    auto cols = column_names(traj);
    cols.insert(cols.begin(), "time_s");
    if (traj.actions()) cols.push_back("a1");
    nlohmann::ordered_json j;
    j["id"] = traj.id();
    j["dt"] = traj.dt();
    j["dim"] = traj.dim();
    j["length"] = traj.length();
    j["columns"] = cols;
    j["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : traj.metadata()) j["metadata"][k] = v;
    return j.dump(2) + "\n";
}

fs::path write_canonical(const Trajectory& traj, const fs::path& dir) {
    if (traj.id().empty()) throw Error(Errc::InvalidInput, "canonical files need a trajectory id");
    fs::create_directories(dir);
    const fs::path csv = dir / (traj.id() + ".csv");
    std::ofstream(csv, std::ios::binary) << canonical_csv(traj);
    std::ofstream(dir / (traj.id() + ".json"), std::ios::binary) << sidecar_json(traj);
    return csv;
}

Trajectory read_canonical(const fs::path& csv_path) {
    const auto lines = lines_of(read_file(csv_path));
    if (lines.empty()) throw Error(Errc::SchemaMismatch, csv_path.string() + " is empty");
    const auto header = split_csv(lines.front());
    if (header.empty() || header.front() != "time_s") {
        throw Error(Errc::SchemaMismatch, csv_path.string() + ": first column must be time_s");
    }
    std::optional<std::size_t> action_col;
    std::vector<std::size_t> state_cols;
    for (std::size_t k = 1; k < header.size(); ++k) {
        if (header[k] == "a1") {
            action_col = k;
        } else {
            state_cols.push_back(k);
        }
    }
    if (state_cols.empty()) throw Error(Errc::SchemaMismatch, csv_path.string() + ": no state columns");

    std::vector<double> flat, times, actions;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        const auto cells = split_csv(lines[li]);
        if (cells.size() != header.size()) {
            throw Error(Errc::UnparsableRow, fmt::format("row {}: field count", li), li);
        }
        auto num = [&](std::size_t k) {
            const auto v = parse_double(cells[k]);
            if (!v) throw Error(Errc::UnparsableRow, fmt::format("row {}: '{}'", li, cells[k]), li);
            return *v;
        };
        times.push_back(num(0));
        for (std::size_t k : state_cols) flat.push_back(num(k));
        if (action_col) actions.push_back(num(*action_col));
    }

    std::string id = csv_path.stem().string();
    double dt = times.size() >= 2 ? times[1] - times[0] : 1.0;
    Metadata meta;
    fs::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    if (fs::exists(sidecar)) {
        const auto j = nlohmann::json::parse(read_file(sidecar), nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error(Errc::SchemaMismatch, sidecar.string() + " is not a JSON object");
        }
        id = j.value("id", id);
        dt = j.value("dt", dt);
        if (j.contains("metadata") && j["metadata"].is_object()) {
            for (const auto& [k, v] : j["metadata"].items()) {
                meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
        }
    }
    std::optional<std::vector<double>> acts;
    if (action_col) acts = std::move(actions);
    return make_trajectory_flat(std::move(flat), state_cols.size(), dt, std::move(acts),
                                std::move(id), std::move(meta));
}

std::vector<Trajectory> load_trajectory_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(Errc::FileNotFound, "no such directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Trajectory> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(read_canonical(f));
    return out;
}

}  // namespace markov
