#include "markov/error.hpp"
#include "markov/ingest.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

using namespace markov;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures{MARKOV_FIXTURE_DIR};

template <class Fn>
Errc error_code(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected markov::Error";
    return Errc::InvalidInput;
}

RawRecord rec(double t, std::optional<double> v) {
    RawRecord r;
    r.time = t;
    r.values = {v, v, v, v};
    return r;
}

RawRecord planar(double t, double lx, double fx) {
    RawRecord r;
    r.time = t;
    r.values = {lx, 0.0, fx, 0.0};
    return r;
}

fs::path temp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("markov_ingest_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Trajectory ramp(std::size_t T, double dt) {
    std::vector<double> flat;
    for (std::size_t t = 0; t < T; ++t) flat.push_back(static_cast<double>(t));
    return make_trajectory_flat(flat, 1, dt, std::nullopt, "traj");
}

}  // namespace

TEST(LatLonToLocal, OriginMapsToZero) {
    auto p = latlon_to_local(42.3, -83.7, 42.3, -83.7);
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.y, 0.0);
}

TEST(LatLonToLocal, OneDegreeOfLatitude) {
    const double expected = 6'371'000.0 * std::numbers::pi / 180.0;
    auto p = latlon_to_local(11.0, 5.0, 10.0, 5.0);
    EXPECT_NEAR(p.y, expected, 1e-6);
    EXPECT_NEAR(p.y, 111'194.93, 0.01);
    EXPECT_EQ(p.x, 0.0);
}

TEST(LatLonToLocal, LongitudeShrinksWithCosLatitude) {
    auto p = latlon_to_local(60.0, 1.0, 60.0, 0.0);
    EXPECT_NEAR(p.x, 55'597.46, 0.01);
}

TEST(LatLonToLocal, PolarLatitudeRejected) {
    EXPECT_EQ(error_code([] { latlon_to_local(89.5, 0, 0, 0); }), Errc::PolarLatitude);
    EXPECT_EQ(error_code([] { latlon_to_local(0, 0, -89.0, 0); }), Errc::PolarLatitude);
}

TEST(InterpolateGaps, FillsMidpoint) {
    auto out = interpolate_gaps({rec(0, 0.0), rec(1, std::nullopt), rec(2, 2.0)});
    ASSERT_EQ(out.size(), 3u);
    EXPECT_DOUBLE_EQ(*out[1][Channel::FollowX], 1.0);
}

TEST(InterpolateGaps, UsesTimeNotIndex) {
    auto out = interpolate_gaps({rec(0, 0.0), rec(3, std::nullopt), rec(4, 8.0)});
    EXPECT_DOUBLE_EQ(*out[1][Channel::LeadY], 6.0);
}

TEST(InterpolateGaps, IdentityWithoutGaps) {
    std::vector<RawRecord> in{rec(0, 1.0), rec(1, 4.0), rec(2, -2.0)};
    auto out = interpolate_gaps(in);
    ASSERT_EQ(out.size(), in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        EXPECT_EQ(out[i].time, in[i].time);
        EXPECT_EQ(out[i].values, in[i].values);
    }
}

TEST(InterpolateGaps, DropsEdges) {
    auto out = interpolate_gaps({rec(0, std::nullopt), rec(1, 1.0), rec(2, std::nullopt)});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].time, 1.0);
    EXPECT_DOUBLE_EQ(*out[0][Channel::LeadX], 1.0);
}

TEST(InterpolateGaps, AllMissingIsInsufficient) {
    EXPECT_EQ(error_code([] { interpolate_gaps({rec(0, std::nullopt), rec(1, std::nullopt)}); }),
              Errc::InsufficientData);
}

TEST(Resample, TenHertzToOneSecond) {
    std::vector<RawRecord> in;
    for (int i = 0; i <= 30; ++i) in.push_back(planar(i / 10.0, 3.0 * (i / 10.0) + 1.0, i / 10.0));
    auto out = resample(in, 1.0);
    ASSERT_EQ(out.size(), 4u);
    for (std::size_t n = 0; n < out.size(); ++n) {
        EXPECT_DOUBLE_EQ(out[n].time, static_cast<double>(n));
        EXPECT_DOUBLE_EQ(*out[n][Channel::LeadX], 3.0 * static_cast<double>(n) + 1.0);
    }
}

TEST(Resample, InterpolatesBetweenSamples) {
    auto out = resample({planar(0, 0, 0), planar(2, 4, 2)}, 0.5);
    ASSERT_EQ(out.size(), 5u);
    EXPECT_DOUBLE_EQ(*out[1][Channel::LeadX], 1.0);
    EXPECT_DOUBLE_EQ(*out[3][Channel::FollowX], 1.5);
}

TEST(Resample, SameSpacingIsIdentity) {
    std::vector<RawRecord> in;
    for (int i = 0; i < 20; ++i) in.push_back(planar(0.1 * i, 7.0 * i, std::sin(i)));
    auto out = resample(in, 0.1);
    ASSERT_EQ(out.size(), in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        EXPECT_EQ(out[i].time, in[i].time);
        EXPECT_EQ(out[i].values, in[i].values);
    }
}

TEST(Resample, ShortSpanRejected) {
    EXPECT_EQ(error_code([] { resample({planar(0, 0, 0), planar(0.5, 1, 1)}, 1.0); }),
              Errc::InsufficientSpan);
}

TEST(Differentiate, Examples) {
    EXPECT_EQ(differentiate(std::vector<double>{0, 1, 2}, 1.0), (std::vector<double>{1, 1}));
    EXPECT_EQ(differentiate(std::vector<double>{5, 5, 5, 5}, 0.1), (std::vector<double>{0, 0, 0}));
    EXPECT_EQ(differentiate(std::vector<double>{0, 2}, 0.5), (std::vector<double>{4}));
    EXPECT_EQ(error_code([] { differentiate(std::vector<double>{1}, 1.0); }),
              Errc::InsufficientData);
}

TEST(DeriveStateSeries, UniformMotion) {
    auto t = derive_state_series(std::vector<double>{10, 11, 12, 13},
                                 std::vector<double>{0, 1, 2, 3}, 1.0);
    ASSERT_EQ(t.length(), 2u);
    for (std::size_t i = 0; i < t.length(); ++i) {
        EXPECT_EQ(t.at(i, 0), 1.0);
        EXPECT_EQ(t.at(i, 1), 1.0);
        EXPECT_EQ(t.at(i, 2), 10.0);
        EXPECT_EQ((*t.actions())[i], 0.0);
    }
}

TEST(DeriveStateSeries, AlignmentByHand) {
    auto t = derive_state_series(std::vector<double>{0, 1, 3, 6},
                                 std::vector<double>{0, 0, 0, 0}, 1.0);
    ASSERT_EQ(t.length(), 2u);
    EXPECT_EQ(std::vector<double>(t.state(0).begin(), t.state(0).end()),
              (std::vector<double>{2, 0, 3}));
    EXPECT_EQ(std::vector<double>(t.state(1).begin(), t.state(1).end()),
              (std::vector<double>{3, 0, 6}));
}

TEST(DeriveStateSeries, ActionIsFollowerAcceleration) {
    // follower positions 0, 1, 4, 9 -> speeds 1, 3, 5 -> accelerations 2, 2
    auto t = derive_state_series(std::vector<double>{20, 21, 22, 23},
                                 std::vector<double>{0, 1, 4, 9}, 1.0);
    EXPECT_EQ(*t.actions(), (std::vector<double>{2, 2}));
    EXPECT_EQ(t.at(0, 1), 3.0);
    EXPECT_EQ(t.at(1, 2), 14.0);
}

TEST(DeriveStateSeries, Errors) {
    EXPECT_EQ(error_code([] {
                  derive_state_series(std::vector<double>{0, 1, 2}, std::vector<double>{1, 2, 3},
                                      1.0);
              }),
              Errc::NegativeGap);
    EXPECT_EQ(error_code([] {
                  derive_state_series(std::vector<double>{1, 2}, std::vector<double>{0, 1}, 1.0);
              }),
              Errc::InsufficientData);
}

TEST(Segment, FixedLengthFloorsDuration) {
    IngestConfig cfg;
    auto segs = segment(ramp(250, 1.0), cfg);
    ASSERT_EQ(segs.size(), 2u);
    EXPECT_EQ(segs[0].length(), 120u);
    EXPECT_EQ(segs[1].id(), "traj_s1");
    EXPECT_EQ(segs[1].at(0, 0), 120.0);
    EXPECT_EQ(segs[1].meta("segment").value(), "1");
}

TEST(Segment, CountMatchesFormulaWithTrims) {
    IngestConfig cfg;
    cfg.segment_length = 30;
    cfg.min_length = 10;
    for (double head : {0.0, 5.0, 17.0}) {
        for (double tail : {0.0, 3.0, 40.0}) {
            for (std::size_t T : {10u, 61u, 95u, 200u}) {
                cfg.trim_head = head;
                cfg.trim_tail = tail;
                const double remaining = std::max(0.0, static_cast<double>(T) - head - tail);
                EXPECT_EQ(segment(ramp(T, 1.0), cfg).size(),
                          static_cast<std::size_t>(std::floor(remaining / 30.0)));
            }
        }
    }
}

TEST(Segment, MinLengthMode) {
    IngestConfig cfg;
    cfg.mode = SegmentMode::MinLength;
    EXPECT_EQ(segment(ramp(100, 1.0), cfg).size(), 1u);
    EXPECT_EQ(segment(ramp(60, 1.0), cfg).size(), 0u);
    EXPECT_EQ(segment(ramp(70, 1.0), cfg).size(), 0u);
    EXPECT_EQ(segment(ramp(700, 0.1), cfg).size(), 0u);
    EXPECT_EQ(segment(ramp(701, 0.1), cfg).size(), 1u);
}

TEST(Segment, TrimsRemoveSamples) {
    IngestConfig cfg;
    cfg.mode = SegmentMode::MinLength;
    cfg.trim_head = 10;
    cfg.trim_tail = 5;
    auto segs = segment(ramp(100, 1.0), cfg);
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].length(), 85u);
    EXPECT_EQ(segs[0].at(0, 0), 10.0);
}

TEST(IngestConfig, Validation) {
    IngestConfig cfg;
    cfg.segment_length = 50;
    EXPECT_EQ(error_code([&] { cfg.validate(); }), Errc::InvalidConfig);
    cfg = {};
    cfg.resample_dt = 0;
    EXPECT_EQ(error_code([&] { cfg.validate(); }), Errc::InvalidConfig);
}

TEST(ParseCsv, ThreeRows) {
    auto dir = temp_dir("three");
    std::ofstream(dir / "a.csv") << "time_s,lead_x,lead_y,follow_x,follow_y\n"
                                    "0,10,0,0,0\n1,11,0,1,0\n2,12,,NA,0\n";
    auto s = parse_csv(dir / "a.csv");
    EXPECT_EQ(s.coordinates, Coordinates::Planar);
    ASSERT_EQ(s.records.size(), 3u);
    EXPECT_FALSE(s.records[2][Channel::LeadY].has_value());
    EXPECT_FALSE(s.records[2][Channel::FollowX].has_value());
    EXPECT_EQ(*s.records[1][Channel::LeadX], 11.0);
}

TEST(ParseCsv, Errors) {
    auto dir = temp_dir("errors");
    std::ofstream(dir / "nohead.csv") << "t,lead_x,lead_y,follow_x,follow_y\n0,1,1,1,1\n";
    EXPECT_EQ(error_code([&] { parse_csv(dir / "nohead.csv"); }), Errc::SchemaMismatch);
    EXPECT_EQ(error_code([&] { parse_csv(dir / "absent.csv"); }), Errc::FileNotFound);
    try {
        parse_csv(kFixtures / "bad_row7.csv");
        FAIL() << "expected UnparsableRow";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnparsableRow);
        EXPECT_EQ(e.row().value(), 7u);
    }
    std::ofstream(dir / "back.csv") << "time_s,lead_x,lead_y,follow_x,follow_y\n1,1,1,1,1\n0,1,1,1,1\n";
    EXPECT_EQ(error_code([&] { parse_csv(dir / "back.csv"); }), Errc::InvalidInput);
}

TEST(ParseCsv, GeodeticDetectedFromHeader) {
    auto s = parse_csv(kFixtures / "geodetic_gaps.csv");
    EXPECT_EQ(s.coordinates, Coordinates::Geodetic);
    EXPECT_EQ(s.records.size(), 81u);
    EXPECT_FALSE(s.records[10][Channel::FollowY].has_value());
    EXPECT_DOUBLE_EQ(*s.records[0][Channel::FollowX], -83.7);
}

TEST(Pipeline, UniformMotionIsExact) {
    auto segs = ingest_file(kFixtures / "uniform_motion.csv", IngestConfig{}, "u");
    ASSERT_EQ(segs.size(), 1u);
    const auto& t = segs[0];
    EXPECT_EQ(t.length(), 120u);
    for (std::size_t i = 0; i < t.length(); ++i) {
        EXPECT_EQ(t.at(i, 0), 15.0);
        EXPECT_EQ(t.at(i, 1), 15.0);
        EXPECT_EQ(t.at(i, 2), 30.0);
        EXPECT_EQ((*t.actions())[i], 0.0);
    }
}

TEST(Pipeline, GeodeticWithGapsRecoversSpeedAndGap) {
    IngestConfig cfg;
    cfg.mode = SegmentMode::MinLength;
    auto segs = ingest_file(kFixtures / "geodetic_gaps.csv", cfg, "g");
    ASSERT_EQ(segs.size(), 1u);
    const auto& t = segs[0];
    EXPECT_EQ(t.length(), 79u);
    for (std::size_t i = 0; i < t.length(); ++i) {
        EXPECT_NEAR(t.at(i, 0), 12.0, 1e-3);
        EXPECT_NEAR(t.at(i, 1), 12.0, 1e-3);
        EXPECT_NEAR(t.at(i, 2), 25.0, 1e-3);
    }
}

TEST(Pipeline, DeterministicBitIdentical) {
    auto a = ingest_file(kFixtures / "geodetic_gaps.csv", IngestConfig{.segment_length = 30, .min_length = 20}, "g");
    auto b = ingest_file(kFixtures / "geodetic_gaps.csv", IngestConfig{.segment_length = 30, .min_length = 20}, "g");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(canonical_csv(a[k]), canonical_csv(b[k]));
}

TEST(CanonicalFiles, RoundTrip) {
    auto dir = temp_dir("canonical");
    auto t = derive_state_series(std::vector<double>{10, 11.5, 13.25, 15.125, 17.0},
                                 std::vector<double>{0, 1, 2.5, 4.75, 7.0}, 0.1, "rt",
                                 {{"cohort", "HV"}});
    auto path = write_canonical(t, dir);
    auto back = read_canonical(path);
    EXPECT_EQ(back.id(), "rt");
    EXPECT_EQ(back.dt(), 0.1);
    EXPECT_EQ(back.meta("cohort").value(), "HV");
    ASSERT_EQ(back.flat_states().size(), t.flat_states().size());
    for (std::size_t i = 0; i < t.flat_states().size(); ++i) {
        EXPECT_EQ(back.flat_states()[i], t.flat_states()[i]);
    }
    EXPECT_EQ(*back.actions(), *t.actions());
    EXPECT_NE(canonical_csv(t).find("time_s,v0,v1,gap,a1"), std::string::npos);
}

TEST(CanonicalFiles, GenericDimensionsAndDirectoryOrder) {
    auto dir = temp_dir("generic");
    write_canonical(make_trajectory({{1, 2}, {3, 4}}, 1.0, std::nullopt, "b"), dir);
    write_canonical(make_trajectory({{5}, {6}, {7}}, 1.0, std::nullopt, "a"), dir);
    auto all = load_trajectory_dir(dir);
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].id(), "a");
    EXPECT_EQ(all[1].dim(), 2u);
    EXPECT_FALSE(all[1].actions().has_value());
    EXPECT_EQ(error_code([&] { load_trajectory_dir(dir / "nope"); }), Errc::FileNotFound);
}
