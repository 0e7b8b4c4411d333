#include <gtest/gtest.h>

#include <fstream>

#include "phenosample/error.hpp"
#include "phenosample/manifest.hpp"
#include "phenosample/rng.hpp"
#include "support/oracles.hpp"

namespace ps = phenosample;
using namespace std::chrono;

namespace {

ps::TimePoint at_doy(int y, int doy) { return sys_days{year{y} / January / 1} + days{doy - 1} + hours{10}; }

ps::ManifestRecord record(std::int64_t id, int seasons, double cloud = 0.05, double weight = 1.0) {
  ps::ManifestRecord r;
  r.point_id = id;
  r.lat = 45.0;
  r.lon = 7.5;
  r.weight = weight;
  const auto w = ps::season_windows({100, 160, 250, 300});
  for (int s = 0; s < seasons; ++s) {
    const auto& win = w.windows[static_cast<std::size_t>(s)];
    r.seasons.push_back({s, win.start, win.end(), win.target, "S" + std::to_string(id) + "_" + std::to_string(s),
                         at_doy(2019 + s, win.target), cloud});
  }
  return r;
}

ps::DatasetManifest manifest(std::size_t n) {
  ps::DatasetManifest m;
  for (std::size_t i = 0; i < n; ++i) {
    m.records.push_back(record(static_cast<std::int64_t>(i * 3 + 1), 2 + static_cast<int>(i % 3), 0.01 * (i % 19),
                               i % 5 == 0 ? 0.25 : 1.0));
  }
  return m;
}

std::string rule_of(const ps::DatasetManifest& m) {
  try {
    ps::validate_manifest(m);
  } catch (const ps::ValidationError& e) {
    return e.rule();
  }
  return "";
}

}  // namespace

TEST(Manifest, EmptyRecordListIsHeaderOnly) {
  oracle::TempDir dir("manifest_empty");
  ps::write_manifest({}, dir / "m.jsonl");
  const auto text = oracle::read_file(dir / "m.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(ps::read_manifest(dir / "m.jsonl"), ps::DatasetManifest{});
}

TEST(Manifest, RoundTripThousandRecords) {
  oracle::TempDir dir("manifest_rt");
  const auto m = manifest(1000);
  ps::write_manifest(m, dir / "a.jsonl");
  ps::write_manifest(m, dir / "b.jsonl");
  EXPECT_EQ(oracle::read_file(dir / "a.jsonl"), oracle::read_file(dir / "b.jsonl"));
  EXPECT_EQ(ps::read_manifest(dir / "a.jsonl"), m);
}

TEST(Manifest, StableKeyOrder) {
  const auto text = ps::serialize_manifest(manifest(1));
  const auto second = text.substr(text.find('\n') + 1);
  EXPECT_EQ(second.rfind("{\"point_id\":", 0), 0u) << second;
  EXPECT_LT(second.find("\"lat\""), second.find("\"lon\""));
  EXPECT_LT(second.find("\"window_start\""), second.find("\"window_end\""));
  EXPECT_EQ(text.rfind("{\"format\":\"phenosample-manifest\",\"format_version\":1", 0), 0u);
}

TEST(Manifest, ValidationRules) {
  auto m = manifest(3);
  EXPECT_EQ(rule_of(m), "");

  auto one = m;
  one.records[1] = record(4, 1);
  EXPECT_EQ(rule_of(one), "min seasons");

  auto dup = m;
  dup.records[2].point_id = dup.records[1].point_id;
  EXPECT_EQ(rule_of(dup), "duplicate point_id");

  auto order = m;
  std::swap(order.records[0], order.records[2]);
  EXPECT_EQ(rule_of(order), "point order");

  auto cloudy = m;
  cloudy.records[0].seasons[0].cloud_fraction = 0.20;
  EXPECT_EQ(rule_of(cloudy), "cloud bound");

  auto weight = m;
  weight.records[0].weight = 0.0;
  EXPECT_EQ(rule_of(weight), "weight");

  auto season = m;
  season.records[0].seasons[1].season = season.records[0].seasons[0].season;
  EXPECT_EQ(rule_of(season), "duplicate season");

  auto outside = m;
  outside.records[0].seasons[0].acquisition = at_doy(2020, 5);
  EXPECT_EQ(rule_of(outside), "scene in window");

  auto year = m;
  year.records[0].seasons[0].acquisition = at_doy(2012, year.records[0].seasons[0].target_day);
  EXPECT_EQ(rule_of(year), "scene in window");

  auto target = m;
  target.records[0].seasons[0].target_day = target.records[0].seasons[0].window_end;
  EXPECT_EQ(rule_of(target), "window");

  auto coords = m;
  coords.records[0].lat = 91.0;
  EXPECT_EQ(rule_of(coords), "coordinates");

  auto version = m;
  version.header.format_version = 2;
  EXPECT_EQ(rule_of(version), "format version");
}

TEST(Manifest, MutationsOfValidRecordsAreRejectedExactly) {
  // Each mutation either keeps the record valid or breaks exactly the rule it touches.
  ps::Pcg64 rng(31);
  const ps::ManifestHeader h;
  for (int t = 0; t < 2000; ++t) {
    auto r = record(5, 2 + static_cast<int>(rng.bounded(3)));
    const double c = rng.uniform() * 0.4;
    r.seasons[0].cloud_fraction = c;
    const double w = rng.uniform() * 2.0 - 0.5;
    r.weight = w;
    const bool cloud_ok = c < h.policy.max_cloud;
    const bool weight_ok = w > 0.0;
    if (cloud_ok && weight_ok) {
      EXPECT_NO_THROW(ps::validate_record(r, h));
    } else {
      EXPECT_THROW(ps::validate_record(r, h), ps::ValidationError);
    }
  }
}

TEST(Manifest, ReadReportsLineAndRule) {
  oracle::TempDir dir("manifest_bad");
  const auto m = manifest(5);
  ps::write_manifest(m, dir / "m.jsonl");
  auto text = oracle::read_file(dir / "m.jsonl");

  std::ofstream(dir / "garbled.jsonl") << text.substr(0, text.size() / 2) << "\n{oops\n";
  EXPECT_THROW(ps::read_manifest(dir / "garbled.jsonl"), ps::DecodeError);

  auto dup = m;
  dup.records[3].point_id = dup.records[2].point_id;
  std::ofstream out(dir / "dup.jsonl");
  const auto header_end = text.find('\n') + 1;
  out << text.substr(0, header_end);
  for (const auto& r : dup.records) {
    ps::DatasetManifest single;
    single.records.push_back(r);
    const auto s = ps::serialize_manifest(single);
    out << s.substr(s.find('\n') + 1);
  }
  out.close();
  try {
    ps::read_manifest(dir / "dup.jsonl");
    FAIL() << "expected ValidationError";
  } catch (const ps::ValidationError& e) {
    EXPECT_EQ(e.rule(), "duplicate point_id");
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos) << e.what();
  }

  std::ofstream(dir / "v2.jsonl") << R"({"format":"phenosample-manifest","format_version":2})" << "\n";
  EXPECT_THROW(ps::read_manifest(dir / "v2.jsonl"), ps::Error);
  std::ofstream(dir / "empty.jsonl") << "";
  EXPECT_THROW(ps::read_manifest(dir / "empty.jsonl"), ps::DecodeError);
}

TEST(Manifest, Summary) {
  ps::DatasetManifest all4;
  for (int i = 0; i < 6; ++i) all4.records.push_back(record(i, 4, 0.05));
  const auto s = ps::summarize(all4);
  EXPECT_EQ(s.coverage, (std::map<int, std::size_t>{{4, 6}}));
  EXPECT_DOUBLE_EQ(s.mean_cloud, 0.05);
  EXPECT_EQ(s.scenes, 24u);
  const auto empty = ps::summarize({});
  EXPECT_EQ(empty.records, 0u);
  EXPECT_EQ(empty.mean_cloud, 0.0);
  EXPECT_TRUE(empty.coverage.empty());
  const auto mixed = ps::summarize(manifest(10));
  EXPECT_EQ(mixed.weight_histogram.at(0.25), 2u);
  EXPECT_EQ(mixed.weight_histogram.at(1.0), 8u);
}

TEST(Manifest, AssembleDropsExcludedAndNeedsInputs) {
  const std::vector<ps::GeoPoint> pts{{1, 10.0, 20.0}, {2, 11.0, 21.0}};
  const auto w = ps::season_windows({100, 160, 250, 300});
  const ps::WindowTable windows{{1, w}, {2, w}};
  ps::SeasonalSelection a;
  a.point_id = 1;
  a.scenes[0] = ps::SceneRecord{"x", 1, at_doy(2020, 120), 0.1};
  a.scenes[2] = ps::SceneRecord{"y", 1, at_doy(2021, 260), 0.0};
  ps::SeasonalSelection b;
  b.point_id = 2;
  b.excluded = true;
  const std::vector<ps::SeasonalSelection> sel{a, b};
  const std::vector<ps::LocationWeight> weights{{1, 2.0, false, true, false}, {2, 1.0, false, false, false}};
  const auto m = ps::assemble_manifest({}, pts, sel, windows, weights);
  ASSERT_EQ(m.records.size(), 1u);
  EXPECT_EQ(m.records[0].point_id, 1);
  EXPECT_EQ(m.records[0].weight, 2.0);
  ASSERT_EQ(m.records[0].seasons.size(), 2u);
  EXPECT_EQ(m.records[0].seasons[1].season, 2);
  EXPECT_EQ(m.records[0].seasons[1].window_start, 250);
  EXPECT_EQ(m.records[0].patch_px * m.records[0].gsd_m, 2560.0);
  EXPECT_THROW(ps::assemble_manifest({}, pts, sel, windows, {}), ps::Error);
}
