#include <cmath>
#include <vector>

#include <catch2/catch.hpp>

#include "cdrmob/fits.hpp"
#include "cdrmob/ingest.hpp"
#include "cdrmob/mobility.hpp"
#include "cdrmob/prng.hpp"
#include "cdrmob/towers.hpp"
#include "cdrmob/trajectory.hpp"

using namespace cdrmob;

namespace {

TowerMap grid_towers() {
  // T0 at origin, T1 at (3000, 4000): a 3-4-5 triangle, distance 5000
  return TowerMap::from_towers({Tower{"T0", 0, 0, 1},
                                Tower{"T1", 3000, 4000, 1},
                                Tower{"T2", 10'000, 0, 1}});
}

SubscriberIndex make_index(
    const std::vector<std::pair<std::string, std::string>>& events,
    const TowerMap& towers, std::uint32_t tower = 0) {
  std::vector<CdrRecord> records;
  for (const auto& [sub, ts] : events)
    records.push_back(CdrRecord{sub, *parse_iso_datetime(ts), tower, 1,
                                ActivityType::call_in});
  return build_subscriber_index(std::move(records));
}

Trajectory traj_of(std::vector<std::pair<double, double>> pts) {
  Trajectory t;
  t.subscriber_id = "x";
  EpochSeconds when = 0;
  for (auto [x, y] : pts) t.points.push_back(TrajPoint{when += 60, x, y});
  return t;
}

}  // namespace

TEST_CASE("a 15-minute gap yields one waiting-time sample") {
  const auto towers = grid_towers();
  const auto index = make_index(
      {{"A", "2008-07-05T10:00:00"}, {"A", "2008-07-05T10:15:00"}}, towers);
  const auto result = inter_event_times(index);
  REQUIRE(result.samples.size() == 1);
  CHECK(result.samples[0].dt_minutes == Approx(15.0));
  CHECK(result.dropped_below == 0);
  CHECK(result.dropped_above == 0);
}

TEST_CASE("waiting times outside the window are counted and dropped") {
  const auto towers = grid_towers();
  const auto index = make_index({{"A", "2008-07-05T10:00:00"},
                                 {"A", "2008-07-05T10:10:00"},    // 10 min
                                 {"A", "2008-07-07T10:11:00"}},   // ~2881 min
                                towers);
  const auto result = inter_event_times(index);
  CHECK(result.samples.empty());
  CHECK(result.dropped_below == 1);
  CHECK(result.dropped_above == 1);

  const auto open = inter_event_times(index, DtWindow::open());
  CHECK(open.samples.size() == 2);
}

TEST_CASE("displacement of same-tower steps is exactly zero") {
  const auto towers = grid_towers();
  const auto index = make_index(
      {{"A", "2008-07-05T10:00:00"}, {"A", "2008-07-05T11:00:00"}}, towers);
  const auto result = displacements(index, towers);
  REQUIRE(result.samples.size() == 1);
  CHECK(result.samples[0].dr_meters == 0.0);
  CHECK(result.samples[0].dt_minutes == Approx(60.0));
}

TEST_CASE("a 3-4-5 hop measures 5000 m; the cutoff drops long hops") {
  const auto towers = grid_towers();
  std::vector<CdrRecord> records = {
      CdrRecord{"A", *parse_iso_datetime("2008-07-05T10:00:00"), 0, 1,
                ActivityType::call_in},
      CdrRecord{"A", *parse_iso_datetime("2008-07-05T11:00:00"), 1, 1,
                ActivityType::call_out},
  };
  auto index = build_subscriber_index(std::move(records));
  const auto result = displacements(index, towers);
  REQUIRE(result.samples.size() == 1);
  CHECK(result.samples[0].dr_meters == Approx(5000.0).epsilon(1e-12));

  // 8e4 m exceeds the default 7.23e4 cutoff
  std::vector<Tower> far = {Tower{"A", 0, 0, 1}, Tower{"B", 8.0e4, 0, 1}};
  const auto towers2 =
      TowerMap::from_towers(std::move(far), RegionLimits::unbounded());
  std::vector<CdrRecord> records2 = {
      CdrRecord{"A", *parse_iso_datetime("2008-07-05T10:00:00"), 0, 1,
                ActivityType::call_in},
      CdrRecord{"A", *parse_iso_datetime("2008-07-05T11:00:00"), 1, 1,
                ActivityType::call_out},
  };
  auto index2 = build_subscriber_index(std::move(records2));
  const auto result2 = displacements(index2, towers2);
  CHECK(result2.samples.empty());
  CHECK(result2.dropped_above == 1);
  CHECK(result2.pairs == 1);
}

TEST_CASE("sample count identity: pairs = samples + dropped") {
  SplitMix64 rng(66);
  std::vector<Tower> ts;
  for (int i = 0; i < 40; ++i)
    ts.push_back(Tower{"T" + std::to_string(i), rng.next_double() * 90'000,
                       rng.next_double() * 90'000, 1});
  const auto towers =
      TowerMap::from_towers(std::move(ts), RegionLimits::unbounded());
  std::vector<CdrRecord> records;
  const EpochSeconds base = *parse_iso_datetime("2008-07-04T00:00:00");
  for (int i = 0; i < 4000; ++i)
    records.push_back(CdrRecord{
        "S" + std::to_string(rng.next_below(100)),
        base + static_cast<EpochSeconds>(rng.next_below(86400 * 10)),
        static_cast<std::uint32_t>(rng.next_below(40)), 1,
        ActivityType::sms_in});
  const auto index = build_subscriber_index(std::move(records));
  std::uint64_t expected_pairs = 0;
  for (const auto& s : index.subscribers) expected_pairs += s.events.size() - 1;

  const auto result = displacements(index, towers);
  CHECK(result.pairs == expected_pairs);
  CHECK(result.samples.size() + result.dropped_above == expected_pairs);
}

// ---------------------------------------------------------------- gyration

TEST_CASE("radius of gyration basics") {
  CHECK_THROWS_AS(radius_of_gyration(Trajectory{}), EmptyTrajectory);

  CHECK(radius_of_gyration(traj_of({{5, 5}})).rg == 0.0);

  // two points distance d apart: rg = d / 2
  const auto two = radius_of_gyration(traj_of({{0, 0}, {3000, 4000}}));
  CHECK(two.rg == Approx(2500.0).epsilon(1e-12));
  CHECK(two.n_positions == 2);
}

TEST_CASE("gyration radius matches an independent high-precision oracle") {
  SplitMix64 rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::pair<double, double>> pts;
    const int n = 10 + static_cast<int>(rng.next_below(90));
    for (int i = 0; i < n; ++i)
      pts.push_back({rng.next_double() * 30'000, rng.next_double() * 30'000});
    const auto traj = traj_of(pts);
    const double rg = radius_of_gyration(traj).rg;

    // long-double re-evaluation, written separately
    long double mx = 0, my = 0;
    for (auto [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= n;
    my /= n;
    long double acc = 0;
    for (auto [x, y] : pts)
      acc += (x - mx) * (x - mx) + (y - my) * (y - my);
    const double expected = static_cast<double>(std::sqrt(acc / n));
    CHECK(rg == Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("gyration radius is invariant under rotation and translation") {
  SplitMix64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::pair<double, double>> pts;
    const int n = 5 + static_cast<int>(rng.next_below(60));
    for (int i = 0; i < n; ++i)
      pts.push_back({rng.next_double() * 10'000, rng.next_double() * 10'000});
    const double angle = rng.next_double() * 6.28318;
    const double tx = rng.next_double() * 5e5 - 2.5e5;
    const double ty = rng.next_double() * 5e5 - 2.5e5;
    std::vector<std::pair<double, double>> moved;
    for (auto [x, y] : pts)
      moved.push_back({x * std::cos(angle) - y * std::sin(angle) + tx,
                       x * std::sin(angle) + y * std::cos(angle) + ty});
    const double a = radius_of_gyration(traj_of(pts)).rg;
    const double b = radius_of_gyration(traj_of(moved)).rg;
    CHECK(b == Approx(a).epsilon(1e-9));
  }
}

TEST_CASE("prefix series equals per-prefix recomputation") {
  SplitMix64 rng(14);
  Trajectory traj;
  traj.subscriber_id = "w";
  const EpochSeconds base = *parse_iso_datetime("2008-07-04T00:00:00");
  double x = 15'000, y = 15'000;
  for (int i = 0; i < 400; ++i) {
    x += rng.next_double() * 2000 - 1000;
    y += rng.next_double() * 2000 - 1000;
    traj.points.push_back(
        TrajPoint{base + static_cast<EpochSeconds>(rng.next_below(86400 * 12)),
                  x, y});
  }
  std::sort(traj.points.begin(), traj.points.end(),
            [](const TrajPoint& a, const TrajPoint& b) { return a.t < b.t; });

  const auto days = DayClassConfig::armada2008().window_days();
  const auto series = rg_time_series(traj, days);
  REQUIRE(!series.empty());

  for (const auto& [day, value] : series) {
    Trajectory prefix;
    prefix.subscriber_id = "w";
    const EpochSeconds end = (day + 1) * 86400;
    for (const auto& p : traj.points)
      if (p.t < end) prefix.points.push_back(p);
    REQUIRE(!prefix.points.empty());
    CHECK(value == Approx(radius_of_gyration(prefix).rg).epsilon(1e-9));
  }
}

TEST_CASE("stationary subscriber has an all-zero series") {
  Trajectory traj;
  const EpochSeconds base = *parse_iso_datetime("2008-07-05T08:00:00");
  for (int i = 0; i < 10; ++i)
    traj.points.push_back(TrajPoint{base + i * 3600, 100.0, 200.0});
  const auto days = DayClassConfig::armada2008().window_days();
  const auto series = rg_time_series(traj, days);
  REQUIRE(!series.empty());
  for (const auto& [day, value] : series) CHECK(value == 0.0);
}

TEST_CASE("activity ceases: the series stays constant afterwards") {
  Trajectory traj;
  const EpochSeconds base = *parse_iso_datetime("2008-07-04T08:00:00");
  traj.points.push_back(TrajPoint{base, 0, 0});
  traj.points.push_back(TrajPoint{base + 600, 4000, 0});
  traj.points.push_back(TrajPoint{base + 1200, 0, 3000});
  const auto days = DayClassConfig::armada2008().window_days();
  const auto series = rg_time_series(traj, days);
  REQUIRE(series.size() == days.size());
  for (const auto& [day, value] : series)
    CHECK(value == Approx(series.front().second).epsilon(1e-12));
}

// ---------------------------------------------------------------- splits

TEST_CASE("day-class split covers samples exactly") {
  const auto cfg = DayClassConfig::armada2008();

  std::vector<InterEventSample> samples;
  SplitMix64 rng(15);
  const EpochSeconds base = *parse_iso_datetime("2008-07-04T00:00:00");
  for (int i = 0; i < 1000; ++i) {
    InterEventSample s;
    s.t0 = base + static_cast<EpochSeconds>(rng.next_below(86400 * 12));
    s.dt_minutes = 30;
    samples.push_back(s);
  }
  const auto split = split_by_dayclass<InterEventSample>(samples, cfg);
  CHECK(split.work.size() + split.off.size() == samples.size());

  // everything on an off day lands in `off`
  std::vector<InterEventSample> sunday(10);
  for (auto& s : sunday) s.t0 = *parse_iso_datetime("2008-07-06T12:00:00");
  const auto split2 = split_by_dayclass<InterEventSample>(sunday, cfg);
  CHECK(split2.off.size() == 10);
  CHECK(split2.work.empty());

  const auto empty =
      split_by_dayclass<InterEventSample>(std::vector<InterEventSample>{}, cfg);
  CHECK(empty.work.empty());
  CHECK(empty.off.empty());
}

TEST_CASE("activity groups split by record count") {
  const auto towers = grid_towers();
  std::vector<CdrRecord> records;
  const EpochSeconds base = *parse_iso_datetime("2008-07-04T00:00:00");
  const auto add = [&](const std::string& id, int count) {
    for (int i = 0; i < count; ++i)
      records.push_back(CdrRecord{id, base + i * 60, 0, 1,
                                  ActivityType::call_in});
  };
  add("low", 5);
  add("mid", 50);
  add("high", 500);
  const auto index = build_subscriber_index(std::move(records));

  const std::vector<std::uint64_t> edges = {10, 100};
  const auto groups = activity_sampling_groups(index, edges);
  REQUIRE(groups.size() == 3);
  REQUIRE(groups[0].size() == 1);
  REQUIRE(groups[1].size() == 1);
  REQUIRE(groups[2].size() == 1);
  CHECK(index.subscribers[groups[0][0]].id == "low");
  CHECK(index.subscribers[groups[1][0]].id == "mid");
  CHECK(index.subscribers[groups[2][0]].id == "high");

  const std::vector<std::uint64_t> bad = {10, 10};
  CHECK_THROWS_AS(activity_sampling_groups(index, bad), InvalidConfig);
}

TEST_CASE("group sizes match a direct counting oracle") {
  SplitMix64 rng(16);
  std::vector<CdrRecord> records;
  const EpochSeconds base = *parse_iso_datetime("2008-07-04T00:00:00");
  std::vector<int> truth(3, 0);
  for (int s = 0; s < 200; ++s) {
    const int count = 2 + static_cast<int>(rng.next_below(60));
    if (count <= 10)
      ++truth[0];
    else if (count <= 30)
      ++truth[1];
    else
      ++truth[2];
    for (int i = 0; i < count; ++i)
      records.push_back(CdrRecord{"S" + std::to_string(s),
                                  base + i * 60 + s, 0, 1,
                                  ActivityType::sms_out});
  }
  const auto index = build_subscriber_index(std::move(records));
  const std::vector<std::uint64_t> edges = {10, 30};
  const auto groups = activity_sampling_groups(index, edges);
  REQUIRE(groups.size() == 3);
  CHECK(static_cast<int>(groups[0].size()) == truth[0]);
  CHECK(static_cast<int>(groups[1].size()) == truth[1]);
  CHECK(static_cast<int>(groups[2].size()) == truth[2]);
}

TEST_CASE("activity filter drops events and re-applies the two-record rule") {
  const auto towers = grid_towers();
  auto parsed = parse_cdr_text(
      "A,2008-07-05T10:00:00,T0,1,CALL_IN\n"
      "A,2008-07-05T10:30:00,T0,1,HANDOVER\n"
      "A,2008-07-05T11:00:00,T0,1,CALL_OUT\n"
      "B,2008-07-05T10:00:00,T0,1,HANDOVER\n"
      "B,2008-07-05T10:20:00,T0,1,CALL_IN\n",
      towers);
  const auto index = build_subscriber_index(std::move(parsed.records));

  ActivityMask calls_only{};
  calls_only[static_cast<std::size_t>(ActivityType::call_in)] = true;
  calls_only[static_cast<std::size_t>(ActivityType::call_out)] = true;
  const auto filtered = filter_by_activity(index, calls_only);

  // B keeps a single call record and is dropped; A keeps two calls
  REQUIRE(filtered.subscribers.size() == 1);
  CHECK(filtered.subscribers[0].id == "A");
  CHECK(filtered.subscribers[0].events.size() == 2);
  CHECK(filtered.counts.subscribers_dropped == 1);

  // the handover gap disappears: one 60-minute pair instead of two 30s
  const auto dts = inter_event_times(filtered, DtWindow::open());
  REQUIRE(dts.samples.size() == 1);
  CHECK(dts.samples[0].dt_minutes == Approx(60.0));

  const auto everything = filter_by_activity(index, all_activities());
  CHECK(everything.counts.kept_records == index.counts.kept_records);
}

// Lower-activity populations wait longer: with per-group waiting scales
// ordered low-activity = slow, the fitted scales must recover that order.
TEST_CASE("fitted waiting scales order by construction across groups") {
  SplitMix64 rng(17);
  const double mus[3] = {600.0, 120.0, 30.0};  // minutes
  std::vector<CdrRecord> records;
  const EpochSeconds base = *parse_iso_datetime("2008-07-04T00:00:00");
  const EpochSeconds end = *parse_iso_datetime("2008-07-16T00:00:00");
  for (int g = 0; g < 3; ++g) {
    for (int s = 0; s < 150; ++s) {
      const std::string id = "G" + std::to_string(g) + "_" + std::to_string(s);
      double t = static_cast<double>(base);
      while (true) {
        t += -mus[g] * std::log1p(-rng.next_double()) * 60.0;
        if (t >= static_cast<double>(end)) break;
        records.push_back(CdrRecord{id, static_cast<EpochSeconds>(t), 0, 1,
                                    ActivityType::call_in});
      }
    }
  }
  const auto index = build_subscriber_index(std::move(records));

  // group by activity count; slow walkers produce few records
  const std::vector<std::uint64_t> edges = {60, 400};
  const auto groups = activity_sampling_groups(index, edges);
  REQUIRE(groups.size() == 3);

  const auto result = inter_event_times(index, DtWindow::open());
  double mu_hat[3];
  for (int g = 0; g < 3; ++g) {
    std::vector<char> member(index.subscribers.size(), 0);
    for (auto i : groups[g]) member[i] = 1;
    std::vector<double> values;
    for (const auto& s : result.samples)
      if (member[s.subscriber] && s.dt_minutes > 0)
        values.push_back(s.dt_minutes);
    REQUIRE(values.size() >= 100);
    mu_hat[g] = fit_exponential(values).mu;
  }
  CHECK(mu_hat[0] > mu_hat[1]);
  CHECK(mu_hat[1] > mu_hat[2]);
}
