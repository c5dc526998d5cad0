// cdrmob: CDR mobility analytics over a Voronoi sector partition.
// Subcommands: synth, ingest, density, stats, traj. All I/O is file-based
// CSV / key-value text; outputs carry provenance comments and are
// byte-reproducible given fixed seeds.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdrmob/csv.hpp"
#include "cdrmob/dayclass.hpp"
#include "cdrmob/density.hpp"
#include "cdrmob/errors.hpp"
#include "cdrmob/fits.hpp"
#include "cdrmob/histogram.hpp"
#include "cdrmob/ingest.hpp"
#include "cdrmob/intrinsic.hpp"
#include "cdrmob/kvconfig.hpp"
#include "cdrmob/mobility.hpp"
#include "cdrmob/sectors.hpp"
#include "cdrmob/synth.hpp"
#include "cdrmob/towers.hpp"
#include "cdrmob/trajectory.hpp"
#include "cdrmob/voronoi.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using cdrmob::format_double;

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

using Params = std::vector<std::pair<std::string, std::string>>;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cdrmob::IoError("cannot write file: " + path);
  return out;
}

cdrmob::RegionLimits region_limits(double span) {
  if (span <= 0) return cdrmob::RegionLimits::unbounded();
  return cdrmob::RegionLimits{span, span};
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string cdr, towers, out, config;
  bool strict = false;
  double max_span = 30'000.0;
  unsigned threads = 0;
};

int run_ingest(const IngestArgs& args) {
  Timer timer;
  const auto towers =
      cdrmob::TowerMap::load_csv(args.towers, region_limits(args.max_span));
  cdrmob::ParseOptions options;
  options.strict = args.strict;
  options.threads = args.threads;
  if (!args.config.empty())
    options.apply_calendar(cdrmob::DayClassConfig::load(args.config));

  auto parsed = cdrmob::parse_cdr_file(args.cdr, towers, options);
  const auto stats = parsed.stats;
  const auto index = cdrmob::build_subscriber_index(std::move(parsed.records));
  cdrmob::save_index_csv(index, towers, args.out);

  std::cout << "summary: lines=" << stats.lines << " parsed=" << stats.parsed
            << " malformed=" << stats.malformed
            << " unknown_activity=" << stats.unknown_activity
            << " unknown_tower=" << stats.unknown_tower
            << " out_of_window=" << stats.out_of_window
            << " excluded_hours=" << stats.excluded_hours
            << " subscribers=" << index.counts.subscribers_kept
            << " dropped_single=" << index.counts.subscribers_dropped
            << " records_kept=" << index.counts.kept_records
            << " elapsed_s=" << timer.seconds() << '\n';
  return 0;
}

// ---------------------------------------------------------------- density

struct DensityArgs {
  std::string index, towers, sectors, config, out;
  double max_span = 30'000.0;
  unsigned threads = 0;
};

int run_density(const DensityArgs& args) {
  Timer timer;
  const auto towers =
      cdrmob::TowerMap::load_csv(args.towers, region_limits(args.max_span));
  cdrmob::KeyValueFile kv;
  if (!args.config.empty()) kv = cdrmob::KeyValueFile::load(args.config);
  const auto calendar = args.config.empty()
                            ? cdrmob::DayClassConfig::armada2008()
                            : cdrmob::DayClassConfig::from_kv(kv);

  cdrmob::ParseOptions parse_options;
  parse_options.threads = args.threads;
  const auto index = cdrmob::load_index_csv(args.index, towers, parse_options);

  const auto sectors =
      args.sectors.empty()
          ? cdrmob::build_sectors_geometric(
                towers, cdrmob::center_rect_from_kv(kv, towers))
          : cdrmob::build_sectors_from_csv(towers, args.sectors);

  const auto table =
      cdrmob::density_table(index, sectors, calendar, args.threads);

  auto out = open_out(args.out);
  Params params = {{"index", args.index},
                   {"towers", args.towers},
                   {"sectors", args.sectors.empty() ? "geometric" : args.sectors},
                   {"config", args.config.empty() ? "default-2008" : args.config}};
  cdrmob::write_provenance(out, kVersion, "density", params);
  table.write_csv(out);

  std::cout << "summary: records=" << table.total()
            << " out_of_window=" << table.out_of_window()
            << " days=" << table.days().size()
            << " elapsed_s=" << timer.seconds() << '\n';
  return 0;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
  std::string index, towers, out, config;
  std::string measure = "dt";
  std::string dayclass = "all";
  std::string activities;  // comma-separated codes; empty = all
  std::string groups;  // comma-separated count edges
  std::string binning = "log";
  int bins = 0;
  double dt_min = 15.0, dt_max = 1440.0;
  double dr_cutoff = cdrmob::kDefaultDisplacementCutoff;
  double fit_xmin = 0.0;  // 0: data-driven
  double max_span = 30'000.0;
  unsigned threads = 0;
};

struct MeasureSample {
  double value;
  cdrmob::EpochSeconds t0;
  std::uint32_t subscriber;
};

void write_fit_comments(std::ostream& os, const std::string& group,
                        std::span<const double> values, double fit_xmin) {
  namespace cm = cdrmob;
  // Exponential fit per the waiting-time law.
  try {
    const auto fit = cm::fit_exponential(values);
    os << "# fit group=" << group << " model=exponential mu="
       << format_double(fit.mu)
       << " loglik=" << format_double(fit.log_likelihood) << " n=" << fit.n
       << '\n';
  } catch (const cm::Error& e) {
    os << "# fit group=" << group << " model=exponential error=" << e.what()
       << '\n';
  }
  // Truncated power law over [x_min, max sample].
  try {
    double x_min = fit_xmin;
    if (x_min <= 0) {
      x_min = std::numeric_limits<double>::infinity();
      for (double v : values)
        if (v > 0) x_min = std::min(x_min, v);
    }
    if (!std::isfinite(x_min))
      throw cm::InvalidSupport("no positive samples for the power-law fit");
    const auto fit = cm::fit_truncated_power_law(values, x_min);
    os << "# fit group=" << group << " model=truncated_power_law beta="
       << format_double(fit.beta) << " kappa=" << format_double(fit.kappa)
       << " xmin=" << format_double(fit.x_min)
       << " loglik=" << format_double(fit.log_likelihood)
       << " exp_mu=" << format_double(fit.exp_mu)
       << " exp_loglik=" << format_double(fit.exp_log_likelihood)
       << " n=" << fit.n << '\n';
  } catch (const cm::Error& e) {
    os << "# fit group=" << group
       << " model=truncated_power_law error=" << e.what() << '\n';
  }
}

void write_histogram_rows(std::ostream& os, std::span<const double> values,
                          const cdrmob::Binning& binning,
                          const std::string& group) {
  if (values.empty()) return;
  const auto dist = cdrmob::empirical_distribution(values, binning);
  for (std::size_t i = 0; i < dist.bins(); ++i)
    os << format_double(dist.center(i)) << ',' << format_double(dist.density[i])
       << ',' << group << '\n';
}

int run_stats(const StatsArgs& args) {
  namespace cm = cdrmob;
  Timer timer;
  const auto towers =
      cm::TowerMap::load_csv(args.towers, region_limits(args.max_span));
  cm::ParseOptions parse_options;
  parse_options.threads = args.threads;
  auto index = cm::load_index_csv(args.index, towers, parse_options);
  if (!args.activities.empty()) {
    cm::ActivityMask mask{};
    std::string_view rest = args.activities;
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const auto code = cm::KeyValueFile::trim(rest.substr(0, comma));
      const auto activity = cm::parse_activity_code(code);
      if (!activity)
        throw cm::InvalidConfig("unknown activity code '" + std::string(code) +
                                "'");
      mask[static_cast<std::size_t>(*activity)] = true;
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    index = cm::filter_by_activity(index, mask);
  }
  const auto calendar = args.config.empty()
                            ? cm::DayClassConfig::armada2008()
                            : cm::DayClassConfig::load(args.config);

  cm::Binning binning = args.binning == "linear"
                            ? cm::Binning::linear(args.bins)
                            : cm::Binning::logarithmic(args.bins);

  // Gather per-measure samples.
  std::vector<MeasureSample> samples;
  std::uint64_t dropped = 0;
  if (args.measure == "dt") {
    auto result = cm::inter_event_times(
        index, cm::DtWindow{args.dt_min, args.dt_max}, args.threads);
    dropped = result.dropped_below + result.dropped_above;
    samples.reserve(result.samples.size());
    for (const auto& s : result.samples)
      samples.push_back(MeasureSample{s.dt_minutes, s.t0, s.subscriber});
  } else if (args.measure == "dr") {
    auto result = cm::displacements(index, towers, args.dr_cutoff, args.threads);
    dropped = result.dropped_above;
    samples.reserve(result.samples.size());
    for (const auto& s : result.samples)
      samples.push_back(MeasureSample{s.dr_meters, s.t0, s.subscriber});
  } else if (args.measure == "rg" || args.measure == "rg-series") {
    // handled below; rg samples are per subscriber, not per pair
  } else {
    throw cm::InvalidConfig("unknown measure '" + args.measure + "'");
  }

  const bool want_work = args.dayclass == "work";
  const bool want_off = args.dayclass == "off";
  const auto keep_day = [&](cm::EpochSeconds t) {
    if (!want_work && !want_off) return true;
    const auto cls = cm::classify_day(cm::date_of(t), calendar);
    return want_work ? cls.kind == cm::DayKind::work
                     : cls.kind == cm::DayKind::off;
  };

  auto out = open_out(args.out);
  Params params = {{"index", args.index},       {"towers", args.towers},
                   {"measure", args.measure},   {"dayclass", args.dayclass},
                   {"activities", args.activities},
                   {"groups", args.groups},     {"binning", args.binning},
                   {"bins", std::to_string(args.bins)},
                   {"dt_min", format_double(args.dt_min)},
                   {"dt_max", format_double(args.dt_max)},
                   {"dr_cutoff", format_double(args.dr_cutoff)}};
  cdrmob::write_provenance(out, kVersion, "stats", params);

  std::uint64_t emitted = 0;

  if (args.measure == "rg-series") {
    // Distribution of prefix radii at each day boundary, one block per day.
    const auto days = calendar.window_days();
    if (days.empty())
      throw cm::InvalidConfig("rg-series needs a bounded window (config)");
    std::vector<std::vector<double>> per_day(days.size());
    for (const auto& sub : index.subscribers) {
      const auto series =
          cm::rg_time_series(cm::trajectory_of(sub, towers), days);
      for (const auto& [day, value] : series) {
        if (value <= 0) continue;
        const std::size_t di = static_cast<std::size_t>(day - days.front());
        per_day[di].push_back(value);
      }
    }
    std::vector<char> emit_day(days.size(), 1);
    for (std::size_t d = 0; d < days.size(); ++d) {
      if (per_day[d].empty()) {
        emit_day[d] = 0;
        continue;
      }
      if (want_work || want_off) {
        const auto cls =
            cm::classify_day(cm::civil_from_days(days[d]), calendar);
        const bool is_work = cls.kind == cm::DayKind::work;
        if (want_work != is_work) emit_day[d] = 0;
      }
    }
    for (std::size_t d = 0; d < days.size(); ++d)
      if (emit_day[d])
        write_fit_comments(out,
                           cm::format_iso_date(cm::civil_from_days(days[d])),
                           per_day[d], args.fit_xmin);
    out << "bin_center,density,day\n";
    for (std::size_t d = 0; d < days.size(); ++d) {
      if (!emit_day[d]) continue;
      emitted += per_day[d].size();
      write_histogram_rows(out, per_day[d], binning,
                           cm::format_iso_date(cm::civil_from_days(days[d])));
    }
  } else if (args.measure == "rg") {
    // One radius per subscriber over its day-class-filtered records.
    std::vector<double> values;
    values.reserve(index.subscribers.size());
    for (const auto& sub : index.subscribers) {
      cm::Trajectory traj;
      traj.subscriber_id = sub.id;
      for (const auto& e : sub.events)
        if (keep_day(e.t)) {
          const auto& t = towers.tower(e.tower);
          traj.points.push_back(cm::TrajPoint{e.t, t.x, t.y});
        }
      if (traj.points.size() < 2) continue;
      values.push_back(cm::radius_of_gyration(traj).rg);
    }
    if (values.empty()) throw cm::EmptyInput("no radii to report");
    emitted = values.size();
    std::vector<double> positive;
    positive.reserve(values.size());
    for (double v : values)
      if (v > 0) positive.push_back(v);
    write_fit_comments(out, "all", positive, args.fit_xmin);
    out << "bin_center,density,group\n";
    write_histogram_rows(out, positive, binning, "all");
  } else {
    // dt / dr sample streams, optionally split by activity-count groups.
    std::vector<MeasureSample> kept;
    kept.reserve(samples.size());
    for (const auto& s : samples)
      if (keep_day(s.t0)) kept.push_back(s);

    std::vector<std::vector<std::uint32_t>> groups;
    std::vector<std::string> group_names;
    if (!args.groups.empty()) {
      std::vector<std::uint64_t> edges;
      for (const auto& item :
           cm::KeyValueFile::parse_text("edges = " + args.groups)
               .get_list_or("edges")) {
        const auto v = cm::parse_u64(item);
        if (!v) throw cm::InvalidConfig("bad group edge '" + item + "'");
        edges.push_back(*v);
      }
      groups = cm::activity_sampling_groups(index, edges);
      for (std::size_t g = 0; g < groups.size(); ++g)
        group_names.push_back("g" + std::to_string(g));
    } else {
      groups.emplace_back();  // sentinel: everything
      group_names.push_back("all");
    }

    std::vector<std::vector<double>> group_values(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::vector<double>& values = group_values[g];
      if (args.groups.empty()) {
        values.reserve(kept.size());
        for (const auto& s : kept) values.push_back(s.value);
      } else {
        std::vector<char> member(index.subscribers.size(), 0);
        for (auto i : groups[g]) member[i] = 1;
        for (const auto& s : kept)
          if (member[s.subscriber]) values.push_back(s.value);
      }
      // Zero-valued steps (same tower twice) cannot sit on a log axis.
      if (binning.kind == cm::Binning::Kind::logarithmic)
        std::erase_if(values, [](double v) { return v <= 0; });
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (group_values[g].empty()) continue;
      std::vector<double> positive;
      positive.reserve(group_values[g].size());
      for (double v : group_values[g])
        if (v > 0) positive.push_back(v);
      write_fit_comments(out, group_names[g], positive, args.fit_xmin);
    }
    out << "bin_center,density,group\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (group_values[g].empty()) continue;
      emitted += group_values[g].size();
      write_histogram_rows(out, group_values[g], binning, group_names[g]);
    }
  }

  std::cout << "summary: records=" << index.counts.kept_records
            << " samples=" << emitted << " dropped=" << dropped
            << " elapsed_s=" << timer.seconds() << '\n';
  return 0;
}

// ---------------------------------------------------------------- traj

struct TrajArgs {
  std::string index, towers, subscriber, out;
  bool intrinsic = false;
  double max_span = 30'000.0;
  unsigned threads = 0;
};

int run_traj(const TrajArgs& args) {
  namespace cm = cdrmob;
  Timer timer;
  const auto towers =
      cm::TowerMap::load_csv(args.towers, region_limits(args.max_span));
  cm::ParseOptions parse_options;
  parse_options.threads = args.threads;
  const auto index = cm::load_index_csv(args.index, towers, parse_options);
  const auto slot = index.find(args.subscriber);
  if (!slot)
    throw cm::EmptyTrajectory("subscriber '" + args.subscriber +
                              "' not in the index");
  const auto traj = cm::trajectory_of(index.subscribers[*slot], towers);

  auto out = open_out(args.out);
  Params params = {{"index", args.index},
                   {"towers", args.towers},
                   {"subscriber", args.subscriber},
                   {"frame", args.intrinsic ? "intrinsic" : "raw"}};
  cm::write_provenance(out, kVersion, "traj", params);

  const auto write_frame = [&](const cm::IntrinsicFrame& f) {
    out << "# frame cm_x=" << format_double(f.cm_x)
        << " cm_y=" << format_double(f.cm_y)
        << " theta=" << format_double(f.theta) << " flipped=" << f.flipped
        << " sigma_x=" << format_double(f.sigma_x)
        << " sigma_y=" << format_double(f.sigma_y)
        << " mf_x=" << format_double(f.mf_x)
        << " mf_y=" << format_double(f.mf_y) << '\n';
  };

  const cm::Trajectory* emit = &traj;
  cm::IntrinsicResult result;
  if (args.intrinsic) {
    result = cm::to_intrinsic(traj);
    write_frame(result.frame);
    emit = &result.transformed;
  } else {
    try {
      write_frame(cm::to_intrinsic(traj).frame);
    } catch (const cm::Error& e) {
      out << "# frame error=" << e.what() << '\n';
    }
  }

  out << "t,x,y\n";
  for (const auto& p : emit->points)
    out << cm::format_iso_datetime(p.t) << ',' << format_double(p.x) << ','
        << format_double(p.y) << '\n';

  std::cout << "summary: records=" << emit->points.size() << " dropped=0"
            << " elapsed_s=" << timer.seconds() << '\n';
  return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config, out_cdr, out_towers, out_manifest;
  unsigned threads = 0;
};

int run_synth(const SynthArgs& args) {
  Timer timer;
  const auto cfg = cdrmob::GeneratorConfig::load(args.config);
  const auto stats = cdrmob::generate_population(
      cfg, args.out_cdr, args.out_towers, args.out_manifest, args.threads);
  std::cout << "summary: records=" << stats.records
            << " subscribers=" << stats.subscribers
            << " towers=" << stats.towers << " dropped=0"
            << " elapsed_s=" << timer.seconds() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CDR mobility analytics: ingest, densities, mobility "
               "statistics, intrinsic-frame trajectories, synthetic traces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  IngestArgs ingest;
  auto* cmd_ingest =
      app.add_subcommand("ingest", "parse + validate a CDR file into an index");
  cmd_ingest->add_option("--cdr", ingest.cdr, "CDR CSV input")->required();
  cmd_ingest->add_option("--towers", ingest.towers, "tower CSV")->required();
  cmd_ingest->add_option("--out", ingest.out, "index CSV output")->required();
  cmd_ingest->add_option("--config", ingest.config,
                         "calendar config (window, excluded hours)");
  cmd_ingest->add_flag("--strict", ingest.strict,
                       "abort on the first bad line");
  cmd_ingest->add_option("--max-span", ingest.max_span,
                         "max tower extent in meters, <=0 unbounded");
  cmd_ingest->add_option("--threads", ingest.threads, "worker threads");

  DensityArgs density;
  auto* cmd_density = app.add_subcommand(
      "density", "sector x hour / sector x day activity densities");
  cmd_density->add_option("--index", density.index, "index CSV")->required();
  cmd_density->add_option("--towers", density.towers, "tower CSV")->required();
  cmd_density->add_option("--sectors", density.sectors,
                          "sector CSV (tower_id,sector); default geometric");
  cmd_density->add_option("--config", density.config,
                          "calendar + sector-rectangle config");
  cmd_density->add_option("--out", density.out, "density CSV")->required();
  cmd_density->add_option("--max-span", density.max_span,
                          "max tower extent in meters, <=0 unbounded");
  cmd_density->add_option("--threads", density.threads, "worker threads");

  StatsArgs stats;
  auto* cmd_stats = app.add_subcommand(
      "stats", "waiting-time / displacement / gyration distributions + fits");
  cmd_stats->add_option("--index", stats.index, "index CSV")->required();
  cmd_stats->add_option("--towers", stats.towers, "tower CSV")->required();
  cmd_stats->add_option("--measure", stats.measure,
                        "dt | dr | rg | rg-series")->required();
  cmd_stats->add_option("--dayclass", stats.dayclass, "all | work | off");
  cmd_stats->add_option("--activities", stats.activities,
                        "activity codes to keep, e.g. CALL_IN,CALL_OUT "
                        "(default: all)");
  cmd_stats->add_option("--groups", stats.groups,
                        "activity-count group edges, e.g. 10,100");
  cmd_stats->add_option("--binning", stats.binning, "log | linear");
  cmd_stats->add_option("--bins", stats.bins, "bin count (0 = default)");
  cmd_stats->add_option("--dt-min", stats.dt_min, "waiting-time window, min");
  cmd_stats->add_option("--dt-max", stats.dt_max, "waiting-time window, max");
  cmd_stats->add_option("--dr-cutoff", stats.dr_cutoff,
                        "displacement cutoff, meters");
  cmd_stats->add_option("--fit-xmin", stats.fit_xmin,
                        "power-law fit lower bound (0 = data minimum)");
  cmd_stats->add_option("--config", stats.config, "calendar config");
  cmd_stats->add_option("--out", stats.out, "output CSV")->required();
  cmd_stats->add_option("--max-span", stats.max_span,
                        "max tower extent in meters, <=0 unbounded");
  cmd_stats->add_option("--threads", stats.threads, "worker threads");

  TrajArgs traj;
  auto* cmd_traj = app.add_subcommand(
      "traj", "one subscriber's trajectory, raw or intrinsic frame");
  cmd_traj->add_option("--index", traj.index, "index CSV")->required();
  cmd_traj->add_option("--towers", traj.towers, "tower CSV")->required();
  cmd_traj->add_option("--subscriber", traj.subscriber, "subscriber alias")
      ->required();
  auto* raw_flag = cmd_traj->add_flag("--raw", "emit observed coordinates");
  cmd_traj->add_flag("--intrinsic", traj.intrinsic,
                     "emit intrinsic-frame coordinates")
      ->excludes(raw_flag);
  cmd_traj->add_option("--out", traj.out, "output CSV")->required();
  cmd_traj->add_option("--max-span", traj.max_span,
                       "max tower extent in meters, <=0 unbounded");
  cmd_traj->add_option("--threads", traj.threads, "worker threads");

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand(
      "synth", "generate a synthetic population with a known ground truth");
  cmd_synth->add_option("--config", synth.config, "generator config")
      ->required();
  cmd_synth->add_option("--out-cdr", synth.out_cdr, "CDR CSV output")
      ->required();
  cmd_synth->add_option("--out-towers", synth.out_towers, "tower CSV output")
      ->required();
  cmd_synth->add_option("--out-manifest", synth.out_manifest,
                        "ground-truth manifest output")
      ->required();
  cmd_synth->add_option("--threads", synth.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_ingest->parsed()) return run_ingest(ingest);
    if (cmd_density->parsed()) return run_density(density);
    if (cmd_stats->parsed()) return run_stats(stats);
    if (cmd_traj->parsed()) return run_traj(traj);
    if (cmd_synth->parsed()) return run_synth(synth);
  } catch (const cdrmob::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
