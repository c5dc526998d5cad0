#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "cdrmob/civil_time.hpp"
#include "cdrmob/csv.hpp"
#include "cdrmob/errors.hpp"
#include "cdrmob/fits.hpp"
#include "cdrmob/ingest.hpp"
#include "cdrmob/kvconfig.hpp"
#include "cdrmob/parallel.hpp"
#include "cdrmob/prng.hpp"
#include "cdrmob/towers.hpp"
#include "cdrmob/voronoi.hpp"

namespace cdrmob {

// Density proportional to x^-beta * exp(-x/kappa) on [x_min, x_max].
struct TruncatedPowerLaw {
  double beta = 1.5;
  double kappa = 1.0;
  double x_min = 1.0;
  double x_max = 10.0;
};

// Draws from a truncated power law by numerical inversion of the CDF: a
// cumulative table over panels in u = ln x gives the bracket, a safeguarded
// Newton solve refines inside the panel. Inversion error is ~1e-12 in CDF,
// far below statistical resolution, and every draw lies inside the support.
class TruncatedPowerLawSampler {
 public:
  explicit TruncatedPowerLawSampler(const TruncatedPowerLaw& law) : law_(law) {
    if (!(law.x_min > 0) || !(law.x_max > law.x_min) ||
        !std::isfinite(law.x_max) || !(law.kappa > 0) || !(law.beta >= 0))
      throw InvalidSupport(
          "truncated power law needs 0 < x_min < x_max < inf, kappa > 0, "
          "beta >= 0");
    u_lo_ = std::log(law.x_min);
    u_hi_ = std::log(law.x_max);
    const int panels = std::min(
        2048, std::max(64, static_cast<int>(std::ceil((u_hi_ - u_lo_) / 0.02))));
    edges_.resize(panels + 1);
    for (int i = 0; i <= panels; ++i)
      edges_[i] = u_lo_ + (u_hi_ - u_lo_) * i / panels;

    // Scale by the peak exponent so cumulative sums stay in range.
    g_peak_ = -std::numeric_limits<double>::infinity();
    for (double u : edges_) g_peak_ = std::max(g_peak_, g(u));
    if (law.beta < 1.0) {
      const double u_star = std::log(law.kappa * (1.0 - law.beta));
      if (u_star > u_lo_ && u_star < u_hi_) g_peak_ = std::max(g_peak_, g(u_star));
    }

    cum_.resize(edges_.size());
    cum_[0] = 0;
    for (std::size_t k = 1; k < edges_.size(); ++k)
      cum_[k] = cum_[k - 1] + segment(edges_[k - 1], edges_[k]);
    total_ = cum_.back();
  }

  const TruncatedPowerLaw& law() const { return law_; }

  // CDF at x, for verification against closed forms.
  double cdf(double x) const {
    if (x <= law_.x_min) return 0;
    if (x >= law_.x_max) return 1;
    const double u = std::log(x);
    const std::size_t k = panel_of(u);
    return (cum_[k] + segment(edges_[k], u)) / total_;
  }

  double draw(SplitMix64& rng) const {
    const double target = rng.next_double() * total_;
    const std::size_t k = std::min(
        static_cast<std::size_t>(
            std::upper_bound(cum_.begin(), cum_.end(), target) - cum_.begin()),
        cum_.size() - 1) - 1;
    double lo = edges_[k], hi = edges_[k + 1];
    const double local = target - cum_[k];
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 64; ++it) {
      const double f = segment(edges_[k], u) - local;
      if (f > 0)
        hi = u;
      else
        lo = u;
      if (std::abs(f) <= total_ * 1e-14 || hi - lo < 1e-15 * std::max(1.0, std::abs(u)))
        break;
      const double deriv = std::exp(g(u) - g_peak_);
      double next = u - f / deriv;
      if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
      u = next;
    }
    return std::clamp(std::exp(u), law_.x_min, law_.x_max);
  }

 private:
  double g(double u) const {
    return (1.0 - law_.beta) * u - std::exp(u) / law_.kappa;
  }

  // Integral of e^(g - g_peak) over [a, b] by 16-point Gauss-Legendre.
  double segment(double a, double b) const {
    if (b <= a) return 0;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0;
    for (int j = 0; j < 8; ++j) {
      sum += detail::kGlWeights[j] *
             (std::exp(g(mid - half * detail::kGlNodes[j]) - g_peak_) +
              std::exp(g(mid + half * detail::kGlNodes[j]) - g_peak_));
    }
    return half * sum;
  }

  std::size_t panel_of(double u) const {
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), u);
    const std::size_t k = static_cast<std::size_t>(it - edges_.begin());
    return std::min(std::max<std::size_t>(k, 1), edges_.size() - 1) - 1;
  }

  TruncatedPowerLaw law_;
  double u_lo_ = 0, u_hi_ = 1, g_peak_ = 0, total_ = 1;
  std::vector<double> edges_;
  std::vector<double> cum_;
};

// One-shot draw; bulk callers should hold a TruncatedPowerLawSampler.
inline double sample_truncated_power_law(const TruncatedPowerLaw& law,
                                         SplitMix64& rng) {
  return TruncatedPowerLawSampler(law).draw(rng);
}

// -------------------------------------------------------------------------
// Population generator

struct GeneratorGroup {
  std::uint64_t subscribers = 0;
  double mu_minutes = 1431.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::uint64_t subscribers = 0;
  EpochSeconds window_start = seconds_at(CivilDate{2008, 7, 4});
  EpochSeconds window_end = seconds_at(CivilDate{2008, 7, 16});

  // Waiting model, minutes. Exponential by default; optional hard
  // truncation applied by resampling. Raw (pre-truncation) draws are
  // tallied into the manifest so samplers can be audited.
  bool waiting_is_power_law = false;
  double waiting_mu_minutes = 1431.0;
  double waiting_trunc_min = 0.0;
  double waiting_trunc_max = std::numeric_limits<double>::infinity();
  TruncatedPowerLaw waiting_tpl{1.5, 1431.0, 15.0, 1440.0};
  std::vector<GeneratorGroup> groups;  // mu overrides by subscriber ordinal

  // Jump model, meters.
  TruncatedPowerLaw jump{1.5, 1.0e4, 100.0, 7.23e4};

  // Tower grid. Sites are jittered off the exact lattice (deterministically
  // from the seed): real tower layouts are irregular, and a perfect lattice
  // quantizes snapped distances onto a handful of atoms.
  double region_min_x = 0.0, region_min_y = 0.0;
  double region_max_x = 30'000.0, region_max_y = 30'000.0;
  double tower_spacing = 1'000.0;
  double tower_jitter = 0.35;  // fraction of the spacing, per axis

  // Walk start box; zero-initialized means "the whole tower region".
  // A tower region sized for the walks' wander with starts in a small core
  // keeps snapped positions inside coverage.
  double start_min_x = 0.0, start_min_y = 0.0;
  double start_max_x = 0.0, start_max_y = 0.0;

  bool has_start_box() const {
    return start_max_x > start_min_x && start_max_y > start_min_y;
  }

  void validate() const {
    if (window_end <= window_start)
      throw InvalidConfig("generator: empty observation window");
    if (!(tower_spacing > 0) || region_max_x <= region_min_x ||
        region_max_y <= region_min_y)
      throw InvalidConfig("generator: bad tower grid");
    if (tower_jitter < 0 || tower_jitter > 0.45)
      throw InvalidConfig("generator: tower_jitter must be in [0, 0.45]");
    if (!waiting_is_power_law && !(waiting_mu_minutes > 0))
      throw InvalidConfig("generator: waiting mu must be positive");
    if (waiting_trunc_min < 0 || waiting_trunc_max <= waiting_trunc_min)
      throw InvalidConfig("generator: bad waiting truncation");
    std::uint64_t grouped = 0;
    for (const GeneratorGroup& g : groups) {
      if (!(g.mu_minutes > 0))
        throw InvalidConfig("generator: group mu must be positive");
      grouped += g.subscribers;
    }
    if (grouped > subscribers)
      throw InvalidConfig("generator: groups exceed the population");
    if (!(jump.x_min > 0) || !(jump.x_max > jump.x_min) || !(jump.kappa > 0) ||
        jump.beta < 0)
      throw InvalidConfig("generator: bad jump model");
    if (has_start_box() &&
        (start_min_x < region_min_x || start_max_x > region_max_x ||
         start_min_y < region_min_y || start_max_y > region_max_y))
      throw InvalidConfig("generator: start box outside the tower region");
  }

  static GeneratorConfig from_kv(const KeyValueFile& kv) {
    GeneratorConfig cfg;
    cfg.seed = kv.get_u64_or("seed", cfg.seed);
    cfg.subscribers = kv.get_u64_or("subscribers", cfg.subscribers);
    if (kv.has("window_start")) cfg.window_start = kv.get_datetime("window_start");
    if (kv.has("window_end")) cfg.window_end = kv.get_datetime("window_end");
    const std::string model = kv.get_or("waiting_model", "exponential");
    if (model == "truncated_power_law") {
      cfg.waiting_is_power_law = true;
      cfg.waiting_tpl.beta = kv.get_double_or("waiting_beta", cfg.waiting_tpl.beta);
      cfg.waiting_tpl.kappa =
          kv.get_double_or("waiting_kappa", cfg.waiting_tpl.kappa);
      cfg.waiting_tpl.x_min =
          kv.get_double_or("waiting_min", cfg.waiting_tpl.x_min);
      cfg.waiting_tpl.x_max =
          kv.get_double_or("waiting_max", cfg.waiting_tpl.x_max);
    } else if (model == "exponential") {
      cfg.waiting_mu_minutes =
          kv.get_double_or("waiting_mu", cfg.waiting_mu_minutes);
      cfg.waiting_trunc_min =
          kv.get_double_or("waiting_min", cfg.waiting_trunc_min);
      if (kv.has("waiting_max")) cfg.waiting_trunc_max = kv.get_double("waiting_max");
    } else {
      throw InvalidConfig("generator: unknown waiting_model '" + model + "'");
    }
    for (const std::string& entry : kv.get_all("group")) {
      // "count:mu_minutes"
      const std::size_t colon = entry.find(':');
      if (colon == std::string::npos)
        throw InvalidConfig("generator: group entry '" + entry +
                            "' is not 'count:mu'");
      const auto count = parse_u64(KeyValueFile::trim(entry.substr(0, colon)));
      const auto mu = parse_double(KeyValueFile::trim(entry.substr(colon + 1)));
      if (!count || !mu)
        throw InvalidConfig("generator: bad group entry '" + entry + "'");
      cfg.groups.push_back(GeneratorGroup{*count, *mu});
    }
    cfg.jump.beta = kv.get_double_or("jump_beta", cfg.jump.beta);
    cfg.jump.kappa = kv.get_double_or("jump_kappa", cfg.jump.kappa);
    cfg.jump.x_min = kv.get_double_or("jump_min", cfg.jump.x_min);
    cfg.jump.x_max = kv.get_double_or("jump_max", cfg.jump.x_max);
    cfg.region_min_x = kv.get_double_or("region_min_x", cfg.region_min_x);
    cfg.region_min_y = kv.get_double_or("region_min_y", cfg.region_min_y);
    cfg.region_max_x = kv.get_double_or("region_max_x", cfg.region_max_x);
    cfg.region_max_y = kv.get_double_or("region_max_y", cfg.region_max_y);
    cfg.tower_spacing = kv.get_double_or("tower_spacing", cfg.tower_spacing);
    cfg.tower_jitter = kv.get_double_or("tower_jitter", cfg.tower_jitter);
    cfg.start_min_x = kv.get_double_or("start_min_x", cfg.start_min_x);
    cfg.start_min_y = kv.get_double_or("start_min_y", cfg.start_min_y);
    cfg.start_max_x = kv.get_double_or("start_max_x", cfg.start_max_x);
    cfg.start_max_y = kv.get_double_or("start_max_y", cfg.start_max_y);
    cfg.validate();
    return cfg;
  }

  static GeneratorConfig load(const std::string& path) {
    return from_kv(KeyValueFile::load(path));
  }

  double mu_for(std::uint64_t ordinal) const {
    std::uint64_t upto = 0;
    for (const GeneratorGroup& g : groups) {
      upto += g.subscribers;
      if (ordinal < upto) return g.mu_minutes;
    }
    return waiting_mu_minutes;
  }
};

inline std::vector<Tower> synth_tower_grid(const GeneratorConfig& cfg) {
  std::vector<Tower> towers;
  const auto nx = static_cast<std::uint32_t>(
      std::floor((cfg.region_max_x - cfg.region_min_x) / cfg.tower_spacing)) + 1;
  const auto ny = static_cast<std::uint32_t>(
      std::floor((cfg.region_max_y - cfg.region_min_y) / cfg.tower_spacing)) + 1;
  towers.reserve(static_cast<std::size_t>(nx) * ny);
  char id[24];
  for (std::uint32_t j = 0; j < ny; ++j) {
    for (std::uint32_t i = 0; i < nx; ++i) {
      const std::uint64_t ordinal = static_cast<std::uint64_t>(j) * nx + i;
      SplitMix64 rng = substream(cfg.seed ^ 0x746F776572ULL, ordinal);
      const double amp = cfg.tower_jitter * cfg.tower_spacing;
      std::snprintf(id, sizeof id, "T%07llu",
                    static_cast<unsigned long long>(ordinal));
      const double x = std::clamp(cfg.region_min_x + i * cfg.tower_spacing +
                                      (rng.next_double() * 2 - 1) * amp,
                                  cfg.region_min_x, cfg.region_max_x);
      const double y = std::clamp(cfg.region_min_y + j * cfg.tower_spacing +
                                      (rng.next_double() * 2 - 1) * amp,
                                  cfg.region_min_y, cfg.region_max_y);
      towers.push_back(
          Tower{id, x, y, 1 + static_cast<std::uint32_t>(ordinal % 3)});
    }
  }
  return towers;
}

struct SynthStats {
  std::uint64_t subscribers = 0;
  std::uint64_t subscribers_observed = 0;  // emitted at least one record
  std::uint64_t records = 0;
  std::uint64_t towers = 0;
  std::uint64_t waiting_raw_draws = 0;
  double waiting_raw_sum_minutes = 0;

  double waiting_raw_mean() const {
    return waiting_raw_draws ? waiting_raw_sum_minutes /
                                   static_cast<double>(waiting_raw_draws)
                             : 0.0;
  }
};

namespace detail {

struct WalkSink {
  std::string* out;
  std::uint64_t records = 0;
};

struct WalkTally {
  std::uint64_t records = 0;
  std::uint64_t raw_draws = 0;
  double raw_sum_minutes = 0;
};

// One subscriber's event sequence. The true position performs the random
// walk; each record snaps it to the serving tower. Emitted in the exact CDR
// CSV format so the oracle path exercises the real parser.
inline void synth_walk(const GeneratorConfig& cfg, std::uint64_t ordinal,
                       const VoronoiPartition& part,
                       const TruncatedPowerLawSampler& jump_sampler,
                       const TruncatedPowerLawSampler* wait_tpl_sampler,
                       WalkTally& tally, std::string& out) {
  SplitMix64 rng = substream(cfg.seed, ordinal);
  const double mu = cfg.mu_for(ordinal);

  const auto draw_wait_minutes = [&]() {
    if (wait_tpl_sampler) {
      ++tally.raw_draws;
      const double w = wait_tpl_sampler->draw(rng);
      tally.raw_sum_minutes += w;
      return w;
    }
    while (true) {
      const double w = -mu * std::log1p(-rng.next_double());
      ++tally.raw_draws;
      tally.raw_sum_minutes += w;
      if (w >= cfg.waiting_trunc_min && w <= cfg.waiting_trunc_max) return w;
    }
  };

  const double sx0 = cfg.has_start_box() ? cfg.start_min_x : cfg.region_min_x;
  const double sx1 = cfg.has_start_box() ? cfg.start_max_x : cfg.region_max_x;
  const double sy0 = cfg.has_start_box() ? cfg.start_min_y : cfg.region_min_y;
  const double sy1 = cfg.has_start_box() ? cfg.start_max_y : cfg.region_max_y;
  double x = sx0 + rng.next_double() * (sx1 - sx0);
  double y = sy0 + rng.next_double() * (sy1 - sy0);

  char alias[16];
  std::snprintf(alias, sizeof alias, "S%06llu",
                static_cast<unsigned long long>(ordinal));

  double t_seconds = static_cast<double>(cfg.window_start);
  while (true) {
    t_seconds += draw_wait_minutes() * 60.0;
    const auto t = static_cast<EpochSeconds>(std::llround(t_seconds));
    if (t >= cfg.window_end) break;

    const Tower& tower = part.nearest_tower(x, y);
    const auto cell = 1 + static_cast<std::uint32_t>(rng.next_below(
                              std::max<std::uint32_t>(tower.cell_count, 1)));
    const auto activity =
        static_cast<std::size_t>(rng.next_below(kActivityCount));

    out.append(alias);
    out.push_back(',');
    out.append(format_iso_datetime(t));
    out.push_back(',');
    out.append(tower.id);
    out.push_back(',');
    out.append(std::to_string(cell));
    out.push_back(',');
    out.append(kActivityCodes[activity]);
    out.push_back('\n');
    ++tally.records;

    const double step = jump_sampler.draw(rng);
    const double angle = 2.0 * std::numbers::pi * rng.next_double();
    x += step * std::cos(angle);
    y += step * std::sin(angle);
  }
}

}  // namespace detail

// Generates the synthetic population: tower grid CSV, CDR CSV, and a
// key-value manifest of every true parameter and count. Deterministic for a
// fixed seed: per-subscriber substreams and ordinal-ordered output make the
// bytes independent of the worker count.
inline SynthStats generate_population(const GeneratorConfig& cfg,
                                      const std::string& cdr_path,
                                      const std::string& towers_path,
                                      const std::string& manifest_path,
                                      unsigned threads = 0) {
  cfg.validate();

  const TowerMap towers =
      TowerMap::from_towers(synth_tower_grid(cfg), RegionLimits::unbounded());
  towers.save_csv(towers_path);
  const VoronoiPartition part(towers);

  const TruncatedPowerLawSampler jump_sampler(cfg.jump);
  std::unique_ptr<TruncatedPowerLawSampler> wait_tpl;
  if (cfg.waiting_is_power_law)
    wait_tpl = std::make_unique<TruncatedPowerLawSampler>(cfg.waiting_tpl);

  const unsigned workers = resolve_threads(threads);
  std::vector<std::string> buffers(workers);
  // per-subscriber tallies, reduced in ordinal order below so the totals
  // do not depend on the chunking
  std::vector<detail::WalkTally> tallies(
      static_cast<std::size_t>(cfg.subscribers));

  parallel_chunks(static_cast<std::size_t>(cfg.subscribers), threads,
                  [&](unsigned w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      detail::synth_walk(cfg, i, part, jump_sampler, wait_tpl.get(),
                         tallies[i], buffers[w % workers]);
  });

  std::ofstream cdr(cdr_path, std::ios::binary);
  if (!cdr) throw IoError("cannot write file: " + cdr_path);
  for (const std::string& b : buffers) cdr << b;
  cdr.close();

  SynthStats stats;
  stats.subscribers = cfg.subscribers;
  stats.towers = towers.size();
  for (const detail::WalkTally& t : tallies) {
    stats.records += t.records;
    if (t.records > 0) ++stats.subscribers_observed;
    stats.waiting_raw_draws += t.raw_draws;
    stats.waiting_raw_sum_minutes += t.raw_sum_minutes;
  }

  std::ofstream mf(manifest_path, std::ios::binary);
  if (!mf) throw IoError("cannot write file: " + manifest_path);
  mf << "rng = " << kRngAlgorithm << '\n'
     << "seed = " << cfg.seed << '\n'
     << "subscribers = " << stats.subscribers << '\n'
     << "subscribers_observed = " << stats.subscribers_observed << '\n'
     << "records = " << stats.records << '\n'
     << "towers = " << stats.towers << '\n'
     << "window_start = " << format_iso_datetime(cfg.window_start) << '\n'
     << "window_end = " << format_iso_datetime(cfg.window_end) << '\n';
  if (cfg.waiting_is_power_law) {
    mf << "waiting_model = truncated_power_law\n"
       << "waiting_beta = " << format_double(cfg.waiting_tpl.beta) << '\n'
       << "waiting_kappa = " << format_double(cfg.waiting_tpl.kappa) << '\n'
       << "waiting_min = " << format_double(cfg.waiting_tpl.x_min) << '\n'
       << "waiting_max = " << format_double(cfg.waiting_tpl.x_max) << '\n';
  } else {
    mf << "waiting_model = exponential\n"
       << "waiting_mu = " << format_double(cfg.waiting_mu_minutes) << '\n';
    if (cfg.waiting_trunc_min > 0 || std::isfinite(cfg.waiting_trunc_max)) {
      mf << "waiting_min = " << format_double(cfg.waiting_trunc_min) << '\n';
      if (std::isfinite(cfg.waiting_trunc_max))
        mf << "waiting_max = " << format_double(cfg.waiting_trunc_max) << '\n';
    }
  }
  for (std::size_t g = 0; g < cfg.groups.size(); ++g)
    mf << "group = " << cfg.groups[g].subscribers << ':'
       << format_double(cfg.groups[g].mu_minutes) << '\n';
  mf << "jump_beta = " << format_double(cfg.jump.beta) << '\n'
     << "jump_kappa = " << format_double(cfg.jump.kappa) << '\n'
     << "jump_min = " << format_double(cfg.jump.x_min) << '\n'
     << "jump_max = " << format_double(cfg.jump.x_max) << '\n'
     << "region_min_x = " << format_double(cfg.region_min_x) << '\n'
     << "region_min_y = " << format_double(cfg.region_min_y) << '\n'
     << "region_max_x = " << format_double(cfg.region_max_x) << '\n'
     << "region_max_y = " << format_double(cfg.region_max_y) << '\n'
     << "tower_spacing = " << format_double(cfg.tower_spacing) << '\n'
     << "tower_jitter = " << format_double(cfg.tower_jitter) << '\n'
     << "waiting_raw_draw_count = " << stats.waiting_raw_draws << '\n'
     << "waiting_raw_draw_mean_minutes = "
     << format_double(stats.waiting_raw_mean()) << '\n';
  return stats;
}

}  // namespace cdrmob
