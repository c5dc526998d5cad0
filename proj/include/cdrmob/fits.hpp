#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cdrmob/errors.hpp"

namespace cdrmob {

namespace detail {

// 16-point Gauss-Legendre rule on [-1, 1] (positive half; symmetric).
inline constexpr double kGlNodes[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr double kGlWeights[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

}  // namespace detail

// ln of Z(beta, kappa) = integral of x^-beta * exp(-x/kappa) over
// [x_min, x_max]. Computed in u = ln x, where the integrand
// exp((1-beta) u - e^u / kappa) is smooth and singularity-free, with
// composite Gauss-Legendre panels combined by log-sum-exp so extreme
// magnitudes never overflow.
inline double log_tpl_norm(double beta, double kappa, double x_min,
                           double x_max = std::numeric_limits<double>::infinity()) {
  if (!(x_min > 0) || !(x_max > x_min) || !(kappa > 0))
    throw InvalidSupport("log_tpl_norm: need 0 < x_min < x_max and kappa > 0");

  const auto g = [&](double u) { return (1.0 - beta) * u - std::exp(u) / kappa; };

  const double u_lo = std::log(x_min);
  double u_hi;
  if (std::isfinite(x_max)) {
    u_hi = std::log(x_max);
  } else {
    // Integrand peaks at u* = ln(kappa (1-beta)) when beta < 1, else
    // decreases from u_lo. March right until it has fallen ~60 nats.
    double g_ref = g(u_lo);
    double u = u_lo;
    if (beta < 1.0) {
      const double u_peak = std::log(kappa * (1.0 - beta));
      if (u_peak > u_lo) {
        g_ref = g(u_peak);
        u = u_peak;
      }
    }
    do {
      u += 1.0;
    } while (g(u) > g_ref - 60.0);
    u_hi = u;
  }

  const int panels = std::min(
      4000, std::max(16, static_cast<int>(std::ceil((u_hi - u_lo) / 0.2))));
  const double panel_w = (u_hi - u_lo) / panels;
  const double half = 0.5 * panel_w;

  // First pass for the max exponent, second for the shifted sum.
  double peak = -std::numeric_limits<double>::infinity();
  const auto visit = [&](auto&& fn) {
    for (int p = 0; p < panels; ++p) {
      const double mid = u_lo + panel_w * (p + 0.5);
      for (int j = 0; j < 8; ++j) {
        fn(g(mid - half * detail::kGlNodes[j]), detail::kGlWeights[j]);
        fn(g(mid + half * detail::kGlNodes[j]), detail::kGlWeights[j]);
      }
    }
  };
  visit([&](double gv, double) { peak = std::max(peak, gv); });
  double sum = 0;
  visit([&](double gv, double w) { sum += w * std::exp(gv - peak); });
  return peak + std::log(half * sum);
}

// -------------------------------------------------------------------------

struct DistributionFit {
  enum class Model { exponential, truncated_power_law };

  Model model = Model::exponential;
  double mu = 0;                 // exponential scale
  double beta = 0;               // power-law exponent
  double kappa = 0;              // exponential cutoff scale
  double x_min = 0;
  double x_max = std::numeric_limits<double>::infinity();
  double log_norm = 0;           // ln Z at (beta, kappa)
  double log_likelihood = 0;
  std::size_t n = 0;             // samples used
  std::size_t n_excluded = 0;    // samples outside [x_min, x_max]

  // Nested pure-exponential fit over the same support, for model comparison.
  double exp_mu = 0;
  double exp_log_likelihood = 0;

  double pdf(double x) const {
    if (model == Model::exponential)
      return x < 0 ? 0.0 : std::exp(-x / mu) / mu;
    if (x < x_min || x > x_max) return 0.0;
    return std::exp(-beta * std::log(x) - x / kappa - log_norm);
  }
};

// Maximum-likelihood exponential fit: mu = sample mean.
inline DistributionFit fit_exponential(std::span<const double> samples) {
  if (samples.size() < 2)
    throw InsufficientSamples("fit_exponential: need at least 2 samples, got " +
                              std::to_string(samples.size()));
  double sum = 0;
  for (double v : samples) {
    if (!(v > 0))
      throw InvalidSupport("fit_exponential: samples must be positive");
    sum += v;
  }
  DistributionFit fit;
  fit.model = DistributionFit::Model::exponential;
  fit.n = samples.size();
  fit.mu = sum / static_cast<double>(fit.n);
  fit.log_likelihood =
      -static_cast<double>(fit.n) * (std::log(fit.mu) + 1.0);
  return fit;
}

namespace detail {

struct TplStats {
  std::size_t n = 0;
  double sum_x = 0;
  double sum_ln_x = 0;
  double min_x = std::numeric_limits<double>::infinity();
  double max_x = 0;
};

inline TplStats collect_tpl_stats(std::span<const double> samples,
                                  double x_min, double x_max,
                                  std::size_t& excluded) {
  TplStats s;
  for (double v : samples) {
    if (v < x_min || v > x_max) {
      ++excluded;
      continue;
    }
    ++s.n;
    s.sum_x += v;
    s.sum_ln_x += std::log(v);
    s.min_x = std::min(s.min_x, v);
    s.max_x = std::max(s.max_x, v);
  }
  return s;
}

// Golden-section maximization on [a, b]; fixed iteration count shrinks the
// bracket deterministically far below the requested tolerances.
template <class Fn>
std::pair<double, double> golden_max(Fn&& fn, double a, double b, int iters) {
  constexpr double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = fn(d);
    }
  }
  return fc > fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace detail

// Log-likelihood of n samples with sufficient statistics (sum x, sum ln x)
// under P(x) = x^-beta exp(-x/kappa) / Z on [x_min, x_max].
inline double tpl_log_likelihood(std::size_t n, double sum_x, double sum_ln_x,
                                 double beta, double kappa, double x_min,
                                 double x_max =
                                     std::numeric_limits<double>::infinity()) {
  return -beta * sum_ln_x - sum_x / kappa -
         static_cast<double>(n) * log_tpl_norm(beta, kappa, x_min, x_max);
}

inline double tpl_log_likelihood(std::span<const double> samples, double beta,
                                 double kappa, double x_min,
                                 double x_max =
                                     std::numeric_limits<double>::infinity()) {
  std::size_t excluded = 0;
  const auto s = detail::collect_tpl_stats(samples, x_min, x_max, excluded);
  return tpl_log_likelihood(s.n, s.sum_x, s.sum_ln_x, beta, kappa, x_min, x_max);
}

struct TplFitOptions {
  double beta_max = 8.0;
  int outer_iters = 64;  // golden-section iterations on beta
  int inner_iters = 64;  // golden-section iterations on ln kappa
};

// Maximum-likelihood truncated power law on [x_min, x_max]. The likelihood
// is concave in the natural parameters (-beta, -1/kappa), so a nested
// golden-section search (beta outer, ln kappa inner) converges to the global
// maximum on the bounded search box. Also fits the beta = 0 member (a pure
// exponential on the same support) for model comparison.
inline DistributionFit fit_truncated_power_law(
    std::span<const double> samples, double x_min,
    double x_max = std::numeric_limits<double>::infinity(),
    const TplFitOptions& options = {}) {
  if (!(x_min > 0) || !(x_max > x_min))
    throw InvalidSupport("fit_truncated_power_law: need 0 < x_min < x_max");

  std::size_t excluded = 0;
  const auto stats = detail::collect_tpl_stats(samples, x_min, x_max, excluded);
  if (stats.n < 100)
    throw InsufficientSamples(
        "fit_truncated_power_law: need >= 100 samples in support, got " +
        std::to_string(stats.n));
  if (stats.min_x == stats.max_x)
    throw DegenerateSamples(
        "fit_truncated_power_law: all samples equal; no scale to fit");

  const double mean_x = stats.sum_x / static_cast<double>(stats.n);
  const double s_lo = std::log(mean_x) - 12.0;
  const double s_hi = std::log(std::max(stats.max_x, mean_x)) + 12.0;

  const auto ll = [&](double beta, double log_kappa) {
    return tpl_log_likelihood(stats.n, stats.sum_x, stats.sum_ln_x, beta,
                              std::exp(log_kappa), x_min, x_max);
  };
  const auto profile = [&](double beta) {
    return detail::golden_max(
        [&](double s) { return ll(beta, s); }, s_lo, s_hi, options.inner_iters);
  };

  const auto [beta_hat, ll_outer] =
      detail::golden_max([&](double beta) { return profile(beta).second; },
                         0.0, options.beta_max, options.outer_iters);
  const auto [s_hat, ll_hat] = profile(beta_hat);
  (void)ll_outer;

  if (beta_hat > options.beta_max - 1e-3)
    throw OptimizerNonConvergence(
        "fit_truncated_power_law: beta at search bound " +
        std::to_string(options.beta_max) + " (log-likelihood " +
        std::to_string(ll_hat) + ", n=" + std::to_string(stats.n) + ")");
  if (s_hat < s_lo + 1e-3 || s_hat > s_hi - 1e-3)
    throw OptimizerNonConvergence(
        "fit_truncated_power_law: kappa at search bound (ln kappa " +
        std::to_string(s_hat) + " in [" + std::to_string(s_lo) + ", " +
        std::to_string(s_hi) + "])");

  DistributionFit fit;
  fit.model = DistributionFit::Model::truncated_power_law;
  fit.n = stats.n;
  fit.n_excluded = excluded;
  fit.x_min = x_min;
  fit.x_max = x_max;
  fit.beta = beta_hat;
  fit.kappa = std::exp(s_hat);
  fit.log_norm = log_tpl_norm(fit.beta, fit.kappa, x_min, x_max);
  fit.log_likelihood = ll_hat;

  const auto [s0, ll0] = profile(0.0);
  fit.exp_mu = std::exp(s0);
  fit.exp_log_likelihood = ll0;
  return fit;
}

}  // namespace cdrmob
