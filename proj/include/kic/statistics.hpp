#pragma once

// Spectral statistics on quasi-energy spectra: nearest-neighbour spacing CDF,
// two-point form factor, number variance, and their circular-ensemble
// references.  Multi-spectrum overloads average with equal weight per
// spectrum (sector averaging).

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include "kic/diagonalize.hpp"
#include "kic/errors.hpp"

namespace kic {

// Phases rescaled to mean unit density: positions in [0, N), ascending.
struct UnfoldedSpectrum {
  std::size_t source_dim = 0;
  std::vector<double> s;
};

inline UnfoldedSpectrum unfold(const QuasiEnergySpectrum& spec) {
  const std::size_t n = spec.dim();
  if (n == 0) throw ArgumentError("unfold: empty spectrum");
  UnfoldedSpectrum u;
  u.source_dim = n;
  u.s.reserve(n);
  const double scale = static_cast<double>(n) / (2.0 * M_PI);
  for (double phi : spec.phases) u.s.push_back(phi * scale);
  return u;
}

// Circular consecutive gaps; exactly N of them, mean exactly 1.
inline std::vector<double> circular_spacings(const UnfoldedSpectrum& u) {
  const std::size_t n = u.s.size();
  if (n == 0) throw ArgumentError("circular_spacings: empty spectrum");
  std::vector<double> gaps;
  gaps.reserve(n);
  for (std::size_t i = 0; i + 1 < n; ++i) gaps.push_back(u.s[i + 1] - u.s[i]);
  gaps.push_back(static_cast<double>(n) - u.s.back() + u.s.front());
  return gaps;
}

struct StatCurve {
  std::string label;
  std::vector<double> abscissa;
  std::vector<double> values;
  std::vector<double> reference;  // optional, empty when absent
  std::vector<double> band;       // optional, expected fluctuation scale
};

inline double wigner_spacing_cdf(double s) {
  if (s <= 0.0) return 0.0;
  return 1.0 - std::exp(-M_PI * s * s / 4.0);
}

// Binomial error of an empirical CDF value from n_levels spacings.
inline double sigma_w(double w, double n_levels) {
  if (w < 0.0 || w > 1.0) throw ArgumentError("sigma_w: W outside [0, 1]");
  if (n_levels <= 0.0) throw ArgumentError("sigma_w: need a positive level count");
  return std::sqrt(w * (1.0 - w) / n_levels);
}

// Empirical spacing CDF on `grid`, averaged with equal weight per spectrum.
inline StatCurve spacing_cdf(const std::vector<UnfoldedSpectrum>& specs,
                             const std::vector<double>& grid) {
  if (specs.empty()) throw ArgumentError("spacing_cdf: no spectra");
  StatCurve curve;
  curve.label = "spacing_cdf";
  curve.abscissa = grid;
  curve.values.assign(grid.size(), 0.0);
  for (const auto& u : specs) {
    std::vector<double> gaps = circular_spacings(u);
    std::sort(gaps.begin(), gaps.end());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto it = std::upper_bound(gaps.begin(), gaps.end(), grid[i]);
      curve.values[i] += static_cast<double>(it - gaps.begin()) / static_cast<double>(gaps.size());
    }
  }
  for (auto& v : curve.values) v /= static_cast<double>(specs.size());
  return curve;
}

// K2(t) = <|Tr U^t|^2> / N, averaged with equal weight per spectrum, for
// integer t = 1..t_max.  heisenberg_time is the mean dimension.
struct FormFactorSeries {
  std::vector<long long> t;
  std::vector<double> k2;
  double heisenberg_time = 0.0;
};

inline FormFactorSeries form_factor(const std::vector<QuasiEnergySpectrum>& specs,
                                    long long t_max) {
  if (specs.empty()) throw ArgumentError("form_factor: no spectra");
  if (t_max < 1) throw ArgumentError("form_factor: need t_max >= 1");
  FormFactorSeries series;
  series.t.resize(static_cast<std::size_t>(t_max));
  std::iota(series.t.begin(), series.t.end(), 1);
  series.k2.assign(static_cast<std::size_t>(t_max), 0.0);
  double mean_dim = 0.0;
  for (const auto& spec : specs) {
    const double n = static_cast<double>(spec.dim());
    if (n == 0.0) throw ArgumentError("form_factor: empty spectrum");
    mean_dim += n;
    for (long long t = 1; t <= t_max; ++t)
      series.k2[static_cast<std::size_t>(t - 1)] += std::norm(trace_power(spec, t)) / n;
  }
  const double m = static_cast<double>(specs.size());
  for (auto& v : series.k2) v /= m;
  series.heisenberg_time = mean_dim / m;
  return series;
}

// Non-overlapping block means of width `window` kicks; a trailing partial
// block is dropped.  Abscissa is the block-centre time over heisenberg_time.
inline StatCurve windowed_form_factor(const FormFactorSeries& series, long long window) {
  const long long len = static_cast<long long>(series.t.size());
  if (window < 1) throw ArgumentError("windowed_form_factor: need window >= 1");
  if (window > len) throw ArgumentError("windowed_form_factor: window exceeds the series length");
  StatCurve curve;
  curve.label = "form_factor";
  const long long blocks = len / window;
  curve.abscissa.reserve(static_cast<std::size_t>(blocks));
  curve.values.reserve(static_cast<std::size_t>(blocks));
  for (long long b = 0; b < blocks; ++b) {
    double tsum = 0.0, ksum = 0.0;
    for (long long i = b * window; i < (b + 1) * window; ++i) {
      tsum += static_cast<double>(series.t[static_cast<std::size_t>(i)]);
      ksum += series.k2[static_cast<std::size_t>(i)];
    }
    curve.abscissa.push_back(tsum / static_cast<double>(window) / series.heisenberg_time);
    curve.values.push_back(ksum / static_cast<double>(window));
  }
  return curve;
}

inline long long default_form_factor_window(double heisenberg_time) {
  const long long w = std::llround(heisenberg_time / 25.0);
  return std::max<long long>(1, w);
}

// COE form factor in the large-N limit, tau = t / t_Heisenberg.
inline double coe_k2(double tau) {
  const double x = std::abs(tau);
  if (x == 0.0) return 0.0;
  if (x < 1.0) return 2.0 * x - x * std::log(2.0 * x + 1.0);
  return 2.0 - x * std::log((2.0 * x + 1.0) / (2.0 * x - 1.0));
}

// Leading finite-N correction: multiply by (1 + 1/N).
inline double coe_k2_finite(double tau, double dim) {
  if (dim <= 0.0) throw ArgumentError("coe_k2_finite: need a positive dimension");
  return (1.0 + 1.0 / dim) * coe_k2(tau);
}

// Asymptotic COE number variance, valid for 1 << s << N.
inline double coe_sigma2_asymptotic(double s) {
  if (s <= 0.0) throw ArgumentError("coe_sigma2_asymptotic: need s > 0");
  constexpr double euler_gamma = 0.57721566490153286;
  return (2.0 / (M_PI * M_PI)) *
         (std::log(2.0 * M_PI * s) + 1.0 + euler_gamma - M_PI * M_PI / 8.0);
}

// Finite-N COE number variance as the Fourier sum over the form factor at
// harmonics m/N.  The flat part of the form factor is summed in closed form
// (sum_m sin^2(m pi s / N) / m^2 = (pi^2 / 2)(s/N)(1 - s/N)), so the series
// over K2 - 1 that remains converges like 1/m^4 and `m_max` terms leave a
// tail below N^2/(18 m_max^3) in curve units.
inline double coe_number_variance(double s, double dim, long long m_max = 0) {
  if (dim <= 0.0) throw ArgumentError("coe_number_variance: need a positive dimension");
  if (s < 0.0 || s > dim) throw ArgumentError("coe_number_variance: need 0 <= s <= N");
  if (m_max <= 0) m_max = std::llround(10.0 * dim);
  const double base = s * (1.0 - s / dim);
  double rem = 0.0;
  for (long long m = 1; m <= m_max; ++m) {
    const double md = static_cast<double>(m);
    const double sn = std::sin(md * M_PI * s / dim);
    rem += sn * sn / (md * md) * (coe_k2(md / dim) - 1.0);
    if (md >= 2.0 * dim) {
      // |K2(tau) - 1| <= 1/(6 tau^2) for tau >= 1 bounds the remaining tail.
      const double tail = dim * dim / (18.0 * md * md * md);
      if ((2.0 * dim / (M_PI * M_PI)) * tail < 1e-13) break;
    }
  }
  return (1.0 + 1.0 / dim) * (base + (2.0 * dim / (M_PI * M_PI)) * rem);
}

// Empirical number variance over sliding windows [x, x + s) on the unfolded
// circle, `offsets` deterministic window positions per spectrum, averaged
// with equal weight per spectrum.
inline StatCurve number_variance(const std::vector<UnfoldedSpectrum>& specs,
                                 const std::vector<double>& s_grid, long long offsets = 0) {
  if (specs.empty()) throw ArgumentError("number_variance: no spectra");
  StatCurve curve;
  curve.label = "number_variance";
  curve.abscissa = s_grid;
  curve.values.assign(s_grid.size(), 0.0);
  for (const auto& u : specs) {
    const double n = static_cast<double>(u.source_dim);
    for (double s : s_grid)
      if (s <= 0.0 || s >= n)
        throw ArgumentError("number_variance: window length outside (0, N)");
    const long long m = offsets > 0 ? offsets : 4 * static_cast<long long>(u.source_dim);
    const auto count_below = [&u](double x) {
      return static_cast<double>(std::lower_bound(u.s.begin(), u.s.end(), x) - u.s.begin());
    };
    const double total = static_cast<double>(u.s.size());
    for (std::size_t gi = 0; gi < s_grid.size(); ++gi) {
      const double s = s_grid[gi];
      double sum = 0.0, sum2 = 0.0;
      for (long long j = 0; j < m; ++j) {
        const double x = n * static_cast<double>(j) / static_cast<double>(m);
        const double hi = x + s;
        double cnt;
        if (hi <= n)
          cnt = count_below(hi) - count_below(x);
        else
          cnt = (total - count_below(x)) + count_below(hi - n);
        sum += cnt;
        sum2 += cnt * cnt;
      }
      const double mean = sum / static_cast<double>(m);
      curve.values[gi] += sum2 / static_cast<double>(m) - mean * mean;
    }
  }
  for (auto& v : curve.values) v /= static_cast<double>(specs.size());
  return curve;
}

inline std::vector<double> log_grid(double lo, double hi, int points_per_decade = 40) {
  if (lo <= 0.0 || hi <= lo) throw ArgumentError("log_grid: need 0 < lo < hi");
  if (points_per_decade < 1) throw ArgumentError("log_grid: need at least one point per decade");
  std::vector<double> g;
  for (int i = 0;; ++i) {
    const double v = lo * std::pow(10.0, static_cast<double>(i) / points_per_decade);
    if (v > hi * (1.0 + 1e-9)) break;
    g.push_back(v);
  }
  return g;
}

inline std::vector<double> linear_grid(double lo, double hi, double step) {
  if (step <= 0.0 || hi < lo) throw ArgumentError("linear_grid: bad range or step");
  std::vector<double> g;
  for (int i = 0;; ++i) {
    const double v = lo + step * i;
    if (v > hi + step * 1e-9) break;
    g.push_back(v);
  }
  return g;
}

// Saturation of a number-variance curve: plateau value from the smoothed
// curve over the band [plateau_lo, plateau_hi] * N, onset s_inf at the first
// grid point where the smoothed curve reaches onset_fraction * plateau.
struct SaturationConfig {
  double onset_fraction = 0.95;
  double plateau_lo_frac = 0.25;
  double plateau_hi_frac = 0.45;
  int smooth_window = 5;
};

struct SaturationEstimate {
  double s_inf = 0.0;
  double sigma2_inf = 0.0;
  double phi_inf = 0.0;  // 2 pi s_inf / N
};

inline SaturationEstimate estimate_saturation(const StatCurve& sigma2, double dim,
                                              const SaturationConfig& cfg = {}) {
  const std::size_t n = sigma2.abscissa.size();
  if (n == 0 || sigma2.values.size() != n)
    throw ArgumentError("estimate_saturation: malformed curve");
  if (dim <= 0.0) throw ArgumentError("estimate_saturation: need a positive dimension");
  if (cfg.smooth_window < 1 || cfg.smooth_window % 2 == 0)
    throw ArgumentError("estimate_saturation: smoothing window must be odd and positive");

  std::vector<double> smooth(n, 0.0);
  const int half = cfg.smooth_window / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + static_cast<std::size_t>(half));
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += sigma2.values[j];
    smooth[i] = acc / static_cast<double>(hi - lo + 1);
  }

  double plateau = 0.0;
  std::size_t plateau_points = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sigma2.abscissa[i];
    if (s >= cfg.plateau_lo_frac * dim && s <= cfg.plateau_hi_frac * dim) {
      plateau += smooth[i];
      ++plateau_points;
    }
  }
  if (plateau_points == 0)
    throw EstimationError("estimate_saturation: curve does not cover the plateau band");
  plateau /= static_cast<double>(plateau_points);
  if (!(plateau > 0.0))
    throw EstimationError("estimate_saturation: plateau level is not positive");

  for (std::size_t i = 0; i < n; ++i) {
    if (smooth[i] >= cfg.onset_fraction * plateau) {
      SaturationEstimate est;
      est.s_inf = sigma2.abscissa[i];
      est.sigma2_inf = plateau;
      est.phi_inf = 2.0 * M_PI * est.s_inf / dim;
      return est;
    }
  }
  throw EstimationError("estimate_saturation: curve never reaches the onset threshold");
}

// Mean deviation of per-sector K2 values from the COE expectation 2/N_s,
// in units of the standard error of that mean (COE fluctuation scale 2/N_s
// per sector).
inline double k2_deviation_sigmas(const std::vector<double>& k2_values,
                                  const std::vector<double>& dims) {
  if (k2_values.empty() || k2_values.size() != dims.size())
    throw ArgumentError("k2_deviation_sigmas: need matching non-empty inputs");
  const double s = static_cast<double>(k2_values.size());
  double delta = 0.0, var = 0.0;
  for (std::size_t i = 0; i < k2_values.size(); ++i) {
    if (dims[i] <= 0.0) throw ArgumentError("k2_deviation_sigmas: non-positive dimension");
    const double expectation = 2.0 / dims[i];
    delta += k2_values[i] - expectation;
    var += expectation * expectation;
  }
  delta /= s;
  const double sigma_mean = std::sqrt(var) / s;
  return delta / sigma_mean;
}

}  // namespace kic
