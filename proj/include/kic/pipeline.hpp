#pragma once

// Statistics pipeline shared by the physical (sector) and baseline (sampled
// COE) paths: one entry point turning a set of spectra into the standard
// curve bundle with references and fluctuation bands.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kic/diagonalize.hpp"
#include "kic/rmt.hpp"
#include "kic/statistics.hpp"

namespace kic {

struct StatsOptions {
  double spacing_max = 3.0;
  double spacing_step = 0.025;
  double tau_max = 2.5;            // form-factor horizon in units of the Heisenberg time
  long long window_kicks = 0;      // 0 = round(t_H / 25)
  double smax_frac = 0.5;          // number-variance window cap as a fraction of N
  int points_per_decade = 40;
  long long nv_offsets = 0;        // 0 = 4 per level
  SaturationConfig saturation;
  bool with_baseline_bands = true;
  int baseline_members = 0;        // 0 = one per input spectrum
  std::uint64_t baseline_seed = 42;
};

struct StatisticsBundle {
  StatCurve spacing;          // W(s) vs Wigner, band = binomial error
  StatCurve form_factor;      // windowed K2 vs finite-N COE, band = baseline SE
  StatCurve number_variance;  // Sigma^2 vs finite-N COE, band = baseline SE
  bool saturation_ok = false;
  SaturationEstimate saturation;
  std::string saturation_message;
  std::vector<double> k2_deviation;  // n_sigma at t = 1..4
  double mean_dim = 0.0;
  double min_dim = 0.0;
  std::uint64_t total_levels = 0;
  long long window_kicks = 0;
};

namespace detail {

inline std::vector<double> member_std_error(const std::vector<std::vector<double>>& rows,
                                            std::size_t n_inputs) {
  // Sample std over ensemble members, scaled to the SE of an n_inputs-average.
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  std::vector<double> se(cols, 0.0);
  if (rows.size() < 2) return se;
  for (std::size_t c = 0; c < cols; ++c) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r[c];
    mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (const auto& r : rows) var += (r[c] - mean) * (r[c] - mean);
    var /= static_cast<double>(rows.size() - 1);
    se[c] = std::sqrt(var / static_cast<double>(n_inputs));
  }
  return se;
}

}  // namespace detail

inline StatisticsBundle compute_statistics(const std::vector<QuasiEnergySpectrum>& specs,
                                           const StatsOptions& opts = {}) {
  if (specs.empty()) throw ArgumentError("compute_statistics: no spectra");

  StatisticsBundle out;
  std::vector<UnfoldedSpectrum> unfolded;
  std::vector<int> dims;
  unfolded.reserve(specs.size());
  for (const auto& spec : specs) {
    unfolded.push_back(unfold(spec));
    dims.push_back(static_cast<int>(spec.dim()));
    out.total_levels += spec.dim();
    out.mean_dim += static_cast<double>(spec.dim());
  }
  out.mean_dim /= static_cast<double>(specs.size());
  out.min_dim = static_cast<double>(*std::min_element(dims.begin(), dims.end()));

  // Spacing CDF against the Wigner surmise.
  const std::vector<double> sgrid = linear_grid(0.0, opts.spacing_max, opts.spacing_step);
  out.spacing = spacing_cdf(unfolded, sgrid);
  out.spacing.reference.reserve(sgrid.size());
  out.spacing.band.reserve(sgrid.size());
  for (double s : sgrid) {
    const double w = wigner_spacing_cdf(s);
    out.spacing.reference.push_back(w);
    out.spacing.band.push_back(sigma_w(w, static_cast<double>(out.total_levels)));
  }

  // Windowed form factor against the finite-N COE curve.
  const long long t_max =
      std::max<long long>(1, static_cast<long long>(std::ceil(opts.tau_max * out.mean_dim)));
  const FormFactorSeries series = form_factor(specs, t_max);
  out.window_kicks = opts.window_kicks > 0 ? opts.window_kicks
                                           : default_form_factor_window(series.heisenberg_time);
  out.form_factor = windowed_form_factor(series, out.window_kicks);
  out.form_factor.reference.reserve(out.form_factor.abscissa.size());
  for (double tau : out.form_factor.abscissa)
    out.form_factor.reference.push_back(coe_k2_finite(tau, out.mean_dim));

  // Number variance against the finite-N COE sum.
  const std::vector<double> nvgrid =
      log_grid(0.1, opts.smax_frac * out.min_dim, opts.points_per_decade);
  out.number_variance = number_variance(unfolded, nvgrid, opts.nv_offsets);
  out.number_variance.reference.reserve(nvgrid.size());
  for (double s : nvgrid)
    out.number_variance.reference.push_back(coe_number_variance(s, out.mean_dim));

  try {
    out.saturation = estimate_saturation(out.number_variance, out.mean_dim, opts.saturation);
    out.saturation_ok = true;
  } catch (const EstimationError& e) {
    out.saturation_ok = false;
    out.saturation_message = e.what();
  }

  // Short-time deviation from the COE expectation, t = 1..4.
  std::vector<double> dimsd(dims.begin(), dims.end());
  for (long long t = 1; t <= 4; ++t) {
    std::vector<double> k2t;
    k2t.reserve(specs.size());
    for (const auto& spec : specs)
      k2t.push_back(std::norm(trace_power(spec, t)) / static_cast<double>(spec.dim()));
    out.k2_deviation.push_back(k2_deviation_sigmas(k2t, dimsd));
  }

  // Fluctuation bands from a dimension-matched COE baseline.
  if (opts.with_baseline_bands) {
    const int members = opts.baseline_members > 0 ? opts.baseline_members
                                                  : static_cast<int>(specs.size());
    const std::vector<QuasiEnergySpectrum> coe =
        sample_coe_spectra_matched(dims, members, opts.baseline_seed);
    std::vector<std::vector<double>> k2_rows, nv_rows;
    for (const auto& member : coe) {
      const FormFactorSeries ms = form_factor({member}, t_max);
      FormFactorSeries aligned = ms;
      aligned.heisenberg_time = series.heisenberg_time;  // shared tau axis
      k2_rows.push_back(windowed_form_factor(aligned, out.window_kicks).values);
      nv_rows.push_back(number_variance({unfold(member)}, nvgrid, opts.nv_offsets).values);
    }
    out.form_factor.band = detail::member_std_error(k2_rows, specs.size());
    out.number_variance.band = detail::member_std_error(nv_rows, specs.size());
  }

  return out;
}

}  // namespace kic
