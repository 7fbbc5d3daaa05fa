// kic: build, diagonalize, and analyze the kicked Ising chain by momentum sector.
//
// Subcommands
//   dims      print the sector dimension table for (L, d)
//   spectrum  diagonalize sector Floquet operators and cache the eigenphases
//   stats     spectral statistics (CSV curves + report.json) from cached spectra
//   baseline  the same statistics for a sampled COE ensemble
//   report    pretty-print a run report and verify its file manifest
//
// Exit codes: 0 success, 1 invariant violation, 2 bad arguments or missing
// inputs, 3 numerical failure.  All emitted files are byte-deterministic for a
// fixed configuration and seed; wall times are printed to stdout only.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "kic/kic.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kReportSchemaVersion = 1;

const std::vector<std::string> kAllStatistics = {"spacing", "form_factor", "number_variance",
                                                 "saturation", "k2_deviation"};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string fmt(double v) { return kic::detail::fmt_shortest(v); }

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

fs::path cache_dir_for(const fs::path& out) {
  if (const char* env = std::getenv("KIC_CACHE_DIR"); env && *env) return fs::path(env);
  return out / "cache";
}

// Manifest paths are stored relative to the run directory when possible so a
// moved directory still verifies.
std::string manifest_path(const fs::path& file, const fs::path& out) {
  std::error_code ec;
  const fs::path rel = fs::relative(file, out, ec);
  if (!ec && !rel.empty() && rel.native().rfind("..", 0) != 0) return rel.generic_string();
  return file.generic_string();
}

ordered_json manifest_entry(const fs::path& file, const fs::path& out) {
  return ordered_json{{"file", manifest_path(file, out)},
                      {"fnv1a64", kic::hex64(kic::fnv1a64_file(file.string()))}};
}

void write_report(const fs::path& out, const ordered_json& report) {
  const fs::path path = out / "report.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw kic::ResourceError("cannot write " + path.string());
  f << report.dump(2) << '\n';
  if (!f) throw kic::ResourceError("write failed for " + path.string());
}

struct ModelCli {
  int L = 12;
  double J = 0.7;
  double bx = 0.9;
  double by = 0.0;
  double bz = 0.9;
  bool plain = false;
  std::vector<int> sectors;
  std::string out = "out";
  double tol = 1e-10;

  kic::ModelParams params() const {
    kic::ModelParams p;
    p.sites = L;
    p.coupling = J;
    p.field = {bx, by, bz};
    p.validate();
    return p;
  }

  std::vector<int> resolved_sectors() const {
    std::vector<int> ks = sectors.empty() ? kic::relevant_sectors(L) : sectors;
    for (int k : ks)
      if (k < 0 || k >= L)
        throw kic::ArgumentError("sector k=" + std::to_string(k) + " out of range for L=" +
                                 std::to_string(L));
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
  }
};

void add_model_flags(CLI::App* cmd, ModelCli& m) {
  cmd->add_option("--L", m.L, "Chain length")->capture_default_str();
  auto* j = cmd->add_option("--J", m.J, "Ising coupling")->capture_default_str();
  auto* bx = cmd->add_option("--bx", m.bx, "Kick field x component")->capture_default_str();
  auto* by = cmd->add_option("--by", m.by, "Kick field y component")->capture_default_str();
  auto* bz = cmd->add_option("--bz", m.bz, "Kick field z component")->capture_default_str();
  auto* paper =
      cmd->add_flag("--paper", "Canonical parameter set J=0.7, b=(0.9, 0, 0.9) (the default)");
  paper->excludes(j)->excludes(bx)->excludes(by)->excludes(bz);
  cmd->add_flag("--plain", m.plain,
                "One-sided kick splitting instead of the symmetrized half-kick product");
  auto* kopt = cmd->add_option(
      "--k", m.sectors, "Momentum sector, repeatable; default: every relevant sector");
  auto* allrel = cmd->add_flag("--all-relevant",
                               "All sectors 1 <= k < ceil(L/2) (the default when --k is absent)");
  allrel->excludes(kopt);
  cmd->add_option("--out", m.out, "Run directory for caches, curves, and the report")
      ->capture_default_str();
  cmd->add_option("--tol-unitarity", m.tol, "Operator and eigensolver validation tolerance")
      ->capture_default_str();
}

ordered_json model_config_json(const ModelCli& m, const std::vector<int>& ks) {
  ordered_json config;
  config["L"] = m.L;
  config["J"] = m.J;
  config["b"] = {m.bx, m.by, m.bz};
  config["symmetrized"] = !m.plain;
  config["sectors"] = ks;
  config["tol_unitarity"] = m.tol;
  return config;
}

std::vector<std::pair<std::string, std::string>> model_meta(const ModelCli& m) {
  return {{"L", std::to_string(m.L)},
          {"J", fmt(m.J)},
          {"b", "(" + fmt(m.bx) + "," + fmt(m.by) + "," + fmt(m.bz) + ")"},
          {"variant", m.plain ? "plain" : "symmetrized"}};
}

// ---------------------------------------------------------------------------
// dims

int run_dims(int L, int d) {
  const auto table = kic::SectorDimensionTable::build(L, d);
  std::cout << "   k" << std::setw(22) << "dim" << '\n';
  for (int k = 0; k < L; ++k) {
    const bool special = k == 0 || (L % 2 == 0 && k == L / 2);
    std::cout << std::setw(4) << k << std::setw(22) << table.dims[static_cast<std::size_t>(k)]
              << (special ? "  special" : "") << '\n';
  }
  std::cout << "total" << std::setw(21) << table.total() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// spectrum

struct SectorRun {
  int k = 0;
  std::string status;  // "computed", "cached", "error"
  std::string error;
  int exit_class = 0;
  bool have_spec = false;
  kic::QuasiEnergySpectrum spec;
  fs::path file;
  double seconds = 0.0;
};

template <typename F>
void pooled_for(std::size_t n, int jobs, F&& body) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

double max_sorted_deviation(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

int run_spectrum(const ModelCli& m, bool force, bool cross_check, bool yes_time, int jobs) {
  if (m.L > 16 && !yes_time)
    throw kic::ArgumentError("L=" + std::to_string(m.L) +
                             " needs --yes-i-have-time (dense solves grow as (2^L/L)^3)");
  if (cross_check && !m.sectors.empty())
    throw kic::ArgumentError("--cross-check runs every sector 0..L-1; drop --k");

  const kic::ModelParams params = m.params();
  const bool symmetrized = !m.plain;
  std::vector<int> ks;
  if (cross_check)
    for (int k = 0; k < m.L; ++k) ks.push_back(k);
  else
    ks = m.resolved_sectors();

  const fs::path out = m.out;
  const fs::path cachedir = cache_dir_for(out);
  fs::create_directories(out);
  fs::create_directories(cachedir);

  Timer total;
  const auto orbits = kic::enumerate_orbit_representatives(m.L, 2);

  std::vector<SectorRun> runs(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) runs[i].k = ks[i];

  auto run_one = [&](SectorRun& r) {
    try {
      r.file = cachedir / kic::spectrum_cache_name(m.L, r.k, symmetrized);
      if (!force && fs::exists(r.file)) {
        try {
          kic::QuasiEnergySpectrum cached = kic::read_spectrum_cache(r.file.string());
          if (kic::cache_matches(cached, params, r.k, symmetrized)) {
            r.spec = std::move(cached);
            r.have_spec = true;
            r.status = "cached";
            return;
          }
        } catch (const std::exception&) {
          // unreadable or stale cache: recompute below
        }
      }
      const kic::SectorBasis basis = kic::build_sector_basis(m.L, r.k, orbits);
      const kic::SectorOperator op = kic::sector_floquet(params, basis, symmetrized, m.tol);
      r.spec = kic::eigenphases(op, m.tol);
      r.have_spec = true;
      kic::write_spectrum_cache(r.file.string(), r.spec);
      r.status = "computed";
    } catch (const kic::NumericalError& e) {
      r.status = "error", r.error = e.what(), r.exit_class = 3;
    } catch (const kic::ArgumentError& e) {
      r.status = "error", r.error = e.what(), r.exit_class = 2;
    } catch (const kic::ResourceError& e) {
      r.status = "error", r.error = e.what(), r.exit_class = 2;
    } catch (const std::exception& e) {
      r.status = "error", r.error = e.what(), r.exit_class = 1;
    }
  };

  pooled_for(runs.size(), jobs, [&](std::size_t i) {
    Timer t;
    run_one(runs[i]);
    runs[i].seconds = t.seconds();
  });

  for (const SectorRun& r : runs) {
    std::cout << "k=" << r.k << "  " << r.status;
    if (r.have_spec)
      std::cout << "  dim=" << r.spec.dim() << "  max_residual=" << r.spec.max_residual;
    if (!r.error.empty()) std::cout << "  " << r.error;
    std::cout << "  (" << std::fixed << std::setprecision(2) << r.seconds << " s)\n";
    std::cout.unsetf(std::ios::fixed);
  }

  ordered_json checks = ordered_json::array();
  bool all_ok = true;
  for (const SectorRun& r : runs) {
    const bool ok = r.status != "error";
    ordered_json c{{"name", "sector_computation"}, {"k", r.k}, {"passed", ok}};
    if (!ok) c["detail"] = r.error;
    checks.push_back(std::move(c));
    all_ok = all_ok && ok;
  }

  ordered_json cross;
  bool cross_passed = true;
  if (cross_check) {
    if (!all_ok) throw kic::ConsistencyError("cross-check needs every sector; some failed");
    const Eigen::MatrixXcd full = kic::build_full_floquet(params, symmetrized);
    const kic::QuasiEnergySpectrum full_spec = kic::eigenphases_of_matrix(full, m.tol);
    std::vector<double> merged;
    for (const SectorRun& r : runs)
      merged.insert(merged.end(), r.spec.phases.begin(), r.spec.phases.end());
    double dev = max_sorted_deviation(merged, full_spec.phases);
    if (dev > 1e-8) {
      // A phase straddling the 0/2pi seam lands at opposite ends of the sorted
      // lists; retry with both spectra shifted away from the seam.
      auto shifted = [](std::vector<double> v) {
        for (double& x : v) x = std::fmod(x + std::numbers::pi, 2.0 * std::numbers::pi);
        return v;
      };
      dev = std::min(dev, max_sorted_deviation(shifted(merged), shifted(full_spec.phases)));
    }
    cross_passed = dev <= 1e-8;
    cross = ordered_json{{"enabled", true},
                         {"levels", merged.size()},
                         {"max_deviation", dev},
                         {"tolerance", 1e-8},
                         {"passed", cross_passed}};
    checks.push_back(ordered_json{{"name", "full_matrix_cross_check"}, {"passed", cross_passed}});
    all_ok = all_ok && cross_passed;
    std::cout << "cross-check: union of " << merged.size() << " sector phases vs full matrix, "
              << "max deviation " << dev << (cross_passed ? " (ok)\n" : " (FAILED)\n");
  }

  ordered_json sectors = ordered_json::array();
  ordered_json manifest = ordered_json::array();
  for (const SectorRun& r : runs) {
    ordered_json s{{"k", r.k}, {"status", r.status}};
    if (r.have_spec) {
      s["dim"] = r.spec.dim();
      s["max_residual"] = r.spec.max_residual;
      s["file"] = manifest_path(r.file, out);
      manifest.push_back(manifest_entry(r.file, out));
    }
    if (!r.error.empty()) s["error"] = r.error;
    sectors.push_back(std::move(s));
  }

  ordered_json config = model_config_json(m, ks);
  config["force"] = force;
  config["cross_check"] = cross_check;
  config["cache_dir"] = manifest_path(cachedir, out);

  ordered_json report;
  report["schema_version"] = kReportSchemaVersion;
  report["command"] = "spectrum";
  report["config"] = std::move(config);
  report["invariants"] = ordered_json{{"all_passed", all_ok}, {"checks", std::move(checks)}};
  report["sectors"] = std::move(sectors);
  if (cross_check) report["cross_check"] = std::move(cross);
  report["manifest"] = std::move(manifest);
  write_report(out, report);

  std::cout << "report: " << (out / "report.json").string() << "  (total " << std::fixed
            << std::setprecision(2) << total.seconds() << " s)\n";
  std::cout.unsetf(std::ios::fixed);

  for (const SectorRun& r : runs)
    if (r.exit_class != 0) return r.exit_class;
  return all_ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// stats and baseline share the curve emission and summary code

std::vector<std::string> resolve_statistics(std::vector<std::string> names) {
  if (names.empty()) return kAllStatistics;
  std::vector<std::string> ordered;
  for (const std::string& s : kAllStatistics)
    if (std::find(names.begin(), names.end(), s) != names.end()) ordered.push_back(s);
  return ordered;
}

using Wants = std::function<bool(const char*)>;

Wants wants_fn(const std::vector<std::string>& stats) {
  return [&stats](const char* name) {
    return std::find(stats.begin(), stats.end(), name) != stats.end();
  };
}

// Writes the sector-averaged (or member-averaged) curve plus one curve per
// input spectrum for each requested statistic.  `tag` labels the per-unit
// files: "k" for physical sectors, "m" for ensemble members.
std::vector<fs::path> emit_curves(const fs::path& out,
                                  const std::vector<kic::QuasiEnergySpectrum>& specs,
                                  const std::vector<int>& ids, const std::string& tag,
                                  const std::string& ids_key, const kic::StatisticsBundle& bundle,
                                  const kic::StatsOptions& opts, const Wants& wants,
                                  const std::vector<std::pair<std::string, std::string>>& meta) {
  std::vector<fs::path> files;
  std::vector<kic::UnfoldedSpectrum> unfolded;
  unfolded.reserve(specs.size());
  for (const auto& s : specs) unfolded.push_back(kic::unfold(s));

  auto write = [&](const std::string& name, const kic::StatCurve& curve,
                   const std::vector<std::pair<std::string, std::string>>& file_meta) {
    const fs::path path = out / name;
    kic::write_stat_curve_csv(path.string(), curve, file_meta);
    files.push_back(path);
  };
  auto with = [&](const std::string& key, const std::string& value) {
    auto copy = meta;
    copy.emplace_back(key, value);
    return copy;
  };

  if (wants("spacing")) {
    write("spacing_cdf.csv", bundle.spacing, with(ids_key, join_ints(ids)));
    const auto grid = kic::linear_grid(0.0, opts.spacing_max, opts.spacing_step);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      kic::StatCurve c = kic::spacing_cdf({unfolded[i]}, grid);
      c.reference = bundle.spacing.reference;
      write("spacing_cdf_" + tag + std::to_string(ids[i]) + ".csv", c,
            with(tag, std::to_string(ids[i])));
    }
  }

  if (wants("form_factor")) {
    auto avg_meta = with(ids_key, join_ints(ids));
    avg_meta.emplace_back("window_kicks", std::to_string(bundle.window_kicks));
    write("form_factor.csv", bundle.form_factor, avg_meta);
    const long long t_max = std::max<long long>(
        1, static_cast<long long>(std::ceil(opts.tau_max * bundle.mean_dim)));
    for (std::size_t i = 0; i < specs.size(); ++i) {
      kic::FormFactorSeries series = kic::form_factor({specs[i]}, t_max);
      series.heisenberg_time = bundle.mean_dim;  // shared tau axis across units
      kic::StatCurve c = kic::windowed_form_factor(series, bundle.window_kicks);
      c.reference = bundle.form_factor.reference;
      auto unit_meta = with(tag, std::to_string(ids[i]));
      unit_meta.emplace_back("window_kicks", std::to_string(bundle.window_kicks));
      write("form_factor_" + tag + std::to_string(ids[i]) + ".csv", c, unit_meta);
    }
  }

  if (wants("number_variance")) {
    write("number_variance.csv", bundle.number_variance, with(ids_key, join_ints(ids)));
    const auto grid =
        kic::log_grid(0.1, opts.smax_frac * bundle.min_dim, opts.points_per_decade);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      kic::StatCurve c = kic::number_variance({unfolded[i]}, grid, opts.nv_offsets);
      c.reference = bundle.number_variance.reference;
      write("number_variance_" + tag + std::to_string(ids[i]) + ".csv", c,
            with(tag, std::to_string(ids[i])));
    }
  }

  return files;
}

ordered_json summarize_bundle(const kic::StatisticsBundle& b, const Wants& wants) {
  ordered_json s;
  s["mean_dim"] = b.mean_dim;
  s["min_dim"] = b.min_dim;
  s["total_levels"] = b.total_levels;
  s["window_kicks"] = b.window_kicks;

  auto max_devs = [](const kic::StatCurve& c, double lo, double hi) {
    double abs_dev = 0.0, band_dev = 0.0;
    for (std::size_t i = 0; i < c.abscissa.size(); ++i) {
      if (c.abscissa[i] < lo || c.abscissa[i] > hi) continue;
      const double d = std::abs(c.values[i] - c.reference[i]);
      abs_dev = std::max(abs_dev, d);
      if (!c.band.empty() && c.band[i] > 0.0) band_dev = std::max(band_dev, d / c.band[i]);
    }
    return std::pair{abs_dev, band_dev};
  };

  if (wants("spacing")) {
    const auto [abs_dev, sig] = max_devs(b.spacing, 0.0, b.spacing.abscissa.back());
    s["spacing"] = ordered_json{{"max_abs_dev", abs_dev}, {"max_dev_sigma_w", sig}};
  }
  if (wants("form_factor")) {
    const auto [abs_dev, se] = max_devs(b.form_factor, 0.2, 2.0);
    ordered_json ff{{"window_kicks", b.window_kicks}, {"max_abs_dev_tau_02_20", abs_dev}};
    if (se > 0.0) ff["max_dev_se_tau_02_20"] = se;
    s["form_factor"] = std::move(ff);
  }
  if (wants("number_variance")) {
    const auto [abs_dev, se] = max_devs(b.number_variance, 0.0, 10.0);
    ordered_json nv{{"max_abs_dev_s_le_10", abs_dev}};
    if (se > 0.0) nv["max_dev_se_s_le_10"] = se;
    s["number_variance"] = std::move(nv);
  }
  if (wants("k2_deviation")) s["k2_deviation_sigmas"] = b.k2_deviation;
  if (wants("saturation")) {
    if (b.saturation_ok)
      s["saturation"] = ordered_json{{"ok", true},
                                     {"s_inf", b.saturation.s_inf},
                                     {"sigma2_inf", b.saturation.sigma2_inf},
                                     {"phi_inf", b.saturation.phi_inf},
                                     {"s_inf_over_dim", b.saturation.s_inf / b.mean_dim}};
    else
      s["saturation"] = ordered_json{{"ok", false}, {"message", b.saturation_message}};
  }
  return s;
}

void print_summary(const kic::StatisticsBundle& b, const Wants& wants) {
  std::cout << "levels " << b.total_levels << ", mean dim " << b.mean_dim << ", window "
            << b.window_kicks << " kicks\n";
  if (wants("k2_deviation")) {
    std::cout << "K2 deviation (sigmas) at t=1..4:";
    for (double v : b.k2_deviation) std::cout << ' ' << v;
    std::cout << '\n';
  }
  if (wants("saturation")) {
    if (b.saturation_ok)
      std::cout << "saturation onset s_inf=" << b.saturation.s_inf
                << " (s_inf/N=" << b.saturation.s_inf / b.mean_dim
                << "), plateau=" << b.saturation.sigma2_inf << '\n';
    else
      std::cout << "saturation estimate unavailable: " << b.saturation_message << '\n';
  }
}

// Shared invariant checks on the spectra entering the statistics pipeline.
ordered_json spectrum_checks(const std::vector<kic::QuasiEnergySpectrum>& specs,
                             const std::vector<int>& ids, const std::string& id_key,
                             const std::function<std::uint64_t(int)>& expected_dim, double tol,
                             bool& all_ok) {
  ordered_json checks = ordered_json::array();
  auto add = [&](const std::string& name, int id, bool passed, const std::string& detail) {
    ordered_json c{{"name", name}, {id_key, id}, {"passed", passed}};
    if (!detail.empty()) c["detail"] = detail;
    checks.push_back(std::move(c));
    all_ok = all_ok && passed;
  };
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    const std::uint64_t want = expected_dim(ids[i]);
    add("dimension_match", ids[i], spec.dim() == want,
        "dim=" + std::to_string(spec.dim()) + " expected=" + std::to_string(want));
    add("residual_within_tol", ids[i], spec.max_residual <= tol,
        "max_residual=" + fmt(spec.max_residual));
    const bool sorted = std::is_sorted(spec.phases.begin(), spec.phases.end());
    const bool in_range =
        spec.phases.empty() ||
        (spec.phases.front() >= 0.0 && spec.phases.back() < 2.0 * std::numbers::pi);
    add("phases_sorted_in_range", ids[i], sorted && in_range, "");
  }
  return checks;
}

int run_stats(const ModelCli& m, const std::vector<std::string>& stat_names, long long window,
              double smax_frac, std::uint64_t seed, int baseline_members) {
  const kic::ModelParams params = m.params();
  const bool symmetrized = !m.plain;
  const std::vector<int> ks = m.resolved_sectors();
  const std::vector<std::string> stats = resolve_statistics(stat_names);
  const Wants wants = wants_fn(stats);

  const fs::path out = m.out;
  fs::create_directories(out);
  const fs::path cachedir = cache_dir_for(out);

  std::vector<kic::QuasiEnergySpectrum> specs;
  specs.reserve(ks.size());
  for (int k : ks) {
    const fs::path path = cachedir / kic::spectrum_cache_name(m.L, k, symmetrized);
    if (!fs::exists(path))
      throw kic::ResourceError("missing spectrum cache " + path.string() +
                               "; run: kic spectrum --L " + std::to_string(m.L) + " --k " +
                               std::to_string(k) + (symmetrized ? "" : " --plain") + " --out " +
                               m.out);
    kic::QuasiEnergySpectrum spec = kic::read_spectrum_cache(path.string());
    if (!kic::cache_matches(spec, params, k, symmetrized))
      throw kic::ResourceError("cache " + path.string() +
                               " was built with different parameters; rerun kic spectrum with "
                               "--force");
    specs.push_back(std::move(spec));
  }

  bool all_ok = true;
  ordered_json checks = spectrum_checks(
      specs, ks, "k",
      [&](int k) { return kic::sector_dimension(m.L, 2, k); }, m.tol, all_ok);

  kic::StatsOptions opts;
  opts.window_kicks = window;
  opts.smax_frac = smax_frac;
  opts.baseline_seed = seed;
  opts.baseline_members = baseline_members;
  opts.with_baseline_bands =
      wants("form_factor") || wants("number_variance") || wants("saturation");

  Timer t;
  const kic::StatisticsBundle bundle = kic::compute_statistics(specs, opts);
  const std::vector<fs::path> files =
      emit_curves(out, specs, ks, "k", "sectors", bundle, opts, wants, model_meta(m));

  ordered_json config = model_config_json(m, ks);
  config["statistics"] = stats;
  config["window_kicks"] = window;
  config["smax_frac"] = smax_frac;
  config["seed"] = seed;
  config["baseline_members"] = baseline_members;
  config["cache_dir"] = manifest_path(cachedir, out);

  ordered_json manifest = ordered_json::array();
  for (const fs::path& f : files) manifest.push_back(manifest_entry(f, out));

  ordered_json report;
  report["schema_version"] = kReportSchemaVersion;
  report["command"] = "stats";
  report["config"] = std::move(config);
  report["invariants"] = ordered_json{{"all_passed", all_ok}, {"checks", std::move(checks)}};
  report["summary"] = summarize_bundle(bundle, wants);
  report["manifest"] = std::move(manifest);
  write_report(out, report);

  print_summary(bundle, wants);
  std::cout << "report: " << (out / "report.json").string() << "  (" << files.size()
            << " curve files, " << std::fixed << std::setprecision(2) << t.seconds() << " s)\n";
  std::cout.unsetf(std::ios::fixed);
  if (!all_ok) std::cout << "invariant checks FAILED\n";
  return all_ok ? 0 : 1;
}

int run_baseline(int dim, int members, std::uint64_t seed, const std::string& out_s,
                 const std::vector<std::string>& stat_names, long long window, double smax_frac,
                 double tol) {
  const std::vector<std::string> stats = resolve_statistics(stat_names);
  const Wants wants = wants_fn(stats);
  const fs::path out = out_s;
  fs::create_directories(out);

  kic::EnsembleSpec spec;
  spec.dim = dim;
  spec.members = members;
  spec.seed = seed;

  Timer t;
  const std::vector<kic::QuasiEnergySpectrum> specs = kic::sample_coe_spectra(spec, tol);
  std::cout << "sampled " << members << " COE members of dimension " << dim << " (" << std::fixed
            << std::setprecision(2) << t.seconds() << " s)\n";
  std::cout.unsetf(std::ios::fixed);

  std::vector<int> ids(specs.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);

  bool all_ok = true;
  ordered_json checks = spectrum_checks(
      specs, ids, "member",
      [&](int) { return static_cast<std::uint64_t>(dim); }, tol, all_ok);

  kic::StatsOptions opts;
  opts.window_kicks = window;
  opts.smax_frac = smax_frac;
  // The band ensemble reuses the member seed, so the fluctuation band is the
  // standard error over the input members themselves.
  opts.baseline_seed = seed;
  opts.baseline_members = members;
  opts.with_baseline_bands =
      wants("form_factor") || wants("number_variance") || wants("saturation");

  Timer ts;
  const kic::StatisticsBundle bundle = kic::compute_statistics(specs, opts);
  const std::vector<std::pair<std::string, std::string>> meta = {
      {"ensemble", "COE"},
      {"dim", std::to_string(dim)},
      {"members", std::to_string(members)},
      {"seed", std::to_string(seed)}};
  const std::vector<fs::path> files =
      emit_curves(out, specs, ids, "m", "members", bundle, opts, wants, meta);

  ordered_json config;
  config["ensemble"] = "COE";
  config["dim"] = dim;
  config["members"] = members;
  config["seed"] = seed;
  config["statistics"] = stats;
  config["window_kicks"] = window;
  config["smax_frac"] = smax_frac;
  config["tol_unitarity"] = tol;

  ordered_json manifest = ordered_json::array();
  for (const fs::path& f : files) manifest.push_back(manifest_entry(f, out));

  ordered_json report;
  report["schema_version"] = kReportSchemaVersion;
  report["command"] = "baseline";
  report["config"] = std::move(config);
  report["invariants"] = ordered_json{{"all_passed", all_ok}, {"checks", std::move(checks)}};
  report["summary"] = summarize_bundle(bundle, wants);
  report["manifest"] = std::move(manifest);
  write_report(out, report);

  print_summary(bundle, wants);
  std::cout << "report: " << (out / "report.json").string() << "  (" << files.size()
            << " curve files, " << std::fixed << std::setprecision(2) << ts.seconds() << " s)\n";
  std::cout.unsetf(std::ios::fixed);
  if (!all_ok) std::cout << "invariant checks FAILED\n";
  return all_ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// report

int run_report(const std::string& out_s) {
  const fs::path out = out_s;
  const fs::path path = out / "report.json";
  std::ifstream f(path, std::ios::binary);
  if (!f) throw kic::ResourceError("no report.json in " + out.string());
  ordered_json report;
  try {
    report = ordered_json::parse(f);
  } catch (const std::exception& e) {
    throw kic::ResourceError("unreadable report " + path.string() + ": " + e.what());
  }

  std::cout << "command: " << report.value("command", std::string("?")) << '\n';
  if (report.contains("config")) std::cout << "config:  " << report["config"].dump() << '\n';

  bool ok = true;
  if (report.contains("invariants")) {
    const auto& inv = report["invariants"];
    ok = inv.value("all_passed", false);
    std::size_t passed = 0, total = 0;
    if (inv.contains("checks")) {
      for (const auto& c : inv["checks"]) {
        ++total;
        if (c.value("passed", false))
          ++passed;
        else
          std::cout << "  [FAIL] " << c.dump() << '\n';
      }
    }
    std::cout << "invariants: " << passed << '/' << total << " passed\n";
  }
  if (report.contains("summary")) std::cout << "summary: " << report["summary"].dump(2) << '\n';

  std::size_t verified = 0, bad = 0;
  if (report.contains("manifest")) {
    for (const auto& entry : report["manifest"]) {
      const std::string file = entry.value("file", std::string());
      const std::string want = entry.value("fnv1a64", std::string());
      fs::path p = file;
      if (p.is_relative()) p = out / p;
      std::string state;
      if (!fs::exists(p)) {
        state = "MISSING";
      } else {
        const std::string got = kic::hex64(kic::fnv1a64_file(p.string()));
        state = got == want ? "ok" : "MISMATCH";
      }
      if (state == "ok")
        ++verified;
      else {
        ++bad;
        std::cout << "  [" << state << "] " << file << '\n';
      }
    }
    std::cout << "manifest: " << verified << " verified, " << bad << " bad\n";
    ok = ok && bad == 0;
  }
  std::cout << (ok ? "report OK\n" : "report FAILED\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kicked Ising chain: sector spectra and spectral statistics"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI-style config file");

  int dims_L = 12, dims_d = 2;
  auto* cdims = app.add_subcommand("dims", "Sector dimension table for (L, d)");
  cdims->add_option("--L", dims_L, "Chain length")->capture_default_str();
  cdims->add_option("--d", dims_d, "Local dimension")->capture_default_str();

  ModelCli sm;
  bool force = false, cross = false, yes_time = false;
  int jobs = 1;
  auto* cspec = app.add_subcommand(
      "spectrum", "Diagonalize sector Floquet operators and cache the eigenphases");
  add_model_flags(cspec, sm);
  cspec->add_flag("--force", force, "Recompute even when a matching cache exists");
  cspec->add_flag("--cross-check", cross,
                  "Also diagonalize the full 2^L operator and compare (L <= 12, every sector)");
  cspec->add_flag("--yes-i-have-time", yes_time, "Allow L > 16");
  cspec->add_option("--jobs", jobs, "Worker threads for the sector fan-out")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  ModelCli tm;
  std::vector<std::string> stat_names;
  long long window = 0;
  double smax_frac = 0.5;
  std::uint64_t seed = 42;
  int bmembers = 0;
  auto* cstats =
      app.add_subcommand("stats", "Spectral statistics (CSV + report) from cached spectra");
  add_model_flags(cstats, tm);
  cstats
      ->add_option("--statistics", stat_names,
                   "Subset of {spacing, form_factor, number_variance, saturation, k2_deviation}; "
                   "default: all")
      ->check(CLI::IsMember(kAllStatistics));
  cstats
      ->add_option("--window-kicks", window,
                   "Form-factor smoothing window in kicks (0 = Heisenberg time / 25)")
      ->capture_default_str();
  cstats
      ->add_option("--smax-frac", smax_frac,
                   "Number-variance range cap as a fraction of the mean dimension")
      ->capture_default_str();
  cstats->add_option("--seed", seed, "Seed for the COE fluctuation baseline")
      ->capture_default_str();
  cstats
      ->add_option("--baseline-members", bmembers,
                   "COE members behind the fluctuation band (0 = one per sector)")
      ->capture_default_str();

  int b_dim = 300, b_members = 10;
  std::uint64_t b_seed = 42;
  std::string b_out = "out";
  double b_tol = 1e-10;
  std::vector<std::string> b_stat_names;
  long long b_window = 0;
  double b_smax = 0.5;
  auto* cbase =
      app.add_subcommand("baseline", "Sampled COE ensemble through the statistics pipeline");
  cbase->add_option("--dim", b_dim, "Matrix dimension")->required();
  cbase->add_option("--members", b_members, "Ensemble members")->capture_default_str();
  cbase->add_option("--seed", b_seed, "RNG seed; member i draws from stream i")
      ->capture_default_str();
  cbase->add_option("--out", b_out, "Run directory")->capture_default_str();
  cbase
      ->add_option("--statistics", b_stat_names,
                   "Subset of {spacing, form_factor, number_variance, saturation, k2_deviation}; "
                   "default: all")
      ->check(CLI::IsMember(kAllStatistics));
  cbase->add_option("--window-kicks", b_window, "Form-factor smoothing window in kicks")
      ->capture_default_str();
  cbase->add_option("--smax-frac", b_smax, "Number-variance range cap")->capture_default_str();
  cbase->add_option("--tol-unitarity", b_tol, "Member validation tolerance")
      ->capture_default_str();

  std::string r_out = "out";
  auto* crep = app.add_subcommand("report", "Verify a run directory against its report manifest");
  crep->add_option("--out", r_out, "Run directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cdims) return run_dims(dims_L, dims_d);
    if (*cspec) return run_spectrum(sm, force, cross, yes_time, jobs);
    if (*cstats) return run_stats(tm, stat_names, window, smax_frac, seed, bmembers);
    if (*cbase)
      return run_baseline(b_dim, b_members, b_seed, b_out, b_stat_names, b_window, b_smax, b_tol);
    if (*crep) return run_report(r_out);
  } catch (const kic::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const kic::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const kic::EstimationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const kic::ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const kic::ConsistencyError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
