#pragma once

// Serialization: spectrum caches (JSON), statistics curves (CSV), content
// hashes for the run manifest.  All writers are byte-deterministic: key order
// is fixed, doubles use shortest round-trip formatting, line endings are LF.

#include <cstdint>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kic/diagonalize.hpp"
#include "kic/errors.hpp"
#include "kic/statistics.hpp"

namespace kic {

constexpr int kCacheSchemaVersion = 1;

inline std::string spectrum_cache_name(int L, int k, bool symmetrized) {
  return "spectrum_L" + std::to_string(L) + "_k" + std::to_string(k) +
         (symmetrized ? "_sym" : "_plain") + ".json";
}

inline nlohmann::ordered_json spectrum_to_json(const QuasiEnergySpectrum& spec) {
  nlohmann::ordered_json j;
  j["schema_version"] = kCacheSchemaVersion;
  j["L"] = spec.L;
  j["k"] = spec.k;
  j["J"] = spec.params.coupling;
  j["b"] = {spec.params.field[0], spec.params.field[1], spec.params.field[2]};
  j["symmetrized"] = spec.symmetrized;
  j["dim"] = spec.dim();
  j["max_residual"] = spec.max_residual;
  j["phases"] = spec.phases;
  return j;
}

inline void write_spectrum_cache(const std::string& path, const QuasiEnergySpectrum& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("write_spectrum_cache: cannot open " + path);
  out << spectrum_to_json(spec).dump() << '\n';
  if (!out) throw ResourceError("write_spectrum_cache: write failed for " + path);
}

inline QuasiEnergySpectrum read_spectrum_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("read_spectrum_cache: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ResourceError("read_spectrum_cache: " + path + " is not valid JSON: " + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != kCacheSchemaVersion)
    throw ResourceError("read_spectrum_cache: unsupported schema in " + path);
  QuasiEnergySpectrum spec;
  spec.L = j.at("L").get<int>();
  spec.k = j.at("k").get<int>();
  spec.symmetrized = j.at("symmetrized").get<bool>();
  spec.params.sites = spec.L;
  spec.params.coupling = j.at("J").get<double>();
  const auto b = j.at("b");
  spec.params.field = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()};
  spec.max_residual = j.at("max_residual").get<double>();
  spec.phases = j.at("phases").get<std::vector<double>>();
  if (spec.phases.size() != j.at("dim").get<std::size_t>())
    throw ResourceError("read_spectrum_cache: phase count disagrees with dim in " + path);
  return spec;
}

// A cache entry satisfies a request only on exact parameter match; doubles
// survive the JSON round trip bit-exactly, so == is the right comparison.
inline bool cache_matches(const QuasiEnergySpectrum& cached, const ModelParams& params, int k,
                          bool symmetrized) {
  return cached.L == params.sites && cached.k == k && cached.symmetrized == symmetrized &&
         cached.params.coupling == params.coupling && cached.params.field == params.field;
}

namespace detail {

// Shortest digit string that parses back to the same double.
inline std::string fmt_shortest(double v) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// CSV layout: one comment header line, a column header, then one row per
// abscissa point.  Missing optional columns stay empty.
inline void write_stat_curve_csv(const std::string& path, const StatCurve& curve,
                                 const std::vector<std::pair<std::string, std::string>>& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("write_stat_curve_csv: cannot open " + path);
  out << "# " << curve.label;
  for (const auto& [key, value] : meta) out << "; " << key << "=" << value;
  out << '\n' << "abscissa,value,reference,band\n";
  const std::size_t n = curve.abscissa.size();
  if (curve.values.size() != n ||
      (!curve.reference.empty() && curve.reference.size() != n) ||
      (!curve.band.empty() && curve.band.size() != n))
    throw ArgumentError("write_stat_curve_csv: column length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    out << detail::fmt_shortest(curve.abscissa[i]) << ',' << detail::fmt_shortest(curve.values[i]) << ',';
    if (!curve.reference.empty()) out << detail::fmt_shortest(curve.reference[i]);
    out << ',';
    if (!curve.band.empty()) out << detail::fmt_shortest(curve.band[i]);
    out << '\n';
  }
  if (!out) throw ResourceError("write_stat_curve_csv: write failed for " + path);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("fnv1a64_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  return fnv1a64(bytes.data(), bytes.size());
}

inline std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace kic
