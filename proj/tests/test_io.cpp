#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kic/kic.hpp"

using namespace kic;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("kic_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("spectrum caches round trip bit-exactly", "[io]") {
  TempDir tmp;
  const ModelParams p = ModelParams::canonical(6);
  const QuasiEnergySpectrum spec = eigenphases(sector_floquet(p, build_sector_basis(6, 1), true));

  const fs::path f = tmp.path / spectrum_cache_name(6, 1, true);
  CHECK(f.filename() == "spectrum_L6_k1_sym.json");
  CHECK(fs::path(spectrum_cache_name(6, 2, false)).filename() == "spectrum_L6_k2_plain.json");

  write_spectrum_cache(f.string(), spec);
  const QuasiEnergySpectrum back = read_spectrum_cache(f.string());
  CHECK(back.L == 6);
  CHECK(back.k == 1);
  CHECK(back.symmetrized);
  CHECK(back.params.coupling == spec.params.coupling);
  CHECK(back.params.field == spec.params.field);
  CHECK(back.max_residual == spec.max_residual);
  REQUIRE(back.phases.size() == spec.phases.size());
  CHECK(back.phases == spec.phases);  // shortest-round-trip doubles are exact

  // Deterministic bytes.
  const fs::path g = tmp.path / "again.json";
  write_spectrum_cache(g.string(), spec);
  CHECK(slurp(f) == slurp(g));

  CHECK(cache_matches(back, p, 1, true));
  CHECK_FALSE(cache_matches(back, p, 2, true));
  CHECK_FALSE(cache_matches(back, p, 1, false));
  ModelParams q = p;
  q.coupling = std::nextafter(p.coupling, 1.0);
  CHECK_FALSE(cache_matches(back, q, 1, true));
  ModelParams r = p;
  r.field[2] = 0.91;
  CHECK_FALSE(cache_matches(back, r, 1, true));
}

TEST_CASE("spectrum cache error contracts", "[io]") {
  TempDir tmp;
  CHECK_THROWS_AS(read_spectrum_cache((tmp.path / "missing.json").string()), ResourceError);

  const fs::path bad = tmp.path / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(read_spectrum_cache(bad.string()), ResourceError);

  const fs::path wrong_schema = tmp.path / "schema.json";
  std::ofstream(wrong_schema) << R"({"schema_version": 99})";
  CHECK_THROWS_AS(read_spectrum_cache(wrong_schema.string()), ResourceError);

  const fs::path short_phases = tmp.path / "short.json";
  std::ofstream(short_phases)
      << R"({"schema_version":1,"L":2,"k":0,"J":0.7,"b":[0.9,0.0,0.9],)"
      << R"("symmetrized":true,"dim":3,"max_residual":1e-15,"phases":[0.1,0.2]})";
  CHECK_THROWS_AS(read_spectrum_cache(short_phases.string()), ResourceError);

  QuasiEnergySpectrum spec;
  spec.phases = {0.5};
  CHECK_THROWS_AS(write_spectrum_cache("/nonexistent_dir_zz/x.json", spec), ResourceError);
}

TEST_CASE("stat curve CSV format", "[io]") {
  TempDir tmp;
  StatCurve curve;
  curve.label = "spacing_cdf";
  curve.abscissa = {0.0, 0.5, 1.0};
  curve.values = {0.0, 0.25, 1.0 / 3.0};
  curve.reference = {0.0, 0.2, 0.4};
  curve.band = {0.01, 0.02, 0.03};

  const fs::path f = tmp.path / "curve.csv";
  write_stat_curve_csv(f.string(), curve, {{"L", "12"}, {"sectors", "1-5"}});
  const std::string text = slurp(f);
  CHECK(text ==
        "# spacing_cdf; L=12; sectors=1-5\n"
        "abscissa,value,reference,band\n"
        "0,0,0,0.01\n"
        "0.5,0.25,0.2,0.02\n"
        "1,0.3333333333333333,0.4,0.03\n");

  // Full precision survives a parse back.
  CHECK(std::strtod("0.3333333333333333", nullptr) == 1.0 / 3.0);

  StatCurve bare;
  bare.label = "form_factor";
  bare.abscissa = {1.0};
  bare.values = {2.0};
  const fs::path g = tmp.path / "bare.csv";
  write_stat_curve_csv(g.string(), bare, {});
  CHECK(slurp(g) ==
        "# form_factor\n"
        "abscissa,value,reference,band\n"
        "1,2,,\n");

  const fs::path h = tmp.path / "again.csv";
  write_stat_curve_csv(h.string(), curve, {{"L", "12"}, {"sectors", "1-5"}});
  CHECK(slurp(f) == slurp(h));

  StatCurve broken;
  broken.abscissa = {1.0, 2.0};
  broken.values = {1.0};
  CHECK_THROWS_AS(write_stat_curve_csv((tmp.path / "x.csv").string(), broken, {}),
                  ArgumentError);
}

TEST_CASE("FNV-1a 64 hashes", "[io]") {
  CHECK(fnv1a64(nullptr, 0) == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);

  TempDir tmp;
  const fs::path f = tmp.path / "blob.bin";
  const std::string payload = "kicked ising\n\x01\x02";
  std::ofstream(f, std::ios::binary).write(payload.data(),
                                           static_cast<std::streamsize>(payload.size()));
  CHECK(fnv1a64_file(f.string()) == fnv1a64(payload.data(), payload.size()));
  CHECK_THROWS_AS(fnv1a64_file((tmp.path / "missing.bin").string()), ResourceError);

  CHECK(hex64(0) == "0x0000000000000000");
  CHECK(hex64(0xdeadbeefull) == "0x00000000deadbeef");
}
