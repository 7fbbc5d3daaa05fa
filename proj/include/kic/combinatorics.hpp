#pragma once

// Translation-orbit combinatorics for chains of L sites with local dimension d.
//
// Conventions used across the library:
//   * A computational basis state is a base-d string m_0 m_1 ... m_{L-1},
//     site 0 first.  Its integer code is sum_j m_j d^{L-1-j}, so site 0 is
//     the most significant digit.
//   * The translation T shifts content one site to the right (cyclically),
//     which on codes is a rotate-right in base d.
//   * The reflection R reverses the site order.
//   * Momentum sectors are labelled k = 0..L-1 with T-eigenvalue
//     exp(+2 pi i k / L) on sector k.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "kic/errors.hpp"

namespace kic {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

struct BasisState {
  std::vector<std::uint8_t> digits;  // site 0 first
  int d = 2;

  int sites() const { return static_cast<int>(digits.size()); }

  u64 code() const {
    u64 c = 0;
    for (auto m : digits) c = c * static_cast<u64>(d) + m;
    return c;
  }

  static BasisState from_code(u64 code, int L, int d) {
    if (L < 1 || d < 2) throw ArgumentError("BasisState: need L >= 1 and d >= 2");
    BasisState s;
    s.d = d;
    s.digits.assign(static_cast<std::size_t>(L), 0);
    for (int j = L - 1; j >= 0; --j) {
      s.digits[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(code % static_cast<u64>(d));
      code /= static_cast<u64>(d);
    }
    if (code != 0) throw ArgumentError("BasisState: code out of range for given L, d");
    return s;
  }
};

// d^L as exact 64-bit value; rejects anything that does not fit.
inline u64 pow_checked(int d, int L) {
  if (d < 2 || L < 1) throw ArgumentError("pow_checked: need d >= 2 and L >= 1");
  u128 p = 1;
  for (int i = 0; i < L; ++i) {
    p *= static_cast<u128>(d);
    if (p > static_cast<u128>(UINT64_MAX))
      throw ArgumentError("pow_checked: d^L exceeds 64-bit range");
  }
  return static_cast<u64>(p);
}

inline int mobius(u64 n) {
  if (n == 0) throw ArgumentError("mobius: undefined at 0");
  int sign = 1;
  for (u64 p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;  // squared factor
      sign = -sign;
    }
  }
  if (n > 1) sign = -sign;
  return sign;
}

// T on codes: rotate-right in base d.
inline u64 translate_code(u64 code, int L, int d) {
  const u64 dl1 = pow_checked(d, L) / static_cast<u64>(d);  // d^{L-1}
  return code / static_cast<u64>(d) + (code % static_cast<u64>(d)) * dl1;
}

// R on codes: reverse the base-d digit string.
inline u64 reverse_code(u64 code, int L, int d) {
  u64 r = 0;
  for (int j = 0; j < L; ++j) {
    r = r * static_cast<u64>(d) + code % static_cast<u64>(d);
    code /= static_cast<u64>(d);
  }
  return r;
}

// Lexicographically minimal code in the translation orbit of `code`.
inline u64 orbit_representative(u64 code, int L, int d) {
  const u64 dd = static_cast<u64>(d);
  const u64 dl1 = pow_checked(d, L) / dd;
  u64 best = code;
  u64 r = code;
  for (int p = 1; p < L; ++p) {
    r = r / dd + (r % dd) * dl1;
    if (r < best) best = r;
  }
  return best;
}

// Smallest p >= 1 with T^p = identity on this state; always divides L.
inline int primitive_period(const BasisState& s) {
  const int L = s.sites();
  if (L < 1) throw ArgumentError("primitive_period: empty state");
  const u64 c0 = s.code();
  u64 c = c0;
  for (int p = 1; p <= L; ++p) {
    c = translate_code(c, L, s.d);
    if (c == c0) return p;
  }
  throw ConsistencyError("primitive_period: translation did not close after L steps");
}

// An orbit of primitive period J carries momenta that are multiples of L/J,
// i.e. it survives projection onto sector k iff k*J = 0 (mod L).
inline bool survives_projection(int period, int k, int L) {
  if (L < 1 || period < 1 || L % period != 0)
    throw ArgumentError("survives_projection: period must divide L");
  const int kk = ((k % L) + L) % L;
  return (static_cast<long long>(kk) * period) % L == 0;
}

// Number of translation classes whose primitive period is exactly J
// (necklaces of length J with no shorter period), by Moebius inversion:
//   N~(J) = (1/J) sum_{m | J} mu(J/m) d^m.
inline u64 count_primitive_classes(int J, int d) {
  if (J < 1 || d < 2) throw ArgumentError("count_primitive_classes: need J >= 1, d >= 2");
  __int128 acc = 0;
  for (int m = 1; m <= J; ++m) {
    if (J % m != 0) continue;
    const int mu = mobius(static_cast<u64>(J / m));
    if (mu == 0) continue;
    acc += static_cast<__int128>(mu) * static_cast<__int128>(pow_checked(d, m));
  }
  if (acc < 0 || acc % J != 0)
    throw ConsistencyError("count_primitive_classes: inversion produced a non-class-count");
  return static_cast<u64>(acc / J);
}

// dim H_k = sum over periods J | L that survive in sector k of N~(J).
inline u64 sector_dimension(int L, int d, int k) {
  if (L < 1 || d < 2) throw ArgumentError("sector_dimension: need L >= 1, d >= 2");
  u64 dim = 0;
  for (int J = 1; J <= L; ++J) {
    if (L % J != 0) continue;
    if (!survives_projection(J, k, L)) continue;
    dim += count_primitive_classes(J, d);
  }
  return dim;
}

struct SectorDimensionTable {
  int L = 0;
  int d = 2;
  std::vector<u64> dims;  // indexed by k

  u64 total() const { return std::accumulate(dims.begin(), dims.end(), u64{0}); }

  static SectorDimensionTable build(int L, int d) {
    SectorDimensionTable t;
    t.L = L;
    t.d = d;
    t.dims.reserve(static_cast<std::size_t>(L));
    for (int k = 0; k < L; ++k) t.dims.push_back(sector_dimension(L, d, k));
    if (t.total() != pow_checked(d, L))
      throw ConsistencyError("sector dimensions do not sum to d^L");
    for (int k = 0; k < L; ++k)
      if (t.dims[static_cast<std::size_t>(k)] != t.dims[static_cast<std::size_t>((L - k) % L)])
        throw ConsistencyError("sector dimensions are not reflection symmetric");
    return t;
  }
};

struct OrbitClass {
  u64 representative = 0;  // lexicographically minimal code in the orbit
  int period = 1;
};

// All translation classes, one minimal representative each, ascending.
// Walks the full d^L state space, hence the explicit budget.
inline std::vector<OrbitClass> enumerate_orbit_representatives(int L, int d,
                                                               u64 state_budget = u64{1} << 26) {
  const u64 n = pow_checked(d, L);
  if (n > state_budget)
    throw ResourceError("enumerate_orbit_representatives: d^L exceeds the state budget");
  const u64 dd = static_cast<u64>(d);
  const u64 dl1 = n / dd;
  std::vector<OrbitClass> classes;
  for (u64 c = 0; c < n; ++c) {
    u64 r = c;
    int period = 0;
    bool minimal = true;
    for (int p = 1; p <= L; ++p) {
      r = r / dd + (r % dd) * dl1;
      if (r < c) {
        minimal = false;
        break;
      }
      if (r == c) {
        period = p;
        break;
      }
    }
    if (minimal) classes.push_back({c, period});
  }
  return classes;
}

// Sectors not related by reflection: k = 1 .. ceil(L/2) - 1.  These avoid the
// extra antiunitary structure present at k = 0 and (even L) k = L/2.
inline std::vector<int> relevant_sectors(int L) {
  if (L < 2) throw ArgumentError("relevant_sectors: need L >= 2");
  std::vector<int> ks;
  for (int k = 1; k < (L + 1) / 2; ++k) ks.push_back(k);
  return ks;
}

}  // namespace kic
