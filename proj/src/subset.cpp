#include "medsim/subset.hpp"

#include <cmath>
#include <stdexcept>

namespace medsim {

uint64_t binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  uint64_t r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;  // exact: r is always a binomial coefficient
  }
  return r;
}

std::vector<int> unrank_subset(const std::vector<int>& universe, unsigned f, uint64_t y) {
  unsigned u = static_cast<unsigned>(universe.size());
  if (f > u) throw std::invalid_argument("subset size exceeds universe");
  if (y >= binomial(u, f)) throw std::invalid_argument("subset rank out of range");
  std::vector<int> out;
  out.reserve(f);
  unsigned pos = 0;
  unsigned need = f;
  while (need > 0) {
    // Subsets starting with universe[pos] cover the next C(u-pos-1, need-1) ranks.
    uint64_t block = binomial(u - pos - 1, need - 1);
    if (y < block) {
      out.push_back(universe[pos]);
      --need;
    } else {
      y -= block;
    }
    ++pos;
  }
  return out;
}

uint64_t rank_subset(const std::vector<int>& universe, const std::vector<int>& subset) {
  unsigned u = static_cast<unsigned>(universe.size());
  unsigned f = static_cast<unsigned>(subset.size());
  uint64_t y = 0;
  unsigned pos = 0;
  unsigned need = f;
  for (int member : subset) {
    while (universe[pos] != member) {
      y += binomial(u - pos - 1, need - 1);
      ++pos;
      if (pos >= u) throw std::invalid_argument("subset member not in universe");
    }
    ++pos;
    --need;
  }
  return y;
}

std::vector<int> expand(uint64_t seed, int id, int self, int n, unsigned f) {
  std::vector<int> universe;
  universe.reserve(n - 1);
  for (int v = 0; v < n; ++v) {
    if (v != self) universe.push_back(v);
  }
  uint64_t x = binomial(static_cast<unsigned>(n - 1), f);
  // 128-bit word per (seed, id): two chained 64-bit halves, reduced mod x.
  uint64_t hi = mix64(seed ^ mix64(static_cast<uint64_t>(id)));
  uint64_t lo = mix64(hi ^ 0x6d2b79f5a7c15ULL);
  // (hi * 2^64 + lo) mod x via unsigned 128-bit arithmetic.
  unsigned __int128 w = (static_cast<unsigned __int128>(hi) << 64) | lo;
  uint64_t y = static_cast<uint64_t>(w % x);
  return unrank_subset(universe, f, y);
}

double mod_bias_bound(uint64_t x) {
  // 2^128 mod x ranks get one extra preimage; TV distance <= x / 2^128.
  return static_cast<double>(x) * std::pow(2.0, -128);
}

}  // namespace medsim
