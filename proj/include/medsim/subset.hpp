#pragma once

#include <cstdint>
#include <vector>

#include "medsim/rng.hpp"

namespace medsim {

// Number of f-subsets of an n-set; exact in uint64 at the sizes used here.
uint64_t binomial(unsigned n, unsigned k);

// Lexicographic combinadic unranking: y in [0, C(|universe|, f)) maps to the
// y-th f-subset of `universe` in lexicographic order of positions.  The
// universe must be sorted ascending; the result is sorted ascending.
std::vector<int> unrank_subset(const std::vector<int>& universe, unsigned f, uint64_t y);

// Inverse of unrank_subset; `subset` must be sorted, all members in universe.
uint64_t rank_subset(const std::vector<int>& universe, const std::vector<int>& subset);

// Deterministic per-event subset choice: a 128-bit word derived from
// (seed, id) reduced mod C(n-1, f) and unranked over all nodes except self,
// ascending.  The 128/so-many-bits reduction keeps the selection bias below
// x/2^128 per subset, far under the 1e-9 budget at the supported sizes.
std::vector<int> expand(uint64_t seed, int id, int self, int n, unsigned f);

// Upper bound on the total-variation distance of the mod-reduction above from
// uniform over x alternatives, used by a property test.
double mod_bias_bound(uint64_t x);

}  // namespace medsim
