#pragma once

#include <cstdint>

namespace medsim {

// Finalizer from splitmix64; bijective on 64-bit words.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Every random draw in the simulator comes from a labeled substream.  A
// substream is keyed by (master seed, purpose, stage, node, id); consecutive
// draws inside one substream advance a counter.  Two runs with the same master
// seed therefore produce identical draws regardless of evaluation order, and
// any part of a run can be regenerated in isolation.
enum class Stream : uint64_t {
  SeedIssue = 1,   // fresh subset seeds, one per (stage, node)
  KeyIssue = 2,    // fresh stage keys, one per (stage, node)
  Monitor = 3,     // Bernoulli monitoring draws, one per (stage, subject, seq)
  Payload = 4,     // event payload contents, one per (stage, id)
  Fabricate = 5,   // fabricated payloads used by deviations
  Test = 6,        // draws owned by tests and experiments
};

class Substream {
public:
  Substream(uint64_t master, Stream purpose, uint64_t stage = 0,
            uint64_t node = 0, uint64_t id = 0) {
    uint64_t k = mix64(master);
    k = mix64(k ^ static_cast<uint64_t>(purpose));
    k = mix64(k ^ stage);
    k = mix64(k ^ node);
    key_ = mix64(k ^ id);
  }

  uint64_t next() { return mix64(key_ ^ ctr_++); }

  // Uniform on [0, n) by rejection; exact, no modulo bias.
  uint64_t below(uint64_t n) {
    uint64_t lim = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next();
    } while (v >= lim);
    return v % n;
  }

  double u01() { return (next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return u01() < p; }

private:
  uint64_t key_;
  uint64_t ctr_ = 0;
};

}  // namespace medsim
