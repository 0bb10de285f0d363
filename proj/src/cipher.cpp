#include "medsim/cipher.hpp"

#include "medsim/rng.hpp"

namespace medsim {

uint64_t keystream(const Key& k, int nbits) {
  uint64_t s = mix64(k.material[0] ^ mix64(k.material[1]));
  if (nbits >= 64) return s;
  return s & ((uint64_t{1} << nbits) - 1);
}

Payload apply(const Key& k, const Payload& p, int nbits) {
  Payload out = p;
  out.bits ^= keystream(k, nbits);
  out.meta.parity ^= uint32_t{1} << k.owner;
  return out;
}

bool retrievable(const PayloadMeta& meta, uint32_t known_owners, int self) {
  if (!meta.genuine) return false;
  if (meta.parity & (uint32_t{1} << self)) return false;
  return (meta.parity & ~known_owners) == 0;
}

}  // namespace medsim
