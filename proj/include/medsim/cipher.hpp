#pragma once

#include <cstdint>

namespace medsim {

// Stage-scoped stream-cipher key.  Owner is the node the key punishes; keys
// are freshly drawn every stage and pairwise distinct within a stage.
struct Key {
  int owner = -1;
  int stage = 0;
  uint64_t material[2] = {0, 0};  // 128 bits

  bool operator==(const Key& o) const {
    return owner == o.owner && stage == o.stage &&
           material[0] == o.material[0] && material[1] == o.material[1];
  }
};

// What a payload has been through, tracked symbolically alongside the raw
// bits.  parity holds one bit per key owner: owner o's bit is set iff the
// payload has been ciphered an odd number of times with the stage key of o.
// XOR layers commute and cancel, so the multiset of applications reduces to
// exactly this parity.  genuine distinguishes real event payloads from
// fabricated ones; a fabricated payload never yields the event value no
// matter which keys are known.
struct PayloadMeta {
  int event_id = 0;
  uint32_t parity = 0;
  bool genuine = true;
};

// Payload as transmitted: raw contents plus symbolic history.
struct Payload {
  uint64_t bits = 0;
  PayloadMeta meta;
};

// Keystream of a key, truncated to `nbits` (1..64).
uint64_t keystream(const Key& k, int nbits);

// XOR-applies the key: flips the raw bits with the keystream and toggles the
// owner's parity bit.  Applying the same key twice restores the payload.
Payload apply(const Key& k, const Payload& p, int nbits);

// Whether a node holding exactly the keys of `known_owners` (a bit mask) can
// recover the event value: the payload must be genuine, every key layer on it
// must be known, and the reader's own key must not be among the layers (a
// node is never given its own key, and guessing a fresh 128-bit keystream has
// probability 0 at the model's level of abstraction).
bool retrievable(const PayloadMeta& meta, uint32_t known_owners, int self);

}  // namespace medsim
