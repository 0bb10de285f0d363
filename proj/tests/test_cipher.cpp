#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <vector>

#include "medsim/cipher.hpp"
#include "medsim/rng.hpp"

using namespace medsim;

namespace {

Key make_key(int owner, uint64_t seed) {
  Key k;
  k.owner = owner;
  k.stage = 1;
  Substream s(seed, Stream::KeyIssue, 1, static_cast<uint64_t>(owner));
  k.material[0] = s.next();
  k.material[1] = s.next();
  return k;
}

Payload plain(uint64_t bits) {
  Payload p;
  p.bits = bits;
  p.meta.event_id = 1;
  p.meta.parity = 0;
  p.meta.genuine = true;
  return p;
}

}  // namespace

TEST_CASE("keystream is a pure function of the key") {
  Key a = make_key(1, 5);
  Key b = make_key(1, 5);
  CHECK(keystream(a, 32) == keystream(b, 32));
  CHECK(keystream(a, 8) == (keystream(a, 32) & 0xffu));
  Key c = make_key(2, 5);
  CHECK(keystream(a, 64) != keystream(c, 64));
}

TEST_CASE("applying a key twice is the identity") {
  Key k = make_key(3, 11);
  Payload p = plain(0xdeadbeef);
  Payload once = apply(k, p, 32);
  CHECK(once.bits != p.bits);
  CHECK(once.meta.parity == (1u << 3));
  Payload twice = apply(k, once, 32);
  CHECK(twice.bits == p.bits);
  CHECK(twice.meta.parity == 0);
  CHECK(twice.meta.genuine);
}

TEST_CASE("application order never matters") {
  Key k1 = make_key(1, 11);
  Key k2 = make_key(2, 11);
  Key k3 = make_key(4, 11);
  Payload p = plain(0x1234567890abcdefULL);
  Payload a = apply(k3, apply(k1, apply(k2, p, 48), 48), 48);
  Payload b = apply(k2, apply(k3, apply(k1, p, 48), 48), 48);
  CHECK(a.bits == b.bits);
  CHECK(a.meta.parity == b.meta.parity);
  CHECK(a.meta.parity == ((1u << 1) | (1u << 2) | (1u << 4)));
}

TEST_CASE("parity tracks the multiset of applications modulo two") {
  Key k1 = make_key(1, 11);
  Key k2 = make_key(2, 11);
  Payload p = plain(42);
  Payload q = apply(k1, apply(k2, apply(k1, p, 16), 16), 16);
  CHECK(q.meta.parity == (1u << 2));  // k1 cancelled itself
  CHECK(q.bits == apply(k2, p, 16).bits);
}

TEST_CASE("retrievability rule") {
  PayloadMeta meta;
  meta.event_id = 7;
  meta.genuine = true;
  meta.parity = 0;
  uint32_t known = (1u << 2) | (1u << 3);  // node 1 knows keys of 2 and 3

  CHECK(retrievable(meta, known, 1));  // clean payload

  meta.parity = 1u << 2;  // ciphered with a known peer key
  CHECK(retrievable(meta, known, 1));

  meta.parity = 1u << 4;  // unknown key still in the payload
  CHECK(!retrievable(meta, known, 1));

  meta.parity = 1u << 1;  // own punishment key: denied by construction
  CHECK(!retrievable(meta, known | (1u << 1), 1));

  meta.parity = 0;
  meta.genuine = false;  // fabricated content is worthless even if readable
  CHECK(!retrievable(meta, known, 1));
}

TEST_CASE("exhaustive order independence for small multisets") {
  std::vector<Key> keys;
  for (int o = 1; o <= 4; ++o) keys.push_back(make_key(o, 77));
  for (uint64_t v = 0; v < 256; v += 17) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        Payload ab = apply(keys[j], apply(keys[i], plain(v), 8), 8);
        Payload ba = apply(keys[i], apply(keys[j], plain(v), 8), 8);
        CHECK(ab.bits == ba.bits);
        CHECK(ab.meta.parity == ba.meta.parity);
      }
    }
  }
}
