#pragma once

#include <cstdint>
#include <string>

namespace medsim {

// Exact rational on int64 with 128-bit intermediates.  Utility accounting and
// the exact reliability recursion stay inside this range by construction
// (denominators are products of subset counts, at most C(7,3)^8 before
// reduction at the sizes the exact path accepts).  Overflow past 128 bits in
// an intermediate aborts rather than wrapping.
class Rat {
public:
  Rat() : num_(0), den_(1) {}
  Rat(long long n) : num_(n), den_(1) {}
  Rat(long long n, long long d);

  long long num() const { return num_; }
  long long den() const { return den_; }

  Rat operator+(const Rat& o) const;
  Rat operator-(const Rat& o) const;
  Rat operator*(const Rat& o) const;
  Rat operator/(const Rat& o) const;
  Rat operator-() const { return Rat(-num_, den_); }
  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }
  Rat& operator/=(const Rat& o) { return *this = *this / o; }

  bool operator==(const Rat& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rat& o) const { return !(*this == o); }
  bool operator<(const Rat& o) const;
  bool operator<=(const Rat& o) const { return *this < o || *this == o; }
  bool operator>(const Rat& o) const { return o < *this; }
  bool operator>=(const Rat& o) const { return o <= *this; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

private:
  long long num_;
  long long den_;  // always > 0, gcd(|num|, den) == 1
};

// Parses "p", "-p", or "p/q".  Throws std::invalid_argument on anything else.
Rat parse_rat(const std::string& s);

}  // namespace medsim
