#include "medsim/rational.hpp"

#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace medsim {

namespace {

using i128 = __int128;

long long checked_narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) {
    throw std::overflow_error("rational overflow");
  }
  return static_cast<long long>(v);
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rat make(i128 n, i128 d) {
  if (d == 0) throw std::domain_error("rational division by zero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  return Rat(checked_narrow(n), checked_narrow(d));
}

}  // namespace

Rat::Rat(long long n, long long d) {
  i128 nn = n;
  i128 dd = d;
  if (dd == 0) throw std::domain_error("rational division by zero");
  if (dd < 0) {
    nn = -nn;
    dd = -dd;
  }
  i128 g = gcd128(nn, dd);
  if (g > 1) {
    nn /= g;
    dd /= g;
  }
  num_ = checked_narrow(nn);
  den_ = checked_narrow(dd);
}

Rat Rat::operator+(const Rat& o) const {
  return make(static_cast<i128>(num_) * o.den_ + static_cast<i128>(o.num_) * den_,
              static_cast<i128>(den_) * o.den_);
}

Rat Rat::operator-(const Rat& o) const {
  return make(static_cast<i128>(num_) * o.den_ - static_cast<i128>(o.num_) * den_,
              static_cast<i128>(den_) * o.den_);
}

Rat Rat::operator*(const Rat& o) const {
  return make(static_cast<i128>(num_) * o.num_, static_cast<i128>(den_) * o.den_);
}

Rat Rat::operator/(const Rat& o) const {
  if (o.num_ == 0) throw std::domain_error("rational division by zero");
  return make(static_cast<i128>(num_) * o.den_, static_cast<i128>(den_) * o.num_);
}

bool Rat::operator<(const Rat& o) const {
  return static_cast<i128>(num_) * o.den_ < static_cast<i128>(o.num_) * den_;
}

std::string Rat::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rat parse_rat(const std::string& s) {
  size_t slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      size_t pos = 0;
      long long n = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return Rat(n);
    }
    size_t pos = 0;
    long long n = std::stoll(s.substr(0, slash), &pos);
    if (pos != slash) throw std::invalid_argument(s);
    long long d = std::stoll(s.substr(slash + 1), &pos);
    if (pos != s.size() - slash - 1) throw std::invalid_argument(s);
    return Rat(n, d);
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("rational out of range: " + s);
  }
}

}  // namespace medsim
