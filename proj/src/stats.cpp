#include "medsim/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace medsim {

MeanCI mean_ci(const std::vector<double>& xs, double quantile) {
  MeanCI out;
  out.n = static_cast<int>(xs.size());
  if (out.n == 0) return out;
  double sum = 0;
  for (double x : xs) sum += x;
  out.mean = sum / out.n;
  if (out.n > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / (out.n - 1));
  }
  out.halfwidth = quantile * out.sd / std::sqrt(static_cast<double>(out.n));
  return out;
}

double z99() { return 2.5758293035489004; }

double t99(int df) {
  // Cornish-Fisher expansion around the normal quantile; well under 1%
  // relative error for df >= 10, and the suites use hundreds of replicates.
  if (df < 1) throw std::invalid_argument("degrees of freedom must be positive");
  double z = z99();
  double z3 = z * z * z;
  double z5 = z3 * z * z;
  double v = df;
  return z + (z3 + z) / (4 * v) + (5 * z5 + 16 * z3 + 3 * z) / (96 * v * v);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Regularized incomplete gamma functions, series and continued-fraction
// forms, following the classic numerical treatment.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double chi2_sf(double x, int k) {
  if (x < 0 || k < 1) throw std::invalid_argument("bad chi-square arguments");
  if (x == 0) return 1.0;
  double a = 0.5 * k;
  double hx = 0.5 * x;
  if (hx < a + 1.0) return 1.0 - gamma_p_series(a, hx);
  return gamma_q_cf(a, hx);
}

double two_proportion_z(long long x1, long long n1, long long x2, long long n2) {
  double p1 = static_cast<double>(x1) / n1;
  double p2 = static_cast<double>(x2) / n2;
  double pool = static_cast<double>(x1 + x2) / (n1 + n2);
  double se = std::sqrt(pool * (1 - pool) * (1.0 / n1 + 1.0 / n2));
  if (se == 0) return 0;
  return (p1 - p2) / se;
}

double chi2_uniform_stat(const std::vector<long long>& counts) {
  long long total = 0;
  for (long long c : counts) total += c;
  double expect = static_cast<double>(total) / counts.size();
  double stat = 0;
  for (long long c : counts) {
    double d = c - expect;
    stat += d * d / expect;
  }
  return stat;
}

double chi2_independence_stat(const std::vector<std::vector<long long>>& table,
                              int* df) {
  size_t rows = table.size();
  size_t cols = table[0].size();
  std::vector<double> rsum(rows, 0), csum(cols, 0);
  double total = 0;
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      rsum[r] += table[r][c];
      csum[c] += table[r][c];
      total += table[r][c];
    }
  }
  double stat = 0;
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      double expect = rsum[r] * csum[c] / total;
      if (expect > 0) {
        double d = table[r][c] - expect;
        stat += d * d / expect;
      }
    }
  }
  if (df) *df = static_cast<int>((rows - 1) * (cols - 1));
  return stat;
}

}  // namespace medsim
