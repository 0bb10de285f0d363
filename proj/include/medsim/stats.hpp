#pragma once

#include <vector>

namespace medsim {

struct MeanCI {
  double mean = 0;
  double sd = 0;
  double halfwidth = 0;  // at the quantile passed in
  int n = 0;
};

// Sample mean with a +/- q * sd / sqrt(n) interval.
MeanCI mean_ci(const std::vector<double>& xs, double quantile);

// Two-sided 99% quantiles.
double z99();
double t99(int df);

// Upper tail of the standard normal.
double normal_sf(double z);

// Upper tail of the chi-square distribution with k degrees of freedom.
double chi2_sf(double x, int k);

// Pooled two-proportion z statistic for counts x1/n1 vs x2/n2.
double two_proportion_z(long long x1, long long n1, long long x2, long long n2);

// Pearson chi-square statistic against uniform expected counts.
double chi2_uniform_stat(const std::vector<long long>& counts);

// Pearson chi-square statistic for independence in a contingency table,
// together with its degrees of freedom.
double chi2_independence_stat(const std::vector<std::vector<long long>>& table,
                              int* df);

}  // namespace medsim
