#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rxt {

struct ChiSquareReport {
  std::vector<std::string> categories;  // after pooling
  std::vector<double> observed;
  std::vector<double> expected;
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

// Pearson goodness of fit; cells with expected count < 5 are pooled.
ChiSquareReport chi_square_gof(const std::vector<double>& observed, const std::vector<double>& probs,
                               std::vector<std::string> categories = {});
// Keyed form; categories missing from probs have probability 0.
ChiSquareReport chi_square_gof(const std::map<std::string, long>& counts, const std::map<std::string, double>& probs);

struct GateResult {
  bool passed = false;
  std::vector<double> p_values;  // one per attempt
};

// Runs trial(seed) with seeds derived from (master, tag, attempt) until
// p > threshold, at most `strikes` times.
GateResult run_gate(const std::function<double(std::uint64_t)>& trial, std::uint64_t master, std::string_view tag,
                    int strikes = 3, double threshold = 1e-3);

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased
double median(std::vector<double> v);

int default_workers();
// Calls fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace rxt
