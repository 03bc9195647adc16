#include "rxt/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

#include "rxt/rng.hpp"

namespace rxt {

ChiSquareReport chi_square_gof(const std::vector<double>& observed, const std::vector<double>& probs,
                               std::vector<std::string> categories) {
  if (observed.size() != probs.size()) throw std::invalid_argument("chi_square_gof: dimension mismatch");
  if (!categories.empty() && categories.size() != observed.size())
    throw std::invalid_argument("chi_square_gof: category count mismatch");
  if (categories.empty())
    for (std::size_t i = 0; i < observed.size(); ++i) categories.push_back(std::to_string(i));
  double total = 0.0, ptotal = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] < 0.0 || probs[i] < 0.0) throw std::invalid_argument("chi_square_gof: negative entry");
    total += observed[i];
    ptotal += probs[i];
  }
  if (total < 100.0) throw std::invalid_argument("chi_square_gof: at least 100 observations required");
  if (!(ptotal > 0.0)) throw std::invalid_argument("chi_square_gof: probabilities sum to zero");

  ChiSquareReport rep;
  // Impossible cells with observations make the fit fail outright.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (probs[i] > 0.0) {
      order.push_back(i);
    } else if (observed[i] > 0.0) {
      rep.categories = categories;
      rep.observed = observed;
      for (double p : probs) rep.expected.push_back(total * p / ptotal);
      rep.statistic = std::numeric_limits<double>::infinity();
      rep.df = static_cast<int>(order.size());
      rep.p_value = 0.0;
      return rep;
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
  std::string pooled_name;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  std::size_t idx = 0;
  for (; idx < order.size(); ++idx) {
    std::size_t i = order[idx];
    double e = total * probs[i] / ptotal;
    if (e >= 5.0 && pooled_exp == 0.0) break;
    if (e >= 5.0 && pooled_exp >= 5.0) break;
    pooled_name += (pooled_name.empty() ? "" : "+") + categories[i];
    pooled_obs += observed[i];
    pooled_exp += e;
  }
  if (pooled_exp > 0.0) {
    rep.categories.push_back(pooled_name);
    rep.observed.push_back(pooled_obs);
    rep.expected.push_back(pooled_exp);
  }
  for (; idx < order.size(); ++idx) {
    std::size_t i = order[idx];
    rep.categories.push_back(categories[i]);
    rep.observed.push_back(observed[i]);
    rep.expected.push_back(total * probs[i] / ptotal);
  }
  for (std::size_t i = 0; i < rep.observed.size(); ++i) {
    double diff = rep.observed[i] - rep.expected[i];
    rep.statistic += diff * diff / rep.expected[i];
  }
  rep.df = static_cast<int>(rep.observed.size()) - 1;
  rep.p_value = rep.df > 0 ? boost::math::gamma_q(rep.df / 2.0, rep.statistic / 2.0) : 1.0;
  return rep;
}

ChiSquareReport chi_square_gof(const std::map<std::string, long>& counts, const std::map<std::string, double>& probs) {
  std::map<std::string, std::pair<double, double>> cells;
  for (auto& [k, p] : probs) cells[k].second = p;
  for (auto& [k, c] : counts) cells[k].first = static_cast<double>(c);
  std::vector<double> obs, pr;
  std::vector<std::string> cats;
  for (auto& [k, v] : cells) {
    cats.push_back(k);
    obs.push_back(v.first);
    pr.push_back(v.second);
  }
  return chi_square_gof(obs, pr, std::move(cats));
}

GateResult run_gate(const std::function<double(std::uint64_t)>& trial, std::uint64_t master, std::string_view tag,
                    int strikes, double threshold) {
  GateResult g;
  for (int a = 0; a < strikes; ++a) {
    double p = trial(derive_seed(master, tag, static_cast<std::uint64_t>(a)));
    g.p_values.push_back(p);
    if (p > threshold) {
      g.passed = true;
      break;
    }
  }
  return g;
}

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("ols: need at least 3 matching points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("ols: x values are all equal");
  OlsFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    ssr += r * r;
  }
  f.slope_se = std::sqrt(ssr / (n - 2.0) / sxx);
  return f;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(v.begin(), v.end());
  std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

int default_workers() {
  unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : static_cast<int>(h);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  for (std::size_t t = 0; t < w; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace rxt
