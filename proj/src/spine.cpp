#include "rxt/spine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

#include "rxt/errors.hpp"
#include "rxt/paintbox.hpp"

namespace rxt {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double tail_jump(const PowerTail& t, Rng& rng) {
  double u = rng.uniform();
  return std::pow(1.0 + u * (std::pow(t.delta, -t.alpha) - 1.0), -1.0 / t.alpha);
}

// Draws one jump of the compound-Poisson process.
class JumpSampler {
 public:
  explicit JumpSampler(const LevyAtoms& l) : l_(l) {
    double acc = 0.0;
    for (auto& [z, r] : l.jumps) {
      acc += r;
      cum_.push_back(acc);
    }
    total_ = acc + (l.tail ? l.tail->rate() : 0.0);
  }
  double total() const { return total_; }
  double operator()(Rng& rng) const {
    double u = rng.uniform() * total_;
    if (!cum_.empty() && u < cum_.back()) {
      auto i = std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
      return l_.jumps[static_cast<std::size_t>(i)].first;
    }
    if (l_.tail) return tail_jump(*l_.tail, rng);
    return l_.jumps.back().first;
  }

 private:
  const LevyAtoms& l_;
  std::vector<double> cum_;
  double total_ = 0.0;
};

struct SpineRun {
  double integral = 0.0;
  double xi = 0.0;
  bool capped = false;
};

// Integral of exp(-alpha xi) over [0, stop] along a fresh path. With stop
// infinite the run ends once exp(-alpha xi) < 1e-8 or at the horizon.
SpineRun run_spine(const LevyAtoms& l, double alpha, double stop, double horizon, Rng& rng) {
  JumpSampler jump(l);
  SpineRun out;
  const bool open = std::isinf(stop);
  const double end = open ? horizon : stop;
  double t = 0.0;
  while (true) {
    double next = jump.total() > 0.0 ? t + rng.exponential(jump.total()) : end;
    double upto = std::min(next, end);
    out.integral += std::exp(-alpha * out.xi) * (upto - t);
    t = upto;
    if (next >= end) {
      out.capped = open;
      return out;
    }
    out.xi += jump(rng);
    if (open && std::exp(-alpha * out.xi) < 1e-8) return out;
  }
}

}  // namespace

double PowerTail::rate() const { return std::pow(delta, -alpha) - 1.0; }

double LevyAtoms::total_rate() const {
  double r = tail ? tail->rate() : 0.0;
  for (auto& [z, q] : jumps) r += q;
  return r;
}

double LevyAtoms::mean_jump_rate() const {
  double r = 0.0;
  for (auto& [z, q] : jumps) r += z * q;
  if (tail) {
    // integral of x alpha x^{-alpha-1} over [delta, 1]
    const double a = tail->alpha;
    r += a / (1.0 - a) * (1.0 - std::pow(tail->delta, 1.0 - a));
  }
  return r;
}

SpinalMeasure spinal_levy_measure(const DiscreteDislocation& d, int k) {
  if (!d.conservative_mode()) throw UnsupportedError("spinal_levy_measure: requires a conservative model without c/k atoms");
  if (k < 1) throw std::invalid_argument("spinal_levy_measure: k must be positive");
  std::map<double, double> agg;
  SpinalMeasure out;
  const int mc = d.m_cap();
  for (int lvl = 1; lvl <= mc; ++lvl)
    for (auto& a : d.level(lvl))
      for (double s : a.s.atoms()) {
        const double w = a.weight;
        const double z = -std::log(s);
        if (lvl < mc) {
          double mass = w * std::pow(s, lvl) * (1.0 - s);
          if (lvl >= k)
            agg[z] += mass;
          else
            out.killing_rate += mass;
        } else {
          const int from = std::max(k, mc);
          if (k > mc) out.killing_rate += w * (std::pow(s, mc) - std::pow(s, k));
          agg[z] += w * std::pow(s, from);
        }
      }
  for (auto& [z, r] : agg)
    if (r > 0.0) out.atoms.jumps.push_back({z, r});
  return out;
}

double SubordinatorPath::xi(double t) const {
  auto i = std::upper_bound(times.begin(), times.end(), t) - times.begin();
  return i == 0 ? 0.0 : level[static_cast<std::size_t>(i - 1)];
}

std::string SubordinatorPath::to_csv() const {
  std::string out = "time,jump\n";
  for (std::size_t i = 0; i < times.size(); ++i) out += fmt(times[i]) + ',' + fmt(jumps[i]) + '\n';
  return out;
}

SubordinatorPath simulate_subordinator(const LevyAtoms& l, double horizon, Rng& rng) {
  if (!(horizon >= 0.0) || std::isinf(horizon)) throw std::invalid_argument("simulate_subordinator: bad horizon");
  if (l.tail && !(l.tail->alpha > 0.0 && l.tail->alpha < 1.0 && l.tail->delta > 0.0 && l.tail->delta < 1.0))
    throw std::invalid_argument("simulate_subordinator: tail needs alpha in (0,1), delta in (0,1)");
  for (auto& [z, r] : l.jumps)
    if (!(z > 0.0) || !(r >= 0.0)) throw std::invalid_argument("simulate_subordinator: bad atom");
  SubordinatorPath p;
  p.horizon = horizon;
  JumpSampler jump(l);
  if (!(jump.total() > 0.0)) return p;
  double t = 0.0, xi = 0.0;
  while (true) {
    t += rng.exponential(jump.total());
    if (t > horizon) break;
    double z = jump(rng);
    xi += z;
    p.times.push_back(t);
    p.jumps.push_back(z);
    p.level.push_back(xi);
  }
  return p;
}

namespace {

void check_window(const SubordinatorPath& path, const KnWindow& w) {
  if (!(w.epsilon >= 0.0) || !(w.tau >= 0.0) || !(w.tau_prime >= w.tau))
    throw std::invalid_argument("KnWindow: need epsilon >= 0 and 0 <= tau <= tau'");
  if (!std::isinf(w.tau_prime) && w.tau_prime - w.tau > path.horizon)
    throw std::invalid_argument("sample_Kn: path horizon shorter than the window");
}

// Index of the jump time carrying V, or -1 when V = tau or V lies beyond the path.
long draw_v(const SubordinatorPath& path, const KnWindow& w, Rng& rng) {
  double e = rng.exponential(1.0);
  if (e <= w.epsilon) return -1;
  auto it = std::lower_bound(path.level.begin(), path.level.end(), e - w.epsilon);
  if (it == path.level.end()) return -1;
  return static_cast<long>(it - path.level.begin());
}

}  // namespace

long sample_Kn(const SubordinatorPath& path, const KnWindow& w, long n, Rng& rng) {
  return sample_Kn_sequence(path, w, {n}, rng).front();
}

std::vector<long> sample_Kn_sequence(const SubordinatorPath& path, const KnWindow& w, const std::vector<long>& ns,
                                     Rng& rng) {
  check_window(path, w);
  for (std::size_t i = 0; i < ns.size(); ++i)
    if (ns[i] < 0 || (i > 0 && ns[i] < ns[i - 1]))
      throw std::invalid_argument("sample_Kn: n values must be non-negative and non-decreasing");
  const double span = w.tau_prime - w.tau;
  std::vector<char> hit(path.times.size(), 0);
  std::vector<long> out;
  long count = 0, drawn = 0;
  for (long target : ns) {
    for (; drawn < target; ++drawn) {
      long j = draw_v(path, w, rng);
      if (j < 0 || hit[j] || path.times[j] > span) continue;
      hit[j] = 1;
      ++count;
    }
    out.push_back(count);
  }
  return out;
}

double pjs_limit_functional(const SubordinatorPath& path, const KnWindow& w, double alpha) {
  if (!(w.tau_prime >= w.tau)) throw std::invalid_argument("pjs_limit_functional: tau' < tau");
  const double upper = std::min(w.tau_prime - w.tau, path.horizon);
  double total = 0.0, prev = 0.0, lvl = 0.0;
  for (std::size_t i = 0; i < path.times.size() && path.times[i] < upper; ++i) {
    total += std::exp(-alpha * (w.epsilon + lvl)) * (path.times[i] - prev);
    prev = path.times[i];
    lvl = path.level[i];
  }
  total += std::exp(-alpha * (w.epsilon + lvl)) * (upper - prev);
  return total;
}

namespace {

double a_alpha(double alpha) {
  const double r = std::sqrt(alpha);
  const long J = 1000000;
  double s = 0.0;
  for (long j = J; j >= 1; --j) s += std::pow(static_cast<double>(j + 1), r) / (static_cast<double>(j) * (j + 1));
  s += std::pow(static_cast<double>(J), r - 1.0) / (1.0 - r);
  return 2.0 * s;
}

}  // namespace

double pjs_Y(const SubordinatorPath& path, const KnWindow& w, double alpha) {
  static thread_local std::map<double, double> cache;
  auto it = cache.find(alpha);
  if (it == cache.end()) it = cache.emplace(alpha, a_alpha(alpha)).first;
  const double span = std::min(w.tau_prime - w.tau, path.horizon);
  double sum = 0.0;
  for (long j = 0; j <= static_cast<long>(std::floor(span)); ++j)
    sum += std::exp(-alpha * (w.epsilon + path.xi(static_cast<double>(j))));
  return 1.0 + (1.0 + it->second) * sum;
}

std::vector<double> pjs_exceedance_frequencies(const PowerTail& tail, const KnWindow& w, long n,
                                               const std::vector<double>& xs, int reps, Rng& rng) {
  if (n < 2 || reps < 1) throw std::invalid_argument("pjs tail: need n >= 2 and reps >= 1");
  LevyAtoms l;
  PowerTail t = tail;
  t.delta = std::min(tail.delta, 1.0 / (1000.0 * static_cast<double>(n)));
  l.tail = t;
  const double horizon = std::isinf(w.tau_prime) ? 50.0 : w.tau_prime - w.tau;
  const double scale = std::pow(static_cast<double>(n), t.alpha) * std::tgamma(1.0 - t.alpha);
  std::vector<double> freq(xs.size(), 0.0);
  for (int r = 0; r < reps; ++r) {
    auto path = simulate_subordinator(l, horizon, rng);
    KnWindow ww = w;
    if (std::isinf(ww.tau_prime)) ww.tau_prime = ww.tau + horizon;
    double k = static_cast<double>(sample_Kn(path, ww, n, rng));
    double y = pjs_Y(path, ww, t.alpha);
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (k > (1.0 + xs[i]) * y * scale) freq[i] += 1.0;
  }
  for (auto& f : freq) f /= reps;
  return freq;
}

double calibrate_pjs_constant(const PowerTail& tail, const KnWindow& w, long n_pilot, const std::vector<double>& xs,
                              int reps, Rng& rng, int p) {
  auto freq = pjs_exceedance_frequencies(tail, w, n_pilot, xs, reps, rng);
  double c = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    c = std::max(c, (freq[i] + 1.0 / reps) * std::pow(xs[i], p) *
                        std::pow(static_cast<double>(n_pilot), tail.alpha * p - 1.0));
  return c;
}

std::vector<PjsTailReport> pjs_tail_statistic(const PowerTail& tail, const KnWindow& w, long n,
                                              const std::vector<double>& xs, int reps, Rng& rng, double c_p, int p) {
  for (double x : xs)
    if (!(x >= 1.0)) throw std::invalid_argument("pjs_tail_statistic: x must be at least 1");
  auto freq = pjs_exceedance_frequencies(tail, w, n, xs, reps, rng);
  std::vector<PjsTailReport> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    out.push_back({x, freq[i], c_p / (std::pow(x, p) * std::pow(static_cast<double>(n), tail.alpha * p - 1.0)), c_p,
                   (1.0 + x) * std::log1p(x) - x});
  }
  return out;
}

MomentEstimate renewal_moment(const std::function<double(Rng&)>& interarrival, double t, int p, long reps, Rng& rng) {
  if (!(t > 0.0) || p < 1 || reps < 1) throw std::invalid_argument("renewal_moment: need t > 0, p >= 1, reps >= 1");
  double sum = 0.0, sum2 = 0.0;
  for (long r = 0; r < reps; ++r) {
    double s = 0.0;
    long count = 0;
    while (true) {
      double x = interarrival(rng);
      if (!(x >= 0.0)) throw std::invalid_argument("renewal_moment: negative inter-arrival time");
      s += x;
      if (s > t) break;
      ++count;
    }
    double v = std::pow(static_cast<double>(count) / t, p);
    sum += v;
    sum2 += v * v;
  }
  MomentEstimate m;
  m.mean = sum / reps;
  m.std_error = reps > 1 ? std::sqrt(std::max(0.0, (sum2 / reps - m.mean * m.mean) / (reps - 1))) : 0.0;
  return m;
}

ReducedCrtSample sample_reduced_crt(const DiscreteDislocation& d, int k, double alpha, Rng& rng,
                                    double leaf_horizon) {
  if (k < 1) throw std::invalid_argument("sample_reduced_crt: k must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("sample_reduced_crt: alpha must lie in [0,1)");
  if (!d.conservative_mode()) throw UnsupportedError("sample_reduced_crt: requires a conservative model without c/k atoms");
  ReducedCrtSample out;
  struct Task {
    Block labels;
    double mass;
    int parent;
  };
  Block all(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) all[i] = i + 1;
  std::vector<Task> stack{{all, 1.0, 0}};
  std::map<int, SpinalMeasure> spinal;
  auto measure = [&](int b) -> const SpinalMeasure& {
    auto it = spinal.find(b);
    if (it == spinal.end()) it = spinal.emplace(b, spinal_levy_measure(d, b)).first;
    return it->second;
  };
  while (!stack.empty()) {
    Task task = std::move(stack.back());
    stack.pop_back();
    const int b = static_cast<int>(task.labels.size());
    const double scale = std::pow(task.mass, alpha);
    const SpinalMeasure& sm = measure(b);
    if (b == 1) {
      auto run = run_spine(sm.atoms, alpha, std::numeric_limits<double>::infinity(), leaf_horizon, rng);
      out.horizon_capped = out.horizon_capped || run.capped;
      out.tree.add_vertex(task.parent, scale * run.integral, task.labels[0]);
      continue;
    }
    if (!(sm.killing_rate > 0.0)) throw ModelError("sample_reduced_crt: zero killing rate");
    const double kill = rng.exponential(sm.killing_rate);
    auto run = run_spine(sm.atoms, alpha, kill, kill, rng);
    const int v = out.tree.add_vertex(task.parent, scale * run.integral);
    const double mass = task.mass * std::exp(-run.xi);

    Partition pi = sample_split(d, b, rng);
    const auto& atoms = d.level(restricted_class(pi));
    std::vector<double> w;
    for (auto& a : atoms) w.push_back(a.weight * kingman_cylinder_prob(a.s, pi));
    double total = 0.0;
    for (double x : w) total += x;
    double u = rng.uniform() * total;
    std::size_t ai = 0;
    for (; ai + 1 < w.size() && u >= w[ai]; ++ai) u -= w[ai];
    const MassPartition& s = atoms[ai].s;

    // Distinct fragments for the blocks, weighted by prod s_i^{|block|}.
    const std::size_t q = pi.size(), m = s.m();
    std::vector<std::vector<std::size_t>> maps;
    std::vector<double> mw;
    std::vector<std::size_t> cur;
    std::vector<char> used(m, 0);
    std::function<void(double)> rec = [&](double acc) {
      if (cur.size() == q) {
        maps.push_back(cur);
        mw.push_back(acc);
        return;
      }
      const double size = static_cast<double>(pi.block(cur.size()).size());
      for (std::size_t i = 0; i < m; ++i) {
        if (used[i]) continue;
        used[i] = 1;
        cur.push_back(i);
        rec(acc * std::pow(s.atom(i), size));
        cur.pop_back();
        used[i] = 0;
      }
    };
    rec(1.0);
    double mt = 0.0;
    for (double x : mw) mt += x;
    double um = rng.uniform() * mt;
    std::size_t mi = 0;
    for (; mi + 1 < mw.size() && um >= mw[mi]; ++mi) um -= mw[mi];

    auto parts = push_forward(pi, task.labels);
    for (std::size_t i = q; i-- > 0;) stack.push_back({parts[i], mass * s.atom(maps[mi][i]), v});
  }
  return out;
}

}  // namespace rxt
