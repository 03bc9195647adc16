#include "rxt/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "rxt/dislocation.hpp"
#include "rxt/growth.hpp"
#include "rxt/paintbox.hpp"
#include "rxt/spine.hpp"
#include "rxt/stats.hpp"
#include "rxt/treemetric.hpp"

namespace rxt {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

template <class T>
T param(const json& p, const char* key, T fallback) {
  return p.contains(key) ? p.at(key).get<T>() : fallback;
}

int single_n(const ExperimentConfig& cfg) {
  if (cfg.n_grid.empty()) throw std::invalid_argument("config: n_grid must not be empty");
  return cfg.n_grid.front();
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      s += '"';
      for (char ch : c) {
        if (ch == '"') s += '"';
        s += ch;
      }
      s += '"';
    } else {
      s += c;
    }
  }
  return s + '\n';
}

std::function<double(Rng&)> variate(const json& spec) {
  const std::string kind = param<std::string>(spec, "kind", "exp");
  if (kind == "exp") {
    double rate = param(spec, "rate", 1.0);
    return [rate](Rng& r) { return r.exponential(rate); };
  }
  if (kind == "pareto") {
    double index = param(spec, "index", 0.5), scale = param(spec, "scale", 1.0);
    if (!(index > 0.0) || !(scale > 0.0)) throw std::invalid_argument("pareto: index and scale must be positive");
    return [index, scale](Rng& r) { return scale * std::pow(r.uniform_pos(), -1.0 / index); };
  }
  if (kind == "deterministic") {
    double value = param(spec, "value", 1.0);
    return [value](Rng&) { return value; };
  }
  throw std::invalid_argument("unknown variate kind: " + kind);
}

// Y = exp(-X) for the Gnedin sampler, X drawn from the spec.
std::function<double(Rng&)> y_variate(const json& spec) {
  auto x = variate(spec);
  return [x](Rng& r) { return std::exp(-x(r)); };
}

void root_split_gate(const ExperimentConfig& cfg, const Model& m, int n, ResultBundle& out) {
  auto table = model_split_table(m, n);
  std::map<std::string, double> probs;
  for (auto& [p, q] : table.probs) probs[p.to_string()] = q;
  auto gate = run_gate(
      [&](std::uint64_t seed) {
        std::map<std::string, long> counts;
        for (long r = 0; r < cfg.reps; ++r) {
          Rng rng(derive_seed(seed, "root-split", static_cast<std::uint64_t>(r)));
          auto t = sample_tree(m, n, rng);
          counts[Partition(n, children_of(t.to_hierarchy(), trivial_partition(n).block(0))).to_string()]++;
        }
        return chi_square_gof(counts, probs).p_value;
      },
      cfg.master_seed, cfg.tag + "/gate");
  out.summary["gate"] = {{"passed", gate.passed}, {"p_values", gate.p_values}};
  if (!gate.passed) out.gate_failed = true;
}

void run_split_table(const ExperimentConfig& cfg, ResultBundle& out) {
  const int n = single_n(cfg);
  auto table = model_split_table(parse_model(cfg.model), n);
  auto flags = classify_exchangeability(table.as_measure());
  out.tables["split_table.csv"] = table.to_csv();
  out.summary["n"] = n;
  out.summary["partitions"] = table.probs.size();
  out.summary["total"] = table.total();
  out.summary["exchangeable"] = flags.exchangeable;
  out.summary["partially_exchangeable"] = flags.partially_exchangeable;
  out.summary["restricted_exchangeable"] = flags.restricted_exchangeable;
}

void run_grow(const ExperimentConfig& cfg, ResultBundle& out) {
  const int n = single_n(cfg);
  const Model m = parse_model(cfg.model);
  std::vector<std::string> rows(static_cast<std::size_t>(cfg.reps));
  std::vector<std::string> errors(rows.size());
  std::vector<double> heights(rows.size(), 0.0);
  parallel_for(rows.size(), cfg.workers, [&](std::size_t r) {
    const std::uint64_t seed = derive_seed(cfg.master_seed, cfg.tag, r);
    try {
      Rng rng(seed);
      auto t = sample_tree(m, n, rng);
      heights[r] = t.height();
      rows[r] = csv_row({std::to_string(r), std::to_string(seed), t.newick(), std::to_string(t.height())});
    } catch (const std::exception& e) {
      errors[r] = e.what();
    }
  });
  std::string csv = "replicate,seed,newick,height\n";
  json failures = json::array();
  std::vector<double> ok;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!errors[r].empty()) {
      failures.push_back({{"replicate", r}, {"error", errors[r]}});
      continue;
    }
    csv += rows[r];
    ok.push_back(heights[r]);
  }
  out.tables["trees.csv"] = csv;
  out.summary["n"] = n;
  out.summary["failures"] = failures;
  out.summary["mean_height"] = mean(ok);
  if (n >= 2 && n <= 8 && cfg.reps >= 100 && failures.empty()) root_split_gate(cfg, m, n, out);
}

void run_consistency(const ExperimentConfig& cfg, ResultBundle& out) {
  const Model m = parse_model(cfg.model);
  std::string csv = "n,residual\n";
  double worst = 0.0;
  for (int n : cfg.n_grid) {
    double r = consistency_residual(model_split_table(m, n), model_split_table(m, n + 1));
    worst = std::max(worst, r);
    csv += csv_row({std::to_string(n), format_double(r)});
  }
  out.tables["consistency.csv"] = csv;
  out.summary["max_residual"] = worst;
}

void run_sampling_consistency(const ExperimentConfig& cfg, ResultBundle& out) {
  const json& mj = cfg.model;
  const double a = param(mj, "alpha", 0.5), th = param(mj, "theta", -0.5);
  const int steps = param(cfg.params, "lambda_steps", 20);
  std::string csv = "lambda,residual\n";
  for (int i = 0; i <= steps; ++i) {
    const double l = static_cast<double>(i) / steps;
    csv += csv_row({format_double(l), format_double(sampling_consistency_residual(a, th, l))});
  }
  out.tables["sampling_consistency.csv"] = csv;
  if (mj.contains("lambda")) out.summary["residual"] = sampling_consistency_residual(a, th, mj.at("lambda").get<double>());
  out.summary["lambda_half"] = 0.5;
  out.summary["lambda_curve"] = (1.0 - a) / (1.0 - th - 2.0 * a);
}

void run_gnedin(const ExperimentConfig& cfg, ResultBundle& out) {
  auto y = y_variate(param(cfg.params, "y", json{{"kind", "exp"}}));
  auto psi = param<std::vector<long>>(cfg.params, "psi", {1});
  std::string csv = "n,mean_J_over_log_n,stderr,mean_K,mean_R,reps\n";
  json rows = json::array();
  for (int n : cfg.n_grid) {
    std::vector<double> ratio(static_cast<std::size_t>(cfg.reps)), ks(ratio.size()), rs(ratio.size());
    const std::string tag = cfg.tag + "/" + std::to_string(n);
    parallel_for(ratio.size(), cfg.workers, [&](std::size_t r) {
      Rng rng(derive_seed(cfg.master_seed, tag, r));
      auto st = gnedin_constrained_run(y, psi, n, rng);
      ratio[r] = static_cast<double>(st.J) / std::log(static_cast<double>(n));
      ks[r] = static_cast<double>(st.K);
      rs[r] = static_cast<double>(st.R);
    });
    const double se = std::sqrt(variance(ratio) / static_cast<double>(ratio.size()));
    csv += csv_row({std::to_string(n), format_double(mean(ratio)), format_double(se), format_double(mean(ks)),
                    format_double(mean(rs)), std::to_string(cfg.reps)});
    rows.push_back({{"n", n}, {"mean_J_over_log_n", mean(ratio)}});
  }
  out.tables["gnedin.csv"] = csv;
  out.summary["rows"] = rows;
}

void run_renewal(const ExperimentConfig& cfg, ResultBundle& out) {
  auto x = variate(param(cfg.params, "interarrival", json{{"kind", "exp"}}));
  const int p = param(cfg.params, "p", 2);
  std::string csv = "t,p,mean,stderr,reps\n";
  for (int t : cfg.n_grid) {
    Rng rng(derive_seed(cfg.master_seed, cfg.tag, static_cast<std::uint64_t>(t)));
    auto est = renewal_moment(x, t, p, cfg.reps, rng);
    csv += csv_row({std::to_string(t), std::to_string(p), format_double(est.mean), format_double(est.std_error),
                    std::to_string(cfg.reps)});
  }
  out.tables["renewal.csv"] = csv;
}

void run_pjs(const ExperimentConfig& cfg, ResultBundle& out) {
  PowerTail tail{param(cfg.params, "alpha", 0.5), 1.0};
  KnWindow w{param(cfg.params, "epsilon", 0.0), param(cfg.params, "tau", 0.0), param(cfg.params, "tau_prime", 5.0)};
  std::string csv = "n,path,K,normalized_K,limit,relative_error\n";
  json medians = json::array();
  for (int n : cfg.n_grid) {
    LevyAtoms l;
    PowerTail t = tail;
    t.delta = 1.0 / (1000.0 * n);
    l.tail = t;
    std::vector<double> rel(static_cast<std::size_t>(cfg.reps));
    std::vector<std::string> rows(rel.size());
    const std::string tag = cfg.tag + "/" + std::to_string(n);
    parallel_for(rel.size(), cfg.workers, [&](std::size_t r) {
      Rng rng(derive_seed(cfg.master_seed, tag, r));
      auto path = simulate_subordinator(l, w.tau_prime - w.tau, rng);
      long k = sample_Kn(path, w, n, rng);
      double norm = k / (std::pow(static_cast<double>(n), t.alpha) * std::tgamma(1.0 - t.alpha));
      double lim = pjs_limit_functional(path, w, t.alpha);
      rel[r] = std::abs(norm - lim) / lim;
      rows[r] = csv_row({std::to_string(n), std::to_string(r), std::to_string(k), format_double(norm),
                         format_double(lim), format_double(rel[r])});
    });
    for (auto& row : rows) csv += row;
    medians.push_back({{"n", n}, {"median_relative_error", median(rel)}});
  }
  out.tables["pjs.csv"] = csv;
  out.summary["medians"] = medians;
  if (cfg.params.contains("xs")) {
    auto xs = cfg.params.at("xs").get<std::vector<double>>();
    const long pilot = param<long>(cfg.params, "pilot_n", 1000);
    const int tail_reps = param(cfg.params, "tail_reps", 200);
    Rng rng(derive_seed(cfg.master_seed, cfg.tag + "/tail", 0));
    double cp = calibrate_pjs_constant(tail, w, pilot, xs, tail_reps, rng);
    auto rep = pjs_tail_statistic(tail, w, cfg.n_grid.back(), xs, tail_reps, rng, cp);
    std::string tcsv = "x,frequency,bound,c_p,a_x\n";
    for (auto& r : rep)
      tcsv += csv_row({format_double(r.x), format_double(r.frequency), format_double(r.bound), format_double(r.c_p),
                       format_double(r.a_x)});
    out.tables["pjs_tail.csv"] = tcsv;
  }
}

void run_reduced_crt(const ExperimentConfig& cfg, ResultBundle& out) {
  const Model m = parse_model(cfg.model);
  const auto* dm = std::get_if<DislocationModel>(&m);
  if (!dm) throw std::invalid_argument("reduced-crt: needs a dislocation model");
  const int k = param(cfg.params, "k", 2);
  std::vector<std::string> rows(static_cast<std::size_t>(cfg.reps)), errors(rows.size());
  std::vector<double> root_edge(rows.size(), 0.0);
  std::vector<char> capped(rows.size(), 0);
  parallel_for(rows.size(), cfg.workers, [&](std::size_t r) {
    try {
      Rng rng(derive_seed(cfg.master_seed, cfg.tag, r));
      auto s = sample_reduced_crt(dm->d, k, dm->index, rng);
      root_edge[r] = s.tree.vertex(1).length;
      capped[r] = s.horizon_capped;
      rows[r] = csv_row({std::to_string(r), s.tree.newick(), s.horizon_capped ? "1" : "0"});
    } catch (const std::exception& e) {
      errors[r] = e.what();
    }
  });
  std::string csv = "replicate,newick,horizon_capped\n";
  json failures = json::array();
  std::vector<double> ok;
  long capped_count = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!errors[r].empty()) {
      failures.push_back({{"replicate", r}, {"error", errors[r]}});
      continue;
    }
    csv += rows[r];
    ok.push_back(root_edge[r]);
    capped_count += capped[r];
  }
  out.tables["reduced_crt.csv"] = csv;
  out.summary["k"] = k;
  out.summary["root_edge_mean"] = mean(ok);
  out.summary["horizon_capped"] = capped_count;
  out.summary["failures"] = failures;
}

void run_exponent(const ExperimentConfig& cfg, ResultBundle& out) {
  const Model m = parse_model(cfg.model);
  const std::string stat = param<std::string>(cfg.params, "statistic", "height");
  if (stat != "height" && stat != "mean_depth") throw std::invalid_argument("exponent: unknown statistic " + stat);
  auto fit = scaling_exponent(m, cfg.n_grid, static_cast<int>(cfg.reps),
                              stat == "height" ? HeightStatistic::height : HeightStatistic::mean_depth,
                              cfg.master_seed, cfg.workers);
  std::string csv = "n,statistic,mean,stderr,reps,seed\n";
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i)
    csv += csv_row({std::to_string(cfg.n_grid[i]), stat, format_double(fit.means[i]), format_double(fit.mean_errors[i]),
                    std::to_string(cfg.reps), std::to_string(cfg.master_seed)});
  out.tables["exponent.csv"] = csv;
  out.summary["slope"] = fit.slope;
  out.summary["slope_stderr"] = fit.std_error;
  out.summary["scaling_index"] = scaling_index(m);
}

void run_gh_stabilize(const ExperimentConfig& cfg, ResultBundle& out) {
  const Model m = parse_model(cfg.model);
  const auto* ag = std::get_if<AlphaGammaModel>(&m);
  if (!ag) throw std::invalid_argument("gh-stabilize: needs an alpha-gamma model");
  const int k = param(cfg.params, "k", 4);
  auto rows = gh_stabilization(*ag, k, cfg.n_grid, static_cast<int>(cfg.reps), cfg.master_seed, cfg.workers);
  std::string csv = "n,median_gh,pairs\n";
  json med = json::array();
  for (auto& r : rows) {
    csv += csv_row({std::to_string(r.n), format_double(r.median), std::to_string(r.pairs)});
    med.push_back(r.median);
  }
  out.tables["gh_stabilize.csv"] = csv;
  out.summary["medians"] = med;
}

void run_edge_convergence(const ExperimentConfig& cfg, ResultBundle& out) {
  const Model m = parse_model(cfg.model);
  const int k = param(cfg.params, "k", 2);
  auto rows = edge_convergence_experiment(m, k, cfg.n_grid, static_cast<int>(cfg.reps), cfg.master_seed, cfg.workers);
  std::string csv = "n,shape,edge,mean,variance,count\n";
  for (auto& r : rows)
    csv += csv_row({std::to_string(r.n), r.shape, r.edge, format_double(r.mean), format_double(r.variance),
                    std::to_string(r.count)});
  out.tables["edge_convergence.csv"] = csv;
}

void run_classify(const ExperimentConfig& cfg, ResultBundle& out) {
  FiniteMeasureOnPartitions mu;
  mu.n = single_n(cfg);
  for (auto& [key, v] : cfg.params.at("weights").items()) mu.weights[Partition::parse(key)] = v.get<double>();
  auto f = classify_exchangeability(mu);
  out.summary["exchangeable"] = f.exchangeable;
  out.summary["partially_exchangeable"] = f.partially_exchangeable;
  out.summary["restricted_exchangeable"] = f.restricted_exchangeable;
}

}  // namespace

std::vector<std::string> experiment_tags() {
  return {"split-table", "grow", "consistency", "sampling-consistency", "gnedin", "renewal",
          "pjs", "reduced-crt", "exponent", "gh-stabilize", "edge-convergence", "classify"};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  c.tag = j.at("tag").get<std::string>();
  if (j.contains("model")) c.model = j.at("model");
  if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<int>>();
  c.reps = param<long>(j, "reps", 1000);
  c.master_seed = param<std::uint64_t>(j, "master_seed", 0);
  c.output = param<std::string>(j, "output", "");
  if (j.contains("params")) c.params = j.at("params");
  c.workers = param(j, "workers", 1);
  if (c.reps < 1) throw std::invalid_argument("config: reps must be at least 1");
  if (c.workers < 1) throw std::invalid_argument("config: workers must be at least 1");
  return c;
}

json ExperimentConfig::to_json() const {
  return {{"tag", tag},     {"model", model},   {"n_grid", n_grid}, {"reps", reps},
          {"master_seed", master_seed}, {"output", output}, {"params", params}, {"workers", workers}};
}

Model parse_model(const json& j) {
  const std::string family = param<std::string>(j, "family", "");
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (family == "alpha-gamma") {
    AlphaGammaModel m{param(j, "alpha", 0.5), param(j, "gamma", 0.5)};
    if (!unit(m.alpha) || !(m.gamma >= 0.0 && m.gamma <= m.alpha))
      throw std::invalid_argument("alpha-gamma: need 0 <= gamma <= alpha <= 1");
    return m;
  }
  if (family == "skewed-pd") {
    SkewedPdModel m{param(j, "alpha", 0.5), param(j, "theta", -0.5), param(j, "lambda", 0.5)};
    if (!unit(m.alpha) || !(m.theta >= -2.0 * m.alpha) || !unit(m.lambda))
      throw std::invalid_argument("skewed-pd: parameters out of range");
    return m;
  }
  if (family == "dislocation") {
    std::vector<std::vector<DislocationAtom>> levels;
    for (auto& lvl : j.at("levels")) {
      std::vector<DislocationAtom> atoms;
      for (auto& a : lvl) atoms.push_back({MassPartition(a.at("s").get<std::vector<double>>()), a.at("w").get<double>()});
      levels.push_back(std::move(atoms));
    }
    auto c = param<std::vector<double>>(j, "c", {});
    auto k = param<std::vector<double>>(j, "k", {});
    bool t2 = true;
    for (auto& lvl : levels)
      for (auto& a : lvl) t2 = t2 && a.s.dust() <= 1e-12;
    for (double x : c) t2 = t2 && x == 0.0;
    for (double x : k) t2 = t2 && x == 0.0;
    DislocationModel m{DiscreteDislocation(std::move(levels), c, k, t2), param(j, "index", 0.0)};
    return m;
  }
  if (family == "star") return StarModel{};
  throw std::invalid_argument("unknown model family: " + family);
}

ResultBundle run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ResultBundle out;
  out.summary = json::object();
  if (cfg.tag == "split-table")
    run_split_table(cfg, out);
  else if (cfg.tag == "grow")
    run_grow(cfg, out);
  else if (cfg.tag == "consistency")
    run_consistency(cfg, out);
  else if (cfg.tag == "sampling-consistency")
    run_sampling_consistency(cfg, out);
  else if (cfg.tag == "gnedin")
    run_gnedin(cfg, out);
  else if (cfg.tag == "renewal")
    run_renewal(cfg, out);
  else if (cfg.tag == "pjs")
    run_pjs(cfg, out);
  else if (cfg.tag == "reduced-crt")
    run_reduced_crt(cfg, out);
  else if (cfg.tag == "exponent")
    run_exponent(cfg, out);
  else if (cfg.tag == "gh-stabilize")
    run_gh_stabilize(cfg, out);
  else if (cfg.tag == "edge-convergence")
    run_edge_convergence(cfg, out);
  else if (cfg.tag == "classify")
    run_classify(cfg, out);
  else
    throw std::invalid_argument("unknown experiment tag: " + cfg.tag);
  out.summary["config"] = cfg.to_json();
  out.summary["seed"] = cfg.master_seed;
  out.summary["version"] = RXT_VERSION;
  out.summary["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.summary["tables"] = json::array();
  for (auto& [name, text] : out.tables) out.summary["tables"].push_back(name);
  if (!cfg.output.empty()) write_bundle(out, cfg.output);
  return out;
}

void write_bundle(const ResultBundle& b, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream f(fs::path(dir) / "summary.json", std::ios::binary);
    f << b.summary.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write summary.json in " + dir);
  }
  for (auto& [name, text] : b.tables) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + name + " in " + dir);
  }
}

}  // namespace rxt
