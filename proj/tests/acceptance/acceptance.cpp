// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Pass criterion names as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "auction_oracle.hpp"
#include "fixtures.hpp"
#include "ishigami.hpp"
#include "symbiosim/auction.hpp"
#include "symbiosim/commands.hpp"
#include "symbiosim/io.hpp"
#include "symbiosim/learning.hpp"
#include "symbiosim/metrics.hpp"
#include "symbiosim/parallel.hpp"
#include "symbiosim/regret.hpp"
#include "symbiosim/sensitivity.hpp"
#include "symbiosim/simulation.hpp"
#include "tempdir.hpp"

using namespace symbiosim;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

constexpr std::size_t kSeeds = 10;
constexpr std::size_t kLateWindow = 100;

MarketParams scenario(double s, double c_d, double rho, std::uint64_t seed) {
  MarketParams p;
  p.s = s;
  p.c_d = c_d;
  p.rho = rho;
  p.seed = seed;
  return p;
}

/// Runs `configs` on all workers and returns results in input order.
std::vector<RunResult> run_all(const std::vector<RunConfig>& configs) {
  std::vector<RunResult> out(configs.size());
  parallel_for(configs.size(), default_workers(), [&](std::size_t i) { out[i] = run(configs[i]); });
  return out;
}

double max_transport(const RunResult& r, double c_t) {
  double d = 0.0;
  for (std::size_t i = 0; i < r.layout.dist.rows(); ++i) {
    for (double v : r.layout.dist.row(i)) d = std::max(d, v);
  }
  return d * c_t;
}

// ---------------------------------------------------------------------------

Verdict regret_convergence() {
  struct Scenario {
    double s, c_d;
  };
  const Scenario scenarios[] = {{2.0, 10.0}, {0.5, 20.0}};
  std::vector<RunConfig> configs;
  for (const auto& sc : scenarios) {
    for (std::size_t seed = 0; seed < kSeeds; ++seed) {
      RunConfig cfg{scenario(sc.s, sc.c_d, 0.001, seed)};
      cfg.params.K = 15;
      cfg.regret = {RegretMode::every_step, 1};
      configs.push_back(cfg);
    }
  }
  const auto results = run_all(configs);

  bool pass = true;
  std::vector<std::string> parts;
  for (std::size_t s = 0; s < 2; ++s) {
    std::size_t ok = 0;
    double worst = 0.0;
    for (std::size_t seed = 0; seed < kSeeds; ++seed) {
      const auto& recs = results[s * kSeeds + seed].records;
      std::vector<double> totals;
      for (const auto& r : recs) totals.push_back(r.regret->total_regret);
      const auto median = rolling_median(totals, 50);
      const double early = *std::max_element(median.begin(), median.begin() + 200);
      const double late = *std::max_element(median.end() - 100, median.end());
      const double ratio = early > 0.0 ? late / early : 0.0;
      worst = std::max(worst, ratio);
      ok += ratio < 0.1;
    }
    pass = pass && ok >= 8;
    parts.push_back("s=" + fmt(scenarios[s].s, 1) + ",c_d=" + fmt(scenarios[s].c_d, 0) + ": " +
                    std::to_string(ok) + "/10 seeds below 10% (worst late/early " + fmt(worst) +
                    ")");
  }
  return {pass, join(parts, "; ")};
}

Verdict price_equilibria() {
  std::vector<RunConfig> configs;
  for (double s : {2.0, 0.5}) {
    for (std::size_t seed = 0; seed < kSeeds; ++seed) {
      configs.push_back(RunConfig{scenario(s, s == 2.0 ? 10.0 : 20.0, 0.001, seed)});
    }
  }
  const auto results = run_all(configs);

  std::size_t high_ok = 0;
  std::size_t low_ok = 0;
  std::vector<std::string> high;
  std::vector<std::string> low;
  for (std::size_t seed = 0; seed < kSeeds; ++seed) {
    const auto& a = results[seed];
    const auto pa = late_mean_price(a.records, kLateWindow);
    high.push_back(pa ? fmt(*pa, 1) : "none");
    high_ok += pa && std::abs(*pa - 100.0) <= 15.0;

    const auto& b = results[kSeeds + seed];
    const auto pb = late_mean_price(b.records, kLateWindow);
    low.push_back(pb ? fmt(*pb, 1) : "none");
    const double floor = -20.0 - max_transport(b, configs[kSeeds + seed].params.c_t);
    low_ok += pb && *pb < 60.0 && *pb > floor;
  }
  return {high_ok >= 8 && low_ok >= 8,
          "s=2,c_d=10 within 15% of p_m: " + std::to_string(high_ok) + "/10 [" + join(high) +
              "]; s=0.5,c_d=20 in (-c_d-max transport, 0.6 p_m): " + std::to_string(low_ok) +
              "/10 [" + join(low) + "]"};
}

/// Mean late-window (price, si) over kSeeds seeds for every (rho, s, c_d) cell.
struct CellMeans {
  double price = 0.0;
  double si = 0.0;
};

std::vector<CellMeans> cell_means(const std::vector<MarketParams>& cells) {
  std::vector<RunConfig> configs;
  for (const auto& c : cells) {
    for (std::size_t seed = 0; seed < kSeeds; ++seed) {
      RunConfig cfg{c};
      cfg.params.seed = derive_seed(0, "replicate", seed);
      configs.push_back(cfg);
    }
  }
  const auto results = run_all(configs);
  std::vector<CellMeans> out(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t seed = 0; seed < kSeeds; ++seed) {
      const auto& r = results[c * kSeeds + seed];
      out[c].price += late_mean_price(r.records, kLateWindow).value_or(cells[c].p_m);
      out[c].si += late_mean_si(r.records, kLateWindow);
    }
    out[c].price /= kSeeds;
    out[c].si /= kSeeds;
  }
  return out;
}

const std::vector<double> kDisposalGrid{0.0, 50.0, 100.0, 200.0};

/// Counts adjacent pairs that move against `direction` (+1 rising, -1 falling)
/// and whether each such move stays within `noise`.
std::pair<std::size_t, bool> violations(const std::vector<double>& v, int direction, double noise) {
  std::size_t n = 0;
  bool small = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double step = direction * (v[i] - v[i - 1]);
    if (step < 0.0) {
      ++n;
      small = small && -step <= noise;
    }
  }
  return {n, small};
}

Verdict symbiosis_monotonicity() {
  std::vector<MarketParams> cells;
  for (double rho : {1e-2, 1e-4}) {
    for (double c_d : kDisposalGrid) cells.push_back(scenario(1.0, c_d, rho, 0));
  }
  const auto means = cell_means(cells);
  std::vector<double> high;
  std::vector<double> low;
  for (std::size_t i = 0; i < kDisposalGrid.size(); ++i) {
    high.push_back(means[i].si);
    low.push_back(means[kDisposalGrid.size() + i].si);
  }
  const auto [rising_violations, rising_small] = violations(high, +1, 0.03);
  std::size_t dense_wins = 0;
  for (std::size_t i = 0; i < high.size(); ++i) dense_wins += high[i] > low[i];
  const bool pass = rising_violations <= 1 && rising_small && dense_wins == high.size();
  std::vector<std::string> h;
  std::vector<std::string> l;
  for (double v : high) h.push_back(fmt(v));
  for (double v : low) l.push_back(fmt(v));
  return {pass, "SI over c_d {0,50,100,200} at rho=1e-2 [" + join(h) + "], at rho=1e-4 [" +
                    join(l) + "]; decreasing pairs " + std::to_string(rising_violations) +
                    ", dense > sparse at " + std::to_string(dense_wins) + "/4 levels"};
}

Verdict price_monotonicity() {
  std::vector<MarketParams> cells;
  for (double s : {0.5, 2.0}) {
    for (double c_d : kDisposalGrid) cells.push_back(scenario(s, c_d, 1e-2, 0));
  }
  const auto means = cell_means(cells);
  std::vector<double> scarce;
  std::vector<double> plenty;
  for (std::size_t i = 0; i < kDisposalGrid.size(); ++i) {
    plenty.push_back(means[i].price);
    scarce.push_back(means[kDisposalGrid.size() + i].price);
  }
  const auto [rising, small] = violations(plenty, -1, 3.0);
  const double spread = *std::max_element(scarce.begin(), scarce.end()) -
                        *std::min_element(scarce.begin(), scarce.end());
  const bool pass = rising <= 1 && small && spread < 10.0;
  std::vector<std::string> a;
  std::vector<std::string> b;
  for (double v : plenty) a.push_back(fmt(v, 1));
  for (double v : scarce) b.push_back(fmt(v, 1));
  return {pass, "price over c_d {0,50,100,200}, s=0.5 [" + join(a) + "] increasing pairs " +
                    std::to_string(rising) + "; s=2 [" + join(b) + "] spread " + fmt(spread, 2) +
                    " (< 10)"};
}

std::vector<std::string> ranked(const ParamSpace& space, const std::vector<double>& s1) {
  std::vector<std::size_t> order(s1.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s1[a] > s1[b]; });
  std::vector<std::string> names;
  for (auto d : order) names.push_back(space.dims[d].name);
  return names;
}

Verdict sobol_ranks() {
  const auto space = ParamSpace::market_default();
  ScenarioOptions scen;
  scen.base.horizon = 300;
  scen.replicates = 2;
  scen.window = kLateWindow;
  const std::vector<std::string> names{"si", "price"};
  SobolOptions opt;
  opt.base_n = 256;
  opt.seed = 0;
  opt.workers = default_workers();
  const auto res = sobol_estimate(space, scenario_model(space, scen), names, opt);

  const auto si_rank = ranked(space, res.indices[0].s1);
  const auto price_rank = ranked(space, res.indices[1].s1);
  const bool si_ok = si_rank[0] == "rho" &&
                     std::find(si_rank.begin(), si_rank.begin() + 3, "c_t") != si_rank.begin() + 3;
  const bool price_ok = (price_rank[0] == "s" && price_rank[1] == "rho") ||
                        (price_rank[0] == "rho" && price_rank[1] == "s");
  auto show = [&](std::size_t o) {
    std::vector<std::string> parts;
    for (std::size_t d = 0; d < space.size(); ++d) {
      parts.push_back(space.dims[d].name + "=" + fmt(res.indices[o].s1[d]));
    }
    return join(parts, ",");
  };
  return {si_ok && price_ok, "S1 si {" + show(0) + "} order " + join(si_rank, ">") +
                                 "; S1 price {" + show(1) + "} order " + join(price_rank, ">")};
}

Verdict estimator_correctness() {
  ParamSpace space;
  for (const char* n : {"x1", "x2", "x3"}) space.dims.push_back({n, -M_PI, M_PI});
  const double a = 7.0;
  const double b = 0.1;
  const Model model = [=](const Point& x, std::uint64_t) {
    return std::vector<double>{fixtures::ishigami(x, a, b)};
  };
  const std::vector<std::string> names{"y"};
  SobolOptions opt;
  opt.base_n = 1024;
  opt.seed = 1;
  const auto res = sobol_estimate(space, model, names, opt);
  const auto truth = fixtures::ishigami_truth(a, b);
  double worst = 0.0;
  for (std::size_t d = 0; d < 3; ++d) {
    worst = std::max(worst, std::abs(res.indices[0].s1[d] - truth.s1[d]));
    worst = std::max(worst, std::abs(res.indices[0].st[d] - truth.st[d]));
  }
  return {worst <= 0.05, "Ishigami (a=7, b=0.1) at base_n=1024: max |estimate - exact| = " +
                             fmt(worst, 4) + " over S1 and ST"};
}

Verdict oracle_equivalence() {
  Rng rng = make_rng(2024, "acceptance-oracle");
  MarketParams params;
  std::size_t mismatches = 0;
  const std::size_t n = 1000;
  auto key = [](const Contract& c) {
    return std::make_tuple(c.round, c.seller_id, c.buyer_id, c.qty, c.unit_price);
  };
  for (std::size_t trial = 0; trial < n; ++trial) {
    const std::size_t nb = 1 + static_cast<std::size_t>(uniform01(rng) * 4);
    const std::size_t ns = 1 + static_cast<std::size_t>(uniform01(rng) * 4);
    const auto layout = fixtures::random_layout(rng, nb, ns, 8);
    params.c_d = uniform(rng, 0.0, 200.0);
    const auto grid = build_grid(30, params.c_d, params.p_m);
    std::vector<double> phi(ns);
    for (auto& v : phi) v = grid.at(1 + static_cast<std::size_t>(uniform01(rng) * 30));
    auto got = run_auction(layout, params, phi).contracts;
    auto want = oracle::clear_market(layout, params.p_m, params.c_t, phi).contracts;
    auto by_key = [&](const Contract& x, const Contract& y) { return key(x) < key(y); };
    std::sort(got.begin(), got.end(), by_key);
    std::sort(want.begin(), want.end(), by_key);
    mismatches += got != want;
  }
  return {mismatches == 0, std::to_string(n - mismatches) + "/" + std::to_string(n) +
                               " random markets (<=4x4, integer qty <=8) give identical contracts"};
}

Verdict regret_self_consistency() {
  std::vector<RunConfig> configs;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    RunConfig cfg{scenario(seed % 2 ? 0.5 : 2.0, 15.0, 0.001, seed)};
    cfg.params.K = 15;
    cfg.params.horizon = 120;
    cfg.regret = {RegretMode::every_step, 1};
    configs.push_back(cfg);
  }
  const auto results = run_all(configs);
  Rng rng = make_rng(7, "acceptance-triples");
  std::size_t equal = 0;
  const std::size_t n = 100;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = results[static_cast<std::size_t>(uniform01(rng) * results.size())];
    const auto& rec = r.records[static_cast<std::size_t>(uniform01(rng) * r.records.size())];
    const std::size_t j = static_cast<std::size_t>(uniform01(rng) * rec.per_seller_reward.size());
    equal += rec.regret->played_reward[j] == rec.per_seller_reward[j];
  }
  return {equal == n, std::to_string(equal) + "/" + std::to_string(n) +
                          " sampled (run, step, seller) replays are bit-equal to the live reward"};
}

Verdict determinism() {
  fixtures::TempDir dir;
  const auto cfg = dir / "scenario.cfg";
  fixtures::write_text(cfg, "market.c_d = 10\nmarket.s = 2\nmarket.rho = 0.001\nrun.seed = 3\n"
                            "run.record_contracts = true\nrun.regret_mode = sampled:50\n");
  std::ostringstream err;
  const bool ran = cmd_run({cfg, dir / "a"}, err) == kExitOk && cmd_run({cfg, dir / "b"}, err) == kExitOk;
  auto files = [&](const char* sub) {
    return nlohmann::json::parse(fixtures::read_text(dir / sub / "manifest.json"))["files"];
  };
  const bool same_run = ran && files("a") == files("b");

  SweepOptions sweep;
  sweep.config = cfg;
  sweep.overrides = {"horizon=300", "regret_mode=off", "record_contracts=false"};
  sweep.grid = {"c_d=0,100", "s=0.5,2"};
  sweep.replicates = 3;
  sweep.out_dir = dir / "w1";
  sweep.workers = 1;
  const std::size_t many = std::max<std::size_t>(4, default_workers());
  bool swept = cmd_sweep(sweep, err) == kExitOk;
  sweep.out_dir = dir / "wn";
  sweep.workers = many;
  swept = swept && cmd_sweep(sweep, err) == kExitOk;
  bool same_sweep = swept && fixtures::read_text(dir / "w1" / "sweep.csv") ==
                                 fixtures::read_text(dir / "wn" / "sweep.csv");
  if (swept) {
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t r = 0; r < 3; ++r) {
        const std::string f = "runs/cell_" + std::to_string(c) + "_rep_" + std::to_string(r) + ".csv";
        same_sweep = same_sweep && fixtures::read_text(dir / "w1" / f) == fixtures::read_text(dir / "wn" / f);
      }
    }
  }
  return {same_run && same_sweep,
          std::string("repeat run checksums ") + (same_run ? "identical" : "DIFFER") +
              "; sweep workers=1 vs workers=" + std::to_string(many) + " files " +
              (same_sweep ? "identical" : "DIFFER") + (err.str().empty() ? "" : " (" + err.str() + ")")};
}

Verdict throughput() {
  const std::size_t n = 100;
  const std::size_t workers = default_workers();
  MarketParams base;
  base.horizon = 1000;
  const auto start = std::chrono::steady_clock::now();
  const auto outcomes = run_batch(n, workers, [&](std::size_t i) {
    RunConfig cfg{base};
    cfg.params.seed = i;
    (void)run(cfg);
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool all_ok =
      std::all_of(outcomes.begin(), outcomes.end(), [](const BatchOutcome& o) { return o.ok; });
  const double per_minute = 60.0 * static_cast<double>(n) / secs;
  return {all_ok && per_minute >= 50.0,
          fmt(per_minute, 0) + " runs/min (100 runs x 1000 steps, 40 firms, regret off, " +
              std::to_string(workers) + " worker" + (workers == 1 ? "" : "s") +
              "; target 100, failure below 50)"};
}

Verdict unit_invariants() {
  Rng rng = make_rng(99, "acceptance-invariants");
  double worst_norm = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> w(2 + static_cast<std::size_t>(uniform01(rng) * 60));
    for (auto& v : w) v = uniform(rng, -1e4, 1e4);
    const auto p = softmax_probabilities(w, uniform(rng, 1e-3, 1e4));
    worst_norm = std::max(worst_norm, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
  }
  const bool softmax_ok = worst_norm <= 1e-12;

  bool si_ok = true;
  bool conservation_ok = true;
  MarketParams params;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto layout = fixtures::random_layout(rng, 1 + trial % 7, 1 + (trial / 7) % 7, 8);
    std::vector<double> phi(layout.sellers.size());
    for (auto& v : phi) v = uniform(rng, -0.5, 1.0);
    const auto r = run_auction(layout, params, phi);
    const auto agg = aggregate(layout, r);
    const double si = symbiosis_index(agg.q_bought, agg.q_toSell, agg.q_needed);
    si_ok = si_ok && si >= 0.0 && si <= 1.0;
    double bought = 0.0;
    double sold = 0.0;
    for (std::size_t i = 0; i < layout.buyers.size(); ++i) bought += layout.buyers[i].q_need - r.unmet[i];
    for (std::size_t j = 0; j < layout.sellers.size(); ++j) sold += layout.sellers[j].q_supply - r.unsold[j];
    conservation_ok = conservation_ok && bought == sold && bought == agg.q_bought;
  }

  bool grid_ok = true;
  for (std::size_t K : {2u, 3u, 15u, 30u, 101u}) {
    for (double c_d : {0.0, 10.0, 20.0, 200.0}) {
      const auto g = build_grid(K, c_d, 100.0);
      grid_ok = grid_ok && g.at(1) == -c_d / 100.0 && g.at(K) == 1.0;
    }
  }

  bool ema_ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    auto state = make_policy(10, TemperatureSchedule{}, 1.0);
    for (auto& v : state.weights) v = uniform(rng, -100, 100);
    const std::size_t k = 1 + static_cast<std::size_t>(uniform01(rng) * 10);
    const double reward = uniform(rng, -500, 500);
    const double alpha = uniform01(rng);
    const auto next = update_weights(state, k, reward, alpha);
    for (std::size_t i = 0; i < 10; ++i) {
      const double want = i + 1 == k ? alpha * state.weights[i] + (1.0 - alpha) * reward : state.weights[i];
      ema_ok = ema_ok && next.weights[i] == want;
    }
  }

  const bool pass = softmax_ok && si_ok && grid_ok && ema_ok && conservation_ok;
  auto flag = [](bool ok) { return ok ? "ok" : "FAILED"; };
  return {pass, std::string("softmax sum within ") + fmt(worst_norm * 1e12, 3) + "e-12 (" +
                    flag(softmax_ok) + "), SI in [0,1] " + flag(si_ok) + ", grid endpoints " +
                    flag(grid_ok) + ", EMA single coordinate " + flag(ema_ok) +
                    ", conservation " + flag(conservation_ok)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"unit_invariants", unit_invariants},
      {"oracle_equivalence", oracle_equivalence},
      {"regret_self_consistency", regret_self_consistency},
      {"estimator_correctness", estimator_correctness},
      {"determinism", determinism},
      {"throughput", throughput},
      {"price_equilibria", price_equilibria},
      {"symbiosis_monotonicity", symbiosis_monotonicity},
      {"price_monotonicity", price_monotonicity},
      {"regret_convergence", regret_convergence},
      {"sobol_ranks", sobol_ranks},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << " [" << fmt(secs, 1)
              << " s]" << std::endl;
    failed += !v.pass;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) failed"
                       : std::string("acceptance: all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
