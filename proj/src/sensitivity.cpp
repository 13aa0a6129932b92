#include "symbiosim/sensitivity.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "symbiosim/parallel.hpp"
#include "symbiosim/random.hpp"
#include "symbiosim/simulation.hpp"

namespace symbiosim {

namespace {

double forward(Scale scale, double v) {
  switch (scale) {
    case Scale::linear:
      return v;
    case Scale::log2:
      return std::log2(v);
    case Scale::log10:
      return std::log10(v);
  }
  return v;
}

double inverse(Scale scale, double v) {
  switch (scale) {
    case Scale::linear:
      return v;
    case Scale::log2:
      return std::exp2(v);
    case Scale::log10:
      return std::pow(10.0, v);
  }
  return v;
}

const char* scale_name(Scale scale) {
  switch (scale) {
    case Scale::linear:
      return "linear";
    case Scale::log2:
      return "log2";
    case Scale::log10:
      return "log10";
  }
  return "linear";
}

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double Dimension::to_unit(double value) const {
  const double a = forward(scale, lo);
  const double b = forward(scale, hi);
  if (b == a) return 0.0;
  return (forward(scale, value) - a) / (b - a);
}

double Dimension::from_unit(double u) const {
  if (u <= 0.0) return lo;
  if (u >= 1.0) return hi;
  const double a = forward(scale, lo);
  const double b = forward(scale, hi);
  return std::clamp(inverse(scale, a + u * (b - a)), lo, hi);
}

std::size_t ParamSpace::index_of(const std::string& name) const {
  for (std::size_t d = 0; d < dims.size(); ++d) {
    if (dims[d].name == name) return d;
  }
  throw ConfigError("unknown parameter dimension '" + name + "'");
}

ParamSpace ParamSpace::market_default() {
  return ParamSpace{{
      {"c_d", 0.0, 200.0, Scale::linear},
      {"s", 0.25, 2.0, Scale::log2},
      {"rho", 1e-5, 1e-1, Scale::log10},
      {"cs", 0.0, 0.5, Scale::linear},
      {"c_t", 0.0, 10.0, Scale::linear},
  }};
}

std::vector<Point> lhs_unit(std::size_t n, std::size_t dims, std::uint64_t seed) {
  std::vector<Point> pts(n, Point(dims));
  Rng rng = make_rng(seed, "lhs");
  std::vector<std::size_t> strata(n);
  for (std::size_t d = 0; d < dims; ++d) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    for (std::size_t k = n; k > 1; --k) {
      const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k));
      std::swap(strata[k - 1], strata[std::min(pick, k - 1)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      pts[i][d] = (static_cast<double>(strata[i]) + uniform01(rng)) / static_cast<double>(n);
    }
  }
  return pts;
}

std::vector<Point> lhs_sample(const ParamSpace& space, std::size_t n, std::uint64_t seed) {
  std::vector<Point> pts = lhs_unit(n, space.size(), seed);
  for (auto& p : pts) {
    for (std::size_t d = 0; d < space.size(); ++d) p[d] = space.dims[d].from_unit(p[d]);
  }
  return pts;
}

SaltelliDesign saltelli_design(const ParamSpace& space, std::size_t base_n, std::uint64_t seed,
                               bool second_order) {
  const std::size_t k = space.size();
  SaltelliDesign design;
  design.base_n = base_n;
  design.k = k;
  design.second_order = second_order;

  // A and B are the two halves of one 2k-dimensional Sobol' point set, shifted
  // by a seeded random offset modulo 1 so that different seeds give independent
  // replicates of the same low-discrepancy design.
  std::vector<Point> base(base_n, Point(2 * k));
  boost::random::sobol qrng(2 * k);
  qrng.discard(2 * k);  // the first point is the origin
  Rng rng = make_rng(seed, "saltelli");
  std::vector<double> shift(2 * k);
  for (double& v : shift) v = uniform01(rng);
  const double scale = 1.0 / (static_cast<double>(boost::random::sobol::max()) + 1.0);
  for (Point& p : base) {
    for (std::size_t d = 0; d < 2 * k; ++d) {
      const double u = static_cast<double>(qrng()) * scale + shift[d];
      p[d] = u - std::floor(u);
    }
  }
  auto to_space = [&](Point u) {
    for (std::size_t d = 0; d < k; ++d) u[d] = space.dims[d].from_unit(u[d]);
    return u;
  };
  design.points.reserve(base_n * design.rows_per_base());
  for (std::size_t r = 0; r < base_n; ++r) {
    const Point a(base[r].begin(), base[r].begin() + static_cast<std::ptrdiff_t>(k));
    const Point b(base[r].begin() + static_cast<std::ptrdiff_t>(k), base[r].end());
    auto push = [&](const Point& u, std::string block) {
      design.points.push_back(to_space(u));
      design.block.push_back(std::move(block));
      design.base_row.push_back(r);
    };
    push(a, "A");
    push(b, "B");
    for (std::size_t d = 0; d < k; ++d) {
      Point ab = a;
      ab[d] = b[d];
      push(ab, "AB:" + space.dims[d].name);
    }
    if (second_order) {
      for (std::size_t d = 0; d < k; ++d) {
        Point ba = b;
        ba[d] = a[d];
        push(ba, "BA:" + space.dims[d].name);
      }
    }
  }
  return design;
}

std::vector<SobolIndices> sobol_indices(const SaltelliDesign& design,
                                        const std::vector<std::vector<double>>& outputs,
                                        std::span<const std::string> output_names,
                                        std::vector<std::string>* warnings) {
  const std::size_t n = design.base_n;
  const std::size_t k = design.k;
  const std::size_t stride = design.rows_per_base();
  if (outputs.size() != n * stride) {
    throw ContractViolation("sobol_indices: output rows do not match the design");
  }
  std::vector<SobolIndices> result;
  for (std::size_t o = 0; o < output_names.size(); ++o) {
    auto f = [&](std::size_t r, std::size_t offset) { return outputs[r * stride + offset][o]; };
    SobolIndices idx;
    idx.output = output_names[o];
    idx.s1.assign(k, 0.0);
    idx.st.assign(k, 0.0);
    if (design.second_order) idx.s2.assign(k, std::vector<double>(k, 0.0));

    std::vector<double> ab(2 * n);
    for (std::size_t r = 0; r < n; ++r) {
      ab[r] = f(r, 0);
      ab[n + r] = f(r, 1);
    }
    const double mu = mean(ab);
    double var = 0.0;
    for (double v : ab) var += (v - mu) * (v - mu);
    var /= static_cast<double>(ab.size());
    idx.variance = var;

    const double scale_ref = std::max(1.0, std::abs(mu));
    if (!(var > 1e-24 * scale_ref * scale_ref)) {
      idx.degenerate = true;
      if (warnings) warnings->push_back(idx.output + ": degenerate output variance, indices set to 0");
      result.push_back(std::move(idx));
      continue;
    }

    for (std::size_t d = 0; d < k; ++d) {
      double first = 0.0;
      double total = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double fa = f(r, 0);
        const double fb = f(r, 1);
        const double fab = f(r, 2 + d);
        first += fb * (fab - fa);
        total += (fa - fab) * (fa - fab);
      }
      idx.s1[d] = first / static_cast<double>(n) / var;
      idx.st[d] = 0.5 * total / static_cast<double>(n) / var;
    }

    if (design.second_order) {
      for (std::size_t d = 0; d < k; ++d) {
        for (std::size_t e = d + 1; e < k; ++e) {
          double acc = 0.0;
          for (std::size_t r = 0; r < n; ++r) {
            const double fba_d = f(r, 2 + k + d);
            const double fab_e = f(r, 2 + e);
            acc += fba_d * fab_e - f(r, 0) * f(r, 1);
          }
          const double closed = acc / static_cast<double>(n) / var;
          idx.s2[d][e] = closed - idx.s1[d] - idx.s1[e];
        }
      }
    }
    result.push_back(std::move(idx));
  }
  return result;
}

SobolResult sobol_estimate(const ParamSpace& space, const Model& model,
                           std::span<const std::string> output_names, const SobolOptions& options,
                           bool allow_small) {
  if (options.base_n < 64 && !allow_small) {
    throw ConfigError("base_n: must be >= 64");
  }
  if (options.base_n < 1) throw ConfigError("base_n: must be >= 1");
  SobolResult res;
  res.design = saltelli_design(space, options.base_n, options.seed, options.second_order);
  const std::size_t rows = res.design.points.size();
  res.row_seeds.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) res.row_seeds[r] = derive_seed(options.seed, "row", r);
  res.outputs.resize(rows);
  parallel_for(rows, options.workers, [&](std::size_t r) {
    res.outputs[r] = model(res.design.points[r], res.row_seeds[r]);
    if (res.outputs[r].size() != output_names.size()) {
      throw ContractViolation("sobol_estimate: model returned the wrong number of outputs");
    }
  });
  res.evaluations = rows;
  res.indices = sobol_indices(res.design, res.outputs, output_names, &res.warnings);
  return res;
}

std::vector<PdpIceRow> pdp_ice(const ParamSpace& space, const PdpIceOptions& options,
                               const Model& model) {
  if (options.grid_n < 2) throw ConfigError("grid_n: must be >= 2");
  if (options.background_n < 1) throw ConfigError("background_n: must be >= 1");
  if (options.sweep_dim >= space.size() || options.density_dim >= space.size()) {
    throw ConfigError("pdp_ice: dimension index out of range");
  }
  if (options.sweep_dim == options.density_dim) {
    throw ConfigError("pdp_ice: the sweep dimension cannot be the density dimension");
  }

  ParamSpace rest;
  std::vector<std::size_t> rest_index;
  for (std::size_t d = 0; d < space.size(); ++d) {
    if (d == options.density_dim) continue;
    rest.dims.push_back(space.dims[d]);
    rest_index.push_back(d);
  }

  const Dimension& sweep = space.dims[options.sweep_dim];
  std::vector<double> grid(options.grid_n);
  for (std::size_t g = 0; g < options.grid_n; ++g) {
    grid[g] = sweep.from_unit(static_cast<double>(g) / static_cast<double>(options.grid_n - 1));
  }

  struct Job {
    Point point;
    std::uint64_t seed;
  };
  const std::size_t levels = options.density_levels.size();
  const std::size_t per_level = options.background_n * options.grid_n;
  std::vector<Job> jobs;
  jobs.reserve(levels * per_level);
  for (std::size_t l = 0; l < levels; ++l) {
    const std::vector<Point> background =
        lhs_sample(rest, options.background_n, derive_seed(options.seed, "background", l));
    for (std::size_t line = 0; line < options.background_n; ++line) {
      Point base(space.size());
      for (std::size_t r = 0; r < rest_index.size(); ++r) base[rest_index[r]] = background[line][r];
      base[options.density_dim] = options.density_levels[l];
      const std::uint64_t seed = derive_seed(options.seed, "ice", l * options.background_n + line);
      for (double v : grid) {
        Point p = base;
        p[options.sweep_dim] = v;
        jobs.push_back(Job{std::move(p), seed});
      }
    }
  }

  std::vector<std::vector<double>> outputs(jobs.size());
  parallel_for(jobs.size(), options.workers,
               [&](std::size_t i) { outputs[i] = model(jobs[i].point, jobs[i].seed); });

  std::vector<PdpIceRow> rows;
  rows.reserve(levels * (options.background_n + 1) * options.grid_n);
  for (std::size_t l = 0; l < levels; ++l) {
    const std::size_t first = l * per_level;
    const std::size_t n_out = per_level > 0 ? outputs[first].size() : 0;
    std::vector<std::vector<double>> sums(options.grid_n, std::vector<double>(n_out, 0.0));
    for (std::size_t line = 0; line < options.background_n; ++line) {
      for (std::size_t g = 0; g < options.grid_n; ++g) {
        const auto& out = outputs[first + line * options.grid_n + g];
        rows.push_back(PdpIceRow{options.density_levels[l], line, grid[g], out});
        for (std::size_t o = 0; o < n_out; ++o) sums[g][o] += out[o];
      }
    }
    for (std::size_t g = 0; g < options.grid_n; ++g) {
      for (double& v : sums[g]) v /= static_cast<double>(options.background_n);
      rows.push_back(PdpIceRow{options.density_levels[l], std::nullopt, grid[g], sums[g]});
    }
  }
  return rows;
}

MarketParams apply_point(MarketParams params, const ParamSpace& space, const Point& point) {
  if (point.size() != space.size()) throw ContractViolation("apply_point: dimension mismatch");
  for (std::size_t d = 0; d < space.size(); ++d) {
    const std::string& name = space.dims[d].name;
    if (name == "c_d") {
      params.c_d = point[d];
    } else if (name == "s") {
      params.s = point[d];
    } else if (name == "rho") {
      params.rho = point[d];
    } else if (name == "cs") {
      params.cs = point[d];
    } else if (name == "c_t") {
      params.c_t = point[d];
    } else {
      throw ConfigError("apply_point: no market parameter named '" + name + "'");
    }
  }
  return params;
}

ScenarioOutcome evaluate_scenario(const ScenarioOptions& options, const ParamSpace& space,
                                  const Point& point, std::size_t replicate, std::uint64_t seed) {
  RunConfig cfg;
  cfg.params = apply_point(options.base, space, point);
  cfg.params.seed = derive_seed(seed, "replicate", replicate);
  const RunResult result = run(cfg);
  ScenarioOutcome out;
  out.point = point;
  out.replicate = replicate;
  out.final_si = late_mean_si(result.records, options.window);
  out.final_price = late_mean_price(result.records, options.window).value_or(cfg.params.p_m);
  return out;
}

Model scenario_model(const ParamSpace& space, const ScenarioOptions& options) {
  if (options.replicates < 1) throw ConfigError("replicates: must be >= 1");
  return [space, options](const Point& point, std::uint64_t seed) {
    double si = 0.0;
    double price = 0.0;
    for (std::size_t r = 0; r < options.replicates; ++r) {
      const ScenarioOutcome o = evaluate_scenario(options, space, point, r, seed);
      si += o.final_si;
      price += o.final_price;
    }
    const auto n = static_cast<double>(options.replicates);
    return std::vector<double>{si / n, price / n};
  };
}

nlohmann::json to_json(const ParamSpace& space) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : space.dims) {
    dims.push_back({{"name", d.name}, {"lo", d.lo}, {"hi", d.hi}, {"scale", scale_name(d.scale)}});
  }
  return dims;
}

}  // namespace symbiosim
