#include "coagstat/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace coagstat {

namespace {

SizeDistribution update(const ApplyResult& a, const Grid& grid,
                        std::span<const double> source, std::span<const double> phi,
                        double dt, double delta) {
  SizeDistribution out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out[i] = (phi[i] + dt * (a.gain[i] + source[i])) /
             (1.0 + dt * (a.loss_rate[i] + 2.0 * delta));
  }
  return out;
}

}  // namespace

SizeDistribution step(const PairTable& table, const Grid& grid,
                      std::span<const double> source, std::span<const double> phi,
                      double dt, double delta, int workers) {
  if (!(dt > 0.0)) throw std::domain_error("step: dt must be positive");
  ApplyResult a = apply(table, grid, phi, workers);
  for (double g : a.gain)
    if (!std::isfinite(g)) throw std::runtime_error("step: non-finite rate");
  return update(a, grid, source, phi, dt, delta);
}

EvolveResult evolve_to_steady(const EvolveParams& params, const PairTable& table,
                              const Grid& grid, double lambda,
                              std::span<const double> source, SizeDistribution init) {
  const int n = grid.size();
  if (static_cast<int>(init.size()) != n || static_cast<int>(source.size()) != n)
    throw std::invalid_argument("evolve: inputs not aligned with grid");
  if (!(params.delta > 0.0 && params.delta < 1.0))
    throw std::domain_error("evolve: delta must lie in (0,1)");
  if (!(params.steady_tol > 0.0))
    throw std::domain_error("evolve: steady_tol must be positive");

  const std::size_t un = static_cast<std::size_t>(n);
  std::vector<double> xl(un), x1l(un);
  for (int i = 0; i < n; ++i) {
    xl[static_cast<std::size_t>(i)] = std::pow(grid.pivot(i), lambda);
    x1l[static_cast<std::size_t>(i)] = std::pow(grid.pivot(i), 1.0 + lambda);
  }

  EvolveResult res;
  res.phi = std::move(init);
  double t = 0.0;
  double dt = params.dt_init;
  double r_best = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (long s = 0; s <= params.max_steps; ++s) {
    ApplyResult a = apply(table, grid, res.phi, params.workers);

    double m0 = 0.0, ml = 0.0, m1 = 0.0, m1l = 0.0, dm0 = 0.0, rmax = 0.0;
    for (std::size_t i = 0; i < un; ++i) {
      const double w = grid.width(static_cast<int>(i));
      const double rhs = a.dphi[i] + source[i] - 2.0 * params.delta * res.phi[i];
      m0 += res.phi[i] * w;
      ml += xl[i] * res.phi[i] * w;
      m1 += grid.pivot(static_cast<int>(i)) * res.phi[i] * w;
      m1l += x1l[i] * res.phi[i] * w;
      dm0 += rhs * w;
      rmax = std::max(rmax, std::abs(rhs) * (1.0 + xl[i]) * w);
    }
    const double r = rmax / (m0 + ml + std::numeric_limits<double>::epsilon());
    if (!std::isfinite(r) || !std::isfinite(m0))
      throw std::runtime_error("evolve: numerical blow-up (non-finite state)");

    TrajectorySample sample;
    sample.t = t;
    sample.dt = dt;
    sample.m0 = m0;
    sample.mlambda = ml;
    sample.m1 = m1;
    sample.m1pl = m1l;
    sample.dm0dt = dm0;
    sample.overflow_number = a.overflow_number;
    sample.overflow_mass = a.overflow_mass;
    res.trajectory.push_back(sample);

    res.steps = s;
    res.residual = r;
    if (r < params.steady_tol) {
      res.converged = true;
      break;
    }
    if (ml > params.blowup_mlambda) {
      res.blown_up = true;
      break;
    }
    if (t >= params.t_max || s == params.max_steps) break;

    if (s > 0) {
      // Positivity holds for every dt, so dt_init also serves as the floor;
      // halving only moderates the march through rough transients. Growth
      // requires strict improvement over the best residual so far, otherwise
      // a flat large-dt oscillation would keep inflating dt.
      if (r < r_best) {
        dt = std::min(dt * 1.2, params.dt_max);
        stall = 0;
      } else if (++stall >= 10) {
        dt = std::max(dt * 0.5, params.dt_init);
        stall = 0;
      }
    }
    if (r < r_best) r_best = r;

    res.phi = update(a, grid, source, res.phi, dt, params.delta);
    t += dt;
  }
  return res;
}

SteadyFamily delta_continuation(const std::vector<double>& deltas,
                                const PairTable& table, const Grid& grid,
                                double lambda, const SourceSpec& source,
                                const EvolveParams& base) {
  if (deltas.empty()) throw std::domain_error("continuation: empty delta list");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0 && deltas[i] < 1.0))
      throw std::domain_error("continuation: deltas must lie in (0,1)");
    if (i > 0 && !(deltas[i] < deltas[i - 1]))
      throw std::domain_error("continuation: deltas must be strictly decreasing");
  }

  SteadyFamily family;
  SizeDistribution phi(static_cast<std::size_t>(grid.size()), 0.0);
  for (double d : deltas) {
    EvolveParams params = base;
    params.delta = d;
    ContinuationStage stage;
    stage.delta = d;
    stage.source_disc = source.truncated(d).discretize(grid);
    stage.result = evolve_to_steady(params, table, grid, lambda, stage.source_disc, phi);
    const bool ok = stage.result.converged && !stage.result.blown_up;
    phi = stage.result.phi;
    family.stages.push_back(std::move(stage));
    if (!ok) {
      family.complete = false;
      std::ostringstream os;
      os << (family.stages.back().result.blown_up ? "blow-up" : "no convergence")
         << " at delta=" << d;
      family.flag = os.str();
      break;
    }
  }
  return family;
}

D7Decomposition d7_decomposition(const PairTable& table, const Grid& grid,
                                 std::span<const double> phi,
                                 std::span<const double> source, double delta,
                                 int a_pivot_index) {
  if (a_pivot_index < 0 || a_pivot_index >= grid.size())
    throw std::invalid_argument("d7: pivot index out of range");
  const double A = grid.pivot(a_pivot_index);
  const std::size_t un = static_cast<std::size_t>(grid.size());

  std::vector<double> num(un);
  for (std::size_t i = 0; i < un; ++i) num[i] = phi[i] * grid.width(static_cast<int>(i));

  D7Decomposition d;
  d.a_value = A;
  for (const PairTable::Entry& e : table.entries) {
    const double xi = grid.pivot(e.i);
    const double xj = grid.pivot(e.j);
    const double mult = (e.i == e.j) ? 0.5 : 1.0;
    const double nn = e.rate * num[static_cast<std::size_t>(e.i)] *
                      num[static_cast<std::size_t>(e.j)];
    const double ti = std::min(xi, A), tj = std::min(xj, A);
    if (e.target < 0) {
      d.t_overflow += mult * (ti + tj) * nn;
      continue;
    }
    if (xi >= A && xj >= A) {
      d.t3 += mult * A * nn;
    } else if (xi >= A || xj >= A) {
      d.t2 += std::min(xi, xj) * nn;
    } else if (e.sum_size > A) {
      d.t1 += mult * (e.sum_size - A) * nn;
    }
  }
  double src = 0.0, eff = 0.0;
  for (std::size_t i = 0; i < un; ++i) {
    const double th = std::min(grid.pivot(static_cast<int>(i)), A);
    src += th * source[i] * grid.width(static_cast<int>(i));
    eff += th * phi[i] * grid.width(static_cast<int>(i));
  }
  d.source_term = src;
  d.efflux_term = 2.0 * delta * eff;
  const double lhs = d.source_term - d.efflux_term;
  const double rhs = d.t1 + d.t2 + d.t3 + d.t_overflow;
  d.residual = std::abs(lhs - rhs) / std::max(d.source_term, 1e-300);
  return d;
}

ProbeReport nonexistence_probe(const Kernel& kernel, const SourceSpec& source,
                               const ProbeConfig& config) {
  if (config.x_max_ladder.size() < 2)
    throw std::domain_error("probe: need at least two x_max values");
  for (std::size_t i = 1; i < config.x_max_ladder.size(); ++i)
    if (!(config.x_max_ladder[i] > config.x_max_ladder[i - 1]))
      throw std::domain_error("probe: x_max ladder must be increasing");

  ProbeReport rep;
  const double lambda = kernel.lambda();

  for (double x_max : config.x_max_ladder) {
    Grid grid = Grid::geometric(config.x_min, x_max, config.bins_per_decade);
    PairTable table = build_pair_table(kernel, grid);
    SteadyFamily family =
        delta_continuation(config.deltas, table, grid, lambda, source, config.base);

    const ContinuationStage& last = family.stages.back();
    ProbePoint pt;
    pt.x_max = x_max;
    pt.delta = last.delta;
    pt.converged = last.result.converged && !last.result.blown_up;
    pt.mlambda = moment(grid, last.result.phi, lambda);

    // Record the min{x,A} transfer identity one decade below the top.
    const double a_target = x_max / 10.0;
    int a_index = 0;
    for (int i = 0; i < grid.size(); ++i)
      if (std::abs(std::log(grid.pivot(i) / a_target)) <
          std::abs(std::log(grid.pivot(a_index) / a_target)))
        a_index = i;
    pt.d7 = d7_decomposition(table, grid, last.result.phi, last.source_disc,
                             last.delta, a_index);
    rep.points.push_back(pt);
  }

  // Growth factors per decade between consecutive ladder points.
  for (std::size_t i = 1; i < rep.points.size(); ++i) {
    const double decades = std::log10(rep.points[i].x_max / rep.points[i - 1].x_max);
    const double ratio = rep.points[i].mlambda /
                         std::max(rep.points[i - 1].mlambda, 1e-300);
    rep.growth_per_decade.push_back(std::pow(ratio, 1.0 / decades));
  }

  double m_top = rep.points.back().mlambda;
  if (m_top <= 1e-12 * (1.0 + source.moment(0.0))) {
    rep.verdict = ProbeVerdict::exists;
    rep.note = "trivial zero steady state";
    return rep;
  }

  bool all_fast = true;
  for (double g : rep.growth_per_decade)
    if (!(g >= config.growth_threshold)) all_fast = false;
  if (all_fast) {
    rep.verdict = ProbeVerdict::nonexistent;
    rep.note = "M_lambda grows without saturation along the domain ladder";
    return rep;
  }

  // Saturation over the top two decades of the ladder.
  const double x_top = rep.points.back().x_max;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  int in_window = 0;
  for (const ProbePoint& pt : rep.points) {
    if (pt.x_max >= x_top / 100.0 * (1.0 - 1e-12)) {
      lo = std::min(lo, pt.mlambda);
      hi = std::max(hi, pt.mlambda);
      ++in_window;
    }
  }
  if (in_window >= 2 && hi / lo - 1.0 <= config.saturation_band) {
    rep.verdict = ProbeVerdict::exists;
    rep.note = "M_lambda saturates over the top two decades";
  } else {
    rep.verdict = ProbeVerdict::inconclusive;
    rep.note = "growth neither fast nor saturated";
  }
  return rep;
}

}  // namespace coagstat
