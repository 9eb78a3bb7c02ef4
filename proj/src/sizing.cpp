#include "cbsim/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "parallel.hpp"

namespace cbsim {

using opt::Program;
using opt::Rel;

std::string to_string(SizingMethod m) {
  switch (m) {
    case SizingMethod::Exact: return "exact";
    case SizingMethod::WorhPerfect: return "worh_perfect";
    case SizingMethod::WorhPd: return "worh_pd";
    case SizingMethod::CoupledRh: return "coupled_rh";
  }
  return "?";
}

void CapacityGrid::validate() const {
  if (lo < 0 || step <= 0 || hi < lo) throw ConfigError("bad capacity grid");
}

std::vector<double> CapacityGrid::points() const {
  validate();
  std::vector<double> pts;
  for (double v = lo; v <= hi + 1e-9; v += step) pts.push_back(v);
  return pts;
}

ScenarioRun prepare_scenario(const TimeGrid& grid, const PriceSeries& prices,
                             const TariffSchedule& tariff, const CbsParams& cbs,
                             const std::vector<UserParams>& users,
                             const UserModelOptions& user_opts, int threads) {
  grid.validate();
  prices.validate(grid);
  cbs.validate();
  if (users.empty()) throw ConfigError("scenario needs at least one user");
  ScenarioRun sc;
  sc.grid = grid;
  sc.prices = prices;
  sc.tariff = tariff;
  sc.cbs = cbs;
  sc.trajectories.resize(users.size());
  detail::parallel_for(users.size(), threads, [&](std::size_t i) {
    sc.trajectories[i] = run_user_rho(users[i], tariff, prices, grid, user_opts);
  });
  return sc;
}

namespace {

// Committed neighborhood series: net and exports per absolute interval.
struct CommittedSeries {
  std::vector<double> net, exports;
  double peak_kw = 0.0;
  double abs_net_max = 0.0;
};

CommittedSeries committed_series(const ScenarioRun& sc) {
  CommittedSeries cs;
  const std::size_t T = sc.grid.n_total;
  cs.net.assign(T, 0.0);
  cs.exports.assign(T, 0.0);
  for (const auto& traj : sc.trajectories)
    for (std::size_t j = 0; j < T; ++j) {
      cs.net[j] += traj.x_imp[j] - traj.x_exp[j];
      cs.exports[j] += traj.x_exp[j];
    }
  double peak = cs.net.empty() ? 0.0 : cs.net[0];
  for (double v : cs.net) {
    peak = std::max(peak, v);
    cs.abs_net_max = std::max(cs.abs_net_max, std::abs(v));
  }
  cs.peak_kw = peak / sc.grid.delta_h;
  return cs;
}

double derive_ecap_max(const ScenarioRun& sc, const SizingOptions& opts) {
  if (opts.ecap_max > 0) return opts.ecap_max;
  // Twice the largest daily neighborhood import energy, floored by the
  // search grid so the exhaustive and program methods share a space.
  CommittedSeries cs = committed_series(sc);
  std::size_t per_day = sc.grid.intervals_per_day();
  double max_day = 0.0, acc = 0.0;
  for (std::size_t j = 0; j < cs.net.size(); ++j) {
    acc += std::max(cs.net[j], 0.0);
    if ((j + 1) % per_day == 0 || j + 1 == cs.net.size()) {
      max_day = std::max(max_day, acc);
      acc = 0.0;
    }
  }
  return std::max(opts.grid.hi, std::max(2.0 * max_day, 10.0));
}

struct SizingRates {
  double peak;     // $/kW over the window
  double capital;  // $/kWh over the window
};

SizingRates window_rates(const ScenarioRun& sc) {
  double days = sc.grid.days();
  return {sc.tariff.peak_charge_per_day * days,
          sc.cbs.capital_cost * sc.cbs.capital_recovery_per_year * days / 365.0};
}

}  // namespace

EvaluationResult evaluate_capacity(const ScenarioRun& sc, double e_cap,
                                   const CbsModelOptions& opts) {
  CbsTrajectory traj =
      run_cbs_rho(sc.cbs, e_cap, sc.tariff, sc.prices, sc.trajectories, sc.grid, opts);
  EvaluationResult res;
  res.breakdown =
      ground_truth_cost(traj, sc.prices, sc.tariff, sc.cbs, e_cap, sc.grid, true);
  res.user_peak_kw = traj.user_peak_star;
  res.local_peak_kw = traj.local_peak_star;
  res.avg_cycle =
      e_cap > 0 ? avg_daily_cycles(traj, sc.cbs, e_cap, sc.grid) : 0.0;
  return res;
}

SizingResult size_exhaustive(const ScenarioRun& sc, const SizingOptions& opts) {
  std::vector<double> pts = opts.grid.points();
  std::vector<EvaluationResult> evals(pts.size());
  detail::parallel_for(pts.size(), opts.threads, [&](std::size_t i) {
    evals[i] = evaluate_capacity(sc, pts[i], opts.cbs_opts);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double cur = evals[i].breakdown.total, ref = evals[best].breakdown.total;
    if (cur < ref - 1e-9 * std::max(1.0, std::abs(ref))) best = i;
  }
  SizingResult r;
  r.method = SizingMethod::Exact;
  r.capacity = pts[best];
  r.in_sample = evals[best];
  r.program_objective = evals[best].breakdown.total;
  return r;
}

namespace {

struct WorhProgram {
  Program prog;
  opt::SolveOptions solve;
  std::vector<int> vimp, vexp, vch, vdc, vg, vsoc;
  int vpeak = -1, vcap = -1;  // vcap < 0 when capacity fixed
};

WorhProgram build_worh(const ScenarioRun& sc, PriceMode mode,
                       const SizingOptions& opts, double fixed_cap) {
  const TimeGrid& grid = sc.grid;
  const std::size_t T = grid.n_total;
  const CbsParams& cb = sc.cbs;
  CommittedSeries cs = committed_series(sc);
  const bool fixed = fixed_cap >= 0;
  const double cap_hi = fixed ? fixed_cap : derive_ecap_max(sc, opts);
  const double p_hi = cap_hi / cb.duration_h;
  const double big_m = p_hi * grid.delta_h + cs.abs_net_max;
  SizingRates rates = window_rates(sc);

  WorhProgram w;
  w.solve = opts.solve;
  Program& p = w.prog;
  w.vpeak = p.add_var("peak", 0.0, opt::kInf);
  p.add_obj_term(w.vpeak, rates.peak);
  if (fixed) {
    p.add_obj_offset(rates.capital * fixed_cap);
  } else {
    w.vcap = p.add_var("ecap", 0.0, cap_hi);
    p.add_obj_term(w.vcap, rates.capital);
  }
  w.vimp.resize(T);
  w.vexp.resize(T);
  w.vch.resize(T);
  w.vdc.resize(T);
  w.vg.resize(T);
  w.vsoc.resize(T);
  for (std::size_t j = 0; j < T; ++j) {
    const std::string suf = "_" + std::to_string(j + 1);
    const double cap_here = fixed ? fixed_cap : -1;
    w.vsoc[j] = p.add_var("soc" + suf, fixed ? cb.soc_min_frac * cap_here : 0.0,
                          fixed ? cb.soc_max_frac * cap_here : opt::kInf);
    w.vch[j] = p.add_var("pch" + suf, 0, fixed ? p_hi : opt::kInf);
    w.vdc[j] = p.add_var("pdc" + suf, 0, fixed ? p_hi : opt::kInf);
    w.vimp[j] = p.add_var("imp" + suf, 0, big_m);
    w.vexp[j] = p.add_var("exp" + suf, 0, big_m);
    w.vg[j] = p.add_var("gchg" + suf, 0, opt::kInf);

    double price = mode == PriceMode::Rt ? sc.prices.rt[j] : sc.prices.pd[j][0];
    p.add_obj_term(w.vimp[j], price);
    p.add_obj_term(w.vg[j], sc.tariff.cbs_grid_charge);
    p.add_obj_term(w.vdc[j], sc.tariff.throughput_charge * grid.delta_h);

    p.add_constraint({{w.vimp[j], 1.0},
                      {w.vexp[j], -1.0},
                      {w.vch[j], -grid.delta_h},
                      {w.vdc[j], grid.delta_h}},
                     Rel::Eq, cs.net[j], "net" + suf);
    p.add_complementarity(w.vimp[j], w.vexp[j], big_m, big_m);
    p.add_constraint({{w.vpeak, 1.0}, {w.vimp[j], -1.0 / grid.delta_h}}, Rel::Ge,
                     0.0, "peak" + suf);
    if (j == 0) {
      p.add_constraint({{w.vsoc[j], 1.0},
                        {w.vch[j], -grid.delta_h},
                        {w.vdc[j], grid.delta_h / cb.round_trip_eff}},
                       Rel::Eq, 0.0, "soc" + suf);
    } else {
      p.add_constraint({{w.vsoc[j], 1.0},
                        {w.vsoc[j - 1], -1.0},
                        {w.vch[j], -grid.delta_h},
                        {w.vdc[j], grid.delta_h / cb.round_trip_eff}},
                       Rel::Eq, 0.0, "soc" + suf);
    }
    p.add_constraint({{w.vg[j], 1.0}, {w.vch[j], -grid.delta_h}}, Rel::Ge,
                     -cs.exports[j], "luos" + suf);
    if (!fixed) {
      p.add_constraint({{w.vsoc[j], 1.0}, {w.vcap, -cb.soc_max_frac}}, Rel::Le,
                       0.0);
      p.add_constraint({{w.vsoc[j], 1.0}, {w.vcap, -cb.soc_min_frac}}, Rel::Ge,
                       0.0);
      p.add_constraint({{w.vch[j], 1.0}, {w.vcap, -1.0 / cb.duration_h}}, Rel::Le,
                       0.0);
      p.add_constraint({{w.vdc[j], 1.0}, {w.vcap, -1.0 / cb.duration_h}}, Rel::Le,
                       0.0);
    }
  }
  return w;
}

opt::Solution solve_sizing_program(const Program& prog,
                                   const opt::SolveOptions& sopts,
                                   const char* what) {
  opt::Solution s = opt::solve(prog, sopts);
  if (s.status != opt::Status::Optimal)
    throw SolverError(std::string(what) + " sizing program failed (status " +
                      std::to_string(static_cast<int>(s.status)) + ")");
  return s;
}

}  // namespace

WorhFixedResult worh_fixed_capacity(const ScenarioRun& sc, PriceMode mode,
                                    double e_cap, const SizingOptions& opts) {
  if (e_cap < 0) throw ConfigError("negative capacity");
  WorhProgram w = build_worh(sc, mode, opts, e_cap);
  opt::Solution s = solve_sizing_program(w.prog, w.solve, "capacity-fixed W/o RH");
  const TimeGrid& grid = sc.grid;
  CommittedSeries cs = committed_series(sc);
  SizingRates rates = window_rates(sc);
  double energy = 0.0, gridc = 0.0, thr = 0.0, disch = 0.0;
  for (std::size_t j = 0; j < grid.n_total; ++j) {
    double price = mode == PriceMode::Rt ? sc.prices.rt[j] : sc.prices.pd[j][0];
    energy += price * s.values[static_cast<std::size_t>(w.vimp[j])];
    gridc += sc.tariff.cbs_grid_charge * s.values[static_cast<std::size_t>(w.vg[j])];
    thr += sc.tariff.throughput_charge *
           s.values[static_cast<std::size_t>(w.vdc[j])] * grid.delta_h;
    disch += s.values[static_cast<std::size_t>(w.vdc[j])] * grid.delta_h;
  }
  WorhFixedResult out;
  out.local_peak_kw = s.values[static_cast<std::size_t>(w.vpeak)];
  out.user_peak_kw = cs.peak_kw;
  // window-scale objective without capital and without the user-peak
  // constant: the comparison point for the RHO lower bound
  out.objective_window = energy + gridc + thr + rates.peak * out.local_peak_kw;
  const double days = grid.days();
  const double scale = 365.0 / days;
  double revenue = sc.tariff.peak_charge_per_day * 365.0 *
                   std::max(cs.peak_kw - out.local_peak_kw, 0.0);
  out.breakdown = CostBreakdown::make(
      energy * scale, gridc * scale, thr * scale, revenue,
      sc.cbs.capital_cost * sc.cbs.capital_recovery_per_year * e_cap);
  double usable = e_cap * (sc.cbs.soc_max_frac - sc.cbs.soc_min_frac);
  out.avg_cycle = usable > 0 ? disch / usable / days : 0.0;
  return out;
}

double rho_total_for_bound(const ScenarioRun& sc, const CbsTrajectory& traj,
                           double e_cap) {
  (void)e_cap;
  SizingRates rates = window_rates(sc);
  double total = rates.peak * traj.local_peak_star;
  for (std::size_t j = 0; j < traj.imp.size(); ++j) {
    total += sc.prices.rt[j] * traj.imp[j];
    total += sc.tariff.cbs_grid_charge * traj.grid_chg[j];
    total += sc.tariff.throughput_charge * traj.p_dc[j] * sc.grid.delta_h;
  }
  return total;
}

SizingResult size_without_rh(const ScenarioRun& sc, PriceMode mode,
                             const SizingOptions& opts) {
  WorhProgram w = build_worh(sc, mode, opts, -1.0);
  opt::Solution s = solve_sizing_program(w.prog, w.solve, "W/o RH");
  SizingResult r;
  r.method = mode == PriceMode::Rt ? SizingMethod::WorhPerfect : SizingMethod::WorhPd;
  r.capacity = s.values[static_cast<std::size_t>(w.vcap)];
  r.program_objective = s.objective;
  double cap_space = derive_ecap_max(sc, opts);
  if (r.capacity > 0.99 * cap_space)
    throw SolverError("W/o RH capacity hit the search bound (" +
                      std::to_string(r.capacity) + " of " +
                      std::to_string(cap_space) + "); raise ecap_max");
  return r;
}

SizingResult size_coupled_rh(const ScenarioRun& sc, const SizingOptions& opts) {
  const TimeGrid& grid = sc.grid;
  const CbsParams& cb = sc.cbs;
  const std::size_t T = grid.n_total;
  const std::size_t H = grid.horizon_len;
  std::size_t period = opts.period_horizons;
  if (period == 0) period = 7 * grid.intervals_per_day();
  if (period < 2) throw ConfigError("coupled-RH period must span >= 2 horizons");

  const double cap_hi = derive_ecap_max(sc, opts);
  const double inv_h = 1.0 / static_cast<double>(H);
  SizingRates rates = window_rates(sc);
  CommittedSeries cs = committed_series(sc);

  // Aggregate plan data per horizon.
  std::vector<NetDemandAggregate> aggs(T);
  double abs_net = 0.0;
  for (std::size_t j = 1; j <= T; ++j) {
    aggs[j - 1] = aggregate_net_demand(sc.trajectories, j, grid);
    for (double v : aggs[j - 1].net) abs_net = std::max(abs_net, std::abs(v));
  }
  const double big_m = cap_hi / cb.duration_h * grid.delta_h + abs_net;

  Program p;
  int vcap = p.add_var("ecap", 0.0, cap_hi);
  int vpeak = p.add_var("peak", 0.0, opt::kInf);
  p.add_obj_term(vcap, rates.capital);
  p.add_obj_term(vpeak, rates.peak);

  // E_{j,h} indexed flat; the coupling constraint ties E_{j,1} to the
  // previous horizon's first-interval SoC inside each period.
  std::vector<std::vector<int>> vsoc(T), vch(T), vdc(T), vimp(T), vexp(T), vg(T);
  std::vector<std::size_t> period_start;
  for (std::size_t j = 0; j < T; ++j) {
    if (j % period == 0) {
      // merge a trailing fragment shorter than 2 horizons into the
      // previous period
      if (T - j >= 2 || j == 0) period_start.push_back(j);
    }
  }
  auto is_period_start = [&](std::size_t j) {
    for (std::size_t s : period_start)
      if (s == j) return true;
    return false;
  };

  for (std::size_t j = 0; j < T; ++j) {
    vsoc[j].resize(H);
    vch[j].resize(H);
    vdc[j].resize(H);
    vimp[j].resize(H);
    vexp[j].resize(H);
    vg[j].resize(H);
    const auto& agg = aggs[j];
    for (std::size_t h = 0; h < H; ++h) {
      const std::string suf = "_" + std::to_string(j + 1) + "_" + std::to_string(h + 1);
      vsoc[j][h] = p.add_var("soc" + suf, 0.0, opt::kInf);
      vch[j][h] = p.add_var("pch" + suf, 0.0, opt::kInf);
      vdc[j][h] = p.add_var("pdc" + suf, 0.0, opt::kInf);
      vimp[j][h] = p.add_var("imp" + suf, 0.0, big_m);
      vexp[j][h] = p.add_var("exp" + suf, 0.0, big_m);
      vg[j][h] = p.add_var("gchg" + suf, 0.0, opt::kInf);

      p.add_obj_term(vimp[j][h], inv_h * sc.prices.pd[j][h]);
      p.add_obj_term(vg[j][h], inv_h * sc.tariff.cbs_grid_charge);
      p.add_obj_term(vdc[j][h], inv_h * sc.tariff.throughput_charge * grid.delta_h);

      p.add_constraint({{vimp[j][h], 1.0},
                        {vexp[j][h], -1.0},
                        {vch[j][h], -grid.delta_h},
                        {vdc[j][h], grid.delta_h}},
                       Rel::Eq, agg.net[h], "net" + suf);
      p.add_complementarity(vimp[j][h], vexp[j][h], big_m, big_m);
      p.add_constraint({{vpeak, 1.0}, {vimp[j][h], -1.0 / grid.delta_h}}, Rel::Ge,
                       0.0, "peak" + suf);
      // SoC recursion within the horizon; the h=1 row couples to the
      // previous horizon (or starts the period at empty).
      std::vector<opt::LinTerm> soc_row{{vsoc[j][h], 1.0},
                                        {vch[j][h], -grid.delta_h},
                                        {vdc[j][h], grid.delta_h / cb.round_trip_eff}};
      if (h > 0) {
        soc_row.push_back({vsoc[j][h - 1], -1.0});
      } else if (!is_period_start(j)) {
        soc_row.push_back({vsoc[j - 1][0], -1.0});
      }
      p.add_constraint(std::move(soc_row), Rel::Eq, 0.0, "soc" + suf);
      p.add_constraint({{vsoc[j][h], 1.0}, {vcap, -cb.soc_max_frac}}, Rel::Le, 0.0);
      p.add_constraint({{vsoc[j][h], 1.0}, {vcap, -cb.soc_min_frac}}, Rel::Ge, 0.0);
      p.add_constraint({{vch[j][h], 1.0}, {vcap, -1.0 / cb.duration_h}}, Rel::Le,
                       0.0);
      p.add_constraint({{vdc[j][h], 1.0}, {vcap, -1.0 / cb.duration_h}}, Rel::Le,
                       0.0);
      p.add_constraint({{vg[j][h], 1.0}, {vch[j][h], -grid.delta_h}}, Rel::Ge,
                       -agg.exports[h], "luos" + suf);
    }
  }
  (void)cs;

  opt::Solution s = solve_sizing_program(p, opts.solve, "coupled-RH");
  SizingResult r;
  r.method = SizingMethod::CoupledRh;
  r.capacity = s.values[static_cast<std::size_t>(vcap)];
  r.program_objective = s.objective;
  if (r.capacity > 0.99 * cap_hi)
    throw SolverError("coupled-RH capacity hit the search bound; raise ecap_max");
  return r;
}

std::vector<SizingResult> compare_methods(const ScenarioRun& in_sample,
                                          const ScenarioRun& out_sample,
                                          const SizingOptions& opts) {
  auto snap = [&](double cap) {
    double step = opts.grid.step;
    return std::max(0.0, std::round(cap / step) * step);
  };

  SizingResult exact = size_exhaustive(in_sample, opts);
  SizingResult worh_rt = size_without_rh(in_sample, PriceMode::Rt, opts);
  SizingResult worh_pd = size_without_rh(in_sample, PriceMode::PdH1, opts);
  SizingResult coupled = size_coupled_rh(in_sample, opts);
  worh_rt.capacity = snap(worh_rt.capacity);
  worh_pd.capacity = snap(worh_pd.capacity);
  coupled.capacity = snap(coupled.capacity);

  std::vector<SizingResult> results{exact, worh_rt, worh_pd, coupled};
  for (auto& r : results) {
    r.in_sample = evaluate_capacity(in_sample, r.capacity, opts.cbs_opts);
    r.out_sample = evaluate_capacity(out_sample, r.capacity, opts.cbs_opts);
  }
  const double tin = results[0].in_sample.breakdown.total;
  const double tout = results[0].out_sample.breakdown.total;
  for (auto& r : results) {
    r.loss_vs_exact_in = (r.in_sample.breakdown.total - tin) / std::abs(tin);
    r.loss_vs_exact_out = (r.out_sample.breakdown.total - tout) / std::abs(tout);
    if (r.loss_vs_exact_in < -1e-9)
      throw std::logic_error(
          "exhaustive dominance violated: " + to_string(r.method) +
          " beat the exact method in-sample by " +
          std::to_string(-r.loss_vs_exact_in));
  }
  return results;
}

}  // namespace cbsim
