#include "cbsim/cbs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbsim {

using opt::Program;
using opt::Rel;

double peak_charge_per_horizon(const TariffSchedule& tariff, const TimeGrid& grid) {
  return tariff.peak_charge_per_day *
         (static_cast<double>(grid.horizon_len) * grid.delta_h / 24.0);
}

CbsHorizonModel build_cbs_horizon(const CbsParams& params, double e_cap,
                                  const TariffSchedule& tariff,
                                  std::span<const double> pd_row,
                                  const NetDemandAggregate& users,
                                  const CbsState& state, const TimeGrid& grid,
                                  std::size_t j, const CbsModelOptions& opts) {
  params.validate();
  const std::size_t H = grid.horizon_len;
  if (e_cap < 0) throw ConfigError("negative battery capacity");
  if (users.net.size() != H || users.exports.size() != H)
    throw ConfigError("user aggregate length != horizon_len");
  if (pd_row.size() != H) throw ConfigError("pd_row length != horizon_len");
  const double soc_lo = params.soc_min_frac * e_cap;
  const double soc_hi = params.soc_max_frac * e_cap;
  if (state.soc_init < soc_lo - 1e-9 || state.soc_init > soc_hi + 1e-9)
    throw ConfigError("initial SoC outside bounds");

  CbsHorizonModel m;
  m.solve = opts.solve;
  m.horizon_len = H;
  m.j = j;
  Program& p = m.prog;

  const double p_max = e_cap / params.duration_h;
  double net_max = 0.0;
  for (double v : users.net) net_max = std::max(net_max, std::abs(v));
  const double big_m = p_max * grid.delta_h + net_max;
  const double lambda_ph = peak_charge_per_horizon(tariff, grid);

  m.vpeak = p.add_var("peak", std::max(0.0, state.peak_hist), opt::kInf);
  p.add_obj_term(m.vpeak, lambda_ph);

  m.vsoc.resize(H);
  m.vch.resize(H);
  m.vdc.resize(H);
  m.vimp.resize(H);
  m.vexp.resize(H);
  m.vg.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    const std::string suf = "_" + std::to_string(h + 1);
    m.vsoc[h] = p.add_var("soc" + suf, soc_lo, soc_hi);
    m.vch[h] = p.add_var("pch" + suf, 0, p_max);
    m.vdc[h] = p.add_var("pdc" + suf, 0, p_max);
    m.vimp[h] = p.add_var("imp" + suf, 0, big_m);
    m.vexp[h] = p.add_var("exp" + suf, 0, big_m);
    m.vg[h] = p.add_var("gchg" + suf, 0, opt::kInf);

    p.add_obj_term(m.vimp[h], pd_row[h]);
    p.add_obj_term(m.vg[h], tariff.cbs_grid_charge);
    p.add_obj_term(m.vdc[h], tariff.throughput_charge * grid.delta_h);

    // neighborhood net split including battery action
    p.add_constraint({{m.vimp[h], 1.0},
                      {m.vexp[h], -1.0},
                      {m.vch[h], -grid.delta_h},
                      {m.vdc[h], grid.delta_h}},
                     Rel::Eq, users.net[h], "net" + suf);
    p.add_complementarity(m.vimp[h], m.vexp[h], big_m, big_m);
    // peak tracking in kW
    p.add_constraint({{m.vpeak, 1.0}, {m.vimp[h], -1.0 / grid.delta_h}}, Rel::Ge,
                     0.0, "peak" + suf);
    // SoC recursion with discharge efficiency
    if (h == 0) {
      p.add_constraint({{m.vsoc[h], 1.0},
                        {m.vch[h], -grid.delta_h},
                        {m.vdc[h], grid.delta_h / params.round_trip_eff}},
                       Rel::Eq, state.soc_init, "soc" + suf);
    } else {
      p.add_constraint({{m.vsoc[h], 1.0},
                        {m.vsoc[h - 1], -1.0},
                        {m.vch[h], -grid.delta_h},
                        {m.vdc[h], grid.delta_h / params.round_trip_eff}},
                       Rel::Eq, 0.0, "soc" + suf);
    }
    // grid-sourced charging beyond local exports
    p.add_constraint({{m.vg[h], 1.0}, {m.vch[h], -grid.delta_h}}, Rel::Ge,
                     -users.exports[h], "luos" + suf);
  }
  // horizon-end SoC returns to the initial value
  p.add_constraint({{m.vsoc[H - 1], 1.0}}, Rel::Eq, state.soc_init, "soc_end");
  return m;
}

CbsHorizonSolution solve_cbs_horizon(const CbsHorizonModel& model) {
  opt::Solution s = opt::solve(model.prog, model.solve);
  if (s.status != opt::Status::Optimal)
    throw SolverError("CBS horizon j=" + std::to_string(model.j) +
                      " failed to solve (status " +
                      std::to_string(static_cast<int>(s.status)) +
                      "); dispatch construction bug");
  const std::size_t H = model.horizon_len;
  CbsHorizonSolution sol;
  sol.objective = s.objective;
  sol.local_peak = s.values[static_cast<std::size_t>(model.vpeak)];
  sol.soc.resize(H);
  sol.p_ch.resize(H);
  sol.p_dc.resize(H);
  sol.imp.resize(H);
  sol.exp.resize(H);
  sol.grid_chg.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    sol.soc[h] = s.values[static_cast<std::size_t>(model.vsoc[h])];
    sol.p_ch[h] = s.values[static_cast<std::size_t>(model.vch[h])];
    sol.p_dc[h] = s.values[static_cast<std::size_t>(model.vdc[h])];
    sol.imp[h] = s.values[static_cast<std::size_t>(model.vimp[h])];
    sol.exp[h] = s.values[static_cast<std::size_t>(model.vexp[h])];
    sol.grid_chg[h] = s.values[static_cast<std::size_t>(model.vg[h])];
  }
  return sol;
}

CbsState advance_cbs_state(const CbsState& state, const CbsHorizonSolution& sol,
                           const TimeGrid& grid) {
  CbsState next;
  next.soc_init = sol.soc[0];
  next.peak_hist = std::max(state.peak_hist, sol.imp[0] / grid.delta_h);
  return next;
}

CbsTrajectory run_cbs_rho(const CbsParams& params, double e_cap,
                          const TariffSchedule& tariff, const PriceSeries& prices,
                          const std::vector<UserTrajectory>& user_trajectories,
                          const TimeGrid& grid, const CbsModelOptions& opts) {
  if (params.soc_min_frac > 0.0 && e_cap > 0.0)
    throw ConfigError("zero initial SoC requires soc_min_frac == 0");
  CbsTrajectory traj;
  CbsState state;  // SoC and observed peak start at zero
  for (std::size_t j = 1; j <= grid.n_total; ++j) {
    NetDemandAggregate agg = aggregate_net_demand(user_trajectories, j, grid);
    try {
      CbsHorizonModel model = build_cbs_horizon(params, e_cap, tariff,
                                                prices.pd[j - 1], agg, state,
                                                grid, j, opts);
      CbsHorizonSolution sol = solve_cbs_horizon(model);
      traj.soc.push_back(sol.soc[0]);
      traj.p_ch.push_back(sol.p_ch[0]);
      traj.p_dc.push_back(sol.p_dc[0]);
      traj.imp.push_back(sol.imp[0]);
      traj.exp.push_back(sol.exp[0]);
      traj.grid_chg.push_back(sol.grid_chg[0]);
      traj.local_peak_j.push_back(sol.local_peak);
      traj.user_peak_j.push_back(agg.peak_kw);
      traj.user_net.push_back(agg.net[0]);
      state = advance_cbs_state(state, sol, grid);
    } catch (const SolverError& e) {
      throw SolverError("CBS RHO, horizon " + std::to_string(j) + ": " + e.what());
    }
  }
  double lp = 0.0;
  double up = traj.user_net.empty() ? 0.0 : traj.user_net[0] / grid.delta_h;
  for (std::size_t j = 0; j < traj.imp.size(); ++j) {
    lp = std::max(lp, traj.imp[j] / grid.delta_h);
    up = std::max(up, traj.user_net[j] / grid.delta_h);
  }
  traj.local_peak_star = lp;
  traj.user_peak_star = up;
  return traj;
}

namespace {
struct WindowSums {
  double energy = 0.0, grid = 0.0, throughput = 0.0;
};
WindowSums window_sums(const CbsTrajectory& traj, const PriceSeries& prices,
                       const TariffSchedule& tariff, const TimeGrid& grid) {
  WindowSums s;
  for (std::size_t j = 0; j < traj.imp.size(); ++j) {
    s.energy += prices.rt[j] * traj.imp[j];
    s.grid += tariff.cbs_grid_charge * traj.grid_chg[j];
    s.throughput += tariff.throughput_charge * traj.p_dc[j] * grid.delta_h;
  }
  return s;
}
}  // namespace

CostBreakdown ground_truth_cost(const CbsTrajectory& traj,
                                const PriceSeries& prices,
                                const TariffSchedule& tariff,
                                const CbsParams& params, double e_cap,
                                const TimeGrid& grid, bool annualize) {
  WindowSums s = window_sums(traj, prices, tariff, grid);
  const double days = grid.days();
  const double op_scale = annualize ? 365.0 / days : 1.0;
  const double peak_rate =
      tariff.peak_charge_per_day * (annualize ? 365.0 : days);
  const double cap_scale = annualize ? 1.0 : days / 365.0;
  double revenue =
      peak_rate * (traj.user_peak_star - traj.local_peak_star);
  revenue = std::max(revenue, 0.0);
  double capital = params.capital_cost * e_cap *
                   params.capital_recovery_per_year * cap_scale;
  return CostBreakdown::make(s.energy * op_scale, s.grid * op_scale,
                             s.throughput * op_scale, revenue, capital);
}

double ground_truth_total_unclamped(const CbsTrajectory& traj,
                                    const PriceSeries& prices,
                                    const TariffSchedule& tariff,
                                    const CbsParams& params, double e_cap,
                                    const TimeGrid& grid) {
  WindowSums s = window_sums(traj, prices, tariff, grid);
  const double days = grid.days();
  double peak_term = tariff.peak_charge_per_day * days *
                     (traj.local_peak_star - traj.user_peak_star);
  double capital = params.capital_cost * e_cap *
                   params.capital_recovery_per_year * days / 365.0;
  return s.energy + s.grid + s.throughput + peak_term + capital;
}

double avg_daily_cycles(const CbsTrajectory& traj, const CbsParams& params,
                        double e_cap, const TimeGrid& grid) {
  if (!(e_cap > 0)) throw ConfigError("avg_daily_cycles undefined for e_cap = 0");
  double discharged = 0.0;
  for (double p : traj.p_dc) discharged += p * grid.delta_h;
  double usable = e_cap * (params.soc_max_frac - params.soc_min_frac);
  return discharged / usable / grid.days();
}

}  // namespace cbsim
