#include "cbsim/enduser.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbsim {

using opt::Program;
using opt::Rel;

UserHorizonModel build_user_horizon(const UserParams& user,
                                    const TariffSchedule& tariff,
                                    std::span<const double> pd_row,
                                    const UserState& state, const TimeGrid& grid,
                                    std::size_t j, const UserModelOptions& opts) {
  const std::size_t H = grid.horizon_len;
  if (pd_row.size() != H) throw ConfigError("pd_row length != horizon_len");
  if (state.credit_init < 0) throw ConfigError("negative credit_init");
  if (j < 1 || j > grid.n_total) throw ConfigError("horizon index out of range");

  UserHorizonModel m;
  m.solve = opts.solve;
  m.horizon_len = H;
  m.j = j;
  m.delta_x = state.delta_x;
  Program& p = m.prog;

  const double lambda_max = horizon_price_reference(pd_row, opts.price_ref_floor);

  m.vx.resize(H);
  m.vimp.resize(H);
  m.vexp.resize(H);
  m.vg.resize(H);
  m.vdelta.resize(H);
  m.vgrid.resize(H);
  m.vcred.resize(H);

  for (std::size_t h = 0; h < H; ++h) {
    const std::size_t t = (j - 1) + h;  // 0-based absolute interval
    const double x_hat = user.expected[t];
    const double pv = user.pv_gross[t];
    const std::string suf = "_" + std::to_string(h + 1);
    const double x_lo = user.lb_factor * x_hat;
    const double x_hi = user.ub_factor * x_hat;
    // Big-M for the import/export pair: either the largest possible
    // consumption or the full PV surplus.
    const double big_m = std::max(x_hi, pv);

    m.vx[h] = p.add_var("x" + suf, x_lo, x_hi);
    m.vimp[h] = p.add_var("ximp" + suf, 0, big_m);
    m.vexp[h] = p.add_var("xexp" + suf, 0, big_m);
    m.vg[h] = p.add_var("gu" + suf, 0, pv);
    m.vdelta[h] = p.add_var("cred_use" + suf, 0, opt::kInf);
    m.vgrid[h] = p.add_var("xg" + suf, 0, opt::kInf);
    m.vcred[h] = p.add_var("cred" + suf, 0, opt::kInf);

    const double hour = grid.hour_of_day(t);
    p.add_obj_term(m.vgrid[h], pd_row[h]);
    p.add_obj_term(m.vexp[h], tariff.export_charge.at(hour));
    p.add_obj_term(m.vimp[h], tariff.import_charge.at(hour));

    // Discomfort expanded around x_hat:
    //   w*(-lm*(x-x_hat) + a*(x-x_hat)^2), a = -lm/(2*beta*x_hat) > 0.
    if (x_hat > 0) {
      const double w = time_weight(h + 1, user.kappa, user.tau);
      const double beta = user.elasticity[t];
      const double a = -lambda_max / (2.0 * beta * x_hat);
      p.add_obj_quad(m.vx[h], w * a);
      p.add_obj_term(m.vx[h], w * (-lambda_max - 2.0 * a * x_hat));
      p.add_obj_offset(w * (lambda_max * x_hat + a * x_hat * x_hat));
    }

    // net split: x - G^u = x+ - x-
    p.add_constraint(
        {{m.vx[h], 1.0}, {m.vg[h], -1.0}, {m.vimp[h], -1.0}, {m.vexp[h], 1.0}},
        Rel::Eq, 0.0, "net" + suf);
    p.add_complementarity(m.vimp[h], m.vexp[h], big_m, big_m);
    // grid draw after credits: x+ - delta = x^g
    p.add_constraint({{m.vimp[h], 1.0}, {m.vdelta[h], -1.0}, {m.vgrid[h], -1.0}},
                     Rel::Eq, 0.0, "draw" + suf);
    // credit balance recursion
    if (h == 0) {
      p.add_constraint({{m.vcred[h], 1.0}, {m.vexp[h], -1.0}, {m.vdelta[h], 1.0}},
                       Rel::Eq, state.credit_init, "cred" + suf);
    } else {
      p.add_constraint({{m.vcred[h], 1.0},
                        {m.vcred[h - 1], -1.0},
                        {m.vexp[h], -1.0},
                        {m.vdelta[h], 1.0}},
                       Rel::Eq, 0.0, "cred" + suf);
    }
  }

  // Rebound: consumption shifted within the first rebound_len intervals,
  // repaying the carried deviation.
  std::vector<opt::LinTerm> rb;
  double rb_target = state.delta_x;
  for (std::size_t h = 0; h < grid.rebound_len; ++h) {
    rb.push_back({m.vx[h], 1.0});
    rb_target += user.expected[(j - 1) + h];
  }
  p.add_constraint(std::move(rb), Rel::Eq, rb_target, "rebound");
  return m;
}

UserHorizonSolution solve_user_horizon(const UserHorizonModel& model) {
  opt::Solution s = opt::solve(model.prog, model.solve);
  if (s.status == opt::Status::Infeasible)
    throw SolverError("user horizon j=" + std::to_string(model.j) +
                      " infeasible (delta_x=" + std::to_string(model.delta_x) +
                      " inconsistent with consumption bounds)");
  if (s.status != opt::Status::Optimal)
    throw SolverError("user horizon j=" + std::to_string(model.j) +
                      " did not solve to optimality");
  const std::size_t H = model.horizon_len;
  UserHorizonSolution sol;
  sol.objective = s.objective;
  sol.x.resize(H);
  sol.x_imp.resize(H);
  sol.x_exp.resize(H);
  sol.g_used.resize(H);
  sol.credit_used.resize(H);
  sol.grid_draw.resize(H);
  sol.credit_bal.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    sol.x[h] = s.values[static_cast<std::size_t>(model.vx[h])];
    sol.x_imp[h] = s.values[static_cast<std::size_t>(model.vimp[h])];
    sol.x_exp[h] = s.values[static_cast<std::size_t>(model.vexp[h])];
    sol.g_used[h] = s.values[static_cast<std::size_t>(model.vg[h])];
    sol.credit_used[h] = s.values[static_cast<std::size_t>(model.vdelta[h])];
    sol.grid_draw[h] = s.values[static_cast<std::size_t>(model.vgrid[h])];
    sol.credit_bal[h] = s.values[static_cast<std::size_t>(model.vcred[h])];
  }
  return sol;
}

UserState advance_user_state(const UserState& state,
                             const UserHorizonSolution& plan,
                             double expected_at_committed) {
  UserState next;
  next.credit_init = state.credit_init + plan.x_exp[0] - plan.credit_used[0];
  if (next.credit_init < -1e-9)
    throw SolverError("credit balance went negative: " +
                      std::to_string(next.credit_init));
  next.credit_init = std::max(next.credit_init, 0.0);
  next.delta_x = state.delta_x + (expected_at_committed - plan.x[0]);
  return next;
}

UserTrajectory run_user_rho(const UserParams& user, const TariffSchedule& tariff,
                            const PriceSeries& prices, const TimeGrid& grid,
                            const UserModelOptions& opts) {
  user.validate(grid);
  UserTrajectory traj;
  traj.plans.reserve(grid.n_total);
  traj.states.reserve(grid.n_total);
  UserState state;  // zero credit and deviation at j=1
  for (std::size_t j = 1; j <= grid.n_total; ++j) {
    try {
      UserHorizonModel model = build_user_horizon(
          user, tariff, prices.pd[j - 1], state, grid, j, opts);
      UserHorizonSolution plan = solve_user_horizon(model);
      traj.states.push_back(state);
      traj.x.push_back(plan.x[0]);
      traj.x_imp.push_back(plan.x_imp[0]);
      traj.x_exp.push_back(plan.x_exp[0]);
      traj.g_used.push_back(plan.g_used[0]);
      traj.credit_used.push_back(plan.credit_used[0]);
      traj.grid_draw.push_back(plan.grid_draw[0]);
      traj.credit_bal.push_back(plan.credit_bal[0]);
      state = advance_user_state(state, plan, user.expected[j - 1]);
      traj.plans.push_back(std::move(plan));
    } catch (const SolverError& e) {
      throw SolverError("user '" + user.name + "', horizon " + std::to_string(j) +
                        ": " + e.what());
    }
  }
  return traj;
}

NetDemandAggregate aggregate_net_demand(
    const std::vector<UserTrajectory>& trajectories, std::size_t j,
    const TimeGrid& grid) {
  const std::size_t H = grid.horizon_len;
  NetDemandAggregate agg;
  agg.net.assign(H, 0.0);
  agg.imports.assign(H, 0.0);
  agg.exports.assign(H, 0.0);
  for (const auto& traj : trajectories) {
    if (traj.plans.size() < j)
      throw ConfigError("trajectory does not cover horizon " + std::to_string(j));
    const auto& plan = traj.plans[j - 1];
    for (std::size_t h = 0; h < H; ++h) {
      agg.imports[h] += plan.x_imp[h];
      agg.exports[h] += plan.x_exp[h];
      agg.net[h] += plan.x_imp[h] - plan.x_exp[h];
    }
  }
  double peak = agg.net.empty() ? 0.0 : agg.net[0];
  for (double v : agg.net) peak = std::max(peak, v);
  agg.peak_kw = peak / grid.delta_h;
  return agg;
}

}  // namespace cbsim
