// Per-horizon end-user optimization and its receding-horizon driver.
// Each horizon trades off wholesale cost, network charges and discomfort
// subject to load-shifting rebound, PV use, export/import complementarity
// and the solar-credit balance.
#ifndef CBSIM_ENDUSER_HPP
#define CBSIM_ENDUSER_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "cbsim/core.hpp"
#include "cbsim/optprog.hpp"

namespace cbsim {

// Carry-over state between horizons: solar-credit balance and cumulative
// committed deviation sum(x_hat* - x*).
struct UserState {
  double credit_init = 0.0;  // kWh, >= 0
  double delta_x = 0.0;      // kWh
};

// Per-interval solution of one horizon (index 0 is the committed interval).
struct UserHorizonSolution {
  std::vector<double> x;            // consumption
  std::vector<double> x_imp;        // x+
  std::vector<double> x_exp;        // x-
  std::vector<double> g_used;       // PV actually used
  std::vector<double> credit_used;  // delta
  std::vector<double> grid_draw;    // x^g
  std::vector<double> credit_bal;   // C
  double objective = 0.0;
};

struct UserTrajectory {
  std::vector<UserHorizonSolution> plans;      // full plan per horizon
  std::vector<UserState> states;               // state entering each horizon
  // committed h=1 values per horizon
  std::vector<double> x, x_imp, x_exp, g_used, credit_used, grid_draw, credit_bal;
};

// Program plus the variable layout needed to read a solution back.
struct UserHorizonModel {
  opt::Program prog;
  opt::SolveOptions solve;
  std::size_t horizon_len = 0;
  std::size_t j = 0;       // 1-based horizon index, diagnostics only
  double delta_x = 0.0;    // diagnostics only
  // variable ids per interval position (0-based h)
  std::vector<int> vx, vimp, vexp, vg, vdelta, vgrid, vcred;
};

struct UserModelOptions {
  double price_ref_floor = 0.001;  // $/kWh
  opt::SolveOptions solve;         // enduser defaults to native quadratics
  UserModelOptions() { solve.quad = opt::QuadMode::native(); }
};

// Builds the horizon-j program. pd_row must have horizon_len entries;
// expected consumption of zero pins x to zero for that interval.
UserHorizonModel build_user_horizon(const UserParams& user,
                                    const TariffSchedule& tariff,
                                    std::span<const double> pd_row,
                                    const UserState& state, const TimeGrid& grid,
                                    std::size_t j, const UserModelOptions& opts = {});

// Solves a built horizon; infeasibility is a hard error carrying (j, delta_x).
UserHorizonSolution solve_user_horizon(const UserHorizonModel& model);

// Commits the h=1 values of a solved horizon into the next state.
UserState advance_user_state(const UserState& state,
                             const UserHorizonSolution& plan,
                             double expected_at_committed);

// Full RHO loop for one user (n_total horizons, committing h=1 each time).
UserTrajectory run_user_rho(const UserParams& user, const TariffSchedule& tariff,
                            const PriceSeries& prices, const TimeGrid& grid,
                            const UserModelOptions& opts = {});

// Neighborhood aggregate of the horizon-j plans.
struct NetDemandAggregate {
  std::vector<double> net;      // kWh per h: sum(x+ - x-)
  std::vector<double> imports;  // kWh per h
  std::vector<double> exports;  // kWh per h
  double peak_kw = 0.0;         // max net / delta_h
};

NetDemandAggregate aggregate_net_demand(
    const std::vector<UserTrajectory>& trajectories, std::size_t j,
    const TimeGrid& grid);

}  // namespace cbsim

#endif  // CBSIM_ENDUSER_HPP
