// Per-horizon community-battery dispatch, its receding-horizon driver and
// the ground-truth cost evaluation at realized prices.
#ifndef CBSIM_CBS_HPP
#define CBSIM_CBS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "cbsim/core.hpp"
#include "cbsim/enduser.hpp"
#include "cbsim/optprog.hpp"

namespace cbsim {

struct CbsState {
  double soc_init = 0.0;   // kWh
  double peak_hist = 0.0;  // kW, observed committed peak so far
};

struct CbsHorizonSolution {
  std::vector<double> soc;       // E, kWh, end of each interval
  std::vector<double> p_ch;      // kW
  std::vector<double> p_dc;      // kW
  std::vector<double> imp;       // theta+, kWh
  std::vector<double> exp;       // theta-, kWh
  std::vector<double> grid_chg;  // theta^g, kWh
  double local_peak = 0.0;       // kW
  double objective = 0.0;
};

struct CbsHorizonModel {
  opt::Program prog;
  opt::SolveOptions solve;
  std::size_t horizon_len = 0;
  std::size_t j = 0;  // diagnostics
  std::vector<int> vsoc, vch, vdc, vimp, vexp, vg;
  int vpeak = -1;
};

// Committed (h=1) trajectory over the whole run plus realized peaks.
struct CbsTrajectory {
  std::vector<double> soc, p_ch, p_dc, imp, exp, grid_chg;
  std::vector<double> local_peak_j;  // per-horizon Upsilon^local
  std::vector<double> user_peak_j;   // per-horizon plan peak Upsilon^user
  std::vector<double> user_net;      // committed neighborhood net per interval
  double local_peak_star = 0.0;      // kW
  double user_peak_star = 0.0;       // kW
};

struct CbsModelOptions {
  opt::SolveOptions solve;
};

// Builds the horizon-j dispatch program. The user aggregate must come from
// the horizon-j plans (net, exports per interval and the plan peak).
CbsHorizonModel build_cbs_horizon(const CbsParams& params, double e_cap,
                                  const TariffSchedule& tariff,
                                  std::span<const double> pd_row,
                                  const NetDemandAggregate& users,
                                  const CbsState& state, const TimeGrid& grid,
                                  std::size_t j = 1,
                                  const CbsModelOptions& opts = {});

CbsHorizonSolution solve_cbs_horizon(const CbsHorizonModel& model);

CbsState advance_cbs_state(const CbsState& state, const CbsHorizonSolution& sol,
                           const TimeGrid& grid);

CbsTrajectory run_cbs_rho(const CbsParams& params, double e_cap,
                          const TariffSchedule& tariff, const PriceSeries& prices,
                          const std::vector<UserTrajectory>& user_trajectories,
                          const TimeGrid& grid, const CbsModelOptions& opts = {});

// Ground-truth cost of a committed trajectory at realized prices.
// Annualized reporting scales operational terms by 365/days and prices the
// peak and capital at annual rates; window reporting keeps everything at
// the simulated-window scale.
CostBreakdown ground_truth_cost(const CbsTrajectory& traj,
                                const PriceSeries& prices,
                                const TariffSchedule& tariff,
                                const CbsParams& params, double e_cap,
                                const TimeGrid& grid, bool annualize = true);

// Window-scale total with the signed (unclamped) peak term; the tight
// comparison point for perfect-foresight lower bounds.
double ground_truth_total_unclamped(const CbsTrajectory& traj,
                                    const PriceSeries& prices,
                                    const TariffSchedule& tariff,
                                    const CbsParams& params, double e_cap,
                                    const TimeGrid& grid);

// Discharged energy / usable capacity / days.
double avg_daily_cycles(const CbsTrajectory& traj, const CbsParams& params,
                        double e_cap, const TimeGrid& grid);

// Per-horizon peak price aligned with the horizon length.
double peak_charge_per_horizon(const TariffSchedule& tariff, const TimeGrid& grid);

}  // namespace cbsim

#endif  // CBSIM_CBS_HPP
