// Battery sizing methods: exhaustive search under true receding-horizon
// operation, the single-shot "without receding horizon" program (perfect
// foresight or first-interval forecast prices), and the coupled
// receding-horizons program. Plus the method comparison harness.
#ifndef CBSIM_SIZING_HPP
#define CBSIM_SIZING_HPP

#include <string>
#include <vector>

#include "cbsim/cbs.hpp"
#include "cbsim/core.hpp"
#include "cbsim/enduser.hpp"

namespace cbsim {

enum class SizingMethod { Exact, WorhPerfect, WorhPd, CoupledRh };
std::string to_string(SizingMethod m);

enum class PriceMode { Rt, PdH1 };

struct CapacityGrid {
  double lo = 0.0;
  double hi = 100.0;
  double step = 5.0;
  void validate() const;
  std::vector<double> points() const;
};

// A scenario ready for battery evaluation: inputs plus the user
// trajectories, which do not depend on the battery.
struct ScenarioRun {
  TimeGrid grid;
  PriceSeries prices;
  TariffSchedule tariff;
  CbsParams cbs;
  std::vector<UserTrajectory> trajectories;
};

ScenarioRun prepare_scenario(const TimeGrid& grid, const PriceSeries& prices,
                             const TariffSchedule& tariff, const CbsParams& cbs,
                             const std::vector<UserParams>& users,
                             const UserModelOptions& user_opts = {},
                             int threads = 1);

struct SizingOptions {
  CapacityGrid grid;
  double ecap_max = 0.0;            // 0: derived from the scenario
  std::size_t period_horizons = 0;  // 0: one week of horizons
  int threads = 1;
  opt::SolveOptions solve;          // sizing programs
  CbsModelOptions cbs_opts;         // RHO evaluations
};

struct EvaluationResult {
  CostBreakdown breakdown;  // annualized
  double user_peak_kw = 0.0;
  double local_peak_kw = 0.0;
  double avg_cycle = 0.0;  // 0 when capacity is 0
};

struct SizingResult {
  SizingMethod method = SizingMethod::Exact;
  double capacity = 0.0;  // kWh (continuous for program methods)
  EvaluationResult in_sample, out_sample;
  double loss_vs_exact_in = 0.0;
  double loss_vs_exact_out = 0.0;
  double program_objective = 0.0;  // sizing-program value where applicable
};

// Ground-truth cost of operating e_cap under RHO on this scenario.
EvaluationResult evaluate_capacity(const ScenarioRun& sc, double e_cap,
                                   const CbsModelOptions& opts = {});

SizingResult size_exhaustive(const ScenarioRun& sc, const SizingOptions& opts);
SizingResult size_without_rh(const ScenarioRun& sc, PriceMode mode,
                             const SizingOptions& opts);
SizingResult size_coupled_rh(const ScenarioRun& sc, const SizingOptions& opts);

// The W/o RH program with the capacity held fixed: its objective is a
// perfect-foresight lower bound on RHO cost at that capacity (rt mode),
// and its solution provides the foresight side of cost-breakdown reports.
struct WorhFixedResult {
  double objective_window = 0.0;  // window-scale, signed peak term, no capital
  CostBreakdown breakdown;        // annualized, clamped revenue, with capital
  double local_peak_kw = 0.0;
  double user_peak_kw = 0.0;
  double avg_cycle = 0.0;
};
WorhFixedResult worh_fixed_capacity(const ScenarioRun& sc, PriceMode mode,
                                    double e_cap, const SizingOptions& opts);

// Window-scale comparison value for the RHO side of the same bound:
// ground_truth_total_unclamped shifted by the same user-peak constant.
double rho_total_for_bound(const ScenarioRun& sc, const CbsTrajectory& traj,
                           double e_cap);

std::vector<SizingResult> compare_methods(const ScenarioRun& in_sample,
                                          const ScenarioRun& out_sample,
                                          const SizingOptions& opts);

}  // namespace cbsim

#endif  // CBSIM_SIZING_HPP
