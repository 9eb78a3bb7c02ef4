// Domain types and closed-form evaluators shared by every module:
// interval bookkeeping, prices, tariffs, user/battery parameters and the
// behavioural-economics discomfort model.
#ifndef CBSIM_CORE_HPP
#define CBSIM_CORE_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbsim {

// Thrown on malformed configuration / parameter domains.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown on malformed or inconsistent input data (CSV files, series).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when an optimization fails in a way the caller cannot recover from.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Interval bookkeeping for a receding-horizon run. Horizons are 1-based
// j in {1..n_total}; positions within a horizon are 1-based h in
// {1..horizon_len}; the absolute interval of (j,h) is j+h-1.
struct TimeGrid {
  double delta_h = 0.5;       // hours per interval
  std::size_t n_total = 0;    // committed intervals |T|
  std::size_t horizon_len = 32;
  std::size_t rebound_len = 12;

  // Length every aligned series must have: the last horizon looks
  // horizon_len-1 intervals past the last committed one.
  std::size_t series_len() const { return n_total + horizon_len - 1; }
  std::size_t intervals_per_day() const;
  double days() const { return static_cast<double>(n_total) * delta_h / 24.0; }
  // Hour-of-day of a 0-based absolute interval, assuming the series
  // starts at midnight.
  double hour_of_day(std::size_t t0) const;
  void validate() const;
};

// Real-time prices plus the per-horizon pre-dispatch forecast matrix.
// pd[j][h] (0-based here) is the forecast issued at horizon j for
// absolute interval j+h.
struct PriceSeries {
  std::vector<double> rt;                 // length series_len
  std::vector<std::vector<double>> pd;    // n_total rows of horizon_len
  void validate(const TimeGrid& grid) const;
};

// Time-of-day step function ($/kWh). Bands may wrap past midnight.
class TodSchedule {
 public:
  struct Band {
    double start_h = 0.0;  // inclusive
    double end_h = 0.0;    // exclusive; end < start means wrap
    double value = 0.0;
  };

  TodSchedule() = default;
  explicit TodSchedule(std::vector<Band> bands);
  static TodSchedule flat(double value);

  double at(double hour_of_day) const;
  const std::vector<Band>& bands() const { return bands_; }

 private:
  std::vector<Band> bands_;          // as given
  std::vector<double> breakpoints_;  // normalized, sorted, cover [0,24)
  std::vector<double> values_;       // values_[i] on [breakpoints_[i], breakpoints_[i+1])
};

struct TariffSchedule {
  TodSchedule export_charge;     // lambda^ExP, may be negative (reward)
  TodSchedule import_charge;     // lambda^ImP
  double cbs_grid_charge = 0.0161;   // lambda^g, $/kWh
  double throughput_charge = 0.032;  // lambda^ThP, $/kWh discharged
  double peak_charge_per_day = 0.33; // lambda^peak, $/kW per day
};

// One end user's behavioural parameters and exogenous profiles.
struct UserParams {
  std::string name;
  std::vector<double> expected;   // x_hat, kWh per absolute interval
  std::vector<double> pv_gross;   // G, kWh per absolute interval
  std::vector<double> elasticity; // beta < 0 per absolute interval
  double kappa = 0.0;             // short-term discounting degree
  double tau = 0.2;               // long-term discounting degree
  double lb_factor = 0.5;
  double ub_factor = 1.5;
  void validate(const TimeGrid& grid) const;
};

struct CbsParams {
  double round_trip_eff = 0.9;   // Gamma in (0,1]
  double soc_min_frac = 0.0;
  double soc_max_frac = 1.0;
  double duration_h = 2.0;       // T^c
  double capital_cost = 800.0;   // $/kWh
  double capital_recovery_per_year = 0.1175;
  void validate() const;
};

// Ground-truth cost components ($). peak_revenue is reported as a
// non-negative credit; total = energy + grid_charge + throughput
// - peak_revenue + capital.
struct CostBreakdown {
  double energy = 0.0;
  double grid_charge = 0.0;
  double throughput = 0.0;
  double peak_revenue = 0.0;
  double capital = 0.0;
  double total = 0.0;

  static CostBreakdown make(double energy, double grid_charge,
                            double throughput, double peak_revenue,
                            double capital);
};

// Time-inconsistency weight (1 + tau*h*kappa) / (1 + h*kappa), h >= 1.
double time_weight(std::size_t h, double kappa, double tau);

// Loss-aversion discomfort in $: -lambda_max*(1 + (x-x_hat)/(2*beta*x_hat))*(x-x_hat).
// Requires x_hat > 0 and beta < 0.
double discomfort(double x, double x_hat, double beta, double lambda_max);

// Horizon price reference: max of the forecast row, floored to keep the
// discomfort quadratic convex when every forecast price is <= 0.
double horizon_price_reference(std::span<const double> pd_row, double floor);

}  // namespace cbsim

#endif  // CBSIM_CORE_HPP
