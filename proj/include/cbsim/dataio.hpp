// CSV ingestion for prices and user profiles, deterministic behavioral
// sampling, in/out-of-sample calendar splitting, synthetic scenario
// generation and forecast-error statistics.
#ifndef CBSIM_DATAIO_HPP
#define CBSIM_DATAIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cbsim/core.hpp"

namespace cbsim {

struct ScenarioBundle {
  TimeGrid grid;
  PriceSeries prices;
  std::vector<UserParams> users;
  TariffSchedule tariff;
  CbsParams cbs;
  std::string label = "custom";          // in_sample | out_sample | custom
  std::vector<std::string> timestamps;   // ISO-8601, one per series interval
  std::size_t pd_fill_count = 0;
  std::uint64_t seed = 0;
};

enum class PriceUnit { Dollars, Cents };

struct LoadedPrices {
  TimeGrid grid;  // n_total inferred from the file, delta_h from spacing
  PriceSeries prices;
  std::vector<std::string> timestamps;
  std::size_t fill_count = 0;
  std::vector<std::vector<char>> fill_mask;  // 1 where persistence-filled
};

// rt file: timestamp,price (header required); pd file:
// issue_timestamp,lead_index,price. Missing pd cells are filled with the
// most recent earlier forecast of the same target interval.
LoadedPrices load_prices(const std::string& rt_path, const std::string& pd_path,
                         std::size_t horizon_len, std::size_t rebound_len,
                         PriceUnit unit = PriceUnit::Dollars);

// user file: user_id,timestamp,consumption_kwh,gross_pv_kwh. Series must
// be gap-free at the expected cadence (default half-hourly) and aligned
// across users; PV is scaled in place. step_minutes = 0 infers the cadence
// from the first user's first two rows.
std::vector<UserParams> load_users(const std::string& path, double pv_scale = 3.0,
                                   long step_minutes = 30);

void save_prices(const PriceSeries& prices, const TimeGrid& grid,
                 const std::vector<std::string>& timestamps,
                 const std::string& rt_path, const std::string& pd_path);
void save_users(const std::vector<UserParams>& users,
                const std::vector<std::string>& timestamps,
                const std::string& path, double pv_unscale = 1.0);

struct ElasticityBand {
  double start_h = 0.0, end_h = 24.0;
  double lo = -0.3, hi = -0.2;  // signed, lo <= hi < 0
};

std::vector<ElasticityBand> default_elasticity_bands();

// One uniform draw per (user ordinal, band ordinal), broadcast over the
// band's hours; a pure function of (seed, user, band).
void sample_elasticity(std::vector<UserParams>& users,
                       const std::vector<ElasticityBand>& bands,
                       const TimeGrid& grid, std::uint64_t seed);

// kappa uniform per user from [lo, hi]; tau fixed.
void sample_behavior(std::vector<UserParams>& users, double kappa_lo,
                     double kappa_hi, double tau, std::uint64_t seed);

struct SplitBundles {
  ScenarioBundle in_sample;
  ScenarioBundle out_sample;
  bool truncated = false;  // true when the input covers < 12 months
};

// Days 8-14 of each month form the in-sample bundle, days 15-21 the
// out-of-sample one. The last horizon_len-1 selected intervals of each
// bundle serve as look-ahead tail only.
SplitBundles split_sample(const ScenarioBundle& full);

struct SyntheticSpec {
  std::size_t n_users = 4;
  std::size_t days = 7;
  std::uint64_t seed = 1;
  double delta_h = 0.5;
  std::size_t horizon_len = 8;
  std::size_t rebound_len = 4;
  // two-level price cycle
  double price_offpeak = 0.05;
  double price_peak = 0.40;
  double peak_start_h = 17.0;
  double peak_end_h = 21.0;
  // forecast distortion: pd[j][h] = rt[j+h-1] + bias + noise + spikes
  double pd_bias = 0.0;
  double pd_noise_sd = 0.0;
  double pd_spike_prob_per_day = 0.0;
  double pd_spike_add = 3.0;
  // realized price spikes
  double rt_spike_prob_per_day = 0.0;
  double rt_spike_add = 2.0;
  double pv_peak_kwh = 1.6;  // per-interval PV at solar noon (prosumers)
  std::string start_date = "2021-01-01";
};

ScenarioBundle generate_synthetic(const SyntheticSpec& spec);

enum class ErrorSelector { H1, HLast, All };

struct ErrorStats {
  double mean = 0.0, median = 0.0, sd = 0.0, skew = 0.0, kurt = 0.0;
  std::size_t count = 0;
};

struct StatsConventions {
  bool excess_kurtosis = true;   // subtract 3
  bool adjusted_skew = false;    // bias-corrected G1 instead of g1
};

// fill_mask, when given, excludes persistence-filled cells from the sample.
ErrorStats pd_error_stats(const PriceSeries& prices, const TimeGrid& grid,
                          ErrorSelector sel, const StatsConventions& conv = {},
                          const std::vector<std::vector<char>>* fill_mask = nullptr);

// Table-defaults for tariffs and battery parameters.
TariffSchedule default_tariff();
CbsParams default_cbs_params();

}  // namespace cbsim

#endif  // CBSIM_DATAIO_HPP
