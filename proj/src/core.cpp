#include "cbsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbsim {

std::size_t TimeGrid::intervals_per_day() const {
  double n = 24.0 / delta_h;
  auto rounded = static_cast<std::size_t>(std::llround(n));
  if (rounded == 0 || std::abs(n - static_cast<double>(rounded)) > 1e-9)
    throw ConfigError("delta_h must divide 24 hours");
  return rounded;
}

double TimeGrid::hour_of_day(std::size_t t0) const {
  std::size_t per_day = intervals_per_day();
  return static_cast<double>(t0 % per_day) * delta_h;
}

void TimeGrid::validate() const {
  if (!(delta_h > 0)) throw ConfigError("delta_h must be > 0");
  if (n_total < 1) throw ConfigError("n_total must be >= 1");
  if (rebound_len < 1 || rebound_len > horizon_len)
    throw ConfigError("need 0 < rebound_len <= horizon_len");
  intervals_per_day();
}

void PriceSeries::validate(const TimeGrid& grid) const {
  if (rt.size() != grid.series_len())
    throw DataError("rt series length mismatch: have " +
                    std::to_string(rt.size()) + ", need " +
                    std::to_string(grid.series_len()));
  if (pd.size() != grid.n_total)
    throw DataError("pd matrix must have one row per horizon");
  for (double v : rt)
    if (!std::isfinite(v)) throw DataError("non-finite rt price");
  for (const auto& row : pd) {
    if (row.size() != grid.horizon_len)
      throw DataError("pd row length != horizon_len");
    for (double v : row)
      if (!std::isfinite(v)) throw DataError("non-finite pd price");
  }
}

namespace {
double wrap24(double h) {
  double r = std::fmod(h, 24.0);
  return r < 0 ? r + 24.0 : r;
}
}  // namespace

TodSchedule::TodSchedule(std::vector<Band> bands) : bands_(std::move(bands)) {
  if (bands_.empty()) throw ConfigError("tariff schedule needs >= 1 band");
  // Split wrapping bands and collect the breakpoint grid.
  struct Seg { double a, b, v; };
  std::vector<Seg> segs;
  for (const auto& band : bands_) {
    double a = wrap24(band.start_h);
    double b = band.end_h == 24.0 ? 24.0 : wrap24(band.end_h);
    if (a == b) throw ConfigError("empty tariff band");
    if (a < b) {
      segs.push_back({a, b, band.value});
    } else {
      segs.push_back({a, 24.0, band.value});
      segs.push_back({0.0, b, band.value});
    }
  }
  std::sort(segs.begin(), segs.end(), [](const Seg& x, const Seg& y) { return x.a < y.a; });
  double cursor = 0.0;
  for (const auto& s : segs) {
    if (std::abs(s.a - cursor) > 1e-9)
      throw ConfigError("tariff bands leave a gap or overlap at hour " +
                        std::to_string(cursor));
    breakpoints_.push_back(s.a);
    values_.push_back(s.v);
    cursor = s.b;
  }
  if (std::abs(cursor - 24.0) > 1e-9)
    throw ConfigError("tariff bands do not cover 24h");
}

TodSchedule TodSchedule::flat(double value) {
  return TodSchedule({{0.0, 24.0, value}});
}

double TodSchedule::at(double hour) const {
  double h = wrap24(hour);
  // breakpoints_ is sorted ascending and starts at 0.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), h + 1e-12);
  std::size_t idx = static_cast<std::size_t>(it - breakpoints_.begin());
  return values_[idx == 0 ? 0 : idx - 1];
}

void UserParams::validate(const TimeGrid& grid) const {
  std::size_t n = grid.series_len();
  if (expected.size() < n || pv_gross.size() < n || elasticity.size() < n)
    throw ConfigError("user series shorter than the simulation window");
  for (std::size_t t = 0; t < n; ++t) {
    if (expected[t] < 0) throw ConfigError("expected consumption < 0");
    if (pv_gross[t] < 0) throw ConfigError("pv_gross < 0");
    if (!(elasticity[t] < 0)) throw ConfigError("elasticity must be < 0");
  }
  if (kappa < 0) throw ConfigError("kappa must be >= 0");
  if (tau < 0 || tau > 1) throw ConfigError("tau must be in [0,1]");
  if (!(lb_factor >= 0 && lb_factor <= 1 && ub_factor >= 1))
    throw ConfigError("need 0 <= lb_factor <= 1 <= ub_factor");
}

void CbsParams::validate() const {
  if (!(round_trip_eff > 0 && round_trip_eff <= 1))
    throw ConfigError("round_trip_eff must be in (0,1]");
  if (!(soc_min_frac >= 0 && soc_min_frac < soc_max_frac && soc_max_frac <= 1))
    throw ConfigError("need 0 <= soc_min_frac < soc_max_frac <= 1");
  if (!(duration_h > 0)) throw ConfigError("duration_h must be > 0");
}

CostBreakdown CostBreakdown::make(double energy, double grid_charge,
                                  double throughput, double peak_revenue,
                                  double capital) {
  CostBreakdown b;
  b.energy = energy;
  b.grid_charge = grid_charge;
  b.throughput = throughput;
  b.peak_revenue = peak_revenue;
  b.capital = capital;
  b.total = energy + grid_charge + throughput - peak_revenue + capital;
  return b;
}

double time_weight(std::size_t h, double kappa, double tau) {
  if (h < 1) throw std::invalid_argument("time_weight: h must be >= 1");
  double hk = static_cast<double>(h) * kappa;
  return (1.0 + tau * hk) / (1.0 + hk);
}

double discomfort(double x, double x_hat, double beta, double lambda_max) {
  if (!(x_hat > 0)) throw std::invalid_argument("discomfort: x_hat must be > 0");
  if (!(beta < 0)) throw std::invalid_argument("discomfort: beta must be < 0");
  double d = x - x_hat;
  return -lambda_max * (1.0 + d / (2.0 * beta * x_hat)) * d;
}

double horizon_price_reference(std::span<const double> pd_row, double floor) {
  if (pd_row.empty())
    throw std::invalid_argument("horizon_price_reference: empty row");
  double m = -std::numeric_limits<double>::infinity();
  for (double v : pd_row) m = std::max(m, v);
  return std::max(m, floor);
}

}  // namespace cbsim
