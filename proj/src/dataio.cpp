#include "cbsim/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace cbsim {

namespace {

// ---------------------------------------------------------------- csv --
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  Csv csv;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      csv.header = std::move(cells);
      first = false;
    } else {
      csv.rows.push_back(std::move(cells));
    }
  }
  if (first) throw DataError(path + ": missing header row");
  return csv;
}

double parse_num(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    throw DataError("bad number '" + s + "' in " + ctx);
  }
}

// ------------------------------------------------------------- dates --
// civil-date helpers (proleptic Gregorian)
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<long>(era) * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long yy = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yy + (m <= 2));
}

// minutes since 1970-01-01T00:00
long parse_timestamp(const std::string& ts) {
  int y = 0, mo = 0, d = 0, hh = 0, mi = 0, ss = 0;
  char sep = 0;
  int n = std::sscanf(ts.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &hh,
                      &mi, &ss);
  if (n < 6 || (sep != 'T' && sep != ' '))
    throw DataError("bad timestamp '" + ts + "' (want YYYY-MM-DDTHH:MM[:SS])");
  return days_from_civil(y, mo, d) * 1440L + hh * 60L + mi;
}

std::string format_timestamp(long minutes) {
  long day = minutes / 1440;
  long rem = minutes % 1440;
  if (rem < 0) {
    rem += 1440;
    --day;
  }
  int y, m, d;
  civil_from_days(day, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02ld:%02ld:00", y, m, d,
                rem / 60, rem % 60);
  return buf;
}

int day_of_month(const std::string& ts) {
  int y = 0, mo = 0, d = 0;
  if (std::sscanf(ts.c_str(), "%d-%d-%d", &y, &mo, &d) != 3)
    throw DataError("bad timestamp '" + ts + "'");
  return d;
}

std::pair<int, int> year_month(const std::string& ts) {
  int y = 0, mo = 0, d = 0;
  std::sscanf(ts.c_str(), "%d-%d-%d", &y, &mo, &d);
  return {y, mo};
}

// -------------------------------------------------------------- rng --
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double u01(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
           std::uint64_t c = 0) {
  std::uint64_t x =
      splitmix64(seed ^ splitmix64(a + splitmix64(b + splitmix64(c + 0x5bd1))));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

double normal01(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  double u1 = std::max(u01(seed, a, b, 101), 1e-300);
  double u2 = u01(seed, a, b, 202);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

// -------------------------------------------------------------- prices --
LoadedPrices load_prices(const std::string& rt_path, const std::string& pd_path,
                         std::size_t horizon_len, std::size_t rebound_len,
                         PriceUnit unit) {
  const double unit_scale = unit == PriceUnit::Cents ? 0.01 : 1.0;
  Csv rt = read_csv(rt_path);
  if (rt.header.size() < 2 || rt.header[0] != "timestamp" ||
      rt.header[1].rfind("price", 0) != 0)
    throw DataError(rt_path + ": want columns timestamp,price_dollars_per_kwh");
  LoadedPrices out;
  std::vector<long> times;
  for (const auto& row : rt.rows) {
    if (row.size() < 2) throw DataError(rt_path + ": short row");
    times.push_back(parse_timestamp(row[0]));
    out.timestamps.push_back(row[0]);
    out.prices.rt.push_back(parse_num(row[1], rt_path) * unit_scale);
  }
  if (times.size() < horizon_len + 1) throw DataError(rt_path + ": too few rows");
  long step = times[1] - times[0];
  if (step <= 0) throw DataError(rt_path + ": timestamps not increasing");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] - times[i - 1] != step)
      throw DataError(rt_path + ": unsorted or gapped timestamps near " +
                      out.timestamps[i]);

  out.grid.delta_h = static_cast<double>(step) / 60.0;
  out.grid.horizon_len = horizon_len;
  out.grid.rebound_len = rebound_len;
  out.grid.n_total = times.size() - (horizon_len - 1);
  out.grid.validate();

  const std::size_t T = out.grid.n_total, H = horizon_len;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.prices.pd.assign(T, std::vector<double>(H, nan));

  Csv pd = read_csv(pd_path);
  if (pd.header.size() < 3 || pd.header[0] != "issue_timestamp" ||
      pd.header[1] != "lead_index" || pd.header[2].rfind("price", 0) != 0)
    throw DataError(pd_path +
                    ": want columns issue_timestamp,lead_index,price_dollars_per_kwh");
  for (const auto& row : pd.rows) {
    if (row.size() < 3) throw DataError(pd_path + ": short row");
    long ts = parse_timestamp(row[0]);
    long offset = ts - times[0];
    if (offset < 0 || offset % step != 0)
      throw DataError(pd_path + ": issue time " + row[0] + " not on the rt grid");
    std::size_t j = static_cast<std::size_t>(offset / step);
    double lead_raw = parse_num(row[1], pd_path);
    auto lead = static_cast<long>(lead_raw);
    if (lead < 1 || static_cast<std::size_t>(lead) > H)
      throw DataError(pd_path + ": lead_index out of 1.." + std::to_string(H));
    if (j >= T) continue;  // forecast issued past the committed window
    double& cell = out.prices.pd[j][static_cast<std::size_t>(lead - 1)];
    if (!std::isnan(cell))
      throw DataError(pd_path + ": duplicate (issue,lead) at " + row[0] + "," +
                      row[1]);
    cell = parse_num(row[2], pd_path) * unit_scale;
  }

  // persistence fill: most recent earlier forecast of the same target
  out.fill_mask.assign(T, std::vector<char>(H, 0));
  for (std::size_t j = 0; j < T; ++j)
    for (std::size_t h = 0; h < H; ++h) {
      if (!std::isnan(out.prices.pd[j][h])) continue;
      out.fill_mask[j][h] = 1;
      std::size_t target = j + h;
      bool filled = false;
      for (std::size_t jj = j; jj-- > 0;) {
        if (target - jj >= H) break;
        double donor = out.prices.pd[jj][target - jj];
        if (!std::isnan(donor)) {
          out.prices.pd[j][h] = donor;
          filled = true;
          break;
        }
      }
      if (!filled)
        throw DataError(pd_path + ": no forecast at all for target interval " +
                        std::to_string(target + 1));
      ++out.fill_count;
    }
  out.prices.validate(out.grid);
  return out;
}

std::vector<UserParams> load_users(const std::string& path, double pv_scale,
                                   long step_minutes) {
  Csv csv = read_csv(path);
  if (csv.header.size() < 4 || csv.header[0] != "user_id" ||
      csv.header[1] != "timestamp" || csv.header[2] != "consumption_kwh" ||
      csv.header[3] != "gross_pv_kwh")
    throw DataError(path +
                    ": want columns user_id,timestamp,consumption_kwh,gross_pv_kwh");
  std::vector<UserParams> users;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<long>> times;
  for (const auto& row : csv.rows) {
    if (row.size() < 4) throw DataError(path + ": short row");
    auto [it, fresh] = index.emplace(row[0], users.size());
    if (fresh) {
      users.emplace_back();
      users.back().name = row[0];
      times.emplace_back();
    }
    std::size_t u = it->second;
    times[u].push_back(parse_timestamp(row[1]));
    users[u].expected.push_back(parse_num(row[2], path));
    users[u].pv_gross.push_back(parse_num(row[3], path) * pv_scale);
  }
  if (users.empty()) throw DataError(path + ": no user rows");
  // gap-free, uniform, aligned across users
  const auto& ref = times[0];
  if (ref.size() < 2) throw DataError(path + ": series too short");
  long step = step_minutes > 0 ? step_minutes : ref[1] - ref[0];
  for (std::size_t u = 0; u < users.size(); ++u) {
    const auto& tu = times[u];
    if (tu.size() != ref.size())
      throw DataError(path + ": user " + users[u].name + " has " +
                      std::to_string(tu.size()) + " rows, expected " +
                      std::to_string(ref.size()));
    std::string gaps;
    for (std::size_t i = 1; i < tu.size(); ++i)
      if (tu[i] - tu[i - 1] != step) {
        gaps += " @" + format_timestamp(tu[i - 1]);
        if (gaps.size() > 120) break;
      }
    if (!gaps.empty())
      throw DataError(path + ": gaps in series of user " + users[u].name + ":" +
                      gaps);
    if (tu[0] != ref[0])
      throw DataError(path + ": user " + users[u].name + " misaligned start");
  }
  return users;
}

void save_prices(const PriceSeries& prices, const TimeGrid& grid,
                 const std::vector<std::string>& timestamps,
                 const std::string& rt_path, const std::string& pd_path) {
  std::ofstream rt(rt_path);
  if (!rt) throw DataError("cannot write " + rt_path);
  rt << "timestamp,price_dollars_per_kwh\n";
  char buf[64];
  for (std::size_t t = 0; t < prices.rt.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.17g", prices.rt[t]);
    rt << timestamps[t] << "," << buf << "\n";
  }
  std::ofstream pd(pd_path);
  if (!pd) throw DataError("cannot write " + pd_path);
  pd << "issue_timestamp,lead_index,price_dollars_per_kwh\n";
  for (std::size_t j = 0; j < prices.pd.size(); ++j)
    for (std::size_t h = 0; h < grid.horizon_len; ++h) {
      std::snprintf(buf, sizeof buf, "%.17g", prices.pd[j][h]);
      pd << timestamps[j] << "," << h + 1 << "," << buf << "\n";
    }
}

void save_users(const std::vector<UserParams>& users,
                const std::vector<std::string>& timestamps,
                const std::string& path, double pv_unscale) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "user_id,timestamp,consumption_kwh,gross_pv_kwh\n";
  char a[64], b[64];
  for (const auto& u : users)
    for (std::size_t t = 0; t < timestamps.size(); ++t) {
      std::snprintf(a, sizeof a, "%.17g", u.expected[t]);
      std::snprintf(b, sizeof b, "%.17g", u.pv_gross[t] * pv_unscale);
      out << u.name << "," << timestamps[t] << "," << a << "," << b << "\n";
    }
}

// ------------------------------------------------------------ sampling --
std::vector<ElasticityBand> default_elasticity_bands() {
  return {{1, 5, -0.3, -0.2},
          {5, 10, -0.5, -0.3},
          {10, 14, -0.5, -0.3},
          {14, 20, -0.7, -0.5},
          {20, 1, -0.5, -0.3}};
}

namespace {
bool in_band(double hod, const ElasticityBand& b) {
  if (b.start_h < b.end_h) return hod >= b.start_h && hod < b.end_h;
  return hod >= b.start_h || hod < b.end_h;  // wraps midnight
}
}  // namespace

void sample_elasticity(std::vector<UserParams>& users,
                       const std::vector<ElasticityBand>& bands,
                       const TimeGrid& grid, std::uint64_t seed) {
  if (bands.empty()) throw ConfigError("need at least one elasticity band");
  for (const auto& b : bands)
    if (!(b.lo <= b.hi && b.hi < 0))
      throw ConfigError("elasticity band range must be negative");
  const std::size_t n = grid.series_len();
  for (std::size_t u = 0; u < users.size(); ++u) {
    std::vector<double> draw(bands.size());
    for (std::size_t k = 0; k < bands.size(); ++k)
      draw[k] = bands[k].lo + u01(seed, u, k) * (bands[k].hi - bands[k].lo);
    users[u].elasticity.assign(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      double hod = grid.hour_of_day(t);
      double beta = 0.0;
      bool hit = false;
      for (std::size_t k = 0; k < bands.size(); ++k)
        if (in_band(hod, bands[k])) {
          beta = draw[k];
          hit = true;
          break;
        }
      if (!hit) throw ConfigError("elasticity bands leave hour " +
                                  std::to_string(hod) + " uncovered");
      users[u].elasticity[t] = beta;
    }
  }
}

void sample_behavior(std::vector<UserParams>& users, double kappa_lo,
                     double kappa_hi, double tau, std::uint64_t seed) {
  for (std::size_t u = 0; u < users.size(); ++u) {
    users[u].kappa = kappa_lo + u01(seed, u, 7777) * (kappa_hi - kappa_lo);
    users[u].tau = tau;
  }
}

// ------------------------------------------------------------ splitting --
namespace {
ScenarioBundle slice_bundle(const ScenarioBundle& full,
                            const std::vector<std::size_t>& sel,
                            const std::string& label) {
  const std::size_t H = full.grid.horizon_len;
  if (sel.size() < H + 1)
    throw DataError("selection too short for one horizon: " + label);
  ScenarioBundle b;
  b.grid = full.grid;
  b.grid.n_total = sel.size() - (H - 1);
  b.tariff = full.tariff;
  b.cbs = full.cbs;
  b.label = label;
  b.seed = full.seed;
  b.pd_fill_count = full.pd_fill_count;
  b.timestamps.reserve(sel.size());
  for (std::size_t i : sel) b.timestamps.push_back(full.timestamps[i]);
  b.prices.rt.reserve(sel.size());
  for (std::size_t i : sel) b.prices.rt.push_back(full.prices.rt[i]);
  for (std::size_t j = 0; j < b.grid.n_total; ++j) {
    std::size_t g = sel[j];
    if (g >= full.grid.n_total)
      throw DataError("no forecast row for selected interval " +
                      full.timestamps[g]);
    b.prices.pd.push_back(full.prices.pd[g]);
  }
  for (const auto& u : full.users) {
    UserParams su;
    su.name = u.name;
    su.kappa = u.kappa;
    su.tau = u.tau;
    su.lb_factor = u.lb_factor;
    su.ub_factor = u.ub_factor;
    su.expected.reserve(sel.size());
    su.pv_gross.reserve(sel.size());
    su.elasticity.reserve(sel.size());
    for (std::size_t i : sel) {
      su.expected.push_back(u.expected[i]);
      su.pv_gross.push_back(u.pv_gross[i]);
      if (!u.elasticity.empty()) su.elasticity.push_back(u.elasticity[i]);
    }
    b.users.push_back(std::move(su));
  }
  return b;
}
}  // namespace

SplitBundles split_sample(const ScenarioBundle& full) {
  if (full.timestamps.size() != full.grid.series_len())
    throw DataError("bundle timestamps out of step with its grid");
  std::vector<std::size_t> in_sel, out_sel;
  std::map<std::pair<int, int>, bool> months;
  for (std::size_t t = 0; t < full.timestamps.size(); ++t) {
    int dom = day_of_month(full.timestamps[t]);
    months[year_month(full.timestamps[t])] = true;
    if (dom >= 8 && dom <= 14) in_sel.push_back(t);
    if (dom >= 15 && dom <= 21) out_sel.push_back(t);
  }
  if (in_sel.empty() || out_sel.empty())
    throw DataError("input does not cover days 8-21 of any month");
  SplitBundles out;
  out.in_sample = slice_bundle(full, in_sel, "in_sample");
  out.out_sample = slice_bundle(full, out_sel, "out_sample");
  out.truncated = months.size() < 12;
  return out;
}

// ------------------------------------------------------------ synthetic --
TariffSchedule default_tariff() {
  TariffSchedule t;
  t.export_charge = TodSchedule({{1, 5, 0.0},
                                 {5, 10, 0.0},
                                 {10, 14, 0.0185},
                                 {14, 20, -0.277957},
                                 {20, 1, 0.0}});
  t.import_charge = TodSchedule({{1, 5, 0.033095},
                                 {5, 10, 0.033095},
                                 {10, 14, 0.033095},
                                 {14, 20, 0.277957},
                                 {20, 1, 0.033095}});
  t.cbs_grid_charge = 0.0161;
  t.throughput_charge = 0.032;
  t.peak_charge_per_day = 0.33;
  return t;
}

CbsParams default_cbs_params() { return CbsParams{}; }

ScenarioBundle generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_users < 1 || spec.days < 1)
    throw ConfigError("synthetic scenario needs users >= 1 and days >= 1");
  ScenarioBundle b;
  b.grid.delta_h = spec.delta_h;
  b.grid.horizon_len = spec.horizon_len;
  b.grid.rebound_len = spec.rebound_len;
  const std::size_t ipd = b.grid.intervals_per_day();
  b.grid.n_total = spec.days * ipd;
  b.grid.validate();
  const std::size_t n = b.grid.series_len();
  b.tariff = default_tariff();
  b.cbs = default_cbs_params();
  b.seed = spec.seed;
  b.label = "custom";

  long t0 = parse_timestamp(spec.start_date + "T00:00:00");
  const long step = static_cast<long>(spec.delta_h * 60.0 + 0.5);
  b.timestamps.reserve(n);
  for (std::size_t t = 0; t < n; ++t)
    b.timestamps.push_back(format_timestamp(t0 + static_cast<long>(t) * step));

  // realized prices: two-level cycle plus optional realized spikes
  b.prices.rt.assign(n, spec.price_offpeak);
  for (std::size_t t = 0; t < n; ++t) {
    double hod = b.grid.hour_of_day(t);
    if (hod >= spec.peak_start_h && hod < spec.peak_end_h)
      b.prices.rt[t] = spec.price_peak;
  }
  const std::size_t total_days = (n + ipd - 1) / ipd;
  for (std::size_t d = 0; d < total_days; ++d) {
    if (spec.rt_spike_prob_per_day > 0 &&
        u01(spec.seed, 11, d) < spec.rt_spike_prob_per_day) {
      std::size_t off = static_cast<std::size_t>(u01(spec.seed, 12, d) *
                                                 static_cast<double>(ipd));
      std::size_t t = d * ipd + std::min(off, ipd - 1);
      if (t < n) b.prices.rt[t] += spec.rt_spike_add;
    }
  }

  // forecasts: rt slice + bias + noise, with optional phantom spike targets
  std::vector<double> spike_add(n, 0.0);
  for (std::size_t d = 0; d < total_days; ++d) {
    if (spec.pd_spike_prob_per_day > 0 &&
        u01(spec.seed, 21, d) < spec.pd_spike_prob_per_day) {
      std::size_t off = static_cast<std::size_t>(u01(spec.seed, 22, d) *
                                                 static_cast<double>(ipd));
      std::size_t t = d * ipd + std::min(off, ipd - 1);
      if (t < n) spike_add[t] += spec.pd_spike_add;
    }
  }
  b.prices.pd.assign(b.grid.n_total, std::vector<double>(spec.horizon_len));
  for (std::size_t j = 0; j < b.grid.n_total; ++j)
    for (std::size_t h = 0; h < spec.horizon_len; ++h) {
      std::size_t t = j + h;
      double v = b.prices.rt[t];
      if (spec.pd_bias != 0.0) v += spec.pd_bias;
      if (spec.pd_noise_sd > 0.0)
        v += spec.pd_noise_sd * normal01(spec.seed, j, h);
      v += spike_add[t];
      b.prices.pd[j][h] = std::max(v, -1.0);
    }

  // users: diurnal load, PV bells on the prosumer half
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    UserParams up;
    up.name = "user" + std::to_string(u + 1);
    double load_scale = 0.8 + 0.4 * u01(spec.seed, 31, u);
    double pv_scale = 0.8 + 0.4 * u01(spec.seed, 32, u);
    bool prosumer = u < spec.n_users / 2;
    up.expected.resize(n);
    up.pv_gross.assign(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      double hod = b.grid.hour_of_day(t);
      double shape = 0.4;
      if (hod >= 7 && hod < 9) shape += 0.5;
      if (hod >= 12 && hod < 14) shape += 0.2;
      if (hod >= 17 && hod < 21) shape += 0.8;
      up.expected[t] = load_scale * shape;
      if (prosumer && hod >= 6.5 && hod < 18.5) {
        double z = (hod - 12.5) / 2.2;
        up.pv_gross[t] = pv_scale * spec.pv_peak_kwh * std::exp(-z * z);
      }
    }
    b.users.push_back(std::move(up));
  }
  sample_elasticity(b.users, default_elasticity_bands(), b.grid, spec.seed);
  sample_behavior(b.users, 0.1, 0.5, 0.2, spec.seed);
  return b;
}

// ---------------------------------------------------------------- stats --
ErrorStats pd_error_stats(const PriceSeries& prices, const TimeGrid& grid,
                          ErrorSelector sel, const StatsConventions& conv,
                          const std::vector<std::vector<char>>* fill_mask) {
  std::vector<double> errors;
  const std::size_t H = grid.horizon_len;
  auto filled = [&](std::size_t j, std::size_t h) {
    return fill_mask && (*fill_mask)[j][h];
  };
  for (std::size_t j = 0; j < grid.n_total; ++j) {
    if (sel == ErrorSelector::H1) {
      if (!filled(j, 0)) errors.push_back(prices.pd[j][0] - prices.rt[j]);
    } else if (sel == ErrorSelector::HLast) {
      if (!filled(j, H - 1))
        errors.push_back(prices.pd[j][H - 1] - prices.rt[j + H - 1]);
    } else {
      for (std::size_t h = 0; h < H; ++h)
        if (!filled(j, h)) errors.push_back(prices.pd[j][h] - prices.rt[j + h]);
    }
  }
  if (errors.empty()) throw DataError("empty selection for error stats");
  ErrorStats st;
  st.count = errors.size();
  const double n = static_cast<double>(errors.size());
  for (double e : errors) st.mean += e;
  st.mean /= n;
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  st.median = errors.size() % 2 == 1
                  ? sorted[errors.size() / 2]
                  : 0.5 * (sorted[errors.size() / 2 - 1] + sorted[errors.size() / 2]);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double e : errors) {
    double d = e - st.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  st.sd = errors.size() > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 < 1e-300) {
    st.skew = 0.0;
    st.kurt = 0.0;  // degenerate distribution reported as all-zero
    return st;
  }
  st.skew = m3 / std::pow(m2, 1.5);
  if (conv.adjusted_skew && errors.size() > 2)
    st.skew *= std::sqrt(n * (n - 1.0)) / (n - 2.0);
  st.kurt = m4 / (m2 * m2) - (conv.excess_kurtosis ? 3.0 : 0.0);
  return st;
}

}  // namespace cbsim
