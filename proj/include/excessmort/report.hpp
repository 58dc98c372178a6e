#pragma once

// CSV report writers. Full-precision output prints the shortest round-trip decimal; the
// `rounded` variants print integers for counts, whole percentages and one-decimal RMSEs.

#include <charconv>
#include <cmath>
#include <span>
#include <string>

#include "csv_io.hpp"
#include "weekly_excess.hpp"
#include "yearly_excess.hpp"

namespace excessmort {

inline std::string format_fixed(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string s(buf, p);
  if (s.starts_with('-') && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline std::string format_count(double v, bool rounded) {
  return rounded ? std::to_string(round_display(v)) : format_number(v);
}

/// Whole-percent display with an explicit sign, e.g. "+3", "-2", "0".
inline std::string format_percent(double relative) {
  if (std::isnan(relative)) return "NA";
  const long long pct = round_display(100.0 * relative);
  return pct > 0 ? "+" + std::to_string(pct) : std::to_string(pct);
}

inline std::string group_fields(const AgeGroup& g) {
  return std::to_string(g.lower) + "," + upper_field(g);
}

inline std::string expected_yearly_csv(std::span<const ExpectedDeathsYearly> series,
                                       bool rounded) {
  std::string s = "method,year,age_lower,age_upper,expected\n";
  for (const auto& e : series)
    for (std::size_t yi = 0; yi < e.years.size(); ++yi)
      for (std::size_t g = 0; g < e.groups.size(); ++g)
        s += method_name(e.method) + "," + std::to_string(e.years[yi]) + "," +
             group_fields(e.groups[g]) + "," + format_count(e.values[yi][g], rounded) + "\n";
  return s;
}

inline std::string excess_csv(const ExcessTable& t, bool rounded) {
  std::string s =
      "age_group,age_lower,age_upper,expected,observed,absolute_diff,relative_diff,"
      "relative_diff_pct\n";
  auto line = [&](const ExcessRow& r) {
    const std::string bounds = r.group ? group_fields(*r.group) : std::string(",");
    // displayed rounded diff is taken from the rounded columns so that rows stay consistent
    const double abs_diff =
        rounded ? static_cast<double>(round_display(r.observed) - round_display(r.expected))
                : r.absolute_diff;
    s += r.label + "," + bounds + "," + format_count(r.expected, rounded) + "," +
         format_count(r.observed, rounded) + "," + format_count(abs_diff, rounded) + "," +
         (rounded ? format_fixed(r.relative_diff, 4) : format_number(r.relative_diff)) + "," +
         format_percent(r.relative_diff) + "\n";
  };
  for (const auto& r : t.rows) line(r);
  line(t.total);
  return s;
}

/// One row per method, one column per group plus "overall"; a final "best" row names the
/// method with the smallest error per column.
inline std::string rmse_csv(const RmseReport& r, bool rounded) {
  auto num = [&](double v) { return rounded ? format_fixed(v, 1) : format_number(v); };
  std::string s = "method";
  for (const auto& g : r.groups) s += "," + g.label();
  s += ",overall\n";
  for (std::size_t m = 0; m < r.methods.size(); ++m) {
    s += method_name(r.methods[m]);
    for (double v : r.per_group[m]) s += "," + num(v);
    s += "," + num(r.overall[m]) + "\n";
  }
  s += "best";
  for (auto b : r.best_per_group) s += "," + method_name(r.methods[b]);
  s += "," + method_name(r.methods[r.best_overall]) + "\n";
  return s;
}

inline std::string smr_csv(const SMRSeries& series, bool rounded) {
  std::string s = "iso_year,iso_week,age_lower,age_upper,observed,expected,smr\n";
  for (const auto& [w, row] : series.rows)
    for (std::size_t g = 0; g < row.size(); ++g) {
      const auto& r = row[g];
      const std::string smr =
          !r.smr ? "NA" : (rounded ? format_fixed(*r.smr, 2) : format_number(*r.smr));
      s += std::to_string(w.iso_year) + "," + std::to_string(w.week) + "," +
           group_fields(series.groups[g]) + "," + format_count(r.observed, false) + "," +
           format_count(r.expected, rounded) + "," + smr + "\n";
    }
  return s;
}

inline std::string direct_std_csv(const DirectStdSeries& series, bool rounded) {
  std::string s =
      "iso_year,iso_week,age_lower,age_upper,target_expected,reference_expected,ratio\n";
  for (const auto& [w, row] : series.rows)
    for (std::size_t g = 0; g < row.size(); ++g) {
      const auto& r = row[g];
      const std::string ratio =
          !r.ratio ? "NA" : (rounded ? format_fixed(*r.ratio, 2) : format_number(*r.ratio));
      s += std::to_string(w.iso_year) + "," + std::to_string(w.week) + "," +
           group_fields(series.groups[g]) + "," + format_count(r.target_expected, rounded) +
           "," + format_count(r.reference_expected, rounded) + "," + ratio + "\n";
    }
  return s;
}

/// Long-format weekly rates for every week in the series.
inline std::string weekly_rates_csv(const WeeklyRateSeries& rates) {
  std::string s = "iso_year,iso_week,age_lower,age_upper,qhat\n";
  for (const auto& [w, row] : rates.rows)
    for (std::size_t g = 0; g < row.size(); ++g)
      s += std::to_string(w.iso_year) + "," + std::to_string(w.week) + "," +
           group_fields(rates.groups[g]) + "," + format_number(row[g]) + "\n";
  return s;
}

/// Reference band per target week: mean, min and max of the reference-year rates
/// (week 53 imputed where a reference year lacks it) next to the target-year rate.
inline std::string reference_band_csv(const WeeklyRateSeries& rates,
                                      std::span<const Year> reference_years, Year target_year,
                                      int n_weeks) {
  const auto mean = reference_mean_q(rates, reference_years, target_year, n_weeks);
  std::string s = "iso_year,iso_week,age_lower,age_upper,qhat,ref_mean,ref_min,ref_max\n";
  for (const auto& [w, row] : mean.rows)
    for (std::size_t g = 0; g < row.size(); ++g) {
      double lo = 1.0, hi = 0.0;
      for (Year y : reference_years) {
        const double q = reference_rate(rates, y, w.week, g);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
      const std::string target = rates.has(w) ? format_number(rates.at(w, g)) : "NA";
      s += std::to_string(w.iso_year) + "," + std::to_string(w.week) + "," +
           group_fields(rates.groups[g]) + "," + target + "," + format_number(row[g]) + "," +
           format_number(lo) + "," + format_number(hi) + "\n";
    }
  return s;
}

}  // namespace excessmort
