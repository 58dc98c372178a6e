#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "domain.hpp"
#include "errors.hpp"
#include "iso_week.hpp"
#include "yearly_excess.hpp"

namespace excessmort {

/// Group populations P[t,A] per ISO week.
using WeeklyPopulation = GroupedSeries<IsoWeek, double>;
/// Weekly death probabilities q[t,A], each in [0,1].
using WeeklyRateSeries = GroupedSeries<IsoWeek, double>;
/// Expected deaths e[t,A].
using WeeklyExpected = GroupedSeries<IsoWeek, double>;

struct SmrRow {
  double observed = 0.0;
  double expected = 0.0;
  std::optional<double> smr;  // empty when expected is 0

  double excess() const noexcept { return observed - expected; }
  friend bool operator==(const SmrRow&, const SmrRow&) = default;
};
using SMRSeries = GroupedSeries<IsoWeek, SmrRow>;

struct DirectStdRow {
  double target_expected = 0.0;     // target-year rate applied to the standard population
  double reference_expected = 0.0;  // mean over reference years of the same
  std::optional<double> ratio;      // empty when reference_expected is 0

  friend bool operator==(const DirectStdRow&, const DirectStdRow&) = default;
};
using DirectStdSeries = GroupedSeries<IsoWeek, DirectStdRow>;

namespace detail {

template <class A, class B>
std::vector<std::size_t> match_groups(const A& from, const B& into, const char* what) {
  std::vector<AgeGroup> x = from.groups, y = into.groups;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  if (x != y) throw ValidationError(std::string(what) + ": age groups do not match");
  std::vector<std::size_t> idx;
  for (const auto& g : from.groups) idx.push_back(into.group_index(g));
  return idx;
}

inline void check_target_weeks(Year target_year, int n_weeks) {
  const int available = iso_weeks_in_year(target_year);
  if (n_weeks < 1 || n_weeks > available)
    throw ValidationError("requested " + std::to_string(n_weeks) + " weeks but " +
                          std::to_string(target_year) + " has " + std::to_string(available) +
                          " ISO weeks");
}

}  // namespace detail

/// Straight-line interpolation between two stocks at fraction f of the way.
inline double interpolate_stock(double earlier, double later, double f) noexcept {
  return earlier + f * (later - earlier);
}

/// P[t,A] = sum over x in A of P[x,y-1] + f_t (P[x,y] - P[x,y-1]), y the ISO year of t and
/// f_t the position of the week's Monday within y (see year_fraction).
inline WeeklyPopulation interpolate_population(const PopulationSeries& population,
                                               std::span<const AgeGroup> groups,
                                               std::span<const IsoWeek> weeks) {
  validate_partition(groups, population.max_age());
  WeeklyPopulation out;
  out.max_age = population.max_age();
  out.groups.assign(groups.begin(), groups.end());
  for (const auto& w : weeks) {
    if (!w.valid()) throw ValidationError("invalid ISO week " + w.str());
    const double f = year_fraction(w);
    std::vector<double> row;
    for (const auto& g : groups) {
      double p = 0.0;
      for (Age x = g.lower; x <= g.last(out.max_age); ++x)
        p += interpolate_stock(population.at(w.iso_year - 1, x), population.at(w.iso_year, x), f);
      row.push_back(p);
    }
    out.rows.emplace(w, std::move(row));
  }
  return out;
}

/// q[t,A] = D[t,A] / P[t,A] for every week of `deaths`.
inline WeeklyRateSeries weekly_qhat(const WeeklyDeaths& deaths,
                                    const WeeklyPopulation& population) {
  const auto idx = detail::match_groups(deaths, population, "weekly rates");
  WeeklyRateSeries out;
  out.max_age = deaths.max_age;
  out.groups = deaths.groups;
  for (const auto& [w, counts] : deaths.rows) {
    if (!population.has(w)) throw ValidationError("no population for week " + w.str());
    std::vector<double> row;
    for (std::size_t g = 0; g < counts.size(); ++g) {
      const double d = static_cast<double>(counts[g]);
      const double p = population.at(w, idx[g]);
      if (p <= 0.0 && d > 0.0)
        throw ValidationError("zero population with " + std::to_string(counts[g]) +
                              " deaths in " + w.str() + " age " + deaths.groups[g].label());
      const double q = d > 0.0 ? d / p : 0.0;
      if (q > 1.0)
        throw ValidationError("deaths exceed population in " + w.str() + " age " +
                              deaths.groups[g].label());
      row.push_back(q);
    }
    out.rows.emplace(w, std::move(row));
  }
  return out;
}

/// Interpolates the population for every week in `deaths` and divides.
inline WeeklyRateSeries weekly_rates(const WeeklyDeaths& deaths,
                                     const PopulationSeries& population) {
  std::vector<IsoWeek> weeks;
  for (const auto& [w, _] : deaths.rows) weeks.push_back(w);
  return weekly_qhat(deaths, interpolate_population(population, deaths.groups, weeks));
}

/// Rate of week `week` in reference year `year`. Years without a week 53 borrow the mean of
/// their week 52 and week 1 of the following year.
inline double reference_rate(const WeeklyRateSeries& rates, Year year, int week,
                             std::size_t group) {
  if (week == 53 && iso_weeks_in_year(year) == 52)
    return 0.5 * (rates.at({year, 52}, group) + rates.at({year + 1, 1}, group));
  return rates.at({year, week}, group);
}

/// Mean of each week's rate over `reference_years`, keyed by the weeks 1..n_weeks of
/// `target_year`.
inline WeeklyRateSeries reference_mean_q(const WeeklyRateSeries& rates,
                                         std::span<const Year> reference_years,
                                         Year target_year, int n_weeks) {
  if (reference_years.empty()) throw ValidationError("no reference years");
  detail::check_target_weeks(target_year, n_weeks);
  WeeklyRateSeries out;
  out.max_age = rates.max_age;
  out.groups = rates.groups;
  const double n = static_cast<double>(reference_years.size());
  for (int t = 1; t <= n_weeks; ++t) {
    std::vector<double> row(rates.groups.size(), 0.0);
    for (std::size_t g = 0; g < row.size(); ++g) {
      for (Year y : reference_years) row[g] += reference_rate(rates, y, t, g);
      row[g] /= n;
    }
    out.rows.emplace(IsoWeek{target_year, t}, std::move(row));
  }
  return out;
}

inline WeeklyRateSeries reference_mean_q(const WeeklyRateSeries& rates,
                                         std::span<const Year> reference_years,
                                         Year target_year) {
  return reference_mean_q(rates, reference_years, target_year, iso_weeks_in_year(target_year));
}

/// Indirect standardization: e[t,A] = mean reference rate * current population.
inline WeeklyExpected indirect_expected(const WeeklyRateSeries& mean_rates,
                                        const WeeklyPopulation& target_population) {
  const auto idx = detail::match_groups(mean_rates, target_population, "indirect expectation");
  WeeklyExpected out;
  out.max_age = mean_rates.max_age;
  out.groups = mean_rates.groups;
  for (const auto& [w, q] : mean_rates.rows) {
    std::vector<double> row;
    for (std::size_t g = 0; g < q.size(); ++g)
      row.push_back(q[g] * target_population.at(w, idx[g]));
    out.rows.emplace(w, std::move(row));
  }
  return out;
}

/// Observed over expected for every week of `expected`.
inline SMRSeries smr_series(const WeeklyDeaths& observed, const WeeklyExpected& expected) {
  const auto idx = detail::match_groups(expected, observed, "SMR");
  SMRSeries out;
  out.max_age = expected.max_age;
  out.groups = expected.groups;
  for (const auto& [w, e] : expected.rows) {
    if (!observed.has(w)) throw ValidationError("no observed deaths for week " + w.str());
    std::vector<SmrRow> row;
    for (std::size_t g = 0; g < e.size(); ++g) {
      SmrRow r;
      r.observed = static_cast<double>(observed.at(w, idx[g]));
      r.expected = e[g];
      if (r.expected > 0.0) r.smr = r.observed / r.expected;
      row.push_back(r);
    }
    out.rows.emplace(w, std::move(row));
  }
  return out;
}

/// Direct standardization: each year's weekly rates applied to one standard population.
/// The reference expectation is the mean of the per-year expected counts.
inline DirectStdSeries direct_standardized(const WeeklyRateSeries& rates,
                                           const StandardPopulation& standard,
                                           std::span<const Year> reference_years,
                                           Year target_year, int n_weeks) {
  if (reference_years.empty()) throw ValidationError("no reference years");
  detail::check_target_weeks(target_year, n_weeks);
  const auto idx = detail::match_groups(rates, standard, "direct standardization");
  DirectStdSeries out;
  out.max_age = rates.max_age;
  out.groups = rates.groups;
  for (int t = 1; t <= n_weeks; ++t) {
    std::vector<DirectStdRow> row;
    for (std::size_t g = 0; g < rates.groups.size(); ++g) {
      const double ps = standard.counts[idx[g]];
      DirectStdRow r;
      r.target_expected = rates.at({target_year, t}, g) * ps;
      for (Year y : reference_years) r.reference_expected += reference_rate(rates, y, t, g) * ps;
      r.reference_expected /= static_cast<double>(reference_years.size());
      if (r.reference_expected > 0.0) r.ratio = r.target_expected / r.reference_expected;
      row.push_back(r);
    }
    out.rows.emplace(IsoWeek{target_year, t}, std::move(row));
  }
  return out;
}

/// Sums observed and expected deaths over all weeks per group into a yearly excess table.
inline ExcessTable yearly_aggregate_weekly(const SMRSeries& series) {
  std::vector<double> exp(series.groups.size(), 0.0), obs(series.groups.size(), 0.0);
  for (const auto& [w, row] : series.rows)
    for (std::size_t g = 0; g < row.size(); ++g) {
      exp[g] += row[g].expected;
      obs[g] += row[g].observed;
    }
  return make_excess_table(series.groups, exp, obs);
}

}  // namespace excessmort
