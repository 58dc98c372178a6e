#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "domain.hpp"
#include "errors.hpp"
#include "life_table.hpp"

namespace excessmort {

/// Expected-deaths estimators for a calendar year.
///   M1: period q_x applied to start-of-year stocks.
///   M2: cohort qtilde_x applied to start-of-year stocks.
///   M3: M2 with half of each boundary age's deaths moved to the next age group.
enum class Method { M1 = 1, M2 = 2, M3 = 3 };

inline std::string method_name(Method m) { return "M" + std::to_string(static_cast<int>(m)); }

inline Method parse_method(std::string_view s) {
  if (s == "1" || s == "M1" || s == "m1") return Method::M1;
  if (s == "2" || s == "M2" || s == "m2") return Method::M2;
  if (s == "3" || s == "M3" || s == "m3") return Method::M3;
  throw ValidationError("unknown method '" + std::string(s) + "' (expected 1, 2 or 3)");
}

struct ExpectedDeathsYearly {
  Method method = Method::M3;
  Age max_age = kDefaultMaxAge;
  std::vector<AgeGroup> groups;
  std::vector<Year> years;
  std::vector<std::vector<double>> values;  // [year index][group index]

  const std::vector<double>& row(Year y) const {
    auto it = std::find(years.begin(), years.end(), y);
    if (it == years.end())
      throw ValidationError(method_name(method) + " has no expectation for year " +
                            std::to_string(y));
    return values[static_cast<std::size_t>(it - years.begin())];
  }
  double at(Year y, std::size_t group) const { return row(y).at(group); }
  double total(Year y) const {
    double s = 0.0;
    for (double v : row(y)) s += v;
    return s;
  }
};

namespace detail {

inline void check_yearly_inputs(Age table_max_age, const PopulationSeries& population,
                                std::span<const AgeGroup> groups, std::span<const Year> years) {
  if (table_max_age != population.max_age())
    throw ValidationError("life table max_age " + std::to_string(table_max_age) +
                          " differs from population max_age " +
                          std::to_string(population.max_age()));
  validate_partition(groups, population.max_age());
  for (Year y : years)
    if (!population.has_year(y - 1))
      throw ValidationError("missing population cell (" + std::to_string(y - 1) +
                            ", 0): no start-of-year stock for " + std::to_string(y));
}

template <class GroupFn>
ExpectedDeathsYearly expected_grid(Method m, const PopulationSeries& population,
                                   std::span<const AgeGroup> groups, std::span<const Year> years,
                                   GroupFn&& per_group) {
  ExpectedDeathsYearly out;
  out.method = m;
  out.max_age = population.max_age();
  out.groups.assign(groups.begin(), groups.end());
  out.years.assign(years.begin(), years.end());
  for (Year y : years) {
    std::vector<double> row;
    row.reserve(groups.size());
    for (const auto& g : groups) row.push_back(per_group(y, g));
    out.values.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

/// e[A,y] = sum over x in A of q_x * P[x,y].
inline ExpectedDeathsYearly expected_method1(const LifeTable& table,
                                             const PopulationSeries& population,
                                             std::span<const AgeGroup> groups,
                                             std::span<const Year> years) {
  detail::check_yearly_inputs(table.max_age(), population, groups, years);
  const Age max_age = population.max_age();
  return detail::expected_grid(Method::M1, population, groups, years,
                               [&](Year y, const AgeGroup& g) {
                                 double e = 0.0;
                                 for (Age x = g.lower; x <= g.last(max_age); ++x)
                                   e += table.qx(x) * population.at_start_of(y, x);
                                 return e;
                               });
}

/// e[A,y] = sum over x in A of qtilde_x * P[x,y].
inline ExpectedDeathsYearly expected_method2(const CohortLifeTable& cohort,
                                             const PopulationSeries& population,
                                             std::span<const AgeGroup> groups,
                                             std::span<const Year> years) {
  detail::check_yearly_inputs(cohort.max_age(), population, groups, years);
  const Age max_age = population.max_age();
  return detail::expected_grid(Method::M2, population, groups, years,
                               [&](Year y, const AgeGroup& g) {
                                 double e = 0.0;
                                 for (Age x = g.lower; x <= g.last(max_age); ++x)
                                   e += cohort.qtilde(x) * population.at_start_of(y, x);
                                 return e;
                               });
}

/// For A = [lo, hi]:
///   e[A,y] = 0.5 qt[lo-1] P[lo-1] + sum_{x=lo}^{hi-1} qt[x] P[x] + 0.5 qt[hi] P[hi]
/// The youngest group reuses age 0 for lo-1. A group ending at max_age (including an
/// open-ended one) adds a second 0.5 qt[hi] P[hi].
inline ExpectedDeathsYearly expected_method3(const CohortLifeTable& cohort,
                                             const PopulationSeries& population,
                                             std::span<const AgeGroup> groups,
                                             std::span<const Year> years) {
  detail::check_yearly_inputs(cohort.max_age(), population, groups, years);
  const Age max_age = population.max_age();
  return detail::expected_grid(
      Method::M3, population, groups, years, [&](Year y, const AgeGroup& g) {
        auto term = [&](Age x) { return cohort.qtilde(x) * population.at_start_of(y, x); };
        const Age lo = g.lower;
        const Age hi = g.last(max_age);
        double e = 0.5 * term(lo == 0 ? 0 : lo - 1);
        for (Age x = lo; x < hi; ++x) e += term(x);
        e += 0.5 * term(hi);
        if (hi == max_age) e += 0.5 * term(hi);
        return e;
      });
}

inline ExpectedDeathsYearly expected_yearly(Method m, const LifeTable& table,
                                            const PopulationSeries& population,
                                            std::span<const AgeGroup> groups,
                                            std::span<const Year> years) {
  switch (m) {
    case Method::M1:
      return expected_method1(table, population, groups, years);
    case Method::M2:
      return expected_method2(derive_cohort_table(table), population, groups, years);
    case Method::M3:
      return expected_method3(derive_cohort_table(table), population, groups, years);
  }
  throw ValidationError("unknown method");
}

struct ExcessRow {
  std::string label;  // group label, or "total"
  std::optional<AgeGroup> group;
  double expected = 0.0;
  double observed = 0.0;
  double absolute_diff = 0.0;
  double relative_diff = 0.0;  // NaN when expected is 0
};

/// Per-group expected vs observed plus a total row built from the column sums.
struct ExcessTable {
  std::vector<ExcessRow> rows;
  ExcessRow total;
};

/// Rounds half away from zero, the display convention for counts and percentages.
inline long long round_display(double v) { return std::llround(v); }

inline ExcessRow make_excess_row(std::string label, std::optional<AgeGroup> group,
                                 double expected, double observed) {
  ExcessRow r;
  r.label = std::move(label);
  r.group = group;
  r.expected = expected;
  r.observed = observed;
  r.absolute_diff = observed - expected;
  r.relative_diff = expected > 0.0 ? r.absolute_diff / expected
                                   : std::numeric_limits<double>::quiet_NaN();
  return r;
}

inline ExcessTable make_excess_table(std::span<const AgeGroup> groups,
                                     std::span<const double> expected,
                                     std::span<const double> observed) {
  ExcessTable t;
  double exp_sum = 0.0, obs_sum = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    t.rows.push_back(make_excess_row(groups[i].label(), groups[i], expected[i], observed[i]));
    exp_sum += expected[i];
    obs_sum += observed[i];
  }
  t.total = make_excess_row("total", std::nullopt, exp_sum, obs_sum);
  return t;
}

/// Expected vs observed deaths for one year; both inputs must share the group partition.
inline ExcessTable excess_table(const ExpectedDeathsYearly& expected, const YearlyDeaths& observed,
                                Year year) {
  std::vector<AgeGroup> a = expected.groups, b = observed.groups;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw ValidationError("expected and observed deaths use different age groups");
  std::vector<double> obs;
  for (const auto& g : expected.groups)
    obs.push_back(static_cast<double>(observed.at(year, observed.group_index(g))));
  const auto& exp = expected.row(year);
  return make_excess_table(expected.groups, exp, obs);
}

struct RmseReport {
  std::vector<Method> methods;
  std::vector<AgeGroup> groups;
  std::vector<Year> years;
  std::vector<std::vector<double>> per_group;  // [method index][group index]
  std::vector<double> overall;                 // [method index], on yearly totals
  std::vector<std::size_t> best_per_group;     // method index with the smallest RMSE
  std::size_t best_overall = 0;
};

/// Root mean squared error of each method per age group over `include_years`. The overall
/// figure is the RMSE of the all-groups yearly totals, not an aggregate of group RMSEs.
inline RmseReport rmse_compare(std::span<const ExpectedDeathsYearly> expected,
                               const YearlyDeaths& observed, std::span<const Year> include_years) {
  if (include_years.empty()) throw ValidationError("RMSE needs at least one year");
  if (expected.empty()) throw ValidationError("RMSE needs at least one method");
  RmseReport r;
  r.groups = expected.front().groups;
  r.years.assign(include_years.begin(), include_years.end());
  const double n = static_cast<double>(include_years.size());
  for (const auto& e : expected) {
    if (e.groups != r.groups)
      throw ValidationError("RMSE inputs use different age group orderings");
    r.methods.push_back(e.method);
    std::vector<double> sq(r.groups.size(), 0.0);
    double sq_total = 0.0;
    for (Year y : include_years) {
      double obs_total = 0.0, exp_total = 0.0;
      for (std::size_t g = 0; g < r.groups.size(); ++g) {
        const double obs =
            static_cast<double>(observed.at(y, observed.group_index(r.groups[g])));
        const double diff = obs - e.at(y, g);
        sq[g] += diff * diff;
        obs_total += obs;
        exp_total += e.at(y, g);
      }
      sq_total += (obs_total - exp_total) * (obs_total - exp_total);
    }
    for (double& s : sq) s = std::sqrt(s / n);
    r.per_group.push_back(std::move(sq));
    r.overall.push_back(std::sqrt(sq_total / n));
  }
  for (std::size_t g = 0; g < r.groups.size(); ++g) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < r.methods.size(); ++m)
      if (r.per_group[m][g] < r.per_group[best][g]) best = m;
    r.best_per_group.push_back(best);
  }
  for (std::size_t m = 1; m < r.methods.size(); ++m)
    if (r.overall[m] < r.overall[r.best_overall]) r.best_overall = m;
  return r;
}

}  // namespace excessmort
