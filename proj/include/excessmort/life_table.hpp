#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "domain.hpp"
#include "errors.hpp"

namespace excessmort {

namespace detail {
inline void check_probabilities(const std::vector<double>& q, const char* what) {
  if (q.empty()) throw ValidationError(std::string(what) + " is empty");
  for (std::size_t a = 0; a < q.size(); ++a)
    if (!(q[a] >= 0.0 && q[a] <= 1.0))
      throw ValidationError(std::string(what) + " value " + std::to_string(q[a]) +
                            " outside [0,1] at age " + std::to_string(a));
}
}  // namespace detail

/// Period death probabilities q_x for ages 0..max_age; the last entry covers max_age and older.
class LifeTable {
 public:
  enum class Provenance { LoadedOfficial, Estimated };

  explicit LifeTable(std::vector<double> qx, Provenance provenance = Provenance::LoadedOfficial,
                     std::optional<std::pair<Year, Year>> window = std::nullopt)
      : qx_(std::move(qx)), provenance_(provenance), window_(window) {
    detail::check_probabilities(qx_, "qx");
  }

  Age max_age() const noexcept { return static_cast<Age>(qx_.size()) - 1; }
  double qx(Age age) const { return qx_.at(static_cast<std::size_t>(age)); }
  const std::vector<double>& values() const noexcept { return qx_; }
  Provenance provenance() const noexcept { return provenance_; }
  /// Population stock years (first, last) the table was estimated from.
  std::optional<std::pair<Year, Year>> window() const noexcept { return window_; }

 private:
  std::vector<double> qx_;
  Provenance provenance_;
  std::optional<std::pair<Year, Year>> window_;
};

/// Probability that someone aged x at the start of a calendar year dies within that year.
class CohortLifeTable {
 public:
  explicit CohortLifeTable(std::vector<double> qtilde) : qtilde_(std::move(qtilde)) {
    detail::check_probabilities(qtilde_, "qtilde");
  }

  Age max_age() const noexcept { return static_cast<Age>(qtilde_.size()) - 1; }
  double qtilde(Age age) const { return qtilde_.at(static_cast<std::size_t>(age)); }
  const std::vector<double>& values() const noexcept { return qtilde_; }

 private:
  std::vector<double> qtilde_;
};

/// Life-table death probabilities from single-age deaths and Dec 31 stocks.
///
/// Deaths are summed over calendar years start_year+1..end_year into D_x. Exposure is the
/// mean of consecutive Dec 31 stocks summed over start_year..end_year-1, plus D_x / 2:
///
///   q_x = D_x / ( sum_y (P[x,y] + P[x,y+1]) / 2 + D_x / 2 )
///
/// A probability outside [0,1] or a zero exposure is reported as a ValidationError naming
/// the age; values are never clamped.
inline LifeTable estimate_qx_multiyear(const YearlyDeaths& deaths,
                                       const PopulationSeries& population, Year start_year,
                                       Year end_year) {
  if (end_year <= start_year)
    throw ValidationError("life table window needs end_year > start_year");
  const Age max_age = population.max_age();
  if (deaths.max_age != max_age || deaths.groups != single_age_groups(max_age))
    throw ValidationError("life table estimation needs single-age deaths for ages 0.." +
                          std::to_string(max_age));

  std::vector<double> qx(static_cast<std::size_t>(max_age) + 1);
  for (Age x = 0; x <= max_age; ++x) {
    double dx = 0.0;
    for (Year y = start_year + 1; y <= end_year; ++y)
      dx += static_cast<double>(deaths.at(y, static_cast<std::size_t>(x)));
    double exposure = dx / 2.0;
    for (Year y = start_year; y < end_year; ++y)
      exposure += (population.at(y, x) + population.at(y + 1, x)) / 2.0;
    if (exposure <= 0.0)
      throw ValidationError("zero exposure at age " + std::to_string(x) +
                            " (empty population)");
    const double q = dx / exposure;
    if (q > 1.0)
      throw ValidationError("qx " + std::to_string(q) + " outside [0,1] at age " +
                            std::to_string(x) + " (deaths inconsistent with population)");
    qx[static_cast<std::size_t>(x)] = q;
  }
  return LifeTable(std::move(qx), LifeTable::Provenance::Estimated,
                   std::pair{start_year, end_year});
}

/// qtilde[x] = (q[x] + q[x+1]) / 2; the top age keeps q[max_age].
inline CohortLifeTable derive_cohort_table(const LifeTable& table) {
  const auto& q = table.values();
  std::vector<double> qt(q.size());
  for (std::size_t x = 0; x + 1 < q.size(); ++x) qt[x] = (q[x] + q[x + 1]) / 2.0;
  qt.back() = q.back();
  return CohortLifeTable(std::move(qt));
}

}  // namespace excessmort
