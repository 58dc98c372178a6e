#pragma once

#include <chrono>
#include <compare>
#include <string>

#include "errors.hpp"

namespace excessmort {

/// Monday of ISO week 1 of `iso_year`: the week holding the year's first Thursday.
constexpr std::chrono::sys_days iso_week1_monday(int iso_year) noexcept {
  using namespace std::chrono;
  return sys_days{year{iso_year} / January / Thursday[1]} - (Thursday - Monday);
}

/// 53 when the ISO year starts on a Thursday, or on a Wednesday in a leap year.
constexpr int iso_weeks_in_year(int iso_year) noexcept {
  const auto span = iso_week1_monday(iso_year + 1) - iso_week1_monday(iso_year);
  return static_cast<int>(span.count() / 7);
}

constexpr int days_in_year(int y) noexcept {
  return std::chrono::year{y}.is_leap() ? 366 : 365;
}

struct IsoWeek {
  int iso_year = 0;
  int week = 0;

  friend constexpr auto operator<=>(const IsoWeek&, const IsoWeek&) = default;

  constexpr bool valid() const noexcept {
    return week >= 1 && week <= iso_weeks_in_year(iso_year);
  }

  constexpr std::chrono::sys_days monday() const noexcept {
    return iso_week1_monday(iso_year) + std::chrono::weeks{week - 1};
  }

  std::string str() const {
    return std::to_string(iso_year) + "-W" + (week < 10 ? "0" : "") + std::to_string(week);
  }
};

inline IsoWeek make_iso_week(int iso_year, int week) {
  IsoWeek w{iso_year, week};
  if (!w.valid()) {
    throw ValidationError("invalid ISO week " + w.str() + ": " + std::to_string(iso_year) +
                          " has " + std::to_string(iso_weeks_in_year(iso_year)) + " ISO weeks");
  }
  return w;
}

/// Position of the week's Monday between the Dec 31 stock of `iso_year - 1` (0) and the
/// Dec 31 stock of `iso_year` (1). Week-1 Mondays falling in the previous December clamp to 0.
inline double year_fraction(const IsoWeek& w) {
  using namespace std::chrono;
  const sys_days jan1{year{w.iso_year} / January / 1};
  const auto day_of_year = (w.monday() - jan1).count() + 1;
  const double f = static_cast<double>(day_of_year - 1) / (days_in_year(w.iso_year) - 1);
  return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
}

}  // namespace excessmort
