#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "iso_week.hpp"

namespace excessmort {

/// Completed years of age; the top age stands for "max_age and older".
using Age = int;
/// Calendar year. Population stocks labelled `y` are the Dec 31 stock of `y`.
using Year = int;

inline constexpr Age kDefaultMaxAge = 100;

/// Closed age interval [lower, upper]; no upper bound means [lower, inf).
struct AgeGroup {
  Age lower = 0;
  std::optional<Age> upper;

  friend bool operator==(const AgeGroup&, const AgeGroup&) = default;
  friend std::strong_ordering operator<=>(const AgeGroup& a, const AgeGroup& b) {
    if (auto c = a.lower <=> b.lower; c != 0) return c;
    // open-ended sorts after any bounded group with the same lower bound
    if (a.upper.has_value() != b.upper.has_value())
      return a.upper.has_value() ? std::strong_ordering::less : std::strong_ordering::greater;
    return a.upper.value_or(0) <=> b.upper.value_or(0);
  }

  bool open() const noexcept { return !upper.has_value(); }
  Age last(Age max_age) const noexcept { return upper.value_or(max_age); }
  bool contains(Age age, Age max_age) const noexcept {
    return age >= lower && age <= last(max_age);
  }

  /// "30-39" for bounded groups, "90+" for open-ended ones.
  std::string label() const {
    return upper ? std::to_string(lower) + "-" + std::to_string(*upper)
                 : std::to_string(lower) + "+";
  }
};

inline AgeGroup closed_group(Age lower, Age upper) { return {lower, upper}; }
inline AgeGroup open_group(Age lower) { return {lower, std::nullopt}; }

/// Throws ValidationError unless `groups` (in any order) tile [0, max_age] exactly.
inline void validate_partition(std::span<const AgeGroup> groups, Age max_age) {
  if (groups.empty()) throw ValidationError("age group partition is empty");
  std::vector<AgeGroup> sorted(groups.begin(), groups.end());
  std::sort(sorted.begin(), sorted.end());

  Age next = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& g = sorted[i];
    if (g.lower < 0) throw ValidationError("negative age bound in group " + g.label());
    if (g.upper && *g.upper < g.lower)
      throw ValidationError("age group " + g.label() + " has upper bound below lower bound");
    if (g.lower > next) throw ValidationError("age partition gap at age " + std::to_string(next));
    if (g.lower < next)
      throw ValidationError("age partition overlap at age " + std::to_string(g.lower));
    if (g.lower > max_age || (g.upper && *g.upper > max_age))
      throw ValidationError("age group " + g.label() + " exceeds max_age " +
                            std::to_string(max_age));
    if (g.open()) {
      if (i + 1 != sorted.size())
        throw ValidationError("age partition overlap at age " +
                              std::to_string(sorted[i + 1].lower));
      return;
    }
    next = *g.upper + 1;
  }
  if (next <= max_age) throw ValidationError("age partition gap at age " + std::to_string(next));
}

/// Parses "0-29,30-39,90+" into groups. Does not validate the partition.
inline std::vector<AgeGroup> parse_groups(std::string_view text) {
  auto to_age = [&](std::string_view s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ValidationError("malformed age group list '" + std::string(text) + "'");
    return std::stoi(std::string(s));
  };
  std::vector<AgeGroup> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(pos, end - pos);
    if (!item.empty() && item.back() == '+') {
      out.push_back(open_group(to_age(item.substr(0, item.size() - 1))));
    } else {
      auto dash = item.find('-');
      if (dash == std::string_view::npos) {
        auto a = to_age(item);
        out.push_back(closed_group(a, a));
      } else {
        out.push_back(closed_group(to_age(item.substr(0, dash)), to_age(item.substr(dash + 1))));
      }
    }
    pos = end + 1;
  }
  return out;
}

/// One single-age group per age, the last one open-ended.
inline std::vector<AgeGroup> single_age_groups(Age max_age) {
  std::vector<AgeGroup> out;
  for (Age a = 0; a < max_age; ++a) out.push_back(closed_group(a, a));
  out.push_back(open_group(max_age));
  return out;
}

/// Dec 31 population stocks by single year of age for a contiguous year range.
class PopulationSeries {
 public:
  PopulationSeries(Year first_year, Year last_year, Age max_age, std::vector<double> counts)
      : first_year_(first_year), last_year_(last_year), max_age_(max_age),
        counts_(std::move(counts)) {
    if (last_year < first_year) throw ValidationError("population year range is empty");
    if (max_age < 0) throw ValidationError("max_age must be non-negative");
    if (counts_.size() != static_cast<std::size_t>(last_year - first_year + 1) *
                              static_cast<std::size_t>(max_age + 1))
      throw ValidationError("population grid size does not match year range and max_age");
    for (double c : counts_)
      if (!(c >= 0.0)) throw ValidationError("negative population count");
  }

  /// Builds a series whose stock at (year, age) is `fn(year, age)`.
  template <class Fn>
  static PopulationSeries generate(Year first_year, Year last_year, Age max_age, Fn&& fn) {
    std::vector<double> counts;
    for (Year y = first_year; y <= last_year; ++y)
      for (Age a = 0; a <= max_age; ++a) counts.push_back(fn(y, a));
    return PopulationSeries(first_year, last_year, max_age, std::move(counts));
  }

  Year first_year() const noexcept { return first_year_; }
  Year last_year() const noexcept { return last_year_; }
  Age max_age() const noexcept { return max_age_; }
  bool has_year(Year y) const noexcept { return y >= first_year_ && y <= last_year_; }

  /// Dec 31 stock of `year` at `age`.
  double at(Year year, Age age) const {
    if (!has_year(year) || age < 0 || age > max_age_)
      throw ValidationError("missing population cell (" + std::to_string(year) + ", " +
                            std::to_string(age) + ")");
    return counts_[index(year, age)];
  }

  /// Stock at the beginning of `year`, i.e. the Dec 31 stock of `year - 1`.
  double at_start_of(Year year, Age age) const { return at(year - 1, age); }

  double group_total(Year year, const AgeGroup& g) const {
    double s = 0.0;
    for (Age a = g.lower; a <= g.last(max_age_); ++a) s += at(year, a);
    return s;
  }

  friend bool operator==(const PopulationSeries&, const PopulationSeries&) = default;

 private:
  std::size_t index(Year y, Age a) const noexcept {
    return static_cast<std::size_t>(y - first_year_) * static_cast<std::size_t>(max_age_ + 1) +
           static_cast<std::size_t>(a);
  }

  Year first_year_;
  Year last_year_;
  Age max_age_;
  std::vector<double> counts_;
};

/// Values keyed by period and age group: rows[key][i] belongs to groups[i].
template <class Key, class Value>
struct GroupedSeries {
  Age max_age = kDefaultMaxAge;
  std::vector<AgeGroup> groups;
  std::map<Key, std::vector<Value>> rows;

  friend bool operator==(const GroupedSeries&, const GroupedSeries&) = default;

  const std::vector<Value>& row(const Key& key) const {
    auto it = rows.find(key);
    if (it == rows.end()) throw ValidationError("missing period " + key_str(key));
    return it->second;
  }
  const Value& at(const Key& key, std::size_t group) const { return row(key).at(group); }
  bool has(const Key& key) const { return rows.contains(key); }

  std::size_t group_index(const AgeGroup& g) const {
    auto it = std::find(groups.begin(), groups.end(), g);
    if (it == groups.end()) throw ValidationError("unknown age group " + g.label());
    return static_cast<std::size_t>(it - groups.begin());
  }

  static std::string key_str(const Key& key) {
    if constexpr (std::is_same_v<Key, IsoWeek>) return key.str();
    else return std::to_string(key);
  }
};

enum class DeathResolution { YearlyByAge, YearlyByGroup, WeeklyByGroup };

/// Yearly death counts. By-age series use single_age_groups(max_age).
struct YearlyDeaths : GroupedSeries<Year, std::int64_t> {
  DeathResolution resolution = DeathResolution::YearlyByGroup;
  friend bool operator==(const YearlyDeaths&, const YearlyDeaths&) = default;
};

struct WeeklyDeaths : GroupedSeries<IsoWeek, std::int64_t> {
  friend bool operator==(const WeeklyDeaths&, const WeeklyDeaths&) = default;
};

using DeathSeries = std::variant<YearlyDeaths, WeeklyDeaths>;

/// Sums a yearly series onto a coarser partition. Every target group must be a union of
/// source groups.
inline YearlyDeaths regroup(const YearlyDeaths& src, std::span<const AgeGroup> target) {
  validate_partition(target, src.max_age);
  YearlyDeaths out;
  out.max_age = src.max_age;
  out.resolution = DeathResolution::YearlyByGroup;
  out.groups.assign(target.begin(), target.end());
  std::vector<std::size_t> dest(src.groups.size());
  for (std::size_t i = 0; i < src.groups.size(); ++i) {
    const auto& g = src.groups[i];
    auto it = std::find_if(target.begin(), target.end(), [&](const AgeGroup& t) {
      return t.contains(g.lower, src.max_age) && t.contains(g.last(src.max_age), src.max_age);
    });
    if (it == target.end())
      throw ValidationError("age group " + g.label() + " straddles the requested partition");
    dest[i] = static_cast<std::size_t>(it - target.begin());
  }
  for (const auto& [year, values] : src.rows) {
    std::vector<std::int64_t> sums(target.size(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) sums[dest[i]] += values[i];
    out.rows.emplace(year, std::move(sums));
  }
  return out;
}

/// Standard population by age group (direct standardization).
struct StandardPopulation {
  Age max_age = kDefaultMaxAge;
  std::vector<AgeGroup> groups;
  std::vector<double> counts;

  friend bool operator==(const StandardPopulation&, const StandardPopulation&) = default;

  std::size_t group_index(const AgeGroup& g) const {
    auto it = std::find(groups.begin(), groups.end(), g);
    if (it == groups.end()) throw ValidationError("unknown age group " + g.label());
    return static_cast<std::size_t>(it - groups.begin());
  }
};

}  // namespace excessmort
