#pragma once

// CSV ingestion and serialization for the canonical input schemas:
//   population.csv            year,age,count
//   deaths_yearly_age.csv     year,age,count
//   deaths_yearly_group.csv   year,age_lower,age_upper,count
//   deaths_weekly.csv         iso_year,iso_week,age_lower,age_upper,count
//   lifetable.csv             age,qx
//   standard_population.csv   age_lower,age_upper,count
// age_upper is inclusive; an empty age_upper marks the open-ended top group.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "domain.hpp"
#include "errors.hpp"
#include "iso_week.hpp"
#include "life_table.hpp"

namespace excessmort {

namespace detail {

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct CsvFile {
  std::string path;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  std::string where(const CsvRow& r) const { return path + ":" + std::to_string(r.line); }
};

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto end = line.find(',', pos);
    out.push_back(trim(line.substr(pos, end == std::string_view::npos ? end : end - pos)));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

inline CsvFile parse_csv(std::string_view text, std::string path) {
  CsvFile f;
  f.path = std::move(path);
  std::size_t pos = 0, line_no = 0;
  if (text.starts_with("\xEF\xBB\xBF")) pos = 3;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    if (f.header.empty()) {
      f.header = split(line);
    } else {
      f.rows.push_back({line_no, split(line)});
    }
  }
  return f;
}

inline CsvFile read_csv(const std::string& path, std::initializer_list<std::string_view> columns) {
  auto f = parse_csv(read_text(path), path);
  std::vector<std::string> want(columns.begin(), columns.end());
  if (f.header != want) {
    std::string expected;
    for (auto c : columns) expected += (expected.empty() ? "" : ",") + std::string(c);
    throw ValidationError(path + ": schema violation, expected header '" + expected + "'");
  }
  for (const auto& r : f.rows)
    if (r.fields.size() != want.size())
      throw ValidationError(f.where(r) + ": schema violation, expected " +
                            std::to_string(want.size()) + " columns, got " +
                            std::to_string(r.fields.size()));
  return f;
}

inline std::int64_t parse_int(const CsvFile& f, const CsvRow& r, std::size_t col) {
  const auto& s = r.fields[col];
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw ValidationError(f.where(r) + ": " + f.header[col] + " '" + s + "' is not an integer");
  return v;
}

inline double parse_real(const CsvFile& f, const CsvRow& r, std::size_t col) {
  const auto& s = r.fields[col];
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty() || !std::isfinite(v))
    throw ValidationError(f.where(r) + ": " + f.header[col] + " '" + s + "' is not a number");
  return v;
}

inline double parse_count(const CsvFile& f, const CsvRow& r, std::size_t col) {
  double v = parse_real(f, r, col);
  if (v < 0.0) throw ValidationError(f.where(r) + ": negative count " + r.fields[col]);
  return v;
}

inline std::int64_t parse_death_count(const CsvFile& f, const CsvRow& r, std::size_t col) {
  auto v = parse_int(f, r, col);
  if (v < 0) throw ValidationError(f.where(r) + ": negative count " + r.fields[col]);
  return v;
}

inline Age parse_age(const CsvFile& f, const CsvRow& r, std::size_t col, Age max_age) {
  auto v = parse_int(f, r, col);
  if (v < 0 || v > max_age)
    throw ValidationError(f.where(r) + ": age " + r.fields[col] + " outside [0, " +
                          std::to_string(max_age) + "]");
  return static_cast<Age>(v);
}

inline AgeGroup parse_group(const CsvFile& f, const CsvRow& r, std::size_t col, Age max_age) {
  AgeGroup g;
  g.lower = parse_age(f, r, col, max_age);
  if (!r.fields[col + 1].empty()) g.upper = parse_age(f, r, col + 1, max_age);
  if (g.upper && *g.upper < g.lower)
    throw ValidationError(f.where(r) + ": age_upper below age_lower");
  return g;
}

inline void check_partition(const CsvFile& f, std::span<const AgeGroup> groups, Age max_age) {
  try {
    validate_partition(groups, max_age);
  } catch (const ValidationError& e) {
    throw ValidationError(f.path + ": " + e.what());
  }
}

/// Collects (key, group) -> count cells and checks that every key has every group exactly once.
template <class Series, class Key>
void fill_grouped(const CsvFile& f, Series& out,
                  const std::vector<std::tuple<const CsvRow*, Key, AgeGroup, std::int64_t>>& cells) {
  std::set<AgeGroup> group_set;
  for (const auto& c : cells) group_set.insert(std::get<2>(c));
  out.groups.assign(group_set.begin(), group_set.end());
  check_partition(f, out.groups, out.max_age);

  std::map<Key, std::vector<std::int64_t>> rows;
  std::map<Key, std::vector<bool>> seen;
  for (const auto& [row, key, group, count] : cells) {
    auto& vals = rows[key];
    auto& mark = seen[key];
    if (vals.empty()) {
      vals.assign(out.groups.size(), 0);
      mark.assign(out.groups.size(), false);
    }
    auto gi = out.group_index(group);
    if (mark[gi])
      throw ValidationError(f.where(*row) + ": duplicate cell (" + Series::key_str(key) + ", " +
                            group.label() + ")");
    mark[gi] = true;
    vals[gi] = count;
  }
  for (const auto& [key, mark] : seen)
    for (std::size_t i = 0; i < mark.size(); ++i)
      if (!mark[i])
        throw ValidationError(f.path + ": coverage gap, missing cell (" + Series::key_str(key) +
                              ", " + out.groups[i].label() + ")");
  out.rows = std::move(rows);
}

}  // namespace detail

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline PopulationSeries load_population(const std::string& path, Age max_age = kDefaultMaxAge) {
  auto f = detail::read_csv(path, {"year", "age", "count"});
  if (f.rows.empty()) throw ValidationError(path + ": no population rows");
  std::map<std::pair<Year, Age>, double> cells;
  Year lo = 0, hi = 0;
  bool first = true;
  for (const auto& r : f.rows) {
    auto year = static_cast<Year>(detail::parse_int(f, r, 0));
    auto age = detail::parse_age(f, r, 1, max_age);
    auto count = detail::parse_count(f, r, 2);
    if (!cells.emplace(std::pair{year, age}, count).second)
      throw ValidationError(f.where(r) + ": duplicate cell (" + std::to_string(year) + ", " +
                            std::to_string(age) + ")");
    lo = first ? year : std::min(lo, year);
    hi = first ? year : std::max(hi, year);
    first = false;
  }
  return PopulationSeries::generate(lo, hi, max_age, [&](Year y, Age a) {
    auto it = cells.find({y, a});
    if (it == cells.end())
      throw ValidationError(path + ": coverage gap, missing cell (" + std::to_string(y) + ", " +
                            std::to_string(a) + ")");
    return it->second;
  });
}

inline YearlyDeaths load_yearly_deaths(const std::string& path, DeathResolution resolution,
                                       Age max_age = kDefaultMaxAge) {
  const bool by_age = resolution == DeathResolution::YearlyByAge;
  if (!by_age && resolution != DeathResolution::YearlyByGroup)
    throw ValidationError("load_yearly_deaths needs a yearly resolution");
  auto f = by_age ? detail::read_csv(path, {"year", "age", "count"})
                  : detail::read_csv(path, {"year", "age_lower", "age_upper", "count"});
  if (f.rows.empty()) throw ValidationError(path + ": no death rows");

  YearlyDeaths out;
  out.max_age = max_age;
  out.resolution = resolution;
  std::vector<std::tuple<const detail::CsvRow*, Year, AgeGroup, std::int64_t>> cells;
  for (const auto& r : f.rows) {
    auto year = static_cast<Year>(detail::parse_int(f, r, 0));
    AgeGroup g;
    if (by_age) {
      auto a = detail::parse_age(f, r, 1, max_age);
      g = a == max_age ? open_group(a) : closed_group(a, a);
    } else {
      g = detail::parse_group(f, r, 1, max_age);
    }
    cells.emplace_back(&r, year, g, detail::parse_death_count(f, r, by_age ? 2 : 3));
  }
  detail::fill_grouped(f, out, cells);
  if (by_age && out.groups != single_age_groups(max_age))
    throw ValidationError(path + ": single-age deaths do not cover ages 0.." +
                          std::to_string(max_age));
  return out;
}

inline WeeklyDeaths load_weekly_deaths(const std::string& path, Age max_age = kDefaultMaxAge) {
  auto f = detail::read_csv(path, {"iso_year", "iso_week", "age_lower", "age_upper", "count"});
  if (f.rows.empty()) throw ValidationError(path + ": no death rows");
  WeeklyDeaths out;
  out.max_age = max_age;
  std::vector<std::tuple<const detail::CsvRow*, IsoWeek, AgeGroup, std::int64_t>> cells;
  for (const auto& r : f.rows) {
    IsoWeek w{static_cast<int>(detail::parse_int(f, r, 0)),
              static_cast<int>(detail::parse_int(f, r, 1))};
    if (!w.valid())
      throw ValidationError(f.where(r) + ": invalid ISO week " + w.str() + " (" +
                            std::to_string(w.iso_year) + " has " +
                            std::to_string(iso_weeks_in_year(w.iso_year)) + " ISO weeks)");
    cells.emplace_back(&r, w, detail::parse_group(f, r, 2, max_age),
                       detail::parse_death_count(f, r, 4));
  }
  detail::fill_grouped(f, out, cells);
  return out;
}

inline DeathSeries load_deaths(const std::string& path, DeathResolution resolution,
                               Age max_age = kDefaultMaxAge) {
  if (resolution == DeathResolution::WeeklyByGroup) return load_weekly_deaths(path, max_age);
  return load_yearly_deaths(path, resolution, max_age);
}

/// Infers the death file layout from its header row.
inline DeathResolution detect_deaths_resolution(const std::string& path) {
  auto f = detail::parse_csv(detail::read_text(path), path);
  using V = std::vector<std::string>;
  if (f.header == V{"year", "age", "count"}) return DeathResolution::YearlyByAge;
  if (f.header == V{"year", "age_lower", "age_upper", "count"})
    return DeathResolution::YearlyByGroup;
  if (f.header == V{"iso_year", "iso_week", "age_lower", "age_upper", "count"})
    return DeathResolution::WeeklyByGroup;
  throw ValidationError(path + ": schema violation, unrecognised deaths header");
}

/// Official table; ages must run 0..n without gaps, n becomes the table's max_age.
inline LifeTable load_lifetable(const std::string& path) {
  auto f = detail::read_csv(path, {"age", "qx"});
  if (f.rows.empty()) throw ValidationError(path + ": no life table rows");
  std::map<Age, double> qx;
  for (const auto& r : f.rows) {
    auto age = detail::parse_int(f, r, 0);
    auto q = detail::parse_real(f, r, 1);
    if (age < 0) throw ValidationError(f.where(r) + ": negative age");
    if (q < 0.0 || q > 1.0)
      throw ValidationError(f.where(r) + ": qx " + r.fields[1] + " outside [0,1] at age " +
                            std::to_string(age));
    if (!qx.emplace(static_cast<Age>(age), q).second)
      throw ValidationError(f.where(r) + ": duplicate age " + std::to_string(age));
  }
  std::vector<double> values;
  for (const auto& [age, q] : qx) {
    if (age != static_cast<Age>(values.size()))
      throw ValidationError(path + ": coverage gap, missing age " + std::to_string(values.size()));
    values.push_back(q);
  }
  return LifeTable(std::move(values));
}

inline StandardPopulation load_standard_population(const std::string& path,
                                                   Age max_age = kDefaultMaxAge) {
  auto f = detail::read_csv(path, {"age_lower", "age_upper", "count"});
  StandardPopulation out;
  out.max_age = max_age;
  std::map<AgeGroup, double> cells;
  for (const auto& r : f.rows) {
    auto g = detail::parse_group(f, r, 0, max_age);
    if (!cells.emplace(g, detail::parse_count(f, r, 2)).second)
      throw ValidationError(f.where(r) + ": duplicate group " + g.label());
  }
  for (const auto& [g, c] : cells) {
    out.groups.push_back(g);
    out.counts.push_back(c);
  }
  detail::check_partition(f, out.groups, max_age);
  return out;
}

// Serialization back to the input schemas; reloading the text yields an equal value.

inline std::string to_csv(const PopulationSeries& p) {
  std::string s = "year,age,count\n";
  for (Year y = p.first_year(); y <= p.last_year(); ++y)
    for (Age a = 0; a <= p.max_age(); ++a)
      s += std::to_string(y) + "," + std::to_string(a) + "," + format_number(p.at(y, a)) + "\n";
  return s;
}

inline std::string upper_field(const AgeGroup& g) {
  return g.upper ? std::to_string(*g.upper) : std::string{};
}

inline std::string to_csv(const YearlyDeaths& d) {
  const bool by_age = d.resolution == DeathResolution::YearlyByAge;
  std::string s = by_age ? "year,age,count\n" : "year,age_lower,age_upper,count\n";
  for (const auto& [year, vals] : d.rows)
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const auto& g = d.groups[i];
      s += std::to_string(year) + "," + std::to_string(g.lower) + "," +
           (by_age ? "" : upper_field(g) + ",") + std::to_string(vals[i]) + "\n";
    }
  return s;
}

inline std::string to_csv(const WeeklyDeaths& d) {
  std::string s = "iso_year,iso_week,age_lower,age_upper,count\n";
  for (const auto& [w, vals] : d.rows)
    for (std::size_t i = 0; i < vals.size(); ++i)
      s += std::to_string(w.iso_year) + "," + std::to_string(w.week) + "," +
           std::to_string(d.groups[i].lower) + "," + upper_field(d.groups[i]) + "," +
           std::to_string(vals[i]) + "\n";
  return s;
}

inline std::string to_csv(const LifeTable& t) {
  std::string s = "age,qx\n";
  for (Age a = 0; a <= t.max_age(); ++a)
    s += std::to_string(a) + "," + format_number(t.qx(a)) + "\n";
  return s;
}

inline std::string to_csv(const CohortLifeTable& t) {
  std::string s = "age,qtilde\n";
  for (Age a = 0; a <= t.max_age(); ++a)
    s += std::to_string(a) + "," + format_number(t.qtilde(a)) + "\n";
  return s;
}

inline std::string to_csv(const StandardPopulation& p) {
  std::string s = "age_lower,age_upper,count\n";
  for (std::size_t i = 0; i < p.groups.size(); ++i)
    s += std::to_string(p.groups[i].lower) + "," + upper_field(p.groups[i]) + "," +
         format_number(p.counts[i]) + "\n";
  return s;
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace excessmort
