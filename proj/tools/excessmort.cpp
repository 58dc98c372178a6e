// excessmort: age-adjusted expected and excess mortality from CSV inputs.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "excessmort/excessmort.hpp"

namespace fs = std::filesystem;
using namespace excessmort;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct RunConfig {
  std::string action;
  std::string population;
  std::string deaths;
  std::string lifetable;
  std::string standard_population;
  std::string methods = "1,2,3";
  std::string years;
  std::string rmse_years;
  std::string reference_years = "2016-2019";
  std::string groups;
  std::string out_dir = ".";
  int target_year = 0;
  int weeks = 0;
  int max_age = kDefaultMaxAge;
  bool rounded = false;
};

/// "2016-2019" or "2016,2018,2019".
std::vector<Year> parse_years(const std::string& text, const char* flag) {
  std::vector<Year> out;
  try {
    auto dash = text.find('-');
    if (dash != std::string::npos && text.find(',') == std::string::npos) {
      Year lo = std::stoi(text.substr(0, dash)), hi = std::stoi(text.substr(dash + 1));
      for (Year y = lo; y <= hi; ++y) out.push_back(y);
    } else {
      std::size_t pos = 0;
      while (pos <= text.size()) {
        auto end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        out.push_back(std::stoi(text.substr(pos, end - pos)));
        pos = end + 1;
      }
    }
  } catch (const std::exception&) {
    throw ValidationError(std::string(flag) + ": malformed year list '" + text + "'");
  }
  if (out.empty()) throw ValidationError(std::string(flag) + ": year range is empty");
  return out;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    auto m = parse_method(text.substr(pos, end - pos));
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    pos = end + 1;
  }
  return out;
}

void require(const std::string& value, const char* flag, const std::string& action) {
  if (value.empty()) throw ValidationError(action + " requires " + flag);
}

/// Output files staged in memory and written only once everything has been computed.
class Outputs {
 public:
  void add(std::string name, std::string content) { files_[std::move(name)] = std::move(content); }

  void commit(const fs::path& dir) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
    std::vector<fs::path> written;
    try {
      for (const auto& [name, text] : files_) {
        written.push_back(dir / name);
        write_text(written.back(), text);
      }
    } catch (...) {
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
    for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  }

 private:
  std::map<std::string, std::string> files_;
};

void cmd_lifetable(const RunConfig& c, Outputs& out) {
  if (c.action == "build") {
    require(c.population, "--population", "lifetable build");
    require(c.deaths, "--deaths", "lifetable build");
    require(c.years, "--years", "lifetable build");
    const auto years = parse_years(c.years, "--years");
    const auto population = load_population(c.population, c.max_age);
    const auto deaths = load_yearly_deaths(c.deaths, DeathResolution::YearlyByAge, c.max_age);
    const auto table = estimate_qx_multiyear(deaths, population, years.front(), years.back());
    out.add("lifetable.csv", to_csv(table));
    out.add("cohort_lifetable.csv", to_csv(derive_cohort_table(table)));
  } else {
    require(c.lifetable, "--lifetable", "lifetable load");
    const auto table = load_lifetable(c.lifetable);
    out.add("lifetable.csv", to_csv(table));
    out.add("cohort_lifetable.csv", to_csv(derive_cohort_table(table)));
  }
}

YearlyDeaths load_observed_yearly(const RunConfig& c) {
  const auto res = detect_deaths_resolution(c.deaths);
  if (res == DeathResolution::WeeklyByGroup)
    throw ValidationError(c.deaths + ": yearly commands need yearly deaths");
  return load_yearly_deaths(c.deaths, res, c.max_age);
}

void cmd_yearly(const RunConfig& c, Outputs& out) {
  const bool want_expected = c.action == "expected" || c.action == "all";
  const bool want_excess = c.action == "excess" || (c.action == "all" && !c.deaths.empty());
  const bool want_rmse = c.action == "rmse" || (c.action == "all" && !c.deaths.empty());

  require(c.population, "--population", "yearly " + c.action);
  require(c.lifetable, "--lifetable", "yearly " + c.action);
  require(c.years, "--years", "yearly " + c.action);
  if (want_excess || want_rmse) require(c.deaths, "--deaths (observed)", "yearly " + c.action);

  const auto years = parse_years(c.years, "--years");
  const auto methods = parse_methods(c.methods);
  const auto population = load_population(c.population, c.max_age);
  const auto table = load_lifetable(c.lifetable);

  std::optional<YearlyDeaths> observed;
  if (!c.deaths.empty()) observed = load_observed_yearly(c);

  std::vector<AgeGroup> groups;
  if (!c.groups.empty()) {
    groups = parse_groups(c.groups);
  } else if (observed && observed->resolution == DeathResolution::YearlyByGroup) {
    groups = observed->groups;
  } else {
    throw ValidationError("yearly " + c.action + " needs --groups or grouped observed deaths");
  }
  validate_partition(groups, c.max_age);
  if (observed && observed->groups != groups) observed = regroup(*observed, groups);

  std::vector<ExpectedDeathsYearly> expected;
  for (auto m : methods) expected.push_back(expected_yearly(m, table, population, groups, years));

  if (want_expected) out.add("expected_yearly.csv", expected_yearly_csv(expected, c.rounded));

  if (want_excess) {
    const Year target = c.target_year ? c.target_year : years.back();
    auto it = std::find_if(expected.begin(), expected.end(),
                           [](const auto& e) { return e.method == Method::M3; });
    if (it == expected.end()) it = expected.begin();
    out.add("excess_yearly.csv", excess_csv(excess_table(*it, *observed, target), c.rounded));
  }

  if (want_rmse) {
    std::vector<Year> rmse_years;
    if (!c.rmse_years.empty()) {
      rmse_years = parse_years(c.rmse_years, "--rmse-years");
    } else {
      const Year target = c.target_year ? c.target_year : years.back();
      for (Year y : years)
        if (y != target) rmse_years.push_back(y);
    }
    for (Year y : rmse_years)
      if (std::find(years.begin(), years.end(), y) == years.end())
        throw ValidationError("--rmse-years: " + std::to_string(y) + " not in --years");
    out.add("rmse.csv", rmse_csv(rmse_compare(expected, *observed, rmse_years), c.rounded));
  }
}

void cmd_weekly(const RunConfig& c, Outputs& out) {
  const bool want_smr = c.action == "smr" || c.action == "all";
  const bool want_aggregate = c.action == "aggregate" || c.action == "all";
  const bool want_direct =
      c.action == "direct" || (c.action == "all" && !c.standard_population.empty());

  require(c.population, "--population", "weekly " + c.action);
  require(c.deaths, "--deaths", "weekly " + c.action);
  if (c.target_year == 0) throw ValidationError("weekly " + c.action + " requires --target-year");
  if (want_direct) require(c.standard_population, "--standard-population", "weekly direct");

  const auto reference = parse_years(c.reference_years, "--reference-years");
  const int n_weeks = c.weeks ? c.weeks : iso_weeks_in_year(c.target_year);
  if (n_weeks > iso_weeks_in_year(c.target_year) || n_weeks < 1)
    throw ValidationError("--weeks " + std::to_string(n_weeks) + ": " +
                          std::to_string(c.target_year) + " has " +
                          std::to_string(iso_weeks_in_year(c.target_year)) + " ISO weeks");

  const auto population = load_population(c.population, c.max_age);
  const auto deaths = load_weekly_deaths(c.deaths, c.max_age);
  const auto rates = weekly_rates(deaths, population);

  if (want_smr || want_aggregate) {
    std::vector<IsoWeek> target_weeks;
    for (int t = 1; t <= n_weeks; ++t) target_weeks.push_back({c.target_year, t});
    const auto mean = reference_mean_q(rates, reference, c.target_year, n_weeks);
    const auto target_pop = interpolate_population(population, deaths.groups, target_weeks);
    const auto smr = smr_series(deaths, indirect_expected(mean, target_pop));
    if (want_smr) {
      out.add("smr_weekly.csv", smr_csv(smr, c.rounded));
      out.add("weekly_rates.csv", weekly_rates_csv(rates));
      out.add("reference_rates.csv", reference_band_csv(rates, reference, c.target_year, n_weeks));
    }
    if (want_aggregate)
      out.add("excess_weekly_yearly.csv", excess_csv(yearly_aggregate_weekly(smr), c.rounded));
  }
  if (want_direct) {
    const auto standard = load_standard_population(c.standard_population, c.max_age);
    out.add("direct_std.csv",
            direct_std_csv(direct_standardized(rates, standard, reference, c.target_year, n_weeks),
                           c.rounded));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-adjusted expected and excess mortality"};
  app.require_subcommand(1);
  RunConfig c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", c.out_dir, "Directory for output CSV files");
    sub->add_option("--max-age", c.max_age, "Top (open-ended) single age")->capture_default_str();
    sub->add_flag("--rounded", c.rounded, "Round output for display");
  };

  auto* lifetable = app.add_subcommand("lifetable", "Build or load a life table");
  lifetable->add_option("action", c.action, "build | load")
      ->required()
      ->check(CLI::IsMember({"build", "load"}));
  lifetable->add_option("--population", c.population, "population.csv (Dec 31 stocks)");
  lifetable->add_option("--deaths", c.deaths, "deaths_yearly_age.csv");
  lifetable->add_option("--lifetable", c.lifetable, "lifetable.csv to load");
  lifetable->add_option("--years", c.years, "Stock window, e.g. 2016-2019");
  common(lifetable);

  auto* yearly = app.add_subcommand("yearly", "Yearly expected deaths, excess and RMSE");
  yearly->add_option("action", c.action, "expected | excess | rmse | all")
      ->check(CLI::IsMember({"expected", "excess", "rmse", "all"}));
  yearly->add_option("--population", c.population, "population.csv");
  yearly->add_option("--deaths", c.deaths, "Observed yearly deaths (by age or by group)");
  yearly->add_option("--lifetable", c.lifetable, "lifetable.csv");
  yearly->add_option("--methods", c.methods, "Comma-separated subset of 1,2,3")
      ->capture_default_str();
  yearly->add_option("--years", c.years, "Years to evaluate, e.g. 2016-2020");
  yearly->add_option("--target-year", c.target_year, "Year for the excess table (default: last)");
  yearly->add_option("--rmse-years", c.rmse_years,
                     "Years entering the RMSE (default: --years without the target year)");
  yearly->add_option("--groups", c.groups, "Age groups, e.g. 0-29,30-39,90+");
  common(yearly);

  auto* weekly = app.add_subcommand("weekly", "Weekly SMR, direct standardization, aggregation");
  weekly->add_option("action", c.action, "smr | direct | aggregate | all")
      ->check(CLI::IsMember({"smr", "direct", "aggregate", "all"}));
  weekly->add_option("--population", c.population, "population.csv incl. target-year projection");
  weekly->add_option("--deaths", c.deaths, "deaths_weekly.csv");
  weekly->add_option("--reference-years", c.reference_years, "Reference years")
      ->capture_default_str();
  weekly->add_option("--target-year", c.target_year, "Target ISO year");
  weekly->add_option("--weeks", c.weeks, "Number of target weeks (default: all)");
  weekly->add_option("--standard-population", c.standard_population,
                     "standard_population.csv for direct standardization");
  common(weekly);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }
  if (c.action.empty()) c.action = "all";

  try {
    Outputs out;
    if (*lifetable) cmd_lifetable(c, out);
    else if (*yearly) cmd_yearly(c, out);
    else cmd_weekly(c, out);
    out.commit(c.out_dir);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
