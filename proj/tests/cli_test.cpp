#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "excessmort/excessmort.hpp"

namespace fs = std::filesystem;
using namespace excessmort;

namespace {

const std::string kCli = EXCESSMORT_CLI;
const std::string kFixtures = EXCESSMORT_FIXTURES;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const auto text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("excessmort_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  struct Result {
    int code;
    std::string err;
  };

  Result run(const std::string& args) {
    const auto err_file = dir_ / "stderr.txt";
    const std::string cmd = kCli + " " + args + " >/dev/null 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    Result r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err_file)};
    fs::remove(err_file);
    return r;
  }

  fs::path out(const std::string& sub = "out") const { return dir_ / sub; }
  std::string write(const std::string& name, const std::string& text) const {
    write_text(dir_ / name, text);
    return (dir_ / name).string();
  }
  bool empty_or_missing(const fs::path& p) const { return !fs::exists(p) || fs::is_empty(p); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, LifetableBuildWritesBothTables) {
  auto r = run("lifetable build --population " + fixture("population.csv") + " --deaths " +
               fixture("deaths_yearly_age.csv") + " --years 2016-2019 --max-age 3 --out-dir " +
               out().string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out() / "lifetable.csv"));
  EXPECT_TRUE(fs::exists(out() / "cohort_lifetable.csv"));
  auto table = load_lifetable((out() / "lifetable.csv").string());
  auto expect = estimate_qx_multiyear(
      load_yearly_deaths(fixture("deaths_yearly_age.csv"), DeathResolution::YearlyByAge, 3),
      load_population(fixture("population.csv"), 3), 2016, 2019);
  EXPECT_EQ(table.values(), expect.values());
}

TEST_F(CliTest, LifetableLoad) {
  auto r = run("lifetable load --lifetable " + fixture("lifetable.csv") + " --out-dir " +
               out().string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(out() / "cohort_lifetable.csv"),
            "age,qtilde\n0,0.007\n1,0.02\n2,0.115\n3,0.2\n");
}

TEST_F(CliTest, LifetableMissingPopulationCell) {
  auto pop = slurp(fixture("population.csv"));
  pop.erase(pop.find("2017,2,"), pop.find('\n', pop.find("2017,2,")) - pop.find("2017,2,") + 1);
  auto r = run("lifetable build --population " + write("pop.csv", pop) + " --deaths " +
               fixture("deaths_yearly_age.csv") + " --years 2016-2019 --max-age 3 --out-dir " +
               out().string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("(2017, 2)"), std::string::npos) << r.err;
  EXPECT_TRUE(empty_or_missing(out()));
}

TEST_F(CliTest, LifetableQxOutOfRange) {
  auto deaths = write("d.csv",
                      "year,age,count\n2017,0,1\n2017,1,1\n2017,2,1\n2017,3,900000\n");
  auto r = run("lifetable build --population " + fixture("population.csv") + " --deaths " +
               deaths + " --years 2016-2017 --max-age 3 --out-dir " + out().string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("outside [0,1] at age 3"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("qx 1.87"), std::string::npos) << r.err;
}

TEST_F(CliTest, YearlyAllWritesThreeFiles) {
  auto r = run("yearly --population " + fixture("population.csv") + " --deaths " +
               fixture("deaths_yearly_group.csv") + " --lifetable " + fixture("lifetable.csv") +
               " --methods 1,2,3 --years 2016-2020 --max-age 3 --out-dir " + out().string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(out() / "expected_yearly.csv"), 1u + 3 * 5 * 2);
  EXPECT_EQ(line_count(out() / "excess_yearly.csv"), 1u + 2 + 1);
  EXPECT_EQ(line_count(out() / "rmse.csv"), 1u + 3 + 1);

  // RMSE excludes the target year 2020
  auto pop = load_population(fixture("population.csv"), 3);
  auto obs = load_yearly_deaths(fixture("deaths_yearly_group.csv"),
                                DeathResolution::YearlyByGroup, 3);
  auto table = load_lifetable(fixture("lifetable.csv"));
  std::vector<Year> years{2016, 2017, 2018, 2019, 2020};
  std::vector<ExpectedDeathsYearly> e;
  for (auto m : {Method::M1, Method::M2, Method::M3})
    e.push_back(expected_yearly(m, table, pop, obs.groups, years));
  auto report = rmse_compare(e, obs, std::vector<Year>{2016, 2017, 2018, 2019});
  EXPECT_EQ(slurp(out() / "rmse.csv"), rmse_csv(report, false));
  EXPECT_EQ(slurp(out() / "excess_yearly.csv"), excess_csv(excess_table(e[2], obs, 2020), false));
}

TEST_F(CliTest, YearlySingleMethodAndByAgeObserved) {
  auto r = run("yearly rmse --population " + fixture("population.csv") + " --deaths " +
               fixture("deaths_yearly_age.csv") + " --lifetable " + fixture("lifetable.csv") +
               " --groups 0-1,2+ --methods 3 --years 2016-2020 --max-age 3 --out-dir " +
               out().string());
  ASSERT_EQ(r.code, 0) << r.err;
  auto text = slurp(out() / "rmse.csv");
  EXPECT_EQ(line_count(out() / "rmse.csv"), 3u);
  EXPECT_TRUE(text.starts_with("method,0-1,2+,overall\nM3,"));
  EXPECT_FALSE(fs::exists(out() / "expected_yearly.csv"));
}

TEST_F(CliTest, YearlyRmseWithoutObservedFails) {
  auto r = run("yearly rmse --population " + fixture("population.csv") + " --lifetable " +
               fixture("lifetable.csv") + " --groups 0-1,2+ --years 2016-2020 --max-age 3" +
               " --out-dir " + out().string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--deaths"), std::string::npos);
  EXPECT_TRUE(empty_or_missing(out()));
}

TEST_F(CliTest, YearlyRoundedMatchesDisplay) {
  auto r = run("yearly excess --rounded --population " + fixture("population.csv") +
               " --deaths " + fixture("deaths_yearly_group.csv") + " --lifetable " +
               fixture("lifetable.csv") + " --years 2020 --max-age 3 --out-dir " +
               out().string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(slurp(out() / "excess_yearly.csv"));
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    // expected, observed and absolute_diff are integers; pct carries a sign unless zero
    auto fields = detail::split(line);
    ASSERT_EQ(fields.size(), 8u);
    for (int i : {3, 4, 5}) EXPECT_EQ(fields[i].find('.'), std::string::npos) << line;
    EXPECT_EQ(std::stoll(fields[5]), std::stoll(fields[4]) - std::stoll(fields[3]));
  }
}

TEST_F(CliTest, WeeklySmrCoversAllTargetWeeks) {
  auto r = run("weekly smr --population " + fixture("population.csv") + " --deaths " +
               fixture("deaths_weekly.csv") +
               " --reference-years 2016-2019 --target-year 2020 --max-age 3 --out-dir " +
               out().string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(out() / "smr_weekly.csv"), 1u + 53 * 2);
  EXPECT_TRUE(fs::exists(out() / "weekly_rates.csv"));
  EXPECT_TRUE(fs::exists(out() / "reference_rates.csv"));
  EXPECT_FALSE(fs::exists(out() / "direct_std.csv"));
}

TEST_F(CliTest, WeeklyAllWithStandardPopulation) {
  auto r = run("weekly --population " + fixture("population.csv") + " --deaths " +
               fixture("deaths_weekly.csv") + " --standard-population " +
               fixture("standard_population.csv") +
               " --target-year 2020 --max-age 3 --out-dir " + out().string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(out() / "direct_std.csv"), 1u + 53 * 2);
  EXPECT_EQ(line_count(out() / "excess_weekly_yearly.csv"), 1u + 2 + 1);
}

TEST_F(CliTest, WeeklyDirectNeedsStandardPopulation) {
  auto r = run("weekly direct --population " + fixture("population.csv") + " --deaths " +
               fixture("deaths_weekly.csv") + " --target-year 2020 --max-age 3 --out-dir " +
               out().string());
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, WeeklyTooManyWeeksForTargetYear) {
  auto r = run("weekly smr --population " + fixture("population.csv") + " --deaths " +
               fixture("deaths_weekly.csv") +
               " --reference-years 2016-2018 --target-year 2019 --weeks 53 --max-age 3" +
               " --out-dir " + out().string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("2019 has 52 ISO weeks"), std::string::npos) << r.err;
  EXPECT_TRUE(empty_or_missing(out()));
}

TEST_F(CliTest, MissingInputIsIoError) {
  auto r = run("lifetable load --lifetable " + (dir_ / "nope.csv").string() + " --out-dir " +
               out().string());
  EXPECT_EQ(r.code, 3);
}

TEST_F(CliTest, UnknownFlagIsValidationError) {
  EXPECT_EQ(run("yearly --bogus").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(CliTest, Deterministic) {
  const std::string args = " --population " + fixture("population.csv") + " --deaths " +
                           fixture("deaths_weekly.csv") + " --standard-population " +
                           fixture("standard_population.csv") +
                           " --target-year 2020 --max-age 3 --out-dir ";
  ASSERT_EQ(run("weekly" + args + out("a").string()).code, 0);
  ASSERT_EQ(run("weekly" + args + out("b").string()).code, 0);
  for (const auto& entry : fs::directory_iterator(out("a")))
    EXPECT_EQ(slurp(entry.path()), slurp(out("b") / entry.path().filename()))
        << entry.path().filename();
}
