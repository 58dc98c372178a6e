#include <gtest/gtest.h>

#include "excessmort/domain.hpp"

using namespace excessmort;

namespace {
std::string partition_error(std::vector<AgeGroup> groups, Age max_age) {
  try {
    validate_partition(groups, max_age);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}
}  // namespace

TEST(Partition, AcceptsTiling) {
  EXPECT_NO_THROW(validate_partition(
      std::vector{closed_group(0, 29), closed_group(30, 39), open_group(40)}, 100));
  EXPECT_NO_THROW(validate_partition(std::vector{open_group(30), closed_group(0, 29)}, 100));
  EXPECT_NO_THROW(validate_partition(std::vector{closed_group(0, 100)}, 100));
}

TEST(Partition, ReportsOffendingBoundary) {
  EXPECT_EQ(partition_error({closed_group(0, 29), closed_group(29, 39)}, 100),
            "age partition overlap at age 29");
  EXPECT_EQ(partition_error({closed_group(0, 29), open_group(31)}, 100),
            "age partition gap at age 30");
  EXPECT_EQ(partition_error({closed_group(5, 29), open_group(30)}, 100),
            "age partition gap at age 0");
  EXPECT_EQ(partition_error({closed_group(0, 29), closed_group(30, 99)}, 100),
            "age partition gap at age 100");
  EXPECT_EQ(partition_error({closed_group(0, 29), closed_group(30, 120)}, 100),
            "age group 30-120 exceeds max_age 100");
  EXPECT_EQ(partition_error({open_group(0), open_group(50)}, 100),
            "age partition overlap at age 50");
  EXPECT_EQ(partition_error({}, 100), "age group partition is empty");
}

TEST(Partition, ParseGroups) {
  auto g = parse_groups("0-29,30-39,90+");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0], closed_group(0, 29));
  EXPECT_EQ(g[2], open_group(90));
  EXPECT_EQ(parse_groups("5")[0], closed_group(5, 5));
  EXPECT_THROW(parse_groups("0-x"), ValidationError);
  EXPECT_THROW(parse_groups("0-9,,20+"), ValidationError);
}

TEST(PopulationSeries, StartOfYearIsPreviousDecember) {
  auto p = PopulationSeries::generate(2019, 2020, 2, [](Year y, Age a) { return y * 10.0 + a; });
  EXPECT_EQ(p.at_start_of(2020, 1), 20191.0);
  EXPECT_EQ(p.group_total(2020, closed_group(0, 1)), 20200.0 + 20201.0);
  try {
    p.at(2018, 1);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "missing population cell (2018, 1)");
  }
  EXPECT_THROW(PopulationSeries(2019, 2019, 1, {1.0, -2.0}), ValidationError);
  EXPECT_THROW(PopulationSeries(2019, 2019, 1, {1.0}), ValidationError);
}

TEST(Regroup, SumsSingleAgesIntoGroups) {
  YearlyDeaths d;
  d.max_age = 3;
  d.resolution = DeathResolution::YearlyByAge;
  d.groups = single_age_groups(3);
  d.rows[2020] = {1, 2, 3, 4};
  auto r = regroup(d, std::vector{closed_group(0, 1), open_group(2)});
  EXPECT_EQ(r.rows.at(2020), (std::vector<std::int64_t>{3, 7}));
  EXPECT_THROW(regroup(r, std::vector{closed_group(0, 2), open_group(3)}), ValidationError);
}
