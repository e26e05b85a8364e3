#include <gtest/gtest.h>

#include <vector>

#include "anchorite/stats.hpp"

namespace anchorite {
namespace {

// Reference values from scipy.stats / numpy (default linear quantile).
const std::vector<double> kX = {3.1, 1.2, 5.5, 1.2, 9.0, 4.4, 4.4, 0.3};
const std::vector<double> kY = {2.0, 0.5, 7.1, 1.1, 8.8, 3.3, 6.0, 0.2};

TEST(Stats, Quantiles) {
  EXPECT_NEAR(quantile(kX, 0.9), 6.55, 1e-12);
  EXPECT_NEAR(quantile(kX, 0.25), 1.2, 1e-15);
  EXPECT_NEAR(median(kX), 3.75, 1e-15);
  EXPECT_EQ(quantile(kX, 0.0), 0.3);
  EXPECT_EQ(quantile(kX, 1.0), 9.0);
  EXPECT_THROW(median({}), InvalidArgument);
}

TEST(Stats, AverageRanksShareTies) {
  EXPECT_EQ(average_ranks(kX), (std::vector<double>{4, 2.5, 7, 2.5, 8, 5.5, 5.5, 1}));
}

TEST(Stats, Correlations) {
  EXPECT_NEAR(spearman(kX, kY), 0.9880235200593538, 1e-14);
  EXPECT_NEAR(pearson(kX, kY), 0.9479324464389103, 1e-14);
  const std::vector<double> reversed = {8, 7, 6, 5, 4, 3, 2, 1};
  const std::vector<double> up = {1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_NEAR(spearman(up, reversed), -1.0, 1e-15);
  EXPECT_THROW(pearson(up, std::vector<double>(8, 1.0)), InvalidArgument);
}

}  // namespace
}  // namespace anchorite
