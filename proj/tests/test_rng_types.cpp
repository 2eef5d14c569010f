#include "fbsim/rng.hpp"
#include "fbsim/types.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace fbsim;

TEST(Rng, SameSeedAndStreamReproduce)
{
  Rng a(42, "x"), b(42, "x");
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next(), b.next());
  }
}

TEST(Rng, StreamsAreIndependent)
{
  Rng a(42, "x"), b(42, "y");
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    equal += a.next() == b.next();
  }
  EXPECT_EQ(equal, 0);
}

TEST(Rng, UniformIntCoversClosedRange)
{
  Rng r(7);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.uniform_int(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 5U);
  EXPECT_THROW(r.uniform_int(3, 2), std::invalid_argument);
}

TEST(Rng, NormalMomentsMatch)
{
  Rng r(11);
  const int n = 20000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(5.0, 2.0);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 5.0, 4 * 2.0 / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(var), 2.0, 0.05);
}

TEST(Rng, ExponentialMean)
{
  Rng r(3);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += r.exponential(200.0);
  }
  EXPECT_NEAR(sum / n, 200.0, 4 * 200.0 / std::sqrt(n));
}

TEST(Types, EnumNamesRoundTrip)
{
  for (const auto& [v, name] : EnumNames<Rat>::items) {
    EXPECT_EQ(parse_enum<Rat>(name), v);
    EXPECT_EQ(to_string(v), name);
  }
  EXPECT_FALSE(parse_enum<Rat>("g5"));
  EXPECT_EQ(enum_choices<Rat>(), "lte|g2|g3");
}

TEST(Types, CellParamsRanges)
{
  CellParams p;
  EXPECT_FALSE(cell_params_error(p));
  p.pci = 504;
  EXPECT_TRUE(cell_params_error(p));
  p.pci = 503;
  p.tac = 65536;
  EXPECT_TRUE(cell_params_error(p));
  p.tac = 0;
  p.resel_priority = 8;
  EXPECT_TRUE(cell_params_error(p));
  p.resel_priority = 0;
  p.cell_id = kMaxCellId + 1;
  EXPECT_TRUE(cell_params_error(p));
}

TEST(Types, Distance)
{
  EXPECT_DOUBLE_EQ(distance({0, 0}, {3, 4}), 5.0);
}
