#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "sqpn/algebra.hpp"

using namespace sqpn;

namespace {

constexpr Sign P = Sign::Positive, N = Sign::Negative, Z = Sign::Zero, Q = Sign::Ambiguous;
constexpr Sign kSigns[] = {P, N, Z, Q};

// Rows and columns in the order +, -, 0, ?.
constexpr Sign kMul[4][4] = {{P, N, Z, Q}, {N, P, Z, Q}, {Z, Z, Z, Z}, {Q, Q, Z, Q}};
constexpr Sign kAdd[4][4] = {{P, Q, P, Q}, {Q, N, N, Q}, {P, N, Z, Q}, {Q, Q, Q, Q}};

}  // namespace

TEST(SignAlgebra, ProductTable) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(sign_mul(kSigns[i], kSigns[j]), kMul[i][j]) << i << "," << j;
}

TEST(SignAlgebra, SumTable) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_EQ(sign_add(kSigns[i], kSigns[j]), kAdd[i][j]) << i << "," << j;
}

TEST(SignAlgebra, Laws) {
  for (Sign a : kSigns)
    for (Sign b : kSigns) {
      EXPECT_EQ(sign_mul(a, b), sign_mul(b, a));
      EXPECT_EQ(sign_add(a, b), sign_add(b, a));
      for (Sign c : kSigns) {
        EXPECT_EQ(sign_mul(sign_mul(a, b), c), sign_mul(a, sign_mul(b, c)));
        EXPECT_EQ(sign_add(sign_add(a, b), c), sign_add(a, sign_add(b, c)));
      }
    }
  for (Sign a : kSigns) {
    EXPECT_EQ(sign_add(a, Z), a);
    EXPECT_EQ(sign_mul(a, Z), Z);
    EXPECT_EQ(sign_mul(a, P), a);
    EXPECT_EQ(sign_add(a, Q), Q);
  }
}

TEST(SignAlgebra, CharRoundTrip) {
  for (Sign s : kSigns) EXPECT_EQ(sign_from_char(sign_char(s)), s);
  EXPECT_FALSE(sign_from_char('x').has_value());
}

TEST(Interval, RejectsOutOfRange) {
  EXPECT_THROW(Interval(0.5, 0.2), InvalidArgument);
  EXPECT_THROW(Interval(-1.5, 0.0), InvalidArgument);
  EXPECT_THROW(Interval(0.0, 1.0001), InvalidArgument);
  EXPECT_NO_THROW(Interval(-1.0, 1.0));
}

TEST(Interval, UnitTablesMatchSignTables) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Interval a = sign_to_unit_interval(kSigns[i]), b = sign_to_unit_interval(kSigns[j]);
      EXPECT_EQ(interval_mul(a, b), sign_to_unit_interval(kMul[i][j]));
      EXPECT_EQ(interval_add(a, b), sign_to_unit_interval(kAdd[i][j]));
    }
}

TEST(Interval, ProductIsMinMaxOfEndpointProducts) {
  EXPECT_TRUE(approx_equal(interval_mul({0.2, 0.4}, {-0.3, -0.1}), Interval(-0.12, -0.02)));
  EXPECT_TRUE(approx_equal(interval_mul({-0.5, 0.5}, {-0.4, 0.2}), Interval(-0.2, 0.2)));
  EXPECT_TRUE(approx_equal(interval_mul({0.7, 0.9}, {0.8, 0.8}), Interval(0.56, 0.72)));
}

TEST(Interval, SumClampsToUnitRange) {
  EXPECT_TRUE(approx_equal(interval_add({0.2, 0.4}, {0.1, 0.3}), Interval(0.3, 0.7)));
  EXPECT_EQ(interval_add({0.5, 0.9}, {0.4, 0.8}), Interval(0.9, 1.0));
  EXPECT_EQ(interval_add({-0.9, -0.5}, {-0.6, 0.0}), Interval(-1.0, -0.5));
}

TEST(Interval, NarySumClampsOnce) {
  // A fold would clamp [0.6,0.6]+[0.6,0.6] to 1 before adding -0.5.
  std::vector<Interval> terms{Interval::point(0.6), Interval::point(0.6), Interval::point(-0.5)};
  EXPECT_TRUE(approx_equal(interval_sum(terms), Interval::point(0.7)));
}

TEST(Interval, Classify) {
  EXPECT_EQ(classify({0.0, 0.0}), Z);
  EXPECT_EQ(classify({0.0, 0.3}), P);
  EXPECT_EQ(classify({-0.3, 0.0}), N);
  EXPECT_EQ(classify({-0.3, 0.1}), Q);
  for (Sign s : kSigns) EXPECT_EQ(classify(sign_to_unit_interval(s)), s);
}

TEST(Interval, Formatting) {
  EXPECT_EQ(to_string(Interval(0.7, 0.9)), "[0.7, 0.9]");
  EXPECT_EQ(to_string(Interval(-0.1, -0.1)), "[-0.1, -0.1]");
  EXPECT_EQ(to_string(interval_mul({0.0, 0.0}, {-1.0, 0.0})), "[0, 0]");
  EXPECT_EQ(format_number(0.1 + 0.2), "0.3");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333");
}

TEST(IntervalProperty, OperatorsAreSound) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_interval = [&] {
    double a = u(rng), b = u(rng);
    return Interval(std::min(a, b), std::max(a, b));
  };
  auto inside = [&](const Interval& i) { return i.lo() + (i.hi() - i.lo()) * (u(rng) + 1.0) / 2.0; };
  for (int trial = 0; trial < 2000; ++trial) {
    const Interval a = random_interval(), b = random_interval();
    const Interval prod = interval_mul(a, b), sum = interval_add(a, b);
    for (int k = 0; k < 20; ++k) {
      const double x = inside(a), y = inside(b);
      EXPECT_TRUE(prod.contains(x * y, 1e-12));
      EXPECT_TRUE(sum.contains(std::clamp(x + y, -1.0, 1.0), 1e-12));
    }
  }
}
