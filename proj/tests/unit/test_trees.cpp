#include <gtest/gtest.h>

#include <omp.h>

#include "ccx/errors.hpp"
#include "ccx/trees.hpp"

TEST(Trees, StreamCountsFactorial) {
  for (int n = 2; n <= 7; ++n) {
    ccx::TreeStream s(n);
    ccx::OrderedTree t;
    std::uint64_t count = 0;
    while (s.next(t)) {
      EXPECT_TRUE(t.valid());
      EXPECT_EQ(ccx::tree_from_index(n, count), t);
      ++count;
    }
    EXPECT_EQ(count, ccx::tree_count(n));
  }
  EXPECT_EQ(ccx::tree_count(6), 120u);
  EXPECT_THROW(ccx::TreeStream(11), ccx::CapabilityError);
}

TEST(Trees, SpeerWeightsByHand) {
  // eta = (1, 1): d_1 = 2 and e_1 = 1, so 2! / 2 = 1.
  const auto a = ccx::speer_weight({3, {1, 1}});
  EXPECT_EQ(a.value, 1);
  EXPECT_EQ(a.t_exponents, (std::vector<int>{1, 0}));
  // eta = (1, 1, 1): 3! / (2 * 3) = 1.
  EXPECT_EQ(ccx::speer_weight({4, {1, 1, 1}}).value, 1);
  // eta = (1, 2, 1): d_1 = 2, e = (1, 1, 0): 2 / 4.
  EXPECT_EQ(ccx::speer_weight({4, {1, 2, 1}}).value, mpq_class(1, 2));
}

TEST(Trees, SumsAreCatalan) {
  const long catalan[] = {1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862};
  for (int n = 2; n <= 10; ++n) {
    EXPECT_EQ(ccx::lemma3_sum(n), catalan[n - 1]) << n;
    EXPECT_EQ(ccx::catalan_closed_form(n), catalan[n - 1]);
  }
  EXPECT_TRUE(ccx::generating_function_check(10));
}

TEST(Trees, ParallelMatchesSerial) {
  for (int threads : {1, 3}) {
    omp_set_num_threads(threads);
    for (int n = 2; n <= 8; ++n) EXPECT_EQ(ccx::lemma3_sum(n), ccx::lemma3_sum_serial(n));
  }
  omp_set_num_threads(1);
}

TEST(Trees, SeriesCoefficients) {
  const auto w = ccx::catalan_series(6);
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w[0], 1);
  EXPECT_EQ(w[5], 42);
}
