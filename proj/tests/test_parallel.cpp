#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "urnsync/parallel.hpp"

using namespace urnsync;

namespace {

double leaf_sum(std::size_t b, std::size_t e) {
  double s = 0;
  for (std::size_t k = b; k < e; ++k) s += 1.0 / (1.0 + double(k) * 0.37);
  return s;
}

} // namespace

TEST(TreeReduce, IndependentOfThreadCount) {
  const auto combine = [](double a, double b) { return a + b; };
  const double one = tree_reduce<double>(100000, 1, leaf_sum, combine);
  for (unsigned th : {2u, 3u, 8u, 64u}) EXPECT_EQ(tree_reduce<double>(100000, th, leaf_sum, combine), one);
}

TEST(TreeReduce, CoversEveryItemOnce) {
  const auto leaf = [](std::size_t b, std::size_t e) {
    std::vector<std::size_t> v;
    for (std::size_t k = b; k < e; ++k) v.push_back(k);
    return v;
  };
  const auto cat = [](std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  const auto all = tree_reduce<std::vector<std::size_t>>(1000, 4, leaf, cat, 7);
  ASSERT_EQ(all.size(), 1000u);
  for (std::size_t k = 0; k < 1000; ++k) EXPECT_EQ(all[k], k);
}

TEST(TreeReduce, EmptyRangeYieldsOneEmptyLeaf) {
  int calls = 0;
  const auto r = tree_reduce<int>(
      0, 4, [&](std::size_t b, std::size_t e) { ++calls; return int(e - b); }, [](int a, int b) { return a + b; });
  EXPECT_EQ(r, 0);
  EXPECT_EQ(calls, 1);
}

TEST(TreeReduce, PropagatesExceptions) {
  const auto leaf = [](std::size_t b, std::size_t) -> int {
    if (b >= 640) throw std::runtime_error("leaf failed");
    return 1;
  };
  EXPECT_THROW((void)tree_reduce<int>(2000, 4, leaf, [](int a, int b) { return a + b; }), std::runtime_error);
}
