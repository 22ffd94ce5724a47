#include <random>
#include <set>

#include <gtest/gtest.h>

#include "kprov/errors.h"
#include "kprov/filter.h"
#include "kprov/model.h"
#include "kprov/resources.h"
#include "test_util.h"

namespace kprov {
namespace {

using testing::Res;

ResourceVector RandomVector(std::mt19937& rng, int64_t max) {
  std::uniform_int_distribution<int64_t> d(0, max);
  return {d(rng), d(rng), d(rng), d(rng)};
}

TEST(FitsTest, ComponentWiseDominance) {
  EXPECT_TRUE(Fits(Res(1000, 1), Res(8000, 7)));
  EXPECT_TRUE(Fits(Res(0, 0, 0, 0), Res(0, 0, 0, 0)));
  EXPECT_TRUE(Fits(Res(0, 0, 0, 0), Res(5, 1, 3, 2)));
  EXPECT_FALSE(Fits(Res(0, 8), Res(0, 7)));
  EXPECT_FALSE(Fits(Res(1, 0, 0, 0), Res(0, 9, 9, 9)));
  EXPECT_FALSE(Fits(Res(0, 0, 0, 11), Res(9, 9, 9, 10)));
}

TEST(FitsTest, ReflexiveAndTransitive) {
  std::mt19937 rng(17);
  for (int i = 0; i < 2000; ++i) {
    ResourceVector a = RandomVector(rng, 4);
    ResourceVector b = RandomVector(rng, 4);
    ResourceVector c = RandomVector(rng, 4);
    EXPECT_TRUE(Fits(a, a));
    if (Fits(a, b) && Fits(b, c)) EXPECT_TRUE(Fits(a, c));
  }
}

TEST(ResourceVectorTest, Arithmetic) {
  ResourceVector a = Res(1000, 1, 100, 10);
  ResourceVector b = Res(500, 0, 50, 5);
  EXPECT_EQ(a + b, Res(1500, 1, 150, 15));
  EXPECT_EQ(a - b, Res(500, 1, 50, 5));
  EXPECT_FALSE((b - a).IsNonNegative());
  EXPECT_TRUE(ResourceVector{}.IsZero());
}

TEST(GroupKeyTest, RoundsMemoryAndDiskUp) {
  GroupKey key = GroupKeyOf(Res(1000, 1, 4000, 10000), 1024, 1024);
  EXPECT_EQ(key, (GroupKey{1000, 1, 4096, 10240}));
  EXPECT_EQ(GroupKeyOf(Res(1000, 1, 4096, 0), 1024, 1024).memory_mib, 4096);
  EXPECT_EQ(GroupKeyOf(Res(1000, 1, 4097, 1), 1024, 1024), (GroupKey{1000, 1, 5120, 1024}));
}

TEST(GroupKeyTest, IdenticalRequestsShareAKey) {
  EXPECT_EQ(GroupKeyOf(Res(1000, 1, 3000, 9000), 1024, 1024),
            GroupKeyOf(Res(1000, 1, 3000, 9000), 1024, 1024));
  EXPECT_NE(GroupKeyOf(Res(1000, 0, 3000, 9000), 1024, 1024),
            GroupKeyOf(Res(1000, 1, 3000, 9000), 1024, 1024));
}

TEST(GroupKeyTest, Idempotent) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int64_t> q(1, 3000);
  for (int i = 0; i < 2000; ++i) {
    int64_t mq = q(rng);
    int64_t dq = q(rng);
    GroupKey once = GroupKeyOf(RandomVector(rng, 100000), mq, dq);
    EXPECT_EQ(GroupKeyOf(once.ToVector(), mq, dq), once);
    EXPECT_EQ(once.memory_mib % mq, 0);
    EXPECT_EQ(once.disk_mib % dq, 0);
  }
}

TEST(GroupKeyTest, RejectsNonPositiveQuantum) {
  EXPECT_THROW(GroupKeyOf(Res(1, 1, 1, 1), 0, 1024), std::invalid_argument);
}

TEST(GroupKeyTest, StringRoundTrip) {
  GroupKey key{1500, 2, 8192, 20480};
  EXPECT_EQ(key.ToString(), "c1500-g2-m8192-d20480");
  EXPECT_EQ(GroupKey::Parse(key.ToString()), key);
  EXPECT_THROW(GroupKey::Parse("c1-g2"), InvalidValue);
}

TEST(FilterTest, EmptyMatchesAll) {
  EXPECT_TRUE(EvalFilter(FilterExpr{}, {}));
  EXPECT_TRUE(EvalFilter(FilterExpr{}, {{"a", "b"}}));
}

TEST(FilterTest, EqOnSiteAttribute) {
  FilterExpr expr{{{"GLIDEIN_Site", FilterOp::kEq, {"SDSC-PRP"}}}};
  EXPECT_TRUE(EvalFilter(expr, {{"GLIDEIN_Site", "SDSC-PRP"}}));
  EXPECT_FALSE(EvalFilter(expr, {{"GLIDEIN_Site", "UCSD"}}));
}

TEST(FilterTest, InSet) {
  FilterExpr expr{{{"gpu_type", FilterOp::kIn, {"A100", "A40", "V100"}}}};
  EXPECT_FALSE(EvalFilter(expr, {{"gpu_type", "K80"}}));
  EXPECT_TRUE(EvalFilter(expr, {{"gpu_type", "A40"}}));
}

TEST(FilterTest, MissingAttribute) {
  Attributes none;
  EXPECT_FALSE(EvalFilter({{{"x", FilterOp::kEq, {"1"}}}}, none));
  EXPECT_FALSE(EvalFilter({{{"x", FilterOp::kGe, {"1"}}}}, none));
  EXPECT_FALSE(EvalFilter({{{"x", FilterOp::kLe, {"1"}}}}, none));
  EXPECT_FALSE(EvalFilter({{{"x", FilterOp::kIn, {"1"}}}}, none));
  EXPECT_TRUE(EvalFilter({{{"x", FilterOp::kNe, {"1"}}}}, none));
}

TEST(FilterTest, NumericComparisonFallsBackToLexicographic) {
  EXPECT_TRUE(EvalFilter({{{"Memory", FilterOp::kGe, {"900"}}}}, {{"Memory", "1000"}}));
  EXPECT_FALSE(EvalFilter({{{"Memory", FilterOp::kLe, {"900"}}}}, {{"Memory", "1000"}}));
  EXPECT_TRUE(EvalFilter({{{"v", FilterOp::kGe, {"abc"}}}}, {{"v", "abd"}}));
  EXPECT_TRUE(EvalFilter({{{"v", FilterOp::kLe, {"2.5"}}}}, {{"v", "2.25"}}));
}

TEST(FilterTest, Conjunction) {
  FilterExpr expr = ParseFilter("a == 1 AND b != 2");
  EXPECT_TRUE(EvalFilter(expr, {{"a", "1"}, {"b", "3"}}));
  EXPECT_FALSE(EvalFilter(expr, {{"a", "1"}, {"b", "2"}}));
  EXPECT_FALSE(EvalFilter(expr, {{"b", "3"}}));
}

// Attributes the expression does not name never change the outcome.
TEST(FilterTest, IgnoresUnnamedAttributes) {
  std::mt19937 rng(99);
  const std::vector<std::string> names = {"a", "b", "c", "d", "e", "f"};
  const std::vector<std::string> values = {"0", "1", "2", "10", "x", "y"};
  const std::vector<FilterOp> ops = {FilterOp::kEq, FilterOp::kNe, FilterOp::kGe, FilterOp::kLe,
                                     FilterOp::kIn};
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };
  for (int iter = 0; iter < 3000; ++iter) {
    FilterExpr expr;
    std::set<std::string> named;
    for (int c = 0, n = static_cast<int>(rng() % 3); c < n; ++c) {
      FilterClause clause{pick(names), pick(ops), {pick(values)}};
      if (clause.op == FilterOp::kIn) clause.values.push_back(pick(values));
      named.insert(clause.attribute);
      expr.clauses.push_back(clause);
    }
    Attributes attrs;
    for (const auto& name : names) {
      if (rng() % 2) attrs[name] = pick(values);
    }
    bool before = EvalFilter(expr, attrs);
    Attributes perturbed = attrs;
    for (const auto& name : names) {
      if (named.contains(name)) continue;
      if (rng() % 2) {
        perturbed[name] = pick(values);
      } else {
        perturbed.erase(name);
      }
    }
    perturbed["zz_unrelated"] = pick(values);
    EXPECT_EQ(EvalFilter(expr, perturbed), before);
  }
}

TEST(ParseFilterTest, EmptyTextIsMatchAll) {
  EXPECT_TRUE(ParseFilter("").clauses.empty());
  EXPECT_TRUE(ParseFilter("   \t").clauses.empty());
}

TEST(ParseFilterTest, SingleEqClause) {
  FilterExpr expr = ParseFilter("GLIDEIN_Site == SDSC-PRP");
  ASSERT_EQ(expr.clauses.size(), 1u);
  EXPECT_EQ(expr.clauses[0].attribute, "GLIDEIN_Site");
  EXPECT_EQ(expr.clauses[0].op, FilterOp::kEq);
  EXPECT_EQ(expr.clauses[0].values, std::vector<std::string>{"SDSC-PRP"});
}

TEST(ParseFilterTest, InAndComparisons) {
  FilterExpr expr = ParseFilter("gpu_type IN A100|A40|V100 AND Memory >= 1024 AND x <= 3");
  ASSERT_EQ(expr.clauses.size(), 3u);
  EXPECT_EQ(expr.clauses[0].op, FilterOp::kIn);
  EXPECT_EQ(expr.clauses[0].values, (std::vector<std::string>{"A100", "A40", "V100"}));
  EXPECT_EQ(expr.clauses[1].op, FilterOp::kGe);
  EXPECT_EQ(expr.clauses[2].op, FilterOp::kLe);
}

TEST(ParseFilterTest, Errors) {
  EXPECT_THROW(ParseFilter("x == 1 AND"), FilterSyntax);
  EXPECT_THROW(ParseFilter("x = 1"), FilterSyntax);
  EXPECT_THROW(ParseFilter("x ~ 1"), FilterSyntax);
  EXPECT_THROW(ParseFilter("x =="), FilterSyntax);
  EXPECT_THROW(ParseFilter("x IN a||b"), FilterSyntax);
}

TEST(ParseFilterTest, FormatRoundTrip) {
  for (const char* text : {"a == 1", "GLIDEIN_Site == SDSC-PRP AND gpu IN A100|V100",
                           "n >= 4 AND m <= 8 AND s != \"two words\""}) {
    FilterExpr expr = ParseFilter(text);
    EXPECT_EQ(ParseFilter(FormatFilter(expr)), expr) << text;
  }
}

TEST(AffinityTest, PlainAndNegatedRules) {
  AffinityRule gpu{"gpu-type", {"A100", "A40", "V100"}, false};
  AffinityRule low_power{"nautilus.io/low-power", {"true"}, true};
  EXPECT_TRUE(AffinitySatisfied(gpu, {{"gpu-type", "A40"}}));
  EXPECT_FALSE(AffinitySatisfied(gpu, {{"gpu-type", "K80"}}));
  EXPECT_FALSE(AffinitySatisfied(gpu, {}));
  EXPECT_TRUE(AffinitySatisfied(low_power, {}));
  EXPECT_TRUE(AffinitySatisfied(low_power, {{"nautilus.io/low-power", "false"}}));
  EXPECT_FALSE(AffinitySatisfied(low_power, {{"nautilus.io/low-power", "true"}}));
}

TEST(StateNamesTest, RoundTrip) {
  for (JobState s : {JobState::kIdle, JobState::kRunning, JobState::kCompleted,
                     JobState::kRemoved}) {
    EXPECT_EQ(ParseJobState(ToString(s)), s);
  }
  for (PodPhase p : {PodPhase::kPending, PodPhase::kRunning, PodPhase::kSucceeded,
                     PodPhase::kFailed}) {
    EXPECT_EQ(ParsePodPhase(ToString(p)), p);
  }
}

}  // namespace
}  // namespace kprov
