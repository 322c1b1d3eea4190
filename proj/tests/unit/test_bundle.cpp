#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "rmdim/bundle.hpp"
#include "rmdim/error.hpp"
#include "rmdim/random.hpp"

using namespace rmdim;

TEST(Bundle, IterateMatchesManualComposition) {
  Philox4x32 gen(stream_key(21, 0));
  const auto env = BaseEnvironment::iid({"u", "v", "w"}, {0.2, 0.3, 0.5});
  const BundleSystem sys = random_metric_bundle(env, 15, 2, gen);
  for (const auto& path : sample_paths(env, 4, 9, 3)) {
    const OrbitTable t = iterate(sys, path, 9);
    const auto brute = oracle::orbit(sys, path, 9);
    ASSERT_EQ(t.steps(), 9u);
    for (std::size_t k = 0; k < 9; ++k)
      for (std::size_t p = 0; p < t.points.size(); ++p)
        EXPECT_EQ(static_cast<long>(t.orbit[k][p]), brute[k][t.points[p]]);
  }
}

TEST(Bundle, CocycleProperty) {
  Philox4x32 gen(stream_key(22, 0));
  const auto env = BaseEnvironment::markov({"s", "t"}, {{0.2, 0.8}, {0.6, 0.4}}, {3.0 / 7.0, 4.0 / 7.0});
  const BundleSystem sys = random_metric_bundle(env, 10, 1, gen);
  const auto path = sample_paths(env, 1, 12, 8).front();
  const OrbitTable whole = iterate(sys, path, 12);
  const std::size_t n = 5;
  const OrbitTable tail = iterate(sys, path.shifted(n), 7);
  for (std::size_t p = 0; p < whole.points.size(); ++p) {
    const std::size_t mid = whole.orbit[n][p];
    const auto it = std::find(tail.points.begin(), tail.points.end(), mid);
    ASSERT_NE(it, tail.points.end());
    const std::size_t q = static_cast<std::size_t>(it - tail.points.begin());
    for (std::size_t m = 0; m < 7; ++m) EXPECT_EQ(whole.orbit[n + m][p], tail.orbit[m][q]);
  }
}

TEST(Bundle, JoinedMembersAreDistinctNonemptyLabelledMembers) {
  Philox4x32 gen(stream_key(23, 0));
  const auto env = BaseEnvironment::iid({"u", "v"}, {0.5, 0.5});
  for (int t = 0; t < 10; ++t) {
    const BundleSystem sys = random_poset_bundle(env, 6, 0.4, gen);
    const Cover alpha = random_open_cover(sys.poset(), 3, gen);
    const auto path = sample_paths(env, 1, 4, t).front();
    const Cover labelled = join_orbit_cover(sys, path, alpha, 3);
    EXPECT_EQ(labelled.size(), 27u);
    std::set<Subset> expect;
    for (const auto& m : labelled.members)
      if (!m.empty()) expect.insert(m);
    const auto got = joined_members(sys, path, alpha, 3);
    EXPECT_EQ(std::set<Subset>(got.begin(), got.end()), expect);
    EXPECT_EQ(got.size(), expect.size());
  }
}

TEST(Bundle, ValidationReportsEveryIssueKind) {
  const auto env = BaseEnvironment::cyclic({"a", "b"});
  auto carrier = std::make_shared<const Carrier>(FiniteMetricSpace::circle(4));
  std::map<BundleSystem::Edge, PointMap> maps;
  maps[{0, 1}] = PointMap{Subset(4, {0, 1}), 4, {2, 1, -1, -1}};
  const BundleSystem sys(env, carrier, {Subset(4, {0, 1}), Subset(4, {1})}, maps);
  const ValidationReport r = validate(sys);
  EXPECT_FALSE(r.pass());
  bool missing = false, containment = false;
  for (const auto& i : r.issues) {
    missing |= i.kind == ValidationIssue::Kind::MissingMap;
    containment |= i.kind == ValidationIssue::Kind::Containment;
  }
  EXPECT_TRUE(missing);
  EXPECT_TRUE(containment);
}

TEST(Bundle, PosetBundleRejectsNonMonotoneMaps) {
  using P = std::vector<std::pair<std::string, std::string>>;
  const FinitePoset p = FinitePoset::from_relations({"a", "b"}, P{{"a", "b"}});
  const auto env = BaseEnvironment::point_mass();
  EXPECT_THROW(make_poset_bundle(env, p, {{1, 0}}), ContinuityError);
  EXPECT_NO_THROW(make_poset_bundle(env, p, {{1, 1}}));
}

TEST(Bundle, ForwardInvariantClosureAndRestriction) {
  const auto env = BaseEnvironment::point_mass();
  const BundleSystem sys = make_rotation_grid(env, 12, {4});
  const auto closed = forward_invariant_closure(sys, {Subset(12, {1})});
  EXPECT_EQ(closed[0].indices(), (std::vector<std::size_t>{1, 5, 9}));
  const BundleSystem sub = restrict_to(sys, closed);
  EXPECT_TRUE(validate(sub).pass());
  EXPECT_THROW(restrict_to(sys, {Subset(12, {1})}), Error);
}

TEST(Bundle, ProductShiftDropsLeftAndPadsRight) {
  const auto env = BaseEnvironment::point_mass();
  const BundleSystem sys = make_product_shift(env, {0.0, 0.5, 1.0}, 1);
  EXPECT_EQ(sys.carrier_size(), 27u);
  const std::size_t x = word_index({2, 1, 2}, 3);
  EXPECT_EQ(word_letters(x, 3, 1), (std::vector<std::size_t>{2, 1, 2}));
  EXPECT_EQ(word_letters(sys.map(0, 0)(x), 3, 1), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_DOUBLE_EQ(sys.metric().distance(word_index({0, 0, 0}, 3), word_index({0, 0, 2}, 3)), 0.5);
}

TEST(Bundle, RandomSubshiftFibersFollowAllowedLetters) {
  const auto env = BaseEnvironment::cyclic({"p", "q"});
  const BundleSystem sys = make_random_subshift(env, 1, 3, {{0, 1}, {2}});
  EXPECT_TRUE(validate(sys).pass());
  sys.fiber(1).for_each([&](std::size_t x) { EXPECT_EQ(word_letters(x, 3, 1).back(), 2u); });
  EXPECT_EQ(sys.fiber(0).count(), 18u);
}

TEST(Bundle, CheckPathRejectsForbiddenEdges) {
  const auto env = BaseEnvironment::cyclic({"a", "b"});
  const BundleSystem sys = make_rotation_grid(env, 5, {1, 2});
  EXPECT_THROW(check_path(sys, EnvPath{0, 0, {0, 0}}), InputError);
  EXPECT_NO_THROW(check_path(sys, EnvPath{0, 0, {0, 1, 0}}));
}
