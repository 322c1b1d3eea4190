#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rmdim/cover_dim.hpp"
#include "rmdim/error.hpp"
#include "rmdim/random.hpp"

using namespace rmdim;

namespace {

FinitePoset circle4() {
  using P = std::vector<std::pair<std::string, std::string>>;
  return FinitePoset::from_relations({"a", "b", "c", "d"}, P{{"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}});
}

Cover minimal_cover(const FinitePoset& p, std::initializer_list<std::size_t> points) {
  Cover c;
  for (auto x : points) c.members.push_back(p.up_set(x));
  return c;
}

// Members as masks over the induced sub-poset whose i-th element is idx[i].
std::vector<oracle::Mask> on_fiber(const std::vector<Subset>& members, const std::vector<std::size_t>& idx) {
  std::vector<oracle::Mask> out;
  for (const auto& m : members) {
    oracle::Mask mk = 0;
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (m.contains(idx[i])) mk |= oracle::Mask{1} << i;
    out.push_back(mk);
  }
  return out;
}

}  // namespace

TEST(Ord, CountsMultiplicityMinusOne) {
  const std::size_t n = 4;
  Cover c({Subset(n, {0, 1}), Subset(n, {1, 2}), Subset(n, {1, 3})});
  EXPECT_EQ(ord(c, Subset::full(n)), 2);
  EXPECT_EQ(ord(c, Subset(n, {0, 2})), 0);
  EXPECT_EQ(ord(c, Subset(n)), -1);
  EXPECT_THROW(ord(Cover({Subset(n, {0})}), Subset::full(n)), InputError);
}

TEST(CombinatorialEquivalence, SameIntersectionPattern) {
  const std::size_t n = 6;
  std::vector<Subset> f{Subset(n, {0, 1}), Subset(n, {1, 2}), Subset(n, {3})};
  std::vector<Subset> g{Subset(n, {4, 5}), Subset(n, {5, 0}), Subset(n, {2, 3})};
  std::vector<Subset> h{Subset(n, {0, 1}), Subset(n, {2}), Subset(n, {3})};
  EXPECT_TRUE(combinatorially_equivalent(f, g));
  EXPECT_FALSE(combinatorially_equivalent(f, h));
  EXPECT_THROW(combinatorially_equivalent(f, {Subset(n, {0})}), InputError);
}

TEST(DimCover, KnownModels) {
  const FinitePoset circle = circle4();
  EXPECT_EQ(dim_cover_exact(circle, minimal_cover(circle, {0, 1})).value, 1);
  EXPECT_EQ(oracle::dim(circle, oracle::to_masks(minimal_cover(circle, {0, 1}))), 1);

  using P = std::vector<std::pair<std::string, std::string>>;
  const FinitePoset interval = FinitePoset::from_relations({"a", "b", "c"}, P{{"a", "c"}, {"b", "c"}});
  const Cover a({Subset(3, {0, 2}), Subset(3, {1, 2})});
  EXPECT_EQ(dim_cover_exact(interval, a).value, 1);

  const FinitePoset anti = FinitePoset::antichain(5);
  const Cover pairs({Subset(5, {0, 1, 2}), Subset(5, {2, 3, 4}), Subset(5, {0, 4})});
  EXPECT_EQ(dim_cover_exact(anti, pairs).value, 0);
}

TEST(DimCover, MatchesExhaustiveOracle) {
  Philox4x32 gen(stream_key(101, 0));
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 3 + gen.below(4);
    const FinitePoset p = random_poset(n, 0.3 + 0.1 * static_cast<double>(gen.below(4)), gen);
    const Cover alpha = random_open_cover(p, 2 + gen.below(3), gen);
    const DimResult r = dim_cover_exact(p, alpha);
    ASSERT_EQ(r.value, oracle::dim(p, oracle::to_masks(alpha))) << "trial " << t;
    EXPECT_TRUE(r.exact);
    EXPECT_TRUE(refines(r.witness, alpha));
    EXPECT_TRUE(is_open_cover(Carrier(p), Subset::full(n), r.witness));
    EXPECT_EQ(ord(r.witness, Subset::full(n)), r.value);
  }
}

TEST(DimCover, UpperBoundNeverBelowExact) {
  Philox4x32 gen(stream_key(102, 0));
  for (int t = 0; t < 40; ++t) {
    const FinitePoset p = random_poset(8, 0.35, gen);
    const Cover alpha = random_open_cover(p, 3, gen);
    const int exact = dim_cover_exact(p, alpha).value;
    for (std::uint64_t budget : {0u, 10u, 100000u}) {
      const DimResult up = dim_cover_upper(p, alpha, budget);
      EXPECT_GE(up.value, exact);
      EXPECT_FALSE(up.exact);
      EXPECT_TRUE(refines(up.witness, alpha));
    }
    EXPECT_EQ(dim_cover_upper(p, alpha, 0).value, ord(alpha, Subset::full(p.size())));
  }
}

TEST(DimCover, InvariantUnderCombinatorialEquivalenceOfMinimalCovers) {
  // Relabelling the poset permutes the cover but keeps its nerve, so D is unchanged.
  Philox4x32 gen(stream_key(103, 0));
  for (int t = 0; t < 20; ++t) {
    const FinitePoset p = random_poset(6, 0.4, gen);
    const Cover alpha = random_open_cover(p, 3, gen);
    std::vector<std::size_t> perm{5, 4, 3, 2, 1, 0};
    std::vector<std::vector<bool>> leq(6, std::vector<bool>(6));
    for (std::size_t x = 0; x < 6; ++x)
      for (std::size_t y = 0; y < 6; ++y) leq[perm[x]][perm[y]] = p.leq(x, y);
    const FinitePoset q = FinitePoset::from_leq(p.labels(), leq);
    Cover beta;
    for (const auto& m : alpha.members) {
      Subset s(6);
      m.for_each([&](std::size_t x) { s.insert(perm[x]); });
      beta.members.push_back(s);
    }
    EXPECT_EQ(dim_cover_exact(p, alpha).value, dim_cover_exact(q, beta).value);
  }
}

TEST(DimCover, ExactRefusesLargePosets) {
  const FinitePoset p = FinitePoset::antichain(20);
  EXPECT_THROW(dim_cover_exact(p, Cover({Subset::full(20)})), SizeError);
  EXPECT_EQ(dim_cover_upper(p, Cover({Subset::full(20)}), 100).value, 0);
}

TEST(QN, PointMassInclusionIsOrderOfJoin) {
  const FinitePoset c = circle4();
  const auto env = BaseEnvironment::point_mass();
  const BundleSystem sys = make_inclusion_system(env, std::make_shared<const Carrier>(c), {Subset::full(4)});
  const auto path = sample_paths(env, 1, 8, 0).front();
  const Cover alpha = minimal_cover(c, {0, 1});
  for (std::size_t n = 1; n <= 6; ++n) EXPECT_EQ(q_n(sys, path, alpha, n), 1);
}

TEST(QN, KingmanAndCorollaryOnRandomBundles) {
  Philox4x32 gen(stream_key(104, 0));
  const auto env = BaseEnvironment::iid({"u", "v"}, {0.3, 0.7});
  for (int t = 0; t < 8; ++t) {
    const BundleSystem sys = random_poset_bundle(env, 6, 0.4, gen);
    const Cover alpha = random_open_cover(sys.poset(), 2, gen);
    for (const auto& path : sample_paths(env, 3, 6, 200 + t)) {
      EXPECT_TRUE(kingman_check(sys, path, alpha, 6).empty());
      for (std::size_t n = 1; n <= 5; ++n) {
        const int q = q_n(sys, path, alpha, n);
        EXPECT_LE(q, static_cast<int>(std::pow(2.0, static_cast<double>(n))) - 1);
        std::vector<std::size_t> idx;
        const FinitePoset sub = sys.poset().induced(sys.fiber(path[0]), &idx);
        EXPECT_EQ(q, oracle::dim(sub, on_fiber(joined_members(sys, path, alpha, n), idx)));
      }
    }
  }
}

TEST(MdimEstimate, RunningInfimumIsMonotone) {
  Philox4x32 gen(stream_key(105, 0));
  const auto env = BaseEnvironment::cyclic({"u", "v", "w"});
  const BundleSystem sys = random_poset_bundle(env, 6, 0.4, gen);
  const Cover alpha = random_open_cover(sys.poset(), 3, gen);
  const WeightedPaths paths = expectation_paths(env, 4, 6, 9);
  EXPECT_TRUE(paths.exact);
  const MdimReport r = mdim_estimate(sys, alpha, paths, 6, 3);
  ASSERT_EQ(r.running_inf.size(), 6u);
  for (std::size_t k = 1; k < 6; ++k) EXPECT_LE(r.running_inf[k], r.running_inf[k - 1]);
  EXPECT_EQ(r.estimate, r.running_inf.back());
  EXPECT_EQ(r.corollary_violations, 0u);
  const MdimReport serial = mdim_estimate(sys, alpha, paths, 6, 1);
  EXPECT_EQ(serial.mean_over_n, r.mean_over_n);
}
