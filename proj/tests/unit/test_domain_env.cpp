#include <gtest/gtest.h>

#include <cmath>

#include "rwre/domain.hpp"
#include "rwre/environment.hpp"

using namespace rwre;

namespace
{
EnvironmentLaw two_point(int d, double a, double lambda = 0)
{
    LawParams p;
    p.amplitude = a;
    p.lambda = lambda;
    return make_law(LawKind::two_point, d, p);
}

Site site(std::initializer_list<int> xs)
{
    Site s{};
    int i = 0;
    for (int x : xs)
        s[i++] = x;
    return s;
}
}  // namespace

TEST(Domain, BoxBounds)
{
    auto const b = LatticeDomain::box(2, 3);
    EXPECT_EQ(b.lo(1), -2);
    EXPECT_EQ(b.hi(1), 2);
    // M^3/4 = 6.75: |x_j| <= 6
    EXPECT_EQ(b.lo(2), -6);
    EXPECT_EQ(b.hi(2), 6);
    EXPECT_EQ(b.size(), 5 * 13);
    auto const b2 = LatticeDomain::box(3, 2);
    // M^3/4 = 2 exactly: open bound excludes 2
    EXPECT_EQ(b2.hi(2), 1);
    EXPECT_EQ(b2.size(), 3 * 3 * 3);
}

TEST(Domain, BoxExitFaces)
{
    auto const b = LatticeDomain::box(2, 2);
    EXPECT_EQ(b.classify_exit(site({2, 0})), ExitFace::front);
    EXPECT_EQ(b.classify_exit(site({-2, 1})), ExitFace::back);
    EXPECT_EQ(b.classify_exit(site({0, 2})), ExitFace::side);
    EXPECT_EQ(b.classify_exit(site({0, 0})), ExitFace::none);
}

TEST(Domain, SlabFoldAndFaces)
{
    auto const s = LatticeDomain::slab(3, 2, 4);
    EXPECT_EQ(s.size(), 4 * 16);
    EXPECT_EQ(s.lo(1), -2);
    EXPECT_EQ(s.hi(1), 1);
    EXPECT_EQ(s.lo(2), -2);
    EXPECT_EQ(s.hi(2), 1);
    EXPECT_TRUE(s.periodic(2));
    EXPECT_FALSE(s.periodic(1));
    EXPECT_EQ(s.fold(site({0, 2, -3})), site({0, -2, 1}));
    EXPECT_TRUE(s.contains(site({1, 17, -9})));
    EXPECT_EQ(s.classify_exit(site({2, 0, 0})), ExitFace::front);
    EXPECT_EQ(s.classify_exit(site({-3, 0, 0})), ExitFace::back);
    EXPECT_THROW(LatticeDomain::slab(2, 2, 3), std::invalid_argument);
}

TEST(Domain, IndexRoundTrip)
{
    for (auto const& dom : {LatticeDomain::box(3, 2), LatticeDomain::slab(4, 2, 4),
                            LatticeDomain::rect(2, site({-1, 0}), site({2, 3}))})
    {
        for (std::int64_t i = 0; i < dom.size(); ++i)
        {
            ASSERT_EQ(dom.index(dom.site_at(i)), i);
        }
        // axis 1 slowest: hyperplanes are contiguous blocks
        EXPECT_EQ(dom.site_at(dom.stride(1))[0], dom.lo(1) + 1);
    }
    EXPECT_EQ(LatticeDomain::box(2, 2).index(site({5, 0})), -1);
}

TEST(Domain, Parse)
{
    EXPECT_EQ(parse_domain(2, "box:3"), LatticeDomain::box(2, 3));
    EXPECT_EQ(parse_domain(4, "slab:2:4"), LatticeDomain::slab(4, 2, 4));
    EXPECT_EQ(parse_domain(2, "rect:-1,2:0,3"), LatticeDomain::rect(2, site({-1, 0}), site({2, 3})));
    EXPECT_THROW(parse_domain(2, "ball:3"), std::invalid_argument);
    EXPECT_THROW(parse_domain(2, "slab:2"), std::invalid_argument);
}

TEST(Environment, SsrwConstant)
{
    auto const law = ssrw_law(3);
    Environment const env(law, LatticeDomain::box(3, 2), 12345);
    for (std::int64_t i = 0; i < env.domain().size(); ++i)
        EXPECT_EQ(env.at(env.domain().site_at(i)), TransitionVector::uniform(3));
}

TEST(Environment, PureFunctionOfSeedAndSite)
{
    auto const law = two_point(2, 0.05);
    auto const dom = LatticeDomain::box(2, 3);
    Environment const a(law, dom, 9);
    Environment const b(law, dom, 9);
    Environment const c(law, dom, 10);
    int differ = 0;
    for (std::int64_t i = dom.size() - 1; i >= 0; --i)
    {
        Site const x = dom.site_at(i);
        EXPECT_EQ(a.at(x), b.at(x));
        differ += !(a.at(x) == c.at(x));
    }
    EXPECT_GT(differ, 0);
    // sites outside the domain still have vectors
    EXPECT_EQ(a.at(site({40, -7})), b.at(site({40, -7})));
}

TEST(Environment, SlabIsPeriodic)
{
    Environment const env(two_point(2, 0.05), LatticeDomain::slab(2, 2, 4), 4);
    EXPECT_EQ(env.at(site({0, 1})), env.at(site({0, 5})));
    EXPECT_EQ(env.at(site({0, -2})), env.at(site({0, 2})));
}

TEST(Environment, ResampleLocality)
{
    auto const dom = LatticeDomain::rect(2, site({-2, -2}), site({2, 2}));
    Environment const env(two_point(2, 0.05), dom, 3);
    for (std::int64_t i = 0; i < dom.size(); ++i)
    {
        Site const target = dom.site_at(i);
        auto const r = resample_site(env, target, 77);
        for (std::int64_t j = 0; j < dom.size(); ++j)
        {
            if (j == i)
                continue;
            Site const y = dom.site_at(j);
            ASSERT_EQ(r.at(y), env.at(y));
        }
        EXPECT_EQ(resample_site(env, target, 77).at(target), r.at(target));
    }
    EXPECT_THROW(resample_site(env, site({3, 0}), 1), std::out_of_range);
}

TEST(Environment, ResampleDrawsVary)
{
    auto const dom = LatticeDomain::box(2, 2);
    Environment const env(two_point(2, 0.05), dom, 3);
    int changed = 0;
    for (std::uint64_t s = 0; s < 64; ++s)
        changed += !(resample_site(env, Site{}, s).at(Site{}) == env.at(Site{}));
    EXPECT_GT(changed, 16);
    EXPECT_LT(changed, 48);
}

TEST(Environment, ResampleDeterministicLawUnchanged)
{
    LawParams p;
    p.lambda = 0.02;
    Environment const env(make_law(LawKind::deterministic_drift, 2, p), LatticeDomain::box(2, 2), 1);
    EXPECT_EQ(resample_site(env, Site{}, 5).at(Site{}), env.at(Site{}));
}

TEST(Environment, LocalDrift)
{
    LawParams p;
    p.lambda = 0.02;
    auto const law = make_law(LawKind::deterministic_drift, 4, p);
    Environment const env(law, LatticeDomain::box(4, 2), 1);
    auto const d = local_drift(env, Site{});
    EXPECT_NEAR(d[0], 0.02, 1e-15);
    for (int i = 1; i < 4; ++i)
        EXPECT_EQ(d[i], 0.0);
    EXPECT_THROW(local_drift(env, site({9, 0, 0, 0})), std::out_of_range);

    Environment const flat(ssrw_law(4), LatticeDomain::box(4, 2), 1);
    for (double x : local_drift(flat, Site{}))
        EXPECT_EQ(x, 0.0);
}

TEST(Environment, LocalDriftBound)
{
    auto const law = two_point(4, 0.02, 0.01);
    double const eps = epsilon_of(law);
    auto const dom = LatticeDomain::rect(4, site({-5, -5, -5, -5}), site({4, 4, 4, 4}));
    ASSERT_GE(dom.size(), 10000);
    Environment const env(law, dom, 8);
    std::int64_t const n = std::min<std::int64_t>(dom.size(), 100000);
    for (std::int64_t i = 0; i < n; ++i)
    {
        Site const x = dom.site_at(i);
        auto const d = local_drift(env, x);
        auto const v = env.at(x);
        ASSERT_NEAR(d[0], v[0] - v[1], 1e-15);
        for (int k = 0; k < 4; ++k)
            ASSERT_LE(std::abs(d[k]), eps / 4 + 1e-15);
    }
}
