#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "common/laws.hpp"
#include "common/oracles.hpp"
#include "rwre/concentration.hpp"

using namespace rwre;
using namespace rwre::testing;

namespace
{
SlabSpec const kSmall{2, 4, 2};
}

TEST(SampleZ, SsrwAllZero)
{
    auto const ens = sample_Z(ssrw_law(2), kSmall, 10, 1);
    for (double z : ens.z)
        EXPECT_EQ(z, 0.0);
    EXPECT_EQ(ens.mean.value, 0.0);
}

TEST(SampleZ, ConstantDriftHasNoVariance)
{
    double const lambda = 0.02;
    auto const ens = sample_Z(drift(2, lambda), kSmall, 10, 1);
    double const oracle = lambda * drift_slab_exit_time(2, 2, lambda);
    for (double z : ens.z)
        EXPECT_NEAR(z, oracle, 1e-10);
    EXPECT_NEAR(ens.central_moments.at(2.0).value, 0.0, 1e-10);
}

TEST(SampleZ, TwoPointSelfConsistent)
{
    auto const law = two_point(2, 0.02, 0.01);
    auto const small = sample_Z(law, kSmall, 100, 3);
    auto const big = sample_Z(law, kSmall, 1000, 4);
    EXPECT_GT(small.central_moments.at(2.0).value, 0.0);
    EXPECT_NEAR(small.mean.value, big.mean.value, 3 * std::hypot(small.mean.std_error, big.mean.std_error));
    EXPECT_LE(small.max_residual, 1e-10);
}

TEST(SampleZ, MatchesDenseOracle)
{
    auto const law = two_point(3, 0.02, 0.01);
    SlabSpec const slab{2, 4, 3};
    auto const ens = sample_Z(law, slab, 5, 8);
    DenseSlab const dense(3, 2, 4);
    for (std::size_t i = 0; i < ens.z.size(); ++i)
    {
        Environment const env(law, slab.domain(), ens.env_seeds[i]);
        auto const g = dense.solve(env, [&](Site const& x) { return env.at(x).drift(1); });
        EXPECT_NEAR(ens.z[i], g[dense.index(Site{})], 1e-10);
    }
}

TEST(CentralNorm, KnownSample)
{
    std::vector<double> const xs{-1, 1, -1, 1};
    EXPECT_DOUBLE_EQ(central_norm(xs, 2).value, 1.0);
    EXPECT_DOUBLE_EQ(central_norm(xs, 4).value, 1.0);
}

TEST(EfronStein, DeterministicLawIsZero)
{
    Environment const env(drift(2, 0.02), kSmall.domain(), 0);
    auto const es = efron_stein(env, kSmall, 1);
    EXPECT_EQ(es.v_plus, 0.0);
    EXPECT_EQ(es.v_minus, 0.0);
    EXPECT_EQ(es.sites, kSmall.state_count());
}

TEST(EfronStein, NonnegativeAndAdditive)
{
    Environment const env(two_point(2, 0.03), kSmall.domain(), 5);
    auto const es = efron_stein(env, kSmall, 2);
    EXPECT_GT(es.v_plus, 0.0);
    EXPECT_GT(es.v_minus, 0.0);
    double sp = 0, sm = 0;
    for (std::size_t i = 0; i < es.site_plus.size(); ++i)
    {
        EXPECT_GE(es.site_plus[i], 0.0);
        EXPECT_GE(es.site_minus[i], 0.0);
        sp += es.site_plus[i];
        sm += es.site_minus[i];
    }
    EXPECT_NEAR(sp, es.v_plus, 1e-15);
    EXPECT_NEAR(sm, es.v_minus, 1e-15);
}

TEST(EfronStein, MethodsAgree)
{
    Environment const env(two_point(2, 0.03, 0.01), kSmall.domain(), 5);
    EfronSteinOptions a, b;
    a.inner_replicates = b.inner_replicates = 3;
    b.method = ResampleMethod::resolve;
    auto const ra = efron_stein(env, kSmall, 2, a);
    auto const rb = efron_stein(env, kSmall, 2, b);
    EXPECT_NEAR(ra.v_plus, rb.v_plus, 1e-10);
    EXPECT_NEAR(ra.v_minus, rb.v_minus, 1e-10);
}

TEST(EfronStein, SolveCapEnforced)
{
    Environment const env(two_point(2, 0.03), kSmall.domain(), 5);
    EfronSteinOptions opts;
    opts.method = ResampleMethod::resolve;
    opts.solve_cap = 10;
    EXPECT_THROW(efron_stein(env, kSmall, 2, opts), std::length_error);
}

TEST(Perturbed, WarmColdRankOneAndDenseAgree)
{
    auto const law = two_point(3, 0.03, 0.01);
    SlabSpec const slab{2, 4, 3};
    auto const dom = slab.domain();
    DenseSlab const dense(3, 2, 4);
    for (int i = 0; i < 100; ++i)
    {
        Environment const env(law, dom, derive_seed(17, static_cast<std::uint64_t>(i)));
        Site const n = dom.site_at(static_cast<std::int64_t>(derive_seed(3, static_cast<std::uint64_t>(i)) % static_cast<std::uint64_t>(dom.size())));
        std::uint64_t const fresh = derive_seed(99, static_cast<std::uint64_t>(i));
        auto const base = green_apply_exact(env, slab, FieldSpec{}).values;
        double const warm = perturbed_z_resolve(env, slab, n, fresh, base);
        double const cold = perturbed_z_resolve(env, slab, n, fresh, {});
        double const r1 = perturbed_z_rank_one(env, slab, n, fresh);
        auto const penv = resample_site(env, n, fresh);
        double const ref = dense.solve(penv, [&](Site const& x) {
            return penv.at(x).drift(1);
        })[dense.index(Site{})];
        EXPECT_NEAR(warm, cold, 1e-9) << i;
        EXPECT_NEAR(r1, cold, 1e-9) << i;
        EXPECT_NEAR(ref, cold, 1e-9) << i;
    }
}

TEST(Bblm, Constant)
{
    EXPECT_NEAR(bblm_constant(2), 2.2545, 5e-4);
    double const e = std::sqrt(std::exp(1.0));
    EXPECT_DOUBLE_EQ(bblm_constant(4), std::sqrt(e / (e - 1) * 4));
}

TEST(Bblm, DeterministicEquality)
{
    auto const rep = bblm_check(drift(2, 0.02), kSmall, {2, 4}, 10, 1);
    for (auto const& row : rep.rows)
    {
        EXPECT_NEAR(row.lhs.value, 0.0, 1e-12);
        EXPECT_EQ(row.rhs.value, 0.0);
        EXPECT_TRUE(row.holds);
    }
}

TEST(Bblm, TwoPointHolds)
{
    EfronSteinOptions opts;
    opts.inner_replicates = 4;
    auto const rep = bblm_check(two_point(2, 0.02), kSmall, {2, 4}, 100, 7, opts);
    ASSERT_EQ(rep.rows.size(), 2u);
    EXPECT_TRUE(rep.efron_stein_holds);
    EXPECT_GT(rep.rows[0].margin, 0.0);
    EXPECT_TRUE(rep.rows[0].holds);
    EXPECT_TRUE(rep.rows[1].holds);
    EXPECT_FALSE(rep.bias_note.empty());
}

TEST(Bblm, Rejections)
{
    EXPECT_THROW(bblm_check(two_point(2, 0.02), kSmall, {1.5}, 10, 1), std::invalid_argument);
    EXPECT_THROW(bblm_check(two_point(2, 0.02), kSmall, {2}, 1, 1), std::invalid_argument);
}

TEST(MeanBound, ConstantDriftRatio)
{
    double const lambda = 0.02;
    int const L = 3;
    auto const rep = mean_bound_check(drift(2, lambda), SlabSpec{L, 4, 2}, 4, 1);
    EXPECT_TRUE(rep.precondition_ok);
    double const oracle = drift_slab_exit_time(2, L, lambda) / (2.0 * L * L);
    EXPECT_NEAR(rep.ratio.value, oracle, 1e-10);
    EXPECT_GE(rep.ratio.value, 0.4);
    EXPECT_TRUE(rep.holds);
}

TEST(MeanBound, SsrwPreconditionFails)
{
    auto const rep = mean_bound_check(ssrw_law(2), kSmall, 4, 1);
    EXPECT_FALSE(rep.precondition_ok);
    EXPECT_FALSE(rep.holds);
}

TEST(MeanBound, TwoPointWithDrift)
{
    auto const rep = mean_bound_check(two_point(4, 0.005, 0.02), SlabSpec{4, 4, 4}, 30, 2);
    EXPECT_TRUE(rep.precondition_ok);
    EXPECT_GE(rep.ratio.value + 3 * rep.ratio.std_error, 0.4);
}

TEST(Tail, TwoPointNinetiethPercentile)
{
    auto const ens = sample_Z(two_point(2, 0.02), kSmall, 1000, 5);
    std::vector<double> dev;
    for (double z : ens.z)
        dev.push_back(std::abs(z - ens.mean.value));
    std::sort(dev.begin(), dev.end());
    double const u90 = dev[899];
    auto const rep = tail_check(ens, 2, {0.0, u90}, 0.02 * std::pow(2.0, 0.25));
    ASSERT_EQ(rep.rows.size(), 2u);
    EXPECT_EQ(rep.rows[0].empirical, 1.0);
    EXPECT_TRUE(std::isinf(rep.rows[0].markov));
    EXPECT_TRUE(std::isinf(rep.rows[0].paper_form));
    EXPECT_NEAR(rep.rows[1].empirical, 0.1, 0.02);
    EXPECT_LE(rep.rows[1].empirical, rep.rows[1].markov);
    EXPECT_TRUE(rep.rows[1].consistent);
}

TEST(Tail, DeterministicTailsVanish)
{
    auto const ens = sample_Z(drift(2, 0.02), kSmall, 1000, 1);
    auto const rep = tail_check(ens, 2, {1e-6, 0.1}, 0.0);
    for (auto const& row : rep.rows)
        EXPECT_EQ(row.empirical, 0.0);
}

TEST(Tail, Rejections)
{
    auto const ens = sample_Z(two_point(2, 0.02), kSmall, 20, 5);
    EXPECT_THROW(tail_check(ens, 2, {0.1}, 0.01), std::invalid_argument);
    auto const big = sample_Z(two_point(2, 0.02), kSmall, 1000, 5);
    EXPECT_THROW(tail_check(big, 3, {0.1}, 0.01), std::invalid_argument);
}

TEST(Scaling, RoughlyProportional)
{
    auto const rows = sigma_scaling(2, kSmall, {0.005, 0.01, 0.02}, 2, 200, 3);
    ASSERT_EQ(rows.size(), 3u);
    double lo = 1e300, hi = 0;
    for (auto const& row : rows)
    {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
    }
    EXPECT_LT(hi / lo, 1.5);
}
