#include <gtest/gtest.h>

#include <cmath>

#include "rwre/law.hpp"

using namespace rwre;

namespace
{
EnvironmentLaw drift(int d, double lambda)
{
    LawParams p;
    p.lambda = lambda;
    return make_law(LawKind::deterministic_drift, d, p);
}

EnvironmentLaw two_point(int d, double a, double lambda = 0)
{
    LawParams p;
    p.amplitude = a;
    p.lambda = lambda;
    return make_law(LawKind::two_point, d, p);
}

EnvironmentLaw isotropic(int d, double a, double lambda, IsotropicBase base)
{
    LawParams p;
    p.amplitude = a;
    p.lambda = lambda;
    p.base = base;
    return make_law(LawKind::isotropic_plus_drift, d, p);
}

EnvironmentLaw table(int d)
{
    LawParams p;
    auto v1 = TransitionVector::uniform(d);
    v1[0] += 0.02;
    v1[3] -= 0.02;
    auto v2 = TransitionVector::uniform(d);
    v2[1] += 0.01;
    v2[2] -= 0.01;
    p.atoms = {{0.3, v1}, {0.7, v2}};
    return make_law(LawKind::custom_table, d, p);
}

std::vector<EnvironmentLaw> stochastic_laws()
{
    return {two_point(4, 0.01), two_point(2, 0.02, 0.01),
            isotropic(4, 0.005, 0.02, IsotropicBase::uniform),
            isotropic(3, 0.01, 0.0, IsotropicBase::rademacher), table(4)};
}
}  // namespace

TEST(MakeLaw, DeterministicDrift)
{
    auto const law = drift(4, 0.01);
    CounterStream rng(1, std::uint64_t{0});
    auto const v = law.sample(rng);
    EXPECT_DOUBLE_EQ(v[0], 0.125 + 0.005);
    EXPECT_DOUBLE_EQ(v[1], 0.125 - 0.005);
    for (int k = 2; k < 8; ++k)
        EXPECT_DOUBLE_EQ(v[k], 0.125);
    EXPECT_NEAR(epsilon_of(law), 0.08, 1e-15);
    EXPECT_NEAR(lambda_of(law), 0.01, 1e-15);
    EXPECT_TRUE(law.is_deterministic());
}

TEST(MakeLaw, SsrwIsZeroDrift)
{
    auto const law = drift(4, 0.0);
    EXPECT_EQ(epsilon_of(law), 0.0);
    EXPECT_EQ(law.mean(), TransitionVector::uniform(4));
    EXPECT_EQ(ssrw_law(4).mean(), TransitionVector::uniform(4));
}

TEST(MakeLaw, TwoPointOutcomes)
{
    auto const law = two_point(4, 0.01);
    EXPECT_NEAR(epsilon_of(law), 0.16, 1e-15);
    EXPECT_EQ(lambda_of(law), 0.0);
    int up = 0;
    for (std::uint64_t i = 0; i < 2000; ++i)
    {
        CounterStream rng(3, i);
        auto const v = law.sample(rng);
        double const s = (v[0] - 0.125) / 0.01;
        ASSERT_NEAR(std::abs(s), 1.0, 1e-12);
        EXPECT_NEAR(v[1] - 0.125, -s * 0.01, 1e-15);
        up += s > 0;
    }
    EXPECT_NEAR(up / 2000.0, 0.5, 0.05);
}

TEST(MakeLaw, Rejections)
{
    EXPECT_THROW(drift(1, 0.0), std::invalid_argument);
    EXPECT_THROW(drift(0, 0.0), std::invalid_argument);
    EXPECT_THROW(drift(7, 0.0), std::invalid_argument);
    EXPECT_THROW(drift(2, 0.25), std::invalid_argument);  // eps = 4 * 2 * 0.125 = 1
    EXPECT_THROW(two_point(4, 0.07), std::invalid_argument);
    EXPECT_THROW(two_point(4, -0.01), std::invalid_argument);
    EXPECT_THROW(make_law(LawKind::custom_table, 2, LawParams{}), std::invalid_argument);
    EXPECT_NO_THROW(drift(5, 0.01));
    EXPECT_NO_THROW(drift(3, 0.01));
}

TEST(Moments, TwoPointSigma)
{
    auto const law = two_point(4, 0.01);
    EXPECT_NEAR(sigma_of(law, 1).value, 0.01 * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(sigma_of(law, 2).value, 0.01 * std::pow(2.0, 0.25), 1e-15);
    auto const mc = sigma_mc(law, 2, 20000, 5);
    EXPECT_NEAR(mc.value, 0.01 * std::pow(2.0, 0.25), 1e-12);
}

TEST(Moments, DeterministicSigmaZero)
{
    for (int r : {1, 2, 4, 2304})
        EXPECT_EQ(sigma_of(drift(4, 0.02), r).value, 0.0);
}

TEST(Moments, LargeRDoesNotUnderflow)
{
    auto const law = isotropic(4, 0.001, 1e-4, IsotropicBase::rademacher);
    double const s = sigma_of(law, 2304).value;
    EXPECT_GT(s, 0.0);
    EXPECT_TRUE(std::isfinite(s));
    // sup-norm limit: max |a (xi - mean xi)| = a (2 - 1/d)
    EXPECT_LE(s, 0.001 * 1.75 * std::pow(8.0, 1.0 / 4608) * (1 + 1e-12));
    EXPECT_GT(s, 0.001 * 1.75 * 0.99);
}

TEST(Moments, RademacherExactMatchesMonteCarlo)
{
    auto const law = isotropic(3, 0.01, 0.0, IsotropicBase::rademacher);
    for (int r : {1, 2})
    {
        auto const exact = law.sigma_exact(r);
        ASSERT_TRUE(exact.has_value());
        auto const mc = sigma_mc(law, r, 200000, 11);
        EXPECT_NEAR(mc.value, *exact, 4 * mc.std_error + 1e-15) << "r = " << r;
    }
}

TEST(Moments, CustomTableExact)
{
    auto const law = table(4);
    // centered deviations: atom 1 w.p. 0.3, atom 2 w.p. 0.7
    auto const& m = law.mean();
    double const m0 = 0.125 + 0.3 * 0.02;
    EXPECT_NEAR(m[0], m0, 1e-15);
    double s2 = 0;
    auto v1 = TransitionVector::uniform(4);
    v1[0] += 0.02;
    v1[3] -= 0.02;
    auto v2 = TransitionVector::uniform(4);
    v2[1] += 0.01;
    v2[2] -= 0.01;
    for (int k = 0; k < 8; ++k)
    {
        s2 += 0.3 * std::pow(v1[k] - m[k], 2) + 0.7 * std::pow(v2[k] - m[k], 2);
    }
    EXPECT_NEAR(sigma_of(law, 1).value, std::sqrt(s2), 1e-15);
    EXPECT_NEAR(epsilon_of(law), 16 * 0.02, 1e-15);
}

TEST(Moments, IsotropicLambdaMonteCarlo)
{
    auto const law = isotropic(4, 0.005, 0.02, IsotropicBase::uniform);
    auto const est = lambda_mc(law, 100000, 21);
    EXPECT_NEAR(est.value, 0.02, 3 * est.std_error + 1e-15);
    EXPECT_GT(est.std_error, 0.0);
}

TEST(Moments, HolderChain)
{
    for (auto const& law : stochastic_laws())
    {
        double const d = law.dimension();
        double const eps = epsilon_of(law);
        auto const s2 = sigma_of(law, 1, 200000, 1);
        for (int r : {1, 2, 4})
        {
            auto const s2r = sigma_of(law, r, 200000, 2);
            double const c = std::pow(2 * d, (r - 1.0) / r);
            EXPECT_LE(s2.value, c * s2r.value + 3 * (s2.std_error + c * s2r.std_error))
                << law.id() << " r=" << r;
            EXPECT_LE(s2r.value, std::pow(2 * d, 1.0 / (2 * r)) * eps + 3 * s2r.std_error)
                << law.id() << " r=" << r;
        }
    }
}

TEST(Sampling, BandAndNormalization)
{
    for (auto const& law : stochastic_laws())
    {
        int const d = law.dimension();
        double const eps = epsilon_of(law);
        double const lo = 1.0 / (2 * d) - eps / (4 * d) - 1e-15;
        double const hi = 1.0 / (2 * d) + eps / (4 * d) + 1e-15;
        for (std::uint64_t i = 0; i < 100000; ++i)
        {
            CounterStream rng(77, i);
            auto const v = law.sample(rng);
            ASSERT_NEAR(v.sum(), 1.0, 1e-12);
            for (int k = 0; k < 2 * d; ++k)
            {
                ASSERT_GE(v[k], lo) << law.id();
                ASSERT_LE(v[k], hi) << law.id();
            }
        }
    }
}

TEST(Sampling, IsotropicGapPositive)
{
    auto const law = isotropic(4, 0.01, 0.0, IsotropicBase::uniform);
    auto const gap = variance_covariance_gap(law, 100000, 3);
    EXPECT_GT(gap.value - 3 * gap.std_error, 0.0);
}

TEST(MomentReport, KeysAndValues)
{
    auto const rep = moment_report(two_point(4, 0.01), {1, 2, 4}, 1000, 1);
    EXPECT_EQ(rep.sigma.size(), 3u);
    EXPECT_NEAR(rep.sigma.at(2), 0.01 * std::sqrt(2.0), 1e-15);
    EXPECT_EQ(rep.sample_count, 0);
}

TEST(LawKind, RoundTrip)
{
    for (auto k : {LawKind::deterministic_drift, LawKind::two_point,
                   LawKind::isotropic_plus_drift, LawKind::custom_table})
        EXPECT_EQ(law_kind_from_string(to_string(k)), k);
    EXPECT_THROW(law_kind_from_string("nope"), std::invalid_argument);
}
