#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "common/laws.hpp"
#include "rwre/walk.hpp"

using namespace rwre;
using namespace rwre::testing;

namespace
{
Site at(int a, int b = 0, int c = 0, int d = 0)
{
    Site x{};
    x[0] = a;
    x[1] = b;
    x[2] = c;
    x[3] = d;
    return x;
}

// Back-plus-side exit probability of the simple walk on the d=2 box
// {|x1| < M} x {|x2| < M^(3/4)}, by a dense solve written from scratch.
double dense_ssrw_box_qB(int M)
{
    int const t = static_cast<int>(std::ceil(std::pow(M, 0.75))) - 1;
    int const n1 = 2 * M - 1, n2 = 2 * t + 1;
    int const n = n1 * n2;
    auto idx = [&](int a, int b) { return (a + M - 1) * n2 + (b + t); };
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    int const da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
    for (int a = -(M - 1); a <= M - 1; ++a)
        for (int b = -t; b <= t; ++b)
            for (int k = 0; k < 4; ++k)
            {
                int const a2 = a + da[k], b2 = b + db[k];
                if (a2 >= M)
                    continue;  // front
                if (a2 <= -M || std::abs(b2) > t)
                    rhs[idx(a, b)] += 0.25;
                else
                    A(idx(a, b), idx(a2, b2)) -= 0.25;
            }
    Eigen::VectorXd h = A.partialPivLu().solve(rhs);
    return h[idx(0, 0)];
}

Environment reflect_e1(Environment const& env, LatticeDomain const& box)
{
    Environment out = env;
    for (std::int64_t s = 0; s < box.size(); ++s)
    {
        Site x = box.site_at(s);
        Site xr = x;
        xr[0] = -x[0];
        auto v = env.at(xr);
        std::swap(v[0], v[1]);
        out = out.with_override(x, v);
    }
    return out;
}
}  // namespace

TEST(RunUntilExit, DegenerateRectExitsInOneStep)
{
    auto const dom = LatticeDomain::rect(2, at(0, 0), at(0, 0));
    Environment const env(two_point(2, 0.02), dom, 3);
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        auto const rec = run_until_exit(env, at(0, 0), dom, 10, seed);
        EXPECT_EQ(rec.exit_time, 1);
        EXPECT_FALSE(rec.censored);
    }
}

TEST(RunUntilExit, DeterministicGivenSeed)
{
    auto const dom = LatticeDomain::box(2, 3);
    Environment const env(two_point(2, 0.02), dom, 9);
    auto const a = run_until_exit(env, Site{}, dom, 1000, 77);
    auto const b = run_until_exit(env, Site{}, dom, 1000, 77);
    EXPECT_EQ(a.exit_site, b.exit_site);
    EXPECT_EQ(a.exit_time, b.exit_time);
}

TEST(RunUntilExit, CensoredAtCap)
{
    auto const dom = LatticeDomain::box(2, 3);
    Environment const env(ssrw_law(2), dom, 0);
    auto const rec = run_until_exit(env, Site{}, dom, 1, 5);
    EXPECT_TRUE(rec.censored);
    EXPECT_EQ(rec.exit_face, ExitFace::none);

    WalkOptions opts;
    opts.step_cap = 1;
    auto const est = estimate_exit_probs(ssrw_law(2), dom, Site{}, 2, 50, {1, 2}, opts);
    EXPECT_EQ(est.counts.censored, est.counts.total());
    EXPECT_DOUBLE_EQ(est.front.censored_fraction, 1.0);
}

TEST(ExitProbs, SsrwSlabFrontIsThreeFifths)
{
    // gambler's ruin on {-3..2} from 0 for the e1 coordinate
    double const oracle = 3.0 / 5.0;
    auto const slab = LatticeDomain::slab(2, 2, 4);
    auto const exact = exit_law_exact(DomainKernel::ssrw(slab), Site{});
    EXPECT_NEAR(exact.front, oracle, 1e-10);
    EXPECT_NEAR(exact.side, 0.0, 1e-15);

    auto const est = estimate_exit_probs(ssrw_law(2), slab, Site{}, 1, 20000, {4, 5});
    EXPECT_NEAR(est.front.mean, oracle, 3 * est.front.std_error);
}

TEST(ExitProbs, FrontIncreasesWithDrift)
{
    auto const box = LatticeDomain::box(2, 3);
    auto const lo = estimate_exit_probs(drift(2, 0.05), box, Site{}, 1, 5000, {1, 2});
    auto const hi = estimate_exit_probs(drift(2, 0.2), box, Site{}, 1, 5000, {1, 2});
    EXPECT_GT(hi.front.mean - lo.front.mean,
              3 * std::hypot(hi.front.std_error, lo.front.std_error));
}

TEST(BackExit, SsrwMatchesDenseOracle)
{
    double const oracle = dense_ssrw_box_qB(2);
    Environment const env(ssrw_law(2), LatticeDomain::box(2, 2), 0);
    EXPECT_NEAR(quenched_qB_exact(env, 2), oracle, 1e-10);
    EXPECT_GE(oracle, 0.5);

    auto const est = estimate_backexit_prob(ssrw_law(2), 2, 4, 5000, {1, 2});
    EXPECT_NEAR(est.not_front.mean, oracle, 3 * est.not_front.std_error);
    auto const q = quenched_qB(env, 2, 20000, 6);
    EXPECT_NEAR(q.mean, oracle, 3 * q.std_error);
}

TEST(BackExit, SymmetricLawFrontEqualsBack)
{
    auto const est = estimate_backexit_prob(two_point(2, 0.03), 3, 20, 2000, {3, 4});
    EXPECT_LE(std::abs(est.front_minus_back.mean), 3 * est.front_minus_back.std_error);
}

TEST(BackExit, ReflectionMapsFrontToBack)
{
    auto const box = LatticeDomain::box(2, 2);
    Environment const env(two_point(2, 0.04, 0.01), box, 12);
    auto const refl = reflect_e1(env, box);
    auto const a = exit_law_exact(DomainKernel(env, box), Site{});
    auto const b = exit_law_exact(DomainKernel(refl, box), Site{});
    EXPECT_NEAR(a.front, b.back, 1e-12);
    EXPECT_NEAR(a.back, b.front, 1e-12);
    EXPECT_NEAR(a.side, b.side, 1e-12);
}

TEST(BackExit, StrongDriftBelowSsrw)
{
    auto const strong = estimate_backexit_prob(drift(2, 0.2), 3, 1, 5000, {1, 2});
    auto const ssrw = estimate_backexit_prob(ssrw_law(2), 3, 1, 5000, {1, 2});
    EXPECT_LT(strong.back.mean + 3 * strong.back.std_error,
              ssrw.back.mean - 3 * ssrw.back.std_error);
}

TEST(ExitLaw, StoppingAtInnerDomainReproducesExitLaw)
{
    auto const outer = LatticeDomain::box(2, 3);
    auto const inner = LatticeDomain::rect(2, at(-1, -1), at(1, 1));
    Environment const env(two_point(2, 0.04, 0.02), outer, 21);
    DomainKernel const kin(env, inner), kout(env, outer);

    auto const g = visits_from(kin, inner.index(Site{}));
    std::map<Site, double> exit_mass;
    for (std::int64_t s = 0; s < kin.size(); ++s)
        for (int k = 0; k < kin.n_dirs(); ++k)
            if (kin.neighbor(s, k) < 0)
                exit_mass[step(inner.site_at(s), k)] += g[s] * kin.prob(s, k);

    double front = 0, total = 0;
    for (auto const& [y, m] : exit_mass)
    {
        total += m;
        front += m * exit_law_exact(kout, y).front;
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
    EXPECT_NEAR(front, exit_law_exact(kout, Site{}).front, 1e-10);
}

TEST(RhoOfQ, Values)
{
    EXPECT_EQ(rho_of_q(0.0), 0.0);
    EXPECT_DOUBLE_EQ(rho_of_q(0.5), 1.0);
    EXPECT_EQ(rho_of_q(1.0), std::numeric_limits<double>::infinity());
    EXPECT_THROW(rho_of_q(1.5), std::invalid_argument);
    EXPECT_THROW(rho_of_q(-0.1), std::invalid_argument);
    for (int i = 0; i <= 99; ++i)
    {
        double const q = i / 100.0;
        EXPECT_LE(q, std::sqrt(rho_of_q(q)) + 1e-15) << q;
    }
}

TEST(Displacement, SsrwIsZero)
{
    Environment const env(ssrw_law(3), LatticeDomain::box(3, 3), 0);
    auto const dx = displacement_delta(env, at(1, -1, 0), 3, 2);
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(dx.delta[i], 0.0, 1e-10);

    DisplacementOptions mc;
    mc.mode = EvalMode::mc;
    mc.n_walks = 5000;
    mc.seed = 3;
    auto const dm = displacement_delta(env, Site{}, 3, 2, mc);
    for (int i = 0; i < 3; ++i)
        EXPECT_LE(std::abs(dm.delta[i]), 3 * dm.std_error[i]);
}

TEST(Displacement, IncreasesWithDrift)
{
    auto const box = LatticeDomain::box(2, 3);
    Environment const a(drift(2, 0.02), box, 0), b(drift(2, 0.08), box, 0);
    double const da = displacement_delta(a, Site{}, 3, 2).delta[0];
    double const db = displacement_delta(b, Site{}, 3, 2).delta[0];
    EXPECT_GT(da, 0);
    EXPECT_GT(db, da);
}

TEST(Displacement, ExactMatchesMonteCarlo)
{
    Environment const env(two_point(2, 0.05, 0.02), LatticeDomain::box(2, 4), 17);
    auto const ex = displacement_delta(env, Site{}, 3, 4);
    EXPECT_LT(ex.residual, 1e-10);
    DisplacementOptions mc;
    mc.mode = EvalMode::mc;
    mc.n_walks = 20000;
    mc.seed = 8;
    auto const dm = displacement_delta(env, Site{}, 3, 4, mc);
    for (int i = 0; i < 2; ++i)
        EXPECT_NEAR(dm.delta[i], ex.delta[i], 3 * dm.std_error[i]) << i;
}

TEST(Displacement, StateCapEnforced)
{
    Environment const env(ssrw_law(2), LatticeDomain::box(2, 3), 0);
    DisplacementOptions opts;
    opts.state_cap = 10;
    EXPECT_THROW(displacement_delta(env, Site{}, 3, 3, opts), std::length_error);
}

TEST(EstimateP, SsrwIsZero)
{
    PParams pp;
    pp.gamma1 = 0.1;
    pp.n_env = 2;
    auto const res = estimate_p(ssrw_law(2), pp, 1);
    EXPECT_EQ(res.p.mean, 0.0);
    EXPECT_EQ(res.coverage, 1.0);
}

TEST(EstimateP, DriftThresholdAtExactDelta)
{
    auto const law = drift(2, 0.05);
    PParams pp;
    pp.n_env = 1;
    Environment const env(law, LatticeDomain::box(2, pp.M), 0);
    double const star = displacement_delta(env, Site{}, pp.L, pp.h).delta[0];
    ASSERT_GT(star, 0);

    pp.gamma1 = star / pp.L * (1 - 1e-9);
    EXPECT_EQ(estimate_p(law, pp, 0).p.mean, 1.0);
    pp.gamma1 = star / pp.L * (1 + 1e-9);
    EXPECT_EQ(estimate_p(law, pp, 0).p.mean, 0.0);
    pp.gamma1 = 0;
    EXPECT_EQ(estimate_p(law, pp, 0).p.mean, 1.0);
}

TEST(EstimateP, StrideReducesCoverage)
{
    PParams pp;
    pp.M = 3;
    pp.gamma1 = 0;
    pp.n_env = 1;
    pp.stride = 2;
    auto const res = estimate_p(drift(2, 0.05), pp, 0);
    EXPECT_EQ(res.stride, 2);
    EXPECT_LT(res.coverage, 1.0);
    EXPECT_GT(res.sites_evaluated, 0);
}
