#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "rwre/lattice.hpp"

using namespace rwre;

TEST(Direction, CanonicalOrder)
{
    for (int d = 2; d <= kMaxDim; ++d)
    {
        auto const dirs = directions(d);
        ASSERT_EQ(static_cast<int>(dirs.size()), 2 * d);
        std::set<std::pair<int, int>> seen;
        for (int k = 0; k < 2 * d; ++k)
        {
            EXPECT_EQ(dirs[k].index(), k);
            EXPECT_EQ(dirs[k].axis, k / 2 + 1);
            EXPECT_EQ(dirs[k].sign, k % 2 == 0 ? 1 : -1);
            seen.insert({dirs[k].axis, dirs[k].sign});
        }
        EXPECT_EQ(static_cast<int>(seen.size()), 2 * d);
    }
}

TEST(Direction, OppositeAndStep)
{
    Site x{};
    x[0] = 3;
    x[2] = -1;
    for (int k = 0; k < 8; ++k)
    {
        EXPECT_EQ(opposite(opposite(k)), k);
        EXPECT_EQ(step(step(x, k), opposite(k)), x);
    }
    EXPECT_EQ(step(x, 0)[0], 4);
    EXPECT_EQ(step(x, 1)[0], 2);
    EXPECT_EQ(step(x, 5)[2], -2);
}

TEST(TransitionVector, UniformAndDrift)
{
    auto v = TransitionVector::uniform(4);
    EXPECT_DOUBLE_EQ(v.sum(), 1.0);
    EXPECT_DOUBLE_EQ(v.drift(1), 0.0);
    v[0] += 0.01;
    v[1] -= 0.01;
    EXPECT_NEAR(v.drift(1), 0.02, 1e-15);
    EXPECT_NO_THROW(check_probability_vector(v));
    v[2] += 0.1;
    EXPECT_THROW(check_probability_vector(v), std::invalid_argument);
    auto w = TransitionVector::uniform(2);
    w[0] = -0.1;
    w[1] = 0.6;
    EXPECT_THROW(check_probability_vector(w), std::invalid_argument);
}

TEST(EncodeSite, InjectiveOnCube)
{
    for (int d : {2, 3, 4})
    {
        std::set<std::array<std::uint32_t, 3>> codes;
        int const r = 4;
        int count = 0;
        Site x{};
        std::function<void(int)> rec = [&](int axis) {
            if (axis == d)
            {
                codes.insert(encode_site(x, d));
                ++count;
                return;
            }
            for (int v = -r; v <= r; ++v)
            {
                x[axis] = v;
                rec(axis + 1);
            }
        };
        rec(0);
        EXPECT_EQ(static_cast<int>(codes.size()), count) << "d = " << d;
    }
}

TEST(EncodeSite, RejectsHugeCoordinates)
{
    Site x{};
    x[0] = 1 << 20;
    EXPECT_THROW(encode_site(x, 6), std::out_of_range);
    EXPECT_NO_THROW(encode_site(x, 2));
}
