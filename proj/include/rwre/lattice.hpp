#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rwre
{

//! Largest supported lattice dimension.
inline constexpr int kMaxDim = 6;
inline constexpr int kMaxDirs = 2 * kMaxDim;

//! Lattice point; coordinates past the active dimension are zero.
using Site = std::array<int, kMaxDim>;

//---------------------------------------------------------------------------//
/*!
 * Unit neighbor vector ±e_axis.
 *
 * Canonical order is axis ascending with + before -, so index 0 is +e1 and
 * index 1 is -e1.
 */
struct Direction
{
    int axis = 1;  //!< 1-based
    int sign = 1;  //!< +1 or -1

    constexpr int index() const { return 2 * (axis - 1) + (sign < 0 ? 1 : 0); }

    static constexpr Direction from_index(int k)
    {
        return {k / 2 + 1, (k % 2 == 0) ? 1 : -1};
    }

    friend constexpr bool operator==(Direction, Direction) = default;
};

//! All 2d directions in canonical order.
std::vector<Direction> directions(int dim);

//! Opposite direction index (+e_i <-> -e_i).
constexpr int opposite(int k)
{
    return k ^ 1;
}

//! Neighbor of `x` in direction index `k`.
inline Site step(Site x, int k)
{
    x[k / 2] += (k % 2 == 0) ? 1 : -1;
    return x;
}

//---------------------------------------------------------------------------//
/*!
 * Probability vector on the 2d nearest neighbors of a site.
 */
struct TransitionVector
{
    int dim = 0;
    std::array<double, kMaxDirs> p{};

    int size() const { return 2 * dim; }
    double operator[](int k) const { return p[k]; }
    double& operator[](int k) { return p[k]; }

    double sum() const;
    //! Local drift component along axis i (1-based): p(+e_i) - p(-e_i).
    double drift(int axis) const { return p[2 * (axis - 1)] - p[2 * (axis - 1) + 1]; }

    //! Simple symmetric walk weights 1/(2d).
    static TransitionVector uniform(int dim);

    friend bool operator==(TransitionVector const&, TransitionVector const&) = default;
};

//! Throws std::invalid_argument unless entries are >= 0 and sum to 1 (1e-12).
void check_probability_vector(TransitionVector const& v);

//---------------------------------------------------------------------------//
/*!
 * Injective 96-bit encoding of a site, used as the counter label of the
 * site-keyed generator. Each coordinate gets floor(96 / d) bits; throws
 * std::out_of_range if a coordinate does not fit.
 */
std::array<std::uint32_t, 3> encode_site(Site const& x, int dim);

std::string to_string(Site const& x, int dim);

}  // namespace rwre
