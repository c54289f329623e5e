#include "rwre/lattice.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rwre
{

std::vector<Direction> directions(int dim)
{
    std::vector<Direction> result;
    result.reserve(2 * dim);
    for (int k = 0; k < 2 * dim; ++k)
    {
        result.push_back(Direction::from_index(k));
    }
    return result;
}

double TransitionVector::sum() const
{
    double s = 0;
    for (int k = 0; k < size(); ++k)
    {
        s += p[k];
    }
    return s;
}

TransitionVector TransitionVector::uniform(int dim)
{
    TransitionVector v;
    v.dim = dim;
    for (int k = 0; k < 2 * dim; ++k)
    {
        v.p[k] = 1.0 / (2.0 * dim);
    }
    return v;
}

void check_probability_vector(TransitionVector const& v)
{
    if (v.dim < 1 || v.dim > kMaxDim)
    {
        throw std::invalid_argument("transition vector has invalid dimension");
    }
    for (int k = 0; k < v.size(); ++k)
    {
        if (!(v.p[k] >= 0.0) || v.p[k] > 1.0)
        {
            throw std::invalid_argument("transition probability outside [0,1]");
        }
    }
    if (std::abs(v.sum() - 1.0) > 1e-12)
    {
        throw std::invalid_argument("transition probabilities do not sum to 1");
    }
}

std::array<std::uint32_t, 3> encode_site(Site const& x, int dim)
{
    int const bits = 96 / dim;
    // Zigzag keeps small negative coordinates small.
    unsigned __int128 packed = 0;
    for (int i = 0; i < dim; ++i)
    {
        auto const v = static_cast<std::int64_t>(x[i]);
        auto const z = static_cast<std::uint64_t>((v << 1) ^ (v >> 63));
        if (bits < 64 && (z >> bits) != 0)
        {
            throw std::out_of_range("site coordinate too large to encode: "
                                    + to_string(x, dim));
        }
        packed = (packed << bits) | z;
    }
    return {static_cast<std::uint32_t>(packed),
            static_cast<std::uint32_t>(packed >> 32),
            static_cast<std::uint32_t>(packed >> 64)};
}

std::string to_string(Site const& x, int dim)
{
    std::ostringstream os;
    os << '(';
    for (int i = 0; i < dim; ++i)
    {
        os << (i ? "," : "") << x[i];
    }
    os << ')';
    return os.str();
}

}  // namespace rwre
