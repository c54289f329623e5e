#include "rwre/domain.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rwre
{
namespace
{
void check_dim(int dim)
{
    if (dim < 1 || dim > kMaxDim)
    {
        throw std::invalid_argument("domain dimension must be in [1, "
                                    + std::to_string(kMaxDim) + "]");
    }
}

int floor_mod(int a, int m)
{
    int r = a % m;
    return r < 0 ? r + m : r;
}

std::vector<std::string> split(std::string const& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
    {
        parts.push_back(cur);
    }
    return parts;
}

}  // namespace

std::string to_string(ExitFace face)
{
    switch (face)
    {
        case ExitFace::none:
            return "none";
        case ExitFace::front:
            return "front";
        case ExitFace::back:
            return "back";
        case ExitFace::side:
            return "side";
    }
    return "none";
}

LatticeDomain LatticeDomain::box(int dim, int M)
{
    check_dim(dim);
    if (M < 1)
    {
        throw std::invalid_argument("box needs M >= 1");
    }
    LatticeDomain dom;
    dom.shape_ = Shape::box;
    dom.dim_ = dim;
    dom.scale_ = M;
    dom.lo_[0] = -M + 1;
    dom.hi_[0] = M - 1;
    // largest integer strictly below M^3/4
    auto const m3 = static_cast<std::int64_t>(M) * M * M;
    auto const half = static_cast<int>((m3 + 3) / 4 - 1);
    for (int i = 1; i < dim; ++i)
    {
        dom.lo_[i] = -half;
        dom.hi_[i] = half;
    }
    dom.finalize();
    return dom;
}

LatticeDomain LatticeDomain::slab(int dim, int L, int W)
{
    check_dim(dim);
    if (L < 1)
    {
        throw std::invalid_argument("slab needs L >= 1");
    }
    if (dim > 1 && (W < 2 || W % 2 != 0))
    {
        throw std::invalid_argument("slab transverse period W must be even and >= 2");
    }
    LatticeDomain dom;
    dom.shape_ = Shape::slab;
    dom.dim_ = dim;
    dom.scale_ = L;
    dom.period_ = dim > 1 ? W : 0;
    dom.lo_[0] = -L;
    dom.hi_[0] = L - 1;
    for (int i = 1; i < dim; ++i)
    {
        dom.lo_[i] = -W / 2;
        dom.hi_[i] = W / 2 - 1;
        dom.periodic_[i] = true;
    }
    dom.finalize();
    return dom;
}

LatticeDomain LatticeDomain::rect(int dim, Site lo, Site hi)
{
    check_dim(dim);
    LatticeDomain dom;
    dom.shape_ = Shape::rect;
    dom.dim_ = dim;
    for (int i = 0; i < dim; ++i)
    {
        if (hi[i] < lo[i])
        {
            throw std::invalid_argument("rect bounds must satisfy lo <= hi");
        }
    }
    for (int i = dim; i < kMaxDim; ++i)
    {
        lo[i] = hi[i] = 0;
    }
    dom.lo_ = lo;
    dom.hi_ = hi;
    dom.finalize();
    return dom;
}

LatticeDomain LatticeDomain::centered(int dim, Site const& center, int half_e1,
                                      int half_t)
{
    if (half_e1 < 1 || half_t < 1)
    {
        throw std::invalid_argument("centered box needs half widths >= 1");
    }
    Site lo{}, hi{};
    lo[0] = center[0] - half_e1 + 1;
    hi[0] = center[0] + half_e1 - 1;
    for (int i = 1; i < dim; ++i)
    {
        lo[i] = center[i] - half_t + 1;
        hi[i] = center[i] + half_t - 1;
    }
    return rect(dim, lo, hi);
}

void LatticeDomain::finalize()
{
    size_ = 1;
    for (int i = dim_ - 1; i >= 0; --i)
    {
        stride_[i] = size_;
        size_ *= static_cast<std::int64_t>(hi_[i] - lo_[i] + 1);
    }
}

Site LatticeDomain::fold(Site x) const
{
    for (int i = 0; i < dim_; ++i)
    {
        if (periodic_[i])
        {
            x[i] = lo_[i] + floor_mod(x[i] - lo_[i], hi_[i] - lo_[i] + 1);
        }
    }
    return x;
}

bool LatticeDomain::contains(Site const& x) const
{
    for (int i = 0; i < dim_; ++i)
    {
        if (!periodic_[i] && (x[i] < lo_[i] || x[i] > hi_[i]))
        {
            return false;
        }
    }
    return true;
}

std::int64_t LatticeDomain::index(Site const& x) const
{
    if (!contains(x))
    {
        return -1;
    }
    Site const y = fold(x);
    std::int64_t idx = 0;
    for (int i = 0; i < dim_; ++i)
    {
        idx += static_cast<std::int64_t>(y[i] - lo_[i]) * stride_[i];
    }
    return idx;
}

Site LatticeDomain::site_at(std::int64_t idx) const
{
    if (idx < 0 || idx >= size_)
    {
        throw std::out_of_range("site index outside domain");
    }
    Site x{};
    for (int i = 0; i < dim_; ++i)
    {
        x[i] = lo_[i] + static_cast<int>(idx / stride_[i]);
        idx %= stride_[i];
    }
    return x;
}

ExitFace LatticeDomain::classify_exit(Site const& x) const
{
    if (contains(x))
    {
        return ExitFace::none;
    }
    if (x[0] > hi_[0])
    {
        return ExitFace::front;
    }
    if (x[0] < lo_[0])
    {
        return ExitFace::back;
    }
    return ExitFace::side;
}

std::string LatticeDomain::describe() const
{
    std::ostringstream os;
    switch (shape_)
    {
        case Shape::box:
            os << "box:" << scale_;
            break;
        case Shape::slab:
            os << "slab:" << scale_ << ':' << period_;
            break;
        case Shape::rect:
            os << "rect";
            for (int i = 0; i < dim_; ++i)
            {
                os << ':' << lo_[i] << ',' << hi_[i];
            }
            break;
    }
    return os.str();
}

LatticeDomain parse_domain(int dim, std::string const& spec)
{
    auto const parts = split(spec, ':');
    try
    {
        if (parts.size() == 2 && parts[0] == "box")
        {
            return LatticeDomain::box(dim, std::stoi(parts[1]));
        }
        if (parts.size() == 3 && parts[0] == "slab")
        {
            return LatticeDomain::slab(dim, std::stoi(parts[1]), std::stoi(parts[2]));
        }
        if (parts.size() == static_cast<std::size_t>(dim) + 1 && parts[0] == "rect")
        {
            Site lo{}, hi{};
            for (int i = 0; i < dim; ++i)
            {
                auto const bounds = split(parts[i + 1], ',');
                if (bounds.size() != 2)
                {
                    throw std::invalid_argument("rect axis needs lo,hi");
                }
                lo[i] = std::stoi(bounds[0]);
                hi[i] = std::stoi(bounds[1]);
            }
            return LatticeDomain::rect(dim, lo, hi);
        }
    }
    catch (std::logic_error const& e)
    {
        throw std::invalid_argument("bad domain '" + spec + "': " + e.what());
    }
    throw std::invalid_argument("bad domain '" + spec
                                + "' (expected box:M, slab:L:W or rect:lo,hi:...)");
}

}  // namespace rwre
