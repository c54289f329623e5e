#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "rwre/lattice.hpp"

namespace rwre
{

enum class ExitFace
{
    none,   //!< still inside (censored walk)
    front,  //!< x.e1 above the domain (the front side of a box, e1-front of a slab)
    back,   //!< x.e1 below the domain
    side,   //!< any transverse face
};

std::string to_string(ExitFace face);

//---------------------------------------------------------------------------//
/*!
 * Finite lattice domain: a product of integer intervals, with some
 * transverse axes optionally identified periodically.
 *
 * Shapes:
 * - box(M): (-M, M) x (-M^3/4, M^3/4)^(d-1), open bounds
 * - slab(L, W): -L <= x.e1 < L; transverse axes periodic with period W,
 *   canonical transverse range [-W/2, W/2)
 * - rect(lo, hi): closed bounds per axis
 *
 * Sites are enumerated with axis 1 slowest, so each hyperplane x.e1 = c is
 * a contiguous index block.
 */
class LatticeDomain
{
  public:
    enum class Shape
    {
        box,
        slab,
        rect,
    };

    static LatticeDomain box(int dim, int M);
    static LatticeDomain slab(int dim, int L, int W);
    static LatticeDomain rect(int dim, Site lo, Site hi);
    //! Open box |y.e1 - x.e1| < half_e1, |y.ej - x.ej| < half_t around x.
    static LatticeDomain centered(int dim, Site const& center, int half_e1,
                                  int half_t);

    Shape shape() const { return shape_; }
    int dim() const { return dim_; }
    int lo(int axis) const { return lo_[axis - 1]; }
    int hi(int axis) const { return hi_[axis - 1]; }
    bool periodic(int axis) const { return periodic_[axis - 1]; }
    //! Shape parameter: M for box, L for slab, 0 for rect.
    int scale() const { return scale_; }
    //! Transverse period for slabs, 0 otherwise.
    int period() const { return period_; }

    std::int64_t size() const { return size_; }

    //! Map periodic coordinates into their canonical range.
    Site fold(Site x) const;

    //! Membership after folding.
    bool contains(Site const& x) const;

    //! Canonical index of a contained site; -1 when outside.
    std::int64_t index(Site const& x) const;

    Site site_at(std::int64_t idx) const;

    //! Face crossed when a walk arrives at `x` (outside) from inside.
    ExitFace classify_exit(Site const& x) const;

    std::int64_t stride(int axis) const { return stride_[axis - 1]; }

    std::string describe() const;

    friend bool operator==(LatticeDomain const&, LatticeDomain const&) = default;

  private:
    void finalize();

    Shape shape_ = Shape::rect;
    int dim_ = 0;
    int scale_ = 0;
    int period_ = 0;
    Site lo_{};
    Site hi_{};
    std::array<bool, kMaxDim> periodic_{};
    std::array<std::int64_t, kMaxDim> stride_{};
    std::int64_t size_ = 0;
};

//! Parse "box:M", "slab:L:W" or "rect:lo1,hi1:lo2,hi2:..." descriptors.
LatticeDomain parse_domain(int dim, std::string const& spec);

}  // namespace rwre
