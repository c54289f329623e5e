#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rwre/domain.hpp"
#include "rwre/environment.hpp"
#include "rwre/kernel.hpp"
#include "rwre/solver.hpp"
#include "rwre/walk.hpp"

namespace rwre
{

//---------------------------------------------------------------------------//
/*!
 * Slab -L <= x.e1 < L with transverse axes identified periodically with
 * period W. Walks exit at x.e1 = -L-1 or x.e1 = L.
 */
struct SlabSpec
{
    int L = 1;
    int W = 2;
    int d = 2;

    LatticeDomain domain() const { return LatticeDomain::slab(d, L, W); }
    std::int64_t state_count() const;
};

enum class FieldKind
{
    drift_e1,    //!< f(x) = d(x, omega) . e1
    ones,        //!< f = 1
    point_mass,  //!< f = indicator of one site
};

struct FieldSpec
{
    FieldKind kind = FieldKind::drift_e1;
    Site point{};

    static FieldSpec parse(std::string const& text, int dim);
    std::string describe(int dim) const;
};

//! f evaluated on the slab states in canonical order.
std::vector<double> make_field(Environment const& env, SlabSpec const& slab,
                               FieldSpec const& spec);

struct GreenOptions
{
    std::int64_t state_cap = 4'000'000;
    SolverOptions solver;
};

//---------------------------------------------------------------------------//
/*!
 * G_U[f] values on a set of slab sites.
 *
 * Exact fields cover every slab state in canonical order and carry the
 * solver residual; Monte Carlo fields cover the requested start sites and
 * carry per-site standard errors.
 */
struct GreenField
{
    SlabSpec slab;
    EvalMode method = EvalMode::exact;
    std::vector<Site> sites;
    std::vector<double> values;
    std::vector<double> std_errors;  //!< mc only
    double residual = 0;             //!< exact only: ||(I - P) G - f||_inf
    std::int64_t iterations = 0;
    double censored_fraction = 0;    //!< mc only

    //! Value at a site (folded); throws std::out_of_range if absent.
    double at(Site const& x) const;
};

//! Exact G_U[f] from a sparse iterative solve; `warm_start` seeds the solver.
GreenField green_apply_exact(Environment const& env, SlabSpec const& slab,
                             std::span<double const> f, GreenOptions const& opts = {},
                             std::span<double const> warm_start = {});

GreenField green_apply_exact(Environment const& env, SlabSpec const& slab,
                             FieldSpec const& f, GreenOptions const& opts = {});

struct GreenMcOptions
{
    std::vector<Site> starts{Site{}};
    std::int64_t step_cap = 0;  //!< 0: 100 x SSRW expected exit time
    int workers = 1;
    std::int64_t chunk = 4096;  //!< walks per parallel task
};

//! Monte Carlo G_U[f] at the start sites: mean path sum of f up to exit.
GreenField green_apply_mc(Environment const& env, SlabSpec const& slab,
                          std::span<double const> f, std::int64_t n_walks,
                          std::uint64_t seed, GreenMcOptions const& opts = {});

//---------------------------------------------------------------------------//
// rho-hat
//---------------------------------------------------------------------------//

struct HatRho
{
    double value = 0;          //!< supremum over the evaluated hyperplane sites
    Site argmax{};
    double min_green = 0;      //!< min of G_U[d.e1] over the evaluated sites
    std::int64_t sites_evaluated = 0;
    std::int64_t sites_total = 0;
    bool denominator_positive = true;  //!< false if some G <= -L
    double residual = 0;
};

/*!
 * sup over {x.e1 = 0, |x.ej| < M^3/4} of (1 - G/L) / (1 + G/L), with
 * G = G_U[d.e1](x) on the slab of half-width L and period W. Hyperplane
 * sites are limited to one transverse period and subsampled with `stride`.
 */
HatRho hat_rho(Environment const& env, int M, int L, int W, int stride = 1,
               GreenOptions const& opts = {});

//! The same supremum from an already solved G_U[d.e1] field.
HatRho hat_rho_from_field(GreenField const& green, int M, int stride = 1);

//---------------------------------------------------------------------------//
// Simple symmetric walk Green function
//---------------------------------------------------------------------------//

/*!
 * Matrix-free I - P for the simple symmetric walk on a periodic slab.
 * Symmetric positive definite, so it is solved with conjugate gradients.
 */
class SsrwSlabOperator
{
  public:
    explicit SsrwSlabOperator(SlabSpec const& slab);

    std::int64_t size() const { return size_; }
    void apply(std::span<double const> in, std::span<double> out) const;

  private:
    int dim_;
    std::int64_t size_;
    std::array<std::int64_t, kMaxDim> extent_{};
    std::array<std::int64_t, kMaxDim> stride_{};
};

//! g_{0,U}(0, y) for every slab state y (canonical order).
std::vector<double> ssrw_green_field(SlabSpec const& slab, double* residual = nullptr);

//! g_{0,U}(0, x): expected visits of the simple walk from 0 to x before exit.
double ssrw_green_slab(SlabSpec const& slab, Site const& x);

struct GammaWeightSum
{
    double value = 0;
    double exponent = 0;            //!< 2 / (2 - alpha)
    double truncation_change = -1;  //!< relative change on doubling W; -1 if not checked
    bool truncation_warning = false;
    double residual = 0;
};

//! sum over slab states of g_{0,U}(0, x)^(2/(2-alpha)).
GammaWeightSum gamma_weight_sum(int L, int W, double alpha, int d,
                                bool check_truncation = false);

}  // namespace rwre
