#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rwre/green.hpp"
#include "rwre/law.hpp"

namespace rwre
{

//---------------------------------------------------------------------------//
// Z = G_U[d.e1](0) over independent environments
//---------------------------------------------------------------------------//

struct ZOptions
{
    int workers = 1;
    std::vector<double> moment_orders{2.0, 4.0};
    GreenOptions green;
};

struct ZEnsemble
{
    std::string law_id;
    SlabSpec slab;
    std::vector<std::uint64_t> env_seeds;
    std::vector<double> z;
    Estimate mean;
    std::map<double, Estimate> central_moments;  //!< q -> ||Z - E^Z||_q
    double max_residual = 0;
};

//! Plug-in ||X - mean(X)||_q with a delta-method standard error.
Estimate central_norm(std::vector<double> const& xs, double q);

ZEnsemble sample_Z(EnvironmentLaw const& law, SlabSpec const& slab, std::int64_t n_env,
                   std::uint64_t seed, ZOptions const& opts = {});

//---------------------------------------------------------------------------//
// Efron-Stein variance proxies
//---------------------------------------------------------------------------//

enum class ResampleMethod
{
    rank_one,  //!< exact one-site replacement from the unperturbed Green function
    resolve,   //!< one warm-started solve per (site, replicate)
};

struct EfronSteinOptions
{
    int inner_replicates = 8;
    ResampleMethod method = ResampleMethod::rank_one;
    std::int64_t solve_cap = 2'000'000;  //!< bound on linear solves per environment
    std::int64_t dense_cap = 3000;       //!< rank_one: dense inverse up to this many states
    int workers = 1;
    GreenOptions green;
};

struct EfronSteinEstimate
{
    double z = 0;
    double v_plus = 0;
    double v_minus = 0;
    int inner_replicates = 0;
    std::int64_t sites = 0;
    std::int64_t solves = 0;
    std::vector<double> site_plus;   //!< per-site contribution, canonical order
    std::vector<double> site_minus;
};

/*!
 * V_+ = sum_n E'[(Z - Z'_n)_+^2] and V_- likewise, each expectation averaged
 * over inner replicates of resample_site at every slab site.
 */
EfronSteinEstimate efron_stein(Environment const& env, SlabSpec const& slab,
                               std::uint64_t seed, EfronSteinOptions const& opts = {});

//! Z'_n by an iterative solve of the resampled environment, warm-started
//! from `base` when it is nonempty.
double perturbed_z_resolve(Environment const& env, SlabSpec const& slab, Site const& n,
                           std::uint64_t fresh_seed, std::vector<double> const& base,
                           GreenOptions const& opts = {});

//! Z'_n from the rank-one update formula.
double perturbed_z_rank_one(Environment const& env, SlabSpec const& slab, Site const& n,
                            std::uint64_t fresh_seed, GreenOptions const& opts = {});

//---------------------------------------------------------------------------//
// Inequality reports
//---------------------------------------------------------------------------//

//! sqrt(sqrt(e) / (sqrt(e) - 1) q)
double bblm_constant(double q);

struct BblmRow
{
    double q = 2;
    double constant = 0;
    Estimate lhs;  //!< ||Z - EZ||_q
    Estimate rhs;  //!< constant (||V+||_{q/2}^{1/2} + ||V-||_{q/2}^{1/2})
    double margin = 0;
    double combined_se = 0;
    bool holds = false;  //!< margin + 3 combined_se >= 0
};

struct BblmReport
{
    std::string law_id;
    SlabSpec slab;
    std::int64_t n_env = 0;
    int inner_replicates = 0;
    Estimate z_mean;
    double z_variance = 0;
    Estimate v_plus_mean;
    Estimate v_minus_mean;
    bool efron_stein_holds = false;  //!< Var(Z) <= E[V+] + 3 SE
    std::vector<BblmRow> rows;
    std::string bias_note;
};

BblmReport bblm_check(EnvironmentLaw const& law, SlabSpec const& slab,
                      std::vector<double> const& q_values, std::int64_t n_env,
                      std::uint64_t seed, EfronSteinOptions const& opts = {});

struct MeanBoundReport
{
    bool precondition_ok = false;  //!< lambda > 0
    Estimate ratio;                 //!< E^[Z] / (d lambda L^2)
    double target = 0.4;
    bool holds = false;             //!< ratio + 3 SE >= 2/5
    double hypothesis_lhs = 0;      //!< lambda
    double hypothesis_rhs = 0;      //!< c6 sigma_2^2 (eps log L + 1/L), c6 = 1
    std::string note;
};

MeanBoundReport mean_bound_check(EnvironmentLaw const& law, SlabSpec const& slab,
                                 std::int64_t n_env, std::uint64_t seed,
                                 ZOptions const& opts = {});

struct TailRow
{
    double u = 0;
    double empirical = 0;
    double empirical_se = 0;
    double markov = 0;      //!< m_2r / u^2r from the empirical central moment
    double paper_form = 0;  //!< (c7 r)^r L (sigma_2r / u)^2r
    bool consistent = true;
};

struct TailReport
{
    int r = 2;
    double c7 = 1;
    double sigma_2r = 0;
    double central_moment_2r = 0;
    std::vector<TailRow> rows;
};

//! Needs at least 1000 samples and an even r >= 2.
TailReport tail_check(ZEnsemble const& ensemble, int r, std::vector<double> const& u_grid,
                      double sigma_2r, double c7 = 1.0);

struct ScalingRow
{
    double amplitude = 0;
    double sigma_2r = 0;
    Estimate central_norm;
    double ratio = 0;  //!< central_norm / sigma_2r
};

//! ||Z - EZ||_2r against sigma_2r for two-point laws of several amplitudes.
std::vector<ScalingRow> sigma_scaling(int d, SlabSpec const& slab,
                                      std::vector<double> const& amplitudes, int r,
                                      std::int64_t n_env, std::uint64_t seed,
                                      ZOptions const& opts = {});

}  // namespace rwre
