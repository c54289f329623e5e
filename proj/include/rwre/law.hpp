#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rwre/lattice.hpp"
#include "rwre/rng.hpp"

namespace rwre
{

enum class LawKind
{
    deterministic_drift,
    two_point,
    isotropic_plus_drift,
    custom_table,
};

std::string to_string(LawKind kind);
LawKind law_kind_from_string(std::string const& name);

//! Base variates for the isotropic construction.
enum class IsotropicBase
{
    uniform,     //!< U[-1, 1]
    rademacher,  //!< ±1
};

//! One atom of a finitely supported law.
struct LawAtom
{
    double weight = 0;
    TransitionVector vector;
};

//---------------------------------------------------------------------------//
/*!
 * Parameters for make_law. Which fields are read depends on the kind:
 *
 * - deterministic_drift: lambda
 * - two_point: amplitude (a), lambda (optional extra constant drift)
 * - isotropic_plus_drift: amplitude, lambda, base
 * - custom_table: atoms
 */
struct LawParams
{
    double lambda = 0;
    double amplitude = 0;
    IsotropicBase base = IsotropicBase::uniform;
    std::vector<LawAtom> atoms;
};

//---------------------------------------------------------------------------//
/*!
 * Single-site law of an i.i.d. environment.
 *
 * Construct with make_law; every instance samples valid transition vectors
 * whose entries stay within epsilon/(4d) of 1/(2d), with epsilon < 1.
 */
class EnvironmentLaw
{
  public:
    LawKind kind() const { return kind_; }
    int dimension() const { return dim_; }
    LawParams const& params() const { return params_; }

    //! Draw one transition vector.
    TransitionVector sample(CounterStream& rng) const;

    //! Mean vector E[omega(0, e)].
    TransitionVector const& mean() const { return mean_; }

    //! Perturbation size 4d ||omega(0) - 1/(2d)||_inf (exact or certified).
    double epsilon() const { return epsilon_; }

    //! Annealed drift E[d(0) . e1].
    double lambda() const { return mean_.drift(1); }

    //! Exact sigma_{2r} when the law permits it.
    std::optional<double> sigma_exact(int r) const;

    //! True when every draw is the same vector.
    bool is_deterministic() const;

    //! Short stable identifier such as "two-point(d=4,a=0.01,lambda=0)".
    std::string id() const;

    friend EnvironmentLaw
    make_law(LawKind kind, int dimension, LawParams const& params);

  private:
    EnvironmentLaw() = default;

    LawKind kind_ = LawKind::deterministic_drift;
    int dim_ = 0;
    LawParams params_;
    TransitionVector mean_;
    double epsilon_ = 0;
    std::vector<double> atom_cdf_;
};

//! Validating constructor; throws std::invalid_argument.
EnvironmentLaw make_law(LawKind kind, int dimension, LawParams const& params);

//! The simple symmetric random walk as a law.
EnvironmentLaw ssrw_law(int dimension);

//---------------------------------------------------------------------------//
// Moment functionals
//---------------------------------------------------------------------------//

//! Value with its Monte Carlo standard error (zero when exact).
struct Estimate
{
    double value = 0;
    double std_error = 0;
};

double epsilon_of(EnvironmentLaw const& law);

//! Analytic lambda; every built-in kind has one.
double lambda_of(EnvironmentLaw const& law);

//! Monte Carlo mean of d(0) . e1 with CLT error bar.
Estimate lambda_mc(EnvironmentLaw const& law, std::int64_t n_samples,
                   std::uint64_t seed);

//! Monte Carlo sigma_{2r}; centering uses the exact mean vector.
Estimate sigma_mc(EnvironmentLaw const& law, int r, std::int64_t n_samples,
                  std::uint64_t seed);

//! sigma_{2r}: exact when available, Monte Carlo otherwise.
Estimate sigma_of(EnvironmentLaw const& law, int r,
                  std::int64_t n_samples = 1'000'000, std::uint64_t seed = 0);

struct MomentReport
{
    double epsilon = 0;
    double lambda = 0;
    double lambda_std_error = 0;
    std::map<int, double> sigma;  //!< keyed by 2r
    std::map<int, double> sigma_std_error;
    std::int64_t sample_count = 0;  //!< zero when fully analytic
};

MomentReport moment_report(EnvironmentLaw const& law,
                           std::vector<int> const& r_values,
                           std::int64_t n_samples, std::uint64_t seed);

//! Var(p(e1)) - Cov(p(e1), p(-e1)) of the law, by Monte Carlo.
Estimate variance_covariance_gap(EnvironmentLaw const& law,
                                 std::int64_t n_samples, std::uint64_t seed);

}  // namespace rwre
