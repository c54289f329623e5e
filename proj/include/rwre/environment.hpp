#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>

#include "rwre/domain.hpp"
#include "rwre/law.hpp"

namespace rwre
{

//---------------------------------------------------------------------------//
/*!
 * Lazily evaluated i.i.d. environment.
 *
 * The vector at site x is drawn from the law with a Philox stream keyed on
 * (master seed, encoded x), so it is a pure function of the law, the seed,
 * the site and the override table. On a slab domain the field is periodic
 * in the transverse axes (sites are folded before lookup).
 */
class Environment
{
  public:
    Environment(EnvironmentLaw law, LatticeDomain domain, std::uint64_t master_seed);

    EnvironmentLaw const& law() const { return *law_; }
    LatticeDomain const& domain() const { return domain_; }
    std::uint64_t master_seed() const { return seed_; }
    int dim() const { return law_->dimension(); }

    //! Transition vector at any lattice site (inside the domain or not).
    TransitionVector at(Site const& x) const;

    std::map<Site, TransitionVector> const& overrides() const { return overrides_; }

    //! Copy with the vector at `x` replaced.
    Environment with_override(Site const& x, TransitionVector const& v) const;

  private:
    std::shared_ptr<EnvironmentLaw const> law_;
    LatticeDomain domain_;
    std::uint64_t seed_;
    std::map<Site, TransitionVector> overrides_;
};

//! Fresh draw from the law keyed on (seed, site).
TransitionVector draw_site(EnvironmentLaw const& law, std::uint64_t seed,
                           Site const& x);

Environment sample_environment(EnvironmentLaw const& law,
                               LatticeDomain const& domain,
                               std::uint64_t master_seed);

//! Independent redraw of one site; throws std::out_of_range outside the domain.
Environment resample_site(Environment const& env, Site const& x,
                          std::uint64_t fresh_seed);

//! d(x, omega) = sum_e omega(x, e) e; throws std::out_of_range outside the domain.
std::array<double, kMaxDim> local_drift(Environment const& env, Site const& x);

}  // namespace rwre
