#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rwre/domain.hpp"
#include "rwre/environment.hpp"

namespace rwre
{

//---------------------------------------------------------------------------//
/*!
 * Quenched transition kernel restricted to the states of a finite domain.
 *
 * Stores, per state and direction, the transition probability and either
 * the neighbor's state index or a negative exit code. Serves both the Monte
 * Carlo walker (via cumulative weights) and the absorbing-chain solves
 * (as the operator I - P on transient states).
 */
class DomainKernel
{
  public:
    //! Exit codes stored in the neighbor table.
    static constexpr std::int64_t kExitFront = -1;
    static constexpr std::int64_t kExitBack = -2;
    static constexpr std::int64_t kExitSide = -3;

    DomainKernel(Environment const& env, LatticeDomain const& domain);

    //! Kernel of the simple symmetric walk.
    static DomainKernel ssrw(LatticeDomain const& domain);

    LatticeDomain const& domain() const { return domain_; }
    int dim() const { return dim_; }
    int n_dirs() const { return 2 * dim_; }
    std::int64_t size() const { return size_; }

    double prob(std::int64_t state, int k) const { return probs_[state * n_dirs() + k]; }
    std::int64_t neighbor(std::int64_t state, int k) const
    {
        return nbr_[state * n_dirs() + k];
    }

    //! Direction drawn with the state's weights from a uniform u in [0, 1).
    int pick(std::int64_t state, double u) const
    {
        double const* cum = &cum_[state * n_dirs()];
        int k = 0;
        int const last = n_dirs() - 1;
        while (k < last && u >= cum[k])
        {
            ++k;
        }
        return k;
    }

    static ExitFace face_of(std::int64_t code);

    //! out = (I - P) in, over transient states.
    void apply(std::span<double const> in, std::span<double> out) const;
    //! out = (I - P)^T in.
    void apply_transpose(std::span<double const> in, std::span<double> out) const;

    //! Per-state probability of stepping out through each face in one step.
    std::vector<double> one_step_exit(ExitFace face) const;

  private:
    explicit DomainKernel(LatticeDomain const& domain);
    void build_neighbors();
    void build_cumulative();

    LatticeDomain domain_;
    int dim_;
    std::int64_t size_;
    std::vector<double> probs_;
    std::vector<double> cum_;
    std::vector<std::int64_t> nbr_;
};

}  // namespace rwre
