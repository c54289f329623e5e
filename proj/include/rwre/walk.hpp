#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rwre/domain.hpp"
#include "rwre/environment.hpp"
#include "rwre/kernel.hpp"
#include "rwre/rng.hpp"

namespace rwre
{

struct ExitRecord
{
    Site exit_site{};  //!< first site outside the domain; current site if censored
    std::int64_t exit_time = 0;
    ExitFace exit_face = ExitFace::none;
    bool censored = false;
};

//! Monte Carlo mean; censored samples are excluded from `mean` and counted.
struct MCEstimate
{
    double mean = 0;
    double std_error = 0;
    std::int64_t n = 0;
    double censored_fraction = 0;
};

struct ExitCounts
{
    std::int64_t front = 0;
    std::int64_t back = 0;
    std::int64_t side = 0;
    std::int64_t censored = 0;

    std::int64_t total() const { return front + back + side + censored; }
    std::int64_t completed() const { return front + back + side; }
    void add(ExitRecord const& rec);
    ExitCounts& operator+=(ExitCounts const& other);
};

//! Seeds for environment draws and for walk trajectories.
struct SeedPair
{
    std::uint64_t env = 0;
    std::uint64_t walk = 0;

    static SeedPair from_master(std::uint64_t master)
    {
        return {derive_seed(master, "env"), derive_seed(master, "walk")};
    }
};

struct WalkOptions
{
    std::int64_t step_cap = 0;  //!< 0: 100 x SSRW expected exit time
    int workers = 1;
};

//---------------------------------------------------------------------------//
// Single trajectories
//---------------------------------------------------------------------------//

//! Walk in `env` from `start` until it leaves `domain` or hits `step_cap`.
ExitRecord run_until_exit(Environment const& env, Site const& start,
                          LatticeDomain const& domain, std::int64_t step_cap,
                          std::uint64_t walk_seed);

//! Same walk on a prebuilt kernel, drawing from `rng`.
ExitRecord run_until_exit(DomainKernel const& kernel, std::int64_t start_state,
                          std::int64_t step_cap, CounterStream& rng);

//---------------------------------------------------------------------------//
// Exact absorbing-chain quantities
//---------------------------------------------------------------------------//

//! Exit law of the quenched walk from one start, from one adjoint solve.
struct ExitLaw
{
    double front = 0;
    double back = 0;
    double side = 0;
    double expected_time = 0;
    std::array<double, kMaxDim> mean_exit_site{};
    double residual = 0;
};

ExitLaw exit_law_exact(DomainKernel const& kernel, Site const& start);

//! Expected visits to each state from `start` before exit.
std::vector<double> visits_from(DomainKernel const& kernel, std::int64_t start_state,
                                double* residual = nullptr);

//! Expected exit time of the simple symmetric walk.
double ssrw_expected_exit_time(LatticeDomain const& domain, Site const& start);

//! 100 x the SSRW expected exit time, rounded up.
std::int64_t default_step_cap(LatticeDomain const& domain, Site const& start);

//---------------------------------------------------------------------------//
// Exit-probability estimators
//---------------------------------------------------------------------------//

struct ExitEstimate
{
    MCEstimate not_front;  //!< P(exit not through the front face): q_B for boxes
    MCEstimate front;
    MCEstimate back;
    MCEstimate front_minus_back;  //!< paired per environment
    ExitCounts counts;
    std::int64_t step_cap = 0;
    std::int64_t n_env = 0;
    std::int64_t n_walks = 0;
};

//! Annealed exit frequencies on an arbitrary domain.
ExitEstimate estimate_exit_probs(EnvironmentLaw const& law, LatticeDomain const& domain,
                                 Site const& start, std::int64_t n_env,
                                 std::int64_t n_walks, SeedPair seeds,
                                 WalkOptions const& opts = {});

//! Annealed P_0(X_{T_B} not in the front side of B) for the box B(M).
ExitEstimate estimate_backexit_prob(EnvironmentLaw const& law, int M,
                                    std::int64_t n_env, std::int64_t n_walks,
                                    SeedPair seeds, WalkOptions const& opts = {});

//! Quenched q_B(omega) by simulation.
MCEstimate quenched_qB(Environment const& env, int M, std::int64_t n_walks,
                       std::uint64_t seed, WalkOptions const& opts = {});

//! Quenched q_B(omega) by exact solve.
double quenched_qB_exact(Environment const& env, int M);

//! rho = q / (1 - q); +infinity at q = 1. Throws for q outside [0, 1].
double rho_of_q(double q);

//---------------------------------------------------------------------------//
// Displacement and p
//---------------------------------------------------------------------------//

enum class EvalMode
{
    exact,
    mc,
};

struct DisplacementOptions
{
    EvalMode mode = EvalMode::exact;
    std::int64_t n_walks = 10000;  //!< mc mode
    std::uint64_t seed = 0;         //!< mc mode
    std::int64_t state_cap = 2'000'000;  //!< exact mode
    std::int64_t step_cap = 0;
};

struct Displacement
{
    std::array<double, kMaxDim> delta{};
    std::array<double, kMaxDim> std_error{};  //!< zero in exact mode
    double residual = 0;
    double censored_fraction = 0;
};

//! Delta(x, omega) = E_x[X_S] - x, S the exit time of |.e1| < L, |.ej| < h.
Displacement displacement_delta(Environment const& env, Site const& x, int L, int h,
                                DisplacementOptions const& opts = {});

struct PParams
{
    int M = 2;
    int L = 2;
    int H = 2;
    int h = 2;
    double gamma1 = 0.1;
    std::int64_t n_env = 16;
    int stride = 0;  //!< 0: 1 when the site count allows full enumeration
    std::int64_t full_enumeration_cap = 100'000;
    int workers = 1;
};

struct PResult
{
    MCEstimate p;                     //!< infimum over j >= 2
    std::vector<double> per_axis;     //!< indicator frequency for j = 2..d
    std::vector<double> per_axis_se;
    int worst_axis = 2;
    int stride = 1;
    std::int64_t sites_evaluated = 0;  //!< per environment
    std::int64_t sites_total = 0;
    double coverage = 1;               //!< evaluated / total
    double min_delta_mean = 0;         //!< average over environments of the global minimum
};

//! Fraction of environments where min over B~_j of Delta.e1 >= gamma1 L,
//! minimized over j >= 2.
PResult estimate_p(EnvironmentLaw const& law, PParams const& params,
                   std::uint64_t env_seed);

}  // namespace rwre
