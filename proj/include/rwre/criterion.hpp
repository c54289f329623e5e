#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rwre/law.hpp"

namespace rwre
{

//---------------------------------------------------------------------------//
// Verdicts
//---------------------------------------------------------------------------//

enum class VerdictStatus
{
    holds,
    fails,
    untestable_at_scale,
};

std::string to_string(VerdictStatus status);

//! An inequality with both of its sides recorded.
struct Verdict
{
    std::string inequality;  //!< e.g. "lambda >= sqrt(r) sigma_2r eps^(2-1/sqrt(r))"
    double lhs = 0;
    double rhs = 0;
    VerdictStatus status = VerdictStatus::fails;
    std::string note;

    bool holds() const { return status == VerdictStatus::holds; }
};

//---------------------------------------------------------------------------//
// Parameter schedule
//---------------------------------------------------------------------------//

//! Constants whose values are only known to exist.
struct ScheduleConstants
{
    double c1 = 0.5;  //!< L = c1 / eps; also eps L
    double c2 = 1.0;  //!< gamma1 = (c2/10) lambda0 L
};

struct Schedule
{
    int r = 1;
    int d = 4;
    double epsilon = 0;
    double sigma_2r = 0;
    double lambda0 = 0;
    double M = 0;
    double L = 0;
    double H = 0;
    double h = 0;
    double gamma1 = 0;
    double c1 = 0;
    double c2 = 0;

    // admissibility flags
    bool h_fits = false;            //!< 2h <= H
    bool H_fits = false;            //!< H <= M^3/32
    bool not_too_small = false;     //!< sigma_2r > eps^2
    bool eps_L_small = false;       //!< eps L < 3/4
    bool gamma1_in_range = false;   //!< 0 < gamma1 <= 1
    bool regime_reached = false;    //!< M >= exp{100 + 4d (log kappa)^2}
    double log_M = 0;
    double log_regime_threshold = 0;

    bool admissible() const
    {
        return h_fits && H_fits && not_too_small && eps_L_small && gamma1_in_range;
    }
};

/*!
 * Build the schedule lambda0, M, L, H, h, gamma1 from (d, r, eps, sigma_2r).
 *
 * Throws std::invalid_argument when r < 1, eps not in (0, 1), sigma_2r <= 0
 * or c1, c2 <= 0. Inadmissible schedules are returned with their flags
 * cleared, never patched.
 */
Schedule make_schedule(int d, int r, double epsilon, double sigma_2r,
                       ScheduleConstants const& constants = {});

//---------------------------------------------------------------------------//
// Formulas
//---------------------------------------------------------------------------//

//! A positive quantity carried with its natural log.
struct LogValue
{
    double value = 0;
    double log_value = 0;
};

//! delta^{-1} of the renormalization lemma, evaluated in log space.
LogValue delta_inverse(double M, double L, double H, double h, double gamma1);

enum class BoundStatus
{
    finite,
    vanishing_denominator,  //!< E[rho-hat] >= 1
    overflow,               //!< finite log, value beyond double range
};

std::string to_string(BoundStatus status);

struct Lemma1Bound
{
    double value = 0;       //!< +inf unless finite
    double log_value = 0;   //!< +inf for a vanishing denominator
    BoundStatus status = BoundStatus::finite;
    double M_bar = 0;
    double log_first_term = 0;   //!< log of 2 E[rho]^{M/2L} / (1 - E[rho]^{1/2})_+
    double log_second_term = 0;  //!< log of 2d kappa^{-M/2} exp{...}
};

/*!
 * Upper bound on E[sqrt(rho_B)] from E[rho-hat] and p; `delta` is the
 * reciprocal of delta_inverse and must exceed 1.
 */
Lemma1Bound lemma1_bound(double hat_rho_mean, double p, double M, double L, double H,
                         double kappa, double delta, int d);

//! lambda >= 4d (1 + 9 eps) sigma_2^2.
Verdict kalikow_shortcut(double lambda, double sigma_2, double epsilon, int d);

//! lambda >= sqrt(r) sigma_2r eps^(2 - 1/sqrt(r)).
Verdict theorem_condition(double lambda, int r, double sigma_2r, double epsilon);

//! 1 / M^(15d + 5), in log space.
double log_effective_threshold(double M, int d);

//---------------------------------------------------------------------------//
// Pipeline
//---------------------------------------------------------------------------//

//! Desk-scale sizes at which the estimators actually run.
struct SurrogateScale
{
    bool enabled = true;
    int M = 3;
    int L = 2;
    int W = 4;
    int H = 2;
    int h = 2;
    double gamma1 = 0;          //!< 0: max((c2/10) lambda0 L, gamma1_floor)
    double gamma1_floor = 1e-3;
    std::int64_t n_env = 32;
    std::int64_t n_walks = 2000;
    int hat_rho_stride = 1;
    int p_stride = 0;
};

struct PipelineConfig
{
    int r = 1;
    ScheduleConstants constants;
    SurrogateScale surrogate;
    std::int64_t moment_samples = 1'000'000;
    int workers = 1;
};

struct CriterionReport
{
    // inputs
    std::string law_id;
    int d = 0;
    int r = 0;

    // moments
    double epsilon = 0;
    double lambda = 0;
    Estimate sigma_2;
    Estimate sigma_2r;
    double kappa = 0;

    // full-scale schedule (formulas only)
    std::optional<Schedule> schedule;
    std::optional<LogValue> delta_inverse;
    double log_effective_threshold = 0;

    // surrogate scale
    bool surrogate_ran = false;
    SurrogateScale surrogate;
    double surrogate_gamma1 = 0;
    Estimate hat_rho_mean;
    double hat_rho_max = 0;
    Estimate p_hat;
    double p_coverage = 0;
    Estimate back_exit;           //!< annealed P_0(X_T not in front side), MC
    double back_exit_censored = 0;
    Estimate q_exact_mean;        //!< E[q_B] from exact quenched solves
    Estimate sqrt_rho_mean;       //!< E[sqrt(rho_B)]
    std::optional<LogValue> surrogate_delta_inverse;
    std::optional<Lemma1Bound> surrogate_lemma1;
    double surrogate_log_effective_threshold = 0;

    std::map<std::string, Verdict> verdicts;
    std::map<std::string, std::string> errors;  //!< per-field failures
};

/*!
 * Moments, schedule, formula evaluations and surrogate-scale estimates for
 * one law. Sub-estimate failures are recorded in `errors`; the pipeline
 * itself does not throw for them.
 */
CriterionReport run_pipeline(EnvironmentLaw const& law, PipelineConfig const& config,
                             std::uint64_t seed);

}  // namespace rwre
