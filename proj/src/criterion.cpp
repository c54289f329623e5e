#include "rwre/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rwre/environment.hpp"
#include "rwre/green.hpp"
#include "rwre/parallel.hpp"
#include "rwre/walk.hpp"

namespace rwre
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

double positive_part(double x)
{
    return x > 0 ? x : 0.0;
}

// log(exp(a) + exp(b)) with -inf allowed on either side.
double log_add(double a, double b)
{
    if (a == -kInf)
        return b;
    if (b == -kInf)
        return a;
    double const hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_max_double()
{
    return std::log(std::numeric_limits<double>::max());
}

Verdict compare_ge(std::string inequality, double lhs, double rhs)
{
    Verdict v;
    v.inequality = std::move(inequality);
    v.lhs = lhs;
    v.rhs = rhs;
    v.status = lhs >= rhs ? VerdictStatus::holds : VerdictStatus::fails;
    return v;
}

Verdict compare_le(std::string inequality, double lhs, double rhs)
{
    Verdict v;
    v.inequality = std::move(inequality);
    v.lhs = lhs;
    v.rhs = rhs;
    v.status = lhs <= rhs ? VerdictStatus::holds : VerdictStatus::fails;
    return v;
}

Estimate mean_and_se(std::vector<double> const& xs)
{
    Estimate out;
    if (xs.empty())
        return out;
    double sum = 0;
    for (double x : xs)
        sum += x;
    double const n = static_cast<double>(xs.size());
    out.value = sum / n;
    if (xs.size() > 1)
    {
        double ss = 0;
        for (double x : xs)
            ss += (x - out.value) * (x - out.value);
        out.std_error = std::sqrt(ss / (n - 1) / n);
    }
    return out;
}

}  // namespace

std::string to_string(VerdictStatus status)
{
    switch (status)
    {
        case VerdictStatus::holds:
            return "holds";
        case VerdictStatus::fails:
            return "fails";
        case VerdictStatus::untestable_at_scale:
            return "untestable-at-scale";
    }
    return "unknown";
}

std::string to_string(BoundStatus status)
{
    switch (status)
    {
        case BoundStatus::finite:
            return "finite";
        case BoundStatus::vanishing_denominator:
            return "vanishing-denominator";
        case BoundStatus::overflow:
            return "overflow";
    }
    return "unknown";
}

//---------------------------------------------------------------------------//

Schedule make_schedule(int d, int r, double epsilon, double sigma_2r,
                       ScheduleConstants const& constants)
{
    if (r < 1)
        throw std::invalid_argument("make_schedule: r must be >= 1");
    if (d < 2)
        throw std::invalid_argument("make_schedule: d must be >= 2");
    if (!(epsilon > 0 && epsilon < 1))
        throw std::invalid_argument("make_schedule: epsilon must lie in (0, 1)");
    if (!(sigma_2r > 0))
        throw std::invalid_argument("make_schedule: sigma_2r must be > 0");
    if (!(constants.c1 > 0) || !(constants.c2 > 0))
        throw std::invalid_argument("make_schedule: c1 and c2 must be > 0");

    Schedule s;
    s.r = r;
    s.d = d;
    s.epsilon = epsilon;
    s.sigma_2r = sigma_2r;
    s.c1 = constants.c1;
    s.c2 = constants.c2;

    double const sr = std::sqrt(static_cast<double>(r));
    s.lambda0 = sr * sigma_2r * std::pow(epsilon, 2.0 - 1.0 / sr);
    s.M = std::pow(epsilon, -1.0 / sr) / s.lambda0;
    s.L = constants.c1 / epsilon;
    s.H = s.M * s.M;
    s.h = std::pow(epsilon, -1.0 / (2.0 * sr)) * s.L * s.L;
    s.gamma1 = constants.c2 / 10.0 * s.lambda0 * s.L;

    s.h_fits = 2.0 * s.h <= s.H;
    s.H_fits = s.H <= s.M * s.M * s.M / 32.0;
    s.not_too_small = sigma_2r > epsilon * epsilon;
    s.eps_L_small = epsilon * s.L < 0.75;
    s.gamma1_in_range = s.gamma1 > 0 && s.gamma1 <= 1;

    double const log_kappa = std::log(1.0 / (4.0 * d));
    s.log_M = std::log(s.M);
    s.log_regime_threshold = 100.0 + 4.0 * d * log_kappa * log_kappa;
    s.regime_reached = s.log_M >= s.log_regime_threshold;
    return s;
}

//---------------------------------------------------------------------------//

LogValue delta_inverse(double M, double L, double H, double h, double gamma1)
{
    if (!(M > 0 && L > 0 && H > 0 && h > 0 && gamma1 > 0))
        throw std::invalid_argument("delta_inverse: arguments must be > 0");
    double const rate = gamma1 * M / (32.0 * L);
    double const gap = positive_part(H * L / (2.0 * h * M) - 4.0 / gamma1);
    double const log_first = -rate;
    double const log_second = std::log(10.0 * M / (gamma1 * L)) - rate * gap * gap;
    LogValue out;
    out.log_value = log_add(log_first, log_second);
    out.value = std::exp(out.log_value);
    return out;
}

Lemma1Bound lemma1_bound(double hat_rho_mean, double p, double M, double L, double H,
                         double kappa, double delta, int d)
{
    if (!(hat_rho_mean >= 0))
        throw std::invalid_argument("lemma1_bound: E[rho-hat] must be >= 0");
    if (!(M > 0 && L > 0 && H > 0))
        throw std::invalid_argument("lemma1_bound: M, L, H must be > 0");
    if (!(kappa > 0 && kappa < 1))
        throw std::invalid_argument("lemma1_bound: kappa must lie in (0, 1)");
    if (d < 1)
        throw std::invalid_argument("lemma1_bound: d must be >= 1");

    Lemma1Bound out;
    out.M_bar = std::floor(M * M * M / (32.0 * H));
    if (hat_rho_mean >= 1)
    {
        out.status = BoundStatus::vanishing_denominator;
        out.value = kInf;
        out.log_value = kInf;
        out.log_first_term = kInf;
        return out;
    }
    if (!(delta > 1))
        throw std::invalid_argument("lemma1_bound: delta must be > 1");

    double const log_kappa = std::log(kappa);
    if (hat_rho_mean == 0)
    {
        out.log_first_term = -kInf;
    }
    else
    {
        // 1 - sqrt(x) = (1 - x) / (1 + sqrt(x)) keeps precision near x = 1
        double const denom = (1.0 - hat_rho_mean) / (1.0 + std::sqrt(hat_rho_mean));
        out.log_first_term = std::log(2.0) + M / (2.0 * L) * std::log(hat_rho_mean)
                             - std::log(denom);
    }

    double exponent = 0;
    if (out.M_bar > 0)
    {
        double const shift = 7.0 * M / out.M_bar * (-log_kappa / std::log(delta));
        double const gap = positive_part(p - shift);
        exponent = -out.M_bar / 2.0 * gap * gap;
    }
    out.log_second_term = std::log(2.0 * d) - M / 2.0 * log_kappa + exponent;

    out.log_value = -2.0 * log_kappa + log_add(out.log_first_term, out.log_second_term);
    if (out.log_value > log_max_double())
    {
        out.status = BoundStatus::overflow;
        out.value = kInf;
    }
    else
    {
        out.status = BoundStatus::finite;
        out.value = std::exp(out.log_value);
    }
    return out;
}

Verdict kalikow_shortcut(double lambda, double sigma_2, double epsilon, int d)
{
    if (!(lambda >= 0 && sigma_2 >= 0 && epsilon >= 0) || d < 1)
        throw std::invalid_argument("kalikow_shortcut: inputs must be >= 0");
    double const rhs = 4.0 * d * (1.0 + 9.0 * epsilon) * sigma_2 * sigma_2;
    return compare_ge("lambda >= 4d (1 + 9 eps) sigma_2^2", lambda, rhs);
}

Verdict theorem_condition(double lambda, int r, double sigma_2r, double epsilon)
{
    if (!(lambda >= 0 && sigma_2r >= 0 && epsilon >= 0) || r < 1)
        throw std::invalid_argument("theorem_condition: inputs must be >= 0, r >= 1");
    double const sr = std::sqrt(static_cast<double>(r));
    double const rhs = sr * sigma_2r * std::pow(epsilon, 2.0 - 1.0 / sr);
    return compare_ge("lambda >= sqrt(r) sigma_2r eps^(2 - 1/sqrt(r))", lambda, rhs);
}

double log_effective_threshold(double M, int d)
{
    return -(15.0 * d + 5.0) * std::log(M);
}

//---------------------------------------------------------------------------//

namespace
{

template<class Fn>
void record(CriterionReport& report, std::string const& field, Fn&& fn)
{
    try
    {
        fn();
    }
    catch (std::exception const& e)
    {
        report.errors[field] = e.what();
    }
}

void run_surrogate(EnvironmentLaw const& law, PipelineConfig const& config,
                   std::uint64_t seed, CriterionReport& report)
{
    auto const& sur = config.surrogate;
    int const d = law.dimension();
    double const kappa = 1.0 / (4.0 * d);
    report.surrogate_ran = true;
    report.surrogate = sur;

    double const lambda0 = report.schedule ? report.schedule->lambda0 : 0.0;
    double const c2 = config.constants.c2;
    report.surrogate_gamma1
        = sur.gamma1 > 0 ? sur.gamma1
                         : std::max(c2 / 10.0 * lambda0 * sur.L, sur.gamma1_floor);

    // E[rho-hat] over independent slab environments
    record(report, "hat_rho", [&] {
        auto const slab = LatticeDomain::slab(d, sur.L, sur.W);
        std::uint64_t const base = derive_seed(seed, "hat-rho");
        std::vector<double> values(static_cast<std::size_t>(sur.n_env));
        parallel_for(sur.n_env, config.workers, [&](std::int64_t i) {
            Environment const env(law, slab, derive_seed(base, static_cast<std::uint64_t>(i)));
            auto const hr = hat_rho(env, sur.M, sur.L, sur.W, sur.hat_rho_stride);
            if (!hr.denominator_positive)
                throw std::domain_error("hat_rho: G <= -L at some hyperplane site");
            values[static_cast<std::size_t>(i)] = hr.value;
        });
        report.hat_rho_mean = mean_and_se(values);
        report.hat_rho_max = *std::max_element(values.begin(), values.end());
    });

    record(report, "p", [&] {
        PParams pp;
        pp.M = sur.M;
        pp.L = sur.L;
        pp.H = sur.H;
        pp.h = sur.h;
        pp.gamma1 = report.surrogate_gamma1;
        pp.n_env = sur.n_env;
        pp.stride = sur.p_stride;
        pp.workers = config.workers;
        auto const res = estimate_p(law, pp, derive_seed(seed, "p"));
        report.p_hat = {res.p.mean, res.p.std_error};
        report.p_coverage = res.coverage;
    });

    record(report, "back_exit", [&] {
        WalkOptions wo;
        wo.workers = config.workers;
        auto const est = estimate_backexit_prob(law, sur.M, sur.n_env, sur.n_walks,
                                                SeedPair::from_master(derive_seed(seed, "back")),
                                                wo);
        report.back_exit = {est.not_front.mean, est.not_front.std_error};
        report.back_exit_censored = est.not_front.censored_fraction;
    });

    record(report, "q_exact", [&] {
        auto const box = LatticeDomain::box(d, sur.M);
        std::uint64_t const base = derive_seed(seed, "q-exact");
        std::vector<double> q(static_cast<std::size_t>(sur.n_env));
        std::vector<double> root(q.size());
        parallel_for(sur.n_env, config.workers, [&](std::int64_t i) {
            Environment const env(law, box, derive_seed(base, static_cast<std::uint64_t>(i)));
            auto const k = static_cast<std::size_t>(i);
            q[k] = std::clamp(quenched_qB_exact(env, sur.M), 0.0, 1.0);
            root[k] = std::sqrt(rho_of_q(q[k]));
        });
        report.q_exact_mean = mean_and_se(q);
        report.sqrt_rho_mean = mean_and_se(root);
        report.verdicts["sqrtrho"] = compare_le("E[q_B] <= E[sqrt(rho_B)]",
                                                report.q_exact_mean.value,
                                                report.sqrt_rho_mean.value);
    });

    record(report, "surrogate_delta_inverse", [&] {
        report.surrogate_delta_inverse
            = delta_inverse(sur.M, sur.L, sur.H, sur.h, report.surrogate_gamma1);
    });

    if (!report.errors.count("hat_rho") && !report.errors.count("p"))
    {
        record(report, "surrogate_lemma1", [&] {
            double delta = 0;
            if (report.surrogate_delta_inverse)
                delta = std::exp(-report.surrogate_delta_inverse->log_value);
            if (report.hat_rho_mean.value < 1 && !(delta > 1))
                throw std::domain_error("delta^{-1} >= 1 at surrogate scale: Lemma 1 inapplicable");
            report.surrogate_lemma1 = lemma1_bound(report.hat_rho_mean.value,
                                                   report.p_hat.value, sur.M, sur.L, sur.H,
                                                   kappa, delta, d);
        });
    }

    report.surrogate_log_effective_threshold = log_effective_threshold(sur.M, d);

    // targets at surrogate scale
    if (!report.errors.count("hat_rho"))
    {
        double const rhs = 1.0 - d * lambda0 * sur.L / 10.0;
        auto v = compare_le("E[rho-hat] <= 1 - d lambda0 L / 10", report.hat_rho_mean.value, rhs);
        v.note = "surrogate scale";
        if (!report.schedule)
        {
            v.status = VerdictStatus::fails;
            v.note = "no admissible lambda0: schedule undefined";
        }
        report.verdicts["target_hat_rho"] = v;
    }
    if (!report.errors.count("p"))
    {
        auto v = compare_ge("p >= 3/4", report.p_hat.value, 0.75);
        v.note = "surrogate scale";
        report.verdicts["target_p"] = v;
    }
    if (!report.errors.count("surrogate_delta_inverse"))
    {
        auto v = compare_le("delta^{-1} < 1", report.surrogate_delta_inverse->value, 1.0);
        if (report.surrogate_delta_inverse->value == 1.0)
            v.status = VerdictStatus::fails;
        v.note = "surrogate scale; Lemma 1 needs delta > 1";
        report.verdicts["lemma1_applicable"] = v;
    }

    // effective criterion: resolvable only when the threshold exceeds the
    // smallest nonzero frequency the sample can produce
    if (!report.errors.count("back_exit"))
    {
        Verdict v;
        v.inequality = "P_0(X_T not in front side of B) < M^-(15d+5)";
        v.lhs = report.back_exit.value;
        double const log_thr = report.surrogate_log_effective_threshold;
        v.rhs = std::exp(log_thr);
        double const n_total = static_cast<double>(sur.n_env) * static_cast<double>(sur.n_walks);
        double const upper = report.back_exit.value + 3.0 * report.back_exit.std_error;
        double const lower = report.back_exit.value - 3.0 * report.back_exit.std_error;
        if (lower > v.rhs)
        {
            v.status = VerdictStatus::fails;
        }
        else if (log_thr > -std::log(n_total) && upper < v.rhs)
        {
            v.status = VerdictStatus::holds;
        }
        else
        {
            v.status = VerdictStatus::untestable_at_scale;
            v.note = "threshold below Monte Carlo resolution 1/(n_env n_walks)";
        }
        report.verdicts["effective_criterion_surrogate"] = v;
    }
}

}  // namespace

CriterionReport run_pipeline(EnvironmentLaw const& law, PipelineConfig const& config,
                             std::uint64_t seed)
{
    if (config.r < 1)
        throw std::invalid_argument("run_pipeline: r must be >= 1");

    CriterionReport report;
    int const d = law.dimension();
    report.law_id = law.id();
    report.d = d;
    report.r = config.r;
    report.kappa = 1.0 / (4.0 * d);
    report.epsilon = epsilon_of(law);
    report.lambda = lambda_of(law);

    record(report, "sigma_2", [&] {
        report.sigma_2 = sigma_of(law, 1, config.moment_samples, derive_seed(seed, "sigma-2"));
    });
    record(report, "sigma_2r", [&] {
        report.sigma_2r = sigma_of(law, config.r, config.moment_samples,
                                   derive_seed(seed, "sigma-2r"));
    });

    // Theorem 1 and the Kalikow shortcut speak about perturbations of size
    // eps in (0, 1) with a positive drift; outside that range the verdict fails.
    bool const in_range = report.epsilon > 0 && report.epsilon < 1 && report.lambda > 0;
    record(report, "theorem_condition", [&] {
        auto v = theorem_condition(std::max(report.lambda, 0.0), config.r,
                                   report.sigma_2r.value, report.epsilon);
        if (!in_range)
        {
            v.status = VerdictStatus::fails;
            v.note = "requires 0 < eps < 1 and lambda > 0";
        }
        report.verdicts["theorem_condition"] = v;
    });
    record(report, "kalikow_shortcut", [&] {
        auto v = kalikow_shortcut(std::max(report.lambda, 0.0), report.sigma_2.value,
                                  report.epsilon, d);
        if (!in_range)
        {
            v.status = VerdictStatus::fails;
            v.note = "requires 0 < eps < 1 and lambda > 0";
        }
        report.verdicts["kalikow_shortcut"] = v;
    });

    record(report, "schedule", [&] {
        auto const s = make_schedule(d, config.r, report.epsilon, report.sigma_2r.value,
                                     config.constants);
        report.schedule = s;
        report.log_effective_threshold = log_effective_threshold(s.M, d);

        auto nts = compare_ge("sigma_2r > eps^2", s.sigma_2r, s.epsilon * s.epsilon);
        if (s.sigma_2r == s.epsilon * s.epsilon)
            nts.status = VerdictStatus::fails;
        report.verdicts["not_too_small"] = nts;
        report.verdicts["schedule_h"] = compare_le("2h <= H", 2.0 * s.h, s.H);
        report.verdicts["schedule_H"] = compare_le("H <= M^3/32", s.H, s.M * s.M * s.M / 32.0);
        auto el = compare_le("eps L < 3/4", s.epsilon * s.L, 0.75);
        if (!s.eps_L_small)
            el.status = VerdictStatus::fails;
        report.verdicts["eps_L"] = el;
        auto regime = compare_ge("log M >= 100 + 4d (log kappa)^2", s.log_M,
                                 s.log_regime_threshold);
        report.verdicts["paper_regime"] = regime;
    });

    Verdict eff;
    eff.inequality = "P_0(X_T not in front side of B) < M^-(15d+5)";
    eff.lhs = std::numeric_limits<double>::quiet_NaN();
    eff.rhs = report.schedule ? std::exp(report.log_effective_threshold)
                              : std::numeric_limits<double>::quiet_NaN();
    eff.status = VerdictStatus::untestable_at_scale;
    eff.note = report.schedule ? "full-scale schedule M is beyond desk caps"
                               : "full-scale schedule undefined";
    report.verdicts["effective_criterion_paper"] = eff;
    if (report.schedule)
    {
        auto const& s = *report.schedule;
        record(report, "delta_inverse", [&] {
            report.delta_inverse = delta_inverse(s.M, s.L, s.H, s.h, s.gamma1);
        });
    }

    if (config.surrogate.enabled)
        run_surrogate(law, config, seed, report);
    return report;
}

}  // namespace rwre
