#include "rwre/walk.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rwre/parallel.hpp"
#include "rwre/solver.hpp"

namespace rwre
{
namespace
{
MCEstimate mean_and_error(std::vector<double> const& values)
{
    MCEstimate est;
    est.n = static_cast<std::int64_t>(values.size());
    if (values.empty())
    {
        est.mean = std::numeric_limits<double>::quiet_NaN();
        return est;
    }
    double sum = 0;
    for (double v : values)
    {
        sum += v;
    }
    est.mean = sum / static_cast<double>(est.n);
    if (est.n > 1)
    {
        double ss = 0;
        for (double v : values)
        {
            ss += (v - est.mean) * (v - est.mean);
        }
        est.std_error = std::sqrt(ss / static_cast<double>(est.n - 1)
                                  / static_cast<double>(est.n));
    }
    return est;
}

MCEstimate binomial(std::int64_t hits, std::int64_t trials)
{
    MCEstimate est;
    est.n = trials;
    if (trials == 0)
    {
        est.mean = std::numeric_limits<double>::quiet_NaN();
        return est;
    }
    est.mean = static_cast<double>(hits) / static_cast<double>(trials);
    est.std_error = std::sqrt(est.mean * (1 - est.mean) / static_cast<double>(trials));
    return est;
}

double frequency(std::int64_t hits, std::int64_t trials)
{
    return trials > 0 ? static_cast<double>(hits) / static_cast<double>(trials)
                      : std::numeric_limits<double>::quiet_NaN();
}

void require_inside(LatticeDomain const& domain, Site const& x, char const* who)
{
    if (!domain.contains(x))
    {
        throw std::out_of_range(std::string(who) + ": start " + to_string(x, domain.dim())
                                + " outside domain " + domain.describe());
    }
}

}  // namespace

void ExitCounts::add(ExitRecord const& rec)
{
    if (rec.censored)
    {
        ++censored;
        return;
    }
    switch (rec.exit_face)
    {
        case ExitFace::front:
            ++front;
            break;
        case ExitFace::back:
            ++back;
            break;
        case ExitFace::side:
            ++side;
            break;
        case ExitFace::none:
            ++censored;
            break;
    }
}

ExitCounts& ExitCounts::operator+=(ExitCounts const& other)
{
    front += other.front;
    back += other.back;
    side += other.side;
    censored += other.censored;
    return *this;
}

//---------------------------------------------------------------------------//

ExitRecord run_until_exit(Environment const& env, Site const& start,
                          LatticeDomain const& domain, std::int64_t step_cap,
                          std::uint64_t walk_seed)
{
    require_inside(domain, start, "run_until_exit");
    if (step_cap < 1)
    {
        throw std::invalid_argument("run_until_exit: step_cap must be >= 1");
    }
    CounterStream rng(walk_seed, std::uint64_t{0});
    int const nd = 2 * domain.dim();
    Site x = domain.fold(start);
    ExitRecord rec;
    for (std::int64_t t = 0; t < step_cap; ++t)
    {
        auto const v = env.at(x);
        double const u = rng.uniform();
        double running = 0;
        int k = 0;
        for (; k < nd - 1; ++k)
        {
            running += v[k];
            if (u < running)
            {
                break;
            }
        }
        Site const y = step(x, k);
        if (!domain.contains(y))
        {
            rec.exit_site = y;
            rec.exit_time = t + 1;
            rec.exit_face = domain.classify_exit(y);
            return rec;
        }
        x = domain.fold(y);
    }
    rec.exit_site = x;
    rec.exit_time = step_cap;
    rec.censored = true;
    return rec;
}

ExitRecord run_until_exit(DomainKernel const& kernel, std::int64_t start_state,
                          std::int64_t step_cap, CounterStream& rng)
{
    std::int64_t s = start_state;
    ExitRecord rec;
    for (std::int64_t t = 0; t < step_cap; ++t)
    {
        int const k = kernel.pick(s, rng.uniform());
        std::int64_t const next = kernel.neighbor(s, k);
        if (next < 0)
        {
            rec.exit_site = step(kernel.domain().site_at(s), k);
            rec.exit_time = t + 1;
            rec.exit_face = DomainKernel::face_of(next);
            return rec;
        }
        s = next;
    }
    rec.exit_site = kernel.domain().site_at(s);
    rec.exit_time = step_cap;
    rec.censored = true;
    return rec;
}

//---------------------------------------------------------------------------//

std::vector<double> visits_from(DomainKernel const& kernel, std::int64_t start_state,
                                double* residual)
{
    std::vector<double> rhs(static_cast<std::size_t>(kernel.size()), 0.0);
    rhs[start_state] = 1.0;
    std::vector<double> g;
    auto const result = bicgstab(Transposed<DomainKernel>{kernel}, rhs, g);
    if (!result.converged)
    {
        throw SolverError("visits_from: solve did not reach residual target", result);
    }
    if (residual)
    {
        *residual = result.residual;
    }
    return g;
}

ExitLaw exit_law_exact(DomainKernel const& kernel, Site const& start)
{
    auto const& domain = kernel.domain();
    require_inside(domain, start, "exit_law_exact");
    ExitLaw law;
    auto const g = visits_from(kernel, domain.index(start), &law.residual);
    int const nd = kernel.n_dirs();
    int const dim = kernel.dim();
    for (std::int64_t s = 0; s < kernel.size(); ++s)
    {
        double const visits = g[s];
        law.expected_time += visits;
        Site const x = domain.site_at(s);
        for (int k = 0; k < nd; ++k)
        {
            std::int64_t const code = kernel.neighbor(s, k);
            if (code >= 0)
            {
                continue;
            }
            double const mass = visits * kernel.prob(s, k);
            switch (DomainKernel::face_of(code))
            {
                case ExitFace::front:
                    law.front += mass;
                    break;
                case ExitFace::back:
                    law.back += mass;
                    break;
                default:
                    law.side += mass;
                    break;
            }
            Site const y = step(x, k);
            for (int i = 0; i < dim; ++i)
            {
                law.mean_exit_site[i] += mass * y[i];
            }
        }
    }
    return law;
}

double ssrw_expected_exit_time(LatticeDomain const& domain, Site const& start)
{
    return exit_law_exact(DomainKernel::ssrw(domain), start).expected_time;
}

std::int64_t default_step_cap(LatticeDomain const& domain, Site const& start)
{
    double const t = ssrw_expected_exit_time(domain, start);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(100.0 * t)));
}

//---------------------------------------------------------------------------//

ExitEstimate estimate_exit_probs(EnvironmentLaw const& law, LatticeDomain const& domain,
                                 Site const& start, std::int64_t n_env,
                                 std::int64_t n_walks, SeedPair seeds,
                                 WalkOptions const& opts)
{
    require_inside(domain, start, "estimate_exit_probs");
    if (n_env < 1 || n_walks < 1)
    {
        throw std::invalid_argument("estimate_exit_probs: n_env and n_walks must be >= 1");
    }
    ExitEstimate out;
    out.step_cap = opts.step_cap > 0 ? opts.step_cap : default_step_cap(domain, start);
    out.n_env = n_env;
    out.n_walks = n_walks;

    std::vector<ExitCounts> per_env(static_cast<std::size_t>(n_env));
    parallel_for(n_env, opts.workers, [&](std::int64_t i) {
        auto const env = sample_environment(
            law, domain, derive_seed(seeds.env, static_cast<std::uint64_t>(i)));
        DomainKernel const kernel(env, domain);
        std::int64_t const s0 = domain.index(start);
        std::uint64_t const walk_seed = derive_seed(seeds.walk, static_cast<std::uint64_t>(i));
        ExitCounts counts;
        for (std::int64_t j = 0; j < n_walks; ++j)
        {
            CounterStream rng(walk_seed, static_cast<std::uint64_t>(j));
            counts.add(run_until_exit(kernel, s0, out.step_cap, rng));
        }
        per_env[i] = counts;
    });

    std::vector<double> not_front, front, back, diff;
    for (auto const& c : per_env)
    {
        out.counts += c;
        if (c.completed() == 0)
        {
            continue;
        }
        not_front.push_back(frequency(c.back + c.side, c.completed()));
        front.push_back(frequency(c.front, c.completed()));
        back.push_back(frequency(c.back, c.completed()));
        diff.push_back(front.back() - back.back());
    }

    if (n_env == 1)
    {
        auto const& c = out.counts;
        out.not_front = binomial(c.back + c.side, c.completed());
        out.front = binomial(c.front, c.completed());
        out.back = binomial(c.back, c.completed());
        out.front_minus_back.mean = out.front.mean - out.back.mean;
        // multinomial variance of the difference of two cell frequencies
        double const pf = out.front.mean, pb = out.back.mean;
        out.front_minus_back.std_error
            = std::sqrt((pf + pb - (pf - pb) * (pf - pb))
                        / static_cast<double>(std::max<std::int64_t>(1, c.completed())));
        out.front_minus_back.n = c.completed();
    }
    else
    {
        out.not_front = mean_and_error(not_front);
        out.front = mean_and_error(front);
        out.back = mean_and_error(back);
        out.front_minus_back = mean_and_error(diff);
    }
    double const censored = frequency(out.counts.censored, out.counts.total());
    for (auto* est : {&out.not_front, &out.front, &out.back, &out.front_minus_back})
    {
        est->censored_fraction = censored;
    }
    return out;
}

ExitEstimate estimate_backexit_prob(EnvironmentLaw const& law, int M,
                                    std::int64_t n_env, std::int64_t n_walks,
                                    SeedPair seeds, WalkOptions const& opts)
{
    auto const box = LatticeDomain::box(law.dimension(), M);
    return estimate_exit_probs(law, box, Site{}, n_env, n_walks, seeds, opts);
}

MCEstimate quenched_qB(Environment const& env, int M, std::int64_t n_walks,
                       std::uint64_t seed, WalkOptions const& opts)
{
    auto const box = LatticeDomain::box(env.dim(), M);
    DomainKernel const kernel(env, box);
    std::int64_t const cap = opts.step_cap > 0 ? opts.step_cap : default_step_cap(box, Site{});
    std::int64_t const s0 = box.index(Site{});
    ExitCounts counts;
    for (std::int64_t j = 0; j < n_walks; ++j)
    {
        CounterStream rng(seed, static_cast<std::uint64_t>(j));
        counts.add(run_until_exit(kernel, s0, cap, rng));
    }
    auto est = binomial(counts.back + counts.side, counts.completed());
    est.censored_fraction = frequency(counts.censored, counts.total());
    return est;
}

double quenched_qB_exact(Environment const& env, int M)
{
    auto const box = LatticeDomain::box(env.dim(), M);
    auto const law = exit_law_exact(DomainKernel(env, box), Site{});
    return law.back + law.side;
}

double rho_of_q(double q)
{
    if (!(q >= 0.0 && q <= 1.0))
    {
        throw std::invalid_argument("rho_of_q: q must lie in [0, 1]");
    }
    if (q == 1.0)
    {
        return std::numeric_limits<double>::infinity();
    }
    return q / (1.0 - q);
}

//---------------------------------------------------------------------------//

Displacement displacement_delta(Environment const& env, Site const& x, int L, int h,
                                DisplacementOptions const& opts)
{
    int const dim = env.dim();
    auto const region = LatticeDomain::centered(dim, x, L, h);
    Displacement out;
    if (opts.mode == EvalMode::exact)
    {
        if (region.size() > opts.state_cap)
        {
            throw std::length_error("displacement_delta: " + std::to_string(region.size())
                                    + " states exceed the exact-solve cap "
                                    + std::to_string(opts.state_cap));
        }
        auto const law = exit_law_exact(DomainKernel(env, region), x);
        for (int i = 0; i < dim; ++i)
        {
            out.delta[i] = law.mean_exit_site[i] - x[i];
        }
        out.residual = law.residual;
        return out;
    }

    DomainKernel const kernel(env, region);
    std::int64_t const cap = opts.step_cap > 0 ? opts.step_cap : default_step_cap(region, x);
    std::int64_t const s0 = region.index(x);
    std::array<double, kMaxDim> sum{}, sum_sq{};
    std::int64_t completed = 0, censored = 0;
    for (std::int64_t j = 0; j < opts.n_walks; ++j)
    {
        CounterStream rng(opts.seed, static_cast<std::uint64_t>(j));
        auto const rec = run_until_exit(kernel, s0, cap, rng);
        if (rec.censored)
        {
            ++censored;
            continue;
        }
        ++completed;
        for (int i = 0; i < dim; ++i)
        {
            double const dx = rec.exit_site[i] - x[i];
            sum[i] += dx;
            sum_sq[i] += dx * dx;
        }
    }
    for (int i = 0; i < dim; ++i)
    {
        double const n = static_cast<double>(completed);
        out.delta[i] = completed ? sum[i] / n : std::numeric_limits<double>::quiet_NaN();
        if (completed > 1)
        {
            double const var = (sum_sq[i] - n * out.delta[i] * out.delta[i]) / (n - 1);
            out.std_error[i] = std::sqrt(std::max(0.0, var) / n);
        }
    }
    out.censored_fraction = frequency(censored, opts.n_walks);
    return out;
}

PResult estimate_p(EnvironmentLaw const& law, PParams const& params,
                   std::uint64_t env_seed)
{
    int const dim = law.dimension();
    if (!(params.gamma1 >= 0))
    {
        throw std::invalid_argument("estimate_p: gamma1 must be >= 0");
    }
    if (params.n_env < 1 || params.L < 1 || params.h < 1 || params.H < 1)
    {
        throw std::invalid_argument("estimate_p: sizes and n_env must be >= 1");
    }
    auto const box = LatticeDomain::box(dim, params.M);

    // Union of the slabs B~_j = {y in B : |y.e_j| < H}, j >= 2.
    std::vector<Site> candidates;
    for (std::int64_t s = 0; s < box.size(); ++s)
    {
        Site const z = box.site_at(s);
        for (int j = 1; j < dim; ++j)
        {
            if (std::abs(z[j]) < params.H)
            {
                candidates.push_back(z);
                break;
            }
        }
    }

    PResult out;
    out.sites_total = static_cast<std::int64_t>(candidates.size());
    int stride = params.stride;
    if (stride <= 0)
    {
        stride = 1;
        while (static_cast<double>(out.sites_total) / std::pow(stride, dim)
               > static_cast<double>(params.full_enumeration_cap))
        {
            ++stride;
        }
    }
    out.stride = stride;
    std::vector<Site> sites;
    for (auto const& z : candidates)
    {
        bool keep = true;
        for (int i = 0; i < dim && keep; ++i)
        {
            keep = (z[i] - box.lo(i + 1)) % stride == 0;
        }
        if (keep)
        {
            sites.push_back(z);
        }
    }
    out.sites_evaluated = static_cast<std::int64_t>(sites.size());
    out.coverage = out.sites_total ? static_cast<double>(out.sites_evaluated)
                                         / static_cast<double>(out.sites_total)
                                   : 0.0;

    double const threshold = params.gamma1 * params.L;
    int const n_axes = dim - 1;
    std::vector<std::vector<int>> hits(static_cast<std::size_t>(params.n_env));
    std::vector<double> global_min(static_cast<std::size_t>(params.n_env));

    parallel_for(params.n_env, params.workers, [&](std::int64_t e) {
        auto const env = sample_environment(
            law, box, derive_seed(env_seed, static_cast<std::uint64_t>(e)));
        std::vector<double> axis_min(n_axes, std::numeric_limits<double>::infinity());
        double gmin = std::numeric_limits<double>::infinity();
        for (auto const& z : sites)
        {
            double const de1 = displacement_delta(env, z, params.L, params.h).delta[0];
            gmin = std::min(gmin, de1);
            for (int j = 1; j < dim; ++j)
            {
                if (std::abs(z[j]) < params.H)
                {
                    axis_min[j - 1] = std::min(axis_min[j - 1], de1);
                }
            }
        }
        std::vector<int> h(n_axes);
        for (int j = 0; j < n_axes; ++j)
        {
            h[j] = axis_min[j] >= threshold ? 1 : 0;
        }
        hits[e] = std::move(h);
        global_min[e] = gmin;
    });

    out.per_axis.assign(n_axes, 0.0);
    out.per_axis_se.assign(n_axes, 0.0);
    for (int j = 0; j < n_axes; ++j)
    {
        std::int64_t count = 0;
        for (auto const& h : hits)
        {
            count += h[j];
        }
        auto const est = binomial(count, params.n_env);
        out.per_axis[j] = est.mean;
        out.per_axis_se[j] = est.std_error;
        if (j == 0 || est.mean < out.p.mean)
        {
            out.p = est;
            out.worst_axis = j + 2;
        }
    }
    double total = 0;
    for (double g : global_min)
    {
        total += g;
    }
    out.min_delta_mean = total / static_cast<double>(params.n_env);
    return out;
}

}  // namespace rwre
