#include "rwre/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "rwre/environment.hpp"
#include "rwre/kernel.hpp"
#include "rwre/parallel.hpp"
#include "rwre/solver.hpp"

namespace rwre
{
namespace
{

Estimate mean_and_se(std::vector<double> const& xs)
{
    Estimate out;
    if (xs.empty())
        return out;
    double const n = static_cast<double>(xs.size());
    out.value = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() > 1)
    {
        double ss = 0;
        for (double x : xs)
            ss += (x - out.value) * (x - out.value);
        out.std_error = std::sqrt(ss / (n - 1) / n);
    }
    return out;
}

// (mean of x^p)^(1/s) with a delta-method error, for x >= 0
Estimate power_mean_root(std::vector<double> const& xs, double p, double s)
{
    std::vector<double> powered(xs.size());
    std::transform(xs.begin(), xs.end(), powered.begin(),
                   [p](double x) { return std::pow(x, p); });
    auto const m = mean_and_se(powered);
    Estimate out;
    if (m.value <= 0)
        return out;
    out.value = std::pow(m.value, 1.0 / s);
    out.std_error = out.value / (s * m.value) * m.std_error;
    return out;
}

std::vector<double> drift_field(Environment const& env, SlabSpec const& slab)
{
    return make_field(env, slab, FieldSpec{FieldKind::drift_e1, {}});
}

void require_slab_env(Environment const& env, SlabSpec const& slab, char const* who)
{
    if (env.dim() != slab.d)
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
    if (slab.state_count() > std::numeric_limits<int>::max())
        throw std::length_error(std::string(who) + ": slab too large");
}

// Z'_n - Z from the Sherman-Morrison update of (I - P)^{-1} when row n of P
// changes by dw and f(n) changes by dw(+e1) - dw(-e1).
//   g0n   = g(0, n)
//   col   = k -> g(nbr(n, k), n), zero for exits
//   G     = unperturbed Green values
double rank_one_delta(DomainKernel const& kernel, std::int64_t n, TransitionVector const& fresh,
                      double g0n, std::vector<double> const& G,
                      std::array<double, 2 * kMaxDim> const& col)
{
    int const nd = kernel.n_dirs();
    double a = 0;
    double b = 0;
    std::array<double, 2 * kMaxDim> dw{};
    for (int k = 0; k < nd; ++k)
    {
        dw[k] = fresh.p[k] - kernel.prob(n, k);
        std::int64_t const y = kernel.neighbor(n, k);
        if (y >= 0)
        {
            a += dw[k] * G[static_cast<std::size_t>(y)];
            b += dw[k] * col[k];
        }
    }
    double const df = dw[0] - dw[1];
    return df * g0n + g0n * (a + df * b) / (1.0 - b);
}

std::array<double, 2 * kMaxDim> neighbor_column(DomainKernel const& kernel, std::int64_t n,
                                                std::vector<double> const& column)
{
    std::array<double, 2 * kMaxDim> out{};
    for (int k = 0; k < kernel.n_dirs(); ++k)
    {
        std::int64_t const y = kernel.neighbor(n, k);
        out[k] = y >= 0 ? column[static_cast<std::size_t>(y)] : 0.0;
    }
    return out;
}

std::vector<double> solve_column(DomainKernel const& kernel, std::int64_t n,
                                 SolverOptions const& opts)
{
    std::vector<double> rhs(static_cast<std::size_t>(kernel.size()), 0.0);
    rhs[static_cast<std::size_t>(n)] = 1.0;
    std::vector<double> x;
    auto const res = bicgstab(kernel, rhs, x, opts);
    if (!res.converged)
        throw SolverError("efron_stein: column solve did not converge", res);
    return x;
}

Eigen::MatrixXd dense_green(DomainKernel const& kernel)
{
    auto const n = static_cast<Eigen::Index>(kernel.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index s = 0; s < n; ++s)
    {
        for (int k = 0; k < kernel.n_dirs(); ++k)
        {
            std::int64_t const y = kernel.neighbor(s, k);
            if (y >= 0)
                A(s, static_cast<Eigen::Index>(y)) -= kernel.prob(s, k);
        }
    }
    return A.partialPivLu().inverse();
}

}  // namespace

//---------------------------------------------------------------------------//

Estimate central_norm(std::vector<double> const& xs, double q)
{
    if (!(q >= 1))
        throw std::invalid_argument("central_norm: q must be >= 1");
    if (xs.empty())
        return {};
    double const mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    std::vector<double> dev(xs.size());
    std::transform(xs.begin(), xs.end(), dev.begin(),
                   [mean](double x) { return std::abs(x - mean); });
    return power_mean_root(dev, q, q);
}

ZEnsemble sample_Z(EnvironmentLaw const& law, SlabSpec const& slab, std::int64_t n_env,
                   std::uint64_t seed, ZOptions const& opts)
{
    if (n_env < 1)
        throw std::invalid_argument("sample_Z: n_env must be >= 1");
    if (law.dimension() != slab.d)
        throw std::invalid_argument("sample_Z: dimension mismatch");
    if (slab.state_count() > opts.green.state_cap)
        throw std::length_error("sample_Z: slab exceeds the state cap");

    auto const domain = slab.domain();
    std::int64_t const origin = domain.index(Site{});
    ZEnsemble out;
    out.law_id = law.id();
    out.slab = slab;
    out.env_seeds.resize(static_cast<std::size_t>(n_env));
    out.z.resize(out.env_seeds.size());
    std::vector<double> residual(out.env_seeds.size());

    parallel_for(n_env, opts.workers, [&](std::int64_t i) {
        auto const k = static_cast<std::size_t>(i);
        out.env_seeds[k] = derive_seed(seed, static_cast<std::uint64_t>(i));
        Environment const env(law, domain, out.env_seeds[k]);
        auto const g = green_apply_exact(env, slab, drift_field(env, slab), opts.green);
        out.z[k] = g.values[static_cast<std::size_t>(origin)];
        residual[k] = g.residual;
    });

    out.mean = mean_and_se(out.z);
    out.max_residual = *std::max_element(residual.begin(), residual.end());
    for (double q : opts.moment_orders)
        out.central_moments[q] = central_norm(out.z, q);
    return out;
}

//---------------------------------------------------------------------------//

double perturbed_z_resolve(Environment const& env, SlabSpec const& slab, Site const& n,
                           std::uint64_t fresh_seed, std::vector<double> const& base,
                           GreenOptions const& opts)
{
    require_slab_env(env, slab, "perturbed_z_resolve");
    auto const perturbed = resample_site(env, n, fresh_seed);
    auto const g = green_apply_exact(perturbed, slab, drift_field(perturbed, slab), opts, base);
    return g.values[static_cast<std::size_t>(slab.domain().index(Site{}))];
}

double perturbed_z_rank_one(Environment const& env, SlabSpec const& slab, Site const& n,
                            std::uint64_t fresh_seed, GreenOptions const& opts)
{
    require_slab_env(env, slab, "perturbed_z_rank_one");
    auto const domain = slab.domain();
    if (!domain.contains(n))
        throw std::out_of_range("perturbed_z_rank_one: site outside the slab");
    DomainKernel const kernel(env, domain);
    auto const f = drift_field(env, slab);
    auto const G = green_apply_exact(env, slab, f, opts).values;
    std::int64_t const origin = domain.index(Site{});
    std::int64_t const s = domain.index(n);
    auto const row = visits_from(kernel, origin);
    auto const column = solve_column(kernel, s, opts.solver);
    auto const fresh = resample_site(env, n, fresh_seed).at(n);
    return G[static_cast<std::size_t>(origin)]
           + rank_one_delta(kernel, s, fresh, row[static_cast<std::size_t>(s)], G,
                            neighbor_column(kernel, s, column));
}

EfronSteinEstimate efron_stein(Environment const& env, SlabSpec const& slab,
                               std::uint64_t seed, EfronSteinOptions const& opts)
{
    require_slab_env(env, slab, "efron_stein");
    if (opts.inner_replicates < 1)
        throw std::invalid_argument("efron_stein: inner_replicates must be >= 1");

    auto const domain = slab.domain();
    std::int64_t const n_sites = domain.size();
    int const reps = opts.inner_replicates;
    std::int64_t const solves = opts.method == ResampleMethod::resolve
                                    ? n_sites * reps + 1
                                    : (n_sites > opts.dense_cap ? n_sites + 2 : 1);
    if (solves > opts.solve_cap)
    {
        throw std::length_error("efron_stein: " + std::to_string(solves)
                                + " solves exceed the cap " + std::to_string(opts.solve_cap));
    }

    DomainKernel const kernel(env, domain);
    auto const f = drift_field(env, slab);
    auto const base = green_apply_exact(env, slab, f, opts.green);
    std::vector<double> const& G = base.values;
    std::int64_t const origin = domain.index(Site{});
    double const z = G[static_cast<std::size_t>(origin)];

    std::vector<std::uint64_t> fresh(static_cast<std::size_t>(reps));
    for (int k = 0; k < reps; ++k)
        fresh[static_cast<std::size_t>(k)] = derive_seed(seed, static_cast<std::uint64_t>(k));

    EfronSteinEstimate out;
    out.z = z;
    out.inner_replicates = reps;
    out.sites = n_sites;
    out.solves = solves;
    out.site_plus.assign(static_cast<std::size_t>(n_sites), 0.0);
    out.site_minus.assign(static_cast<std::size_t>(n_sites), 0.0);

    auto accumulate_site = [&](std::int64_t s, auto&& delta_of) {
        Site const n = domain.site_at(s);
        double plus = 0;
        double minus = 0;
        for (int k = 0; k < reps; ++k)
        {
            // Z - Z'_n
            double const diff = -delta_of(n, fresh[static_cast<std::size_t>(k)]);
            if (diff > 0)
                plus += diff * diff;
            else
                minus += diff * diff;
        }
        out.site_plus[static_cast<std::size_t>(s)] = plus / reps;
        out.site_minus[static_cast<std::size_t>(s)] = minus / reps;
    };

    if (opts.method == ResampleMethod::resolve)
    {
        parallel_for(n_sites, opts.workers, [&](std::int64_t s) {
            accumulate_site(s, [&](Site const& n, std::uint64_t fs) {
                return perturbed_z_resolve(env, slab, n, fs, G, opts.green) - z;
            });
        });
    }
    else if (n_sites <= opts.dense_cap)
    {
        auto const inv = dense_green(kernel);
        parallel_for(n_sites, opts.workers, [&](std::int64_t s) {
            std::array<double, 2 * kMaxDim> col{};
            for (int k = 0; k < kernel.n_dirs(); ++k)
            {
                std::int64_t const y = kernel.neighbor(s, k);
                col[k] = y >= 0 ? inv(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(s))
                                : 0.0;
            }
            double const g0n = inv(static_cast<Eigen::Index>(origin), static_cast<Eigen::Index>(s));
            accumulate_site(s, [&](Site const& n, std::uint64_t fs) {
                auto const v = resample_site(env, n, fs).at(n);
                return rank_one_delta(kernel, s, v, g0n, G, col);
            });
        });
    }
    else
    {
        auto const row = visits_from(kernel, origin);
        parallel_for(n_sites, opts.workers, [&](std::int64_t s) {
            auto const col = neighbor_column(kernel, s, solve_column(kernel, s, opts.green.solver));
            double const g0n = row[static_cast<std::size_t>(s)];
            accumulate_site(s, [&](Site const& n, std::uint64_t fs) {
                auto const v = resample_site(env, n, fs).at(n);
                return rank_one_delta(kernel, s, v, g0n, G, col);
            });
        });
    }

    out.v_plus = std::accumulate(out.site_plus.begin(), out.site_plus.end(), 0.0);
    out.v_minus = std::accumulate(out.site_minus.begin(), out.site_minus.end(), 0.0);
    return out;
}

//---------------------------------------------------------------------------//

double bblm_constant(double q)
{
    double const se = std::exp(0.5);
    return std::sqrt(se / (se - 1.0) * q);
}

BblmReport bblm_check(EnvironmentLaw const& law, SlabSpec const& slab,
                      std::vector<double> const& q_values, std::int64_t n_env,
                      std::uint64_t seed, EfronSteinOptions const& opts)
{
    if (n_env < 2)
        throw std::invalid_argument("bblm_check: n_env must be >= 2");
    for (double q : q_values)
    {
        if (!(q >= 2))
            throw std::invalid_argument("bblm_check: q must be >= 2");
    }
    auto const domain = slab.domain();
    auto const n = static_cast<std::size_t>(n_env);
    std::vector<double> z(n);
    std::vector<double> vp(n);
    std::vector<double> vm(n);

    EfronSteinOptions inner = opts;
    inner.workers = 1;
    std::uint64_t const env_base = derive_seed(seed, "env");
    std::uint64_t const resample_base = derive_seed(seed, "resample");
    parallel_for(n_env, opts.workers, [&](std::int64_t i) {
        auto const k = static_cast<std::size_t>(i);
        Environment const env(law, domain, derive_seed(env_base, static_cast<std::uint64_t>(i)));
        auto const es = efron_stein(env, slab, derive_seed(resample_base, static_cast<std::uint64_t>(i)),
                                    inner);
        z[k] = es.z;
        vp[k] = es.v_plus;
        vm[k] = es.v_minus;
    });

    BblmReport out;
    out.law_id = law.id();
    out.slab = slab;
    out.n_env = n_env;
    out.inner_replicates = opts.inner_replicates;
    out.z_mean = mean_and_se(z);
    out.v_plus_mean = mean_and_se(vp);
    out.v_minus_mean = mean_and_se(vm);
    // absolute slack for solver error in Z
    double const floor = 1e-9 * std::max(1.0, std::abs(out.z_mean.value));
    {
        double ss = 0;
        for (double x : z)
            ss += (x - out.z_mean.value) * (x - out.z_mean.value);
        out.z_variance = ss / (static_cast<double>(n) - 1);
        // SE of the sample variance from the fourth central moment
        double m4 = 0;
        for (double x : z)
            m4 += std::pow(x - out.z_mean.value, 4);
        m4 /= static_cast<double>(n);
        double const var_se = std::sqrt(std::max(m4 - out.z_variance * out.z_variance, 0.0)
                                        / static_cast<double>(n));
        double const se = std::hypot(var_se, out.v_plus_mean.std_error);
        out.efron_stein_holds
            = out.z_variance <= out.v_plus_mean.value + 3.0 * se + floor * floor;
    }

    for (double q : q_values)
    {
        BblmRow row;
        row.q = q;
        row.constant = bblm_constant(q);
        row.lhs = central_norm(z, q);
        auto const p = power_mean_root(vp, q / 2.0, q);
        auto const m = power_mean_root(vm, q / 2.0, q);
        row.rhs.value = row.constant * (p.value + m.value);
        row.rhs.std_error = row.constant * std::hypot(p.std_error, m.std_error);
        row.margin = row.rhs.value - row.lhs.value;
        row.combined_se = std::hypot(row.lhs.std_error, row.rhs.std_error);
        row.holds = row.margin + 3.0 * row.combined_se + floor >= 0;
        out.rows.push_back(row);
    }
    out.bias_note = "plug-in norms of V+ and V- use " + std::to_string(opts.inner_replicates)
                    + " inner replicates per site; the q/2 norms carry an uncorrected bias";
    return out;
}

MeanBoundReport mean_bound_check(EnvironmentLaw const& law, SlabSpec const& slab,
                                 std::int64_t n_env, std::uint64_t seed,
                                 ZOptions const& opts)
{
    MeanBoundReport out;
    double const lambda = lambda_of(law);
    if (!(lambda > 0))
    {
        out.note = "lambda <= 0: no verdict";
        return out;
    }
    out.precondition_ok = true;
    int const d = law.dimension();
    double const L = slab.L;
    auto const ens = sample_Z(law, slab, n_env, seed, opts);
    double const scale = d * lambda * L * L;
    out.ratio = {ens.mean.value / scale, ens.mean.std_error / scale};
    out.holds = out.ratio.value + 3.0 * out.ratio.std_error >= out.target;

    double const sigma_2 = sigma_of(law, 1, 1'000'000, derive_seed(seed, "sigma-2")).value;
    double const eps = epsilon_of(law);
    out.hypothesis_lhs = lambda;
    out.hypothesis_rhs = sigma_2 * sigma_2 * (eps * std::log(L) + 1.0 / L);
    out.note = "hypothesis evaluated with c6 = 1: reference only";
    return out;
}

TailReport tail_check(ZEnsemble const& ensemble, int r, std::vector<double> const& u_grid,
                      double sigma_2r, double c7)
{
    if (ensemble.z.size() < 1000)
        throw std::invalid_argument("tail_check: needs at least 1000 samples");
    if (r < 2 || r % 2 != 0)
        throw std::invalid_argument("tail_check: r must be even and >= 2");

    auto const& z = ensemble.z;
    double const n = static_cast<double>(z.size());
    double const mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
    std::vector<double> dev(z.size());
    std::transform(z.begin(), z.end(), dev.begin(), [mean](double x) { return std::abs(x - mean); });

    TailReport out;
    out.r = r;
    out.c7 = c7;
    out.sigma_2r = sigma_2r;
    for (double x : dev)
        out.central_moment_2r += std::pow(x, 2 * r);
    out.central_moment_2r /= n;

    double const L = ensemble.slab.L;
    for (double u : u_grid)
    {
        TailRow row;
        row.u = u;
        auto const hits = std::count_if(dev.begin(), dev.end(), [u](double x) { return x >= u; });
        row.empirical = static_cast<double>(hits) / n;
        row.empirical_se = std::sqrt(row.empirical * (1 - row.empirical) / n);
        double const inf = std::numeric_limits<double>::infinity();
        if (u > 0)
        {
            row.markov = out.central_moment_2r / std::pow(u, 2 * r);
            row.paper_form = std::pow(c7 * r, r) * L * std::pow(sigma_2r / u, 2 * r);
        }
        else
        {
            row.markov = inf;
            row.paper_form = inf;
        }
        row.consistent = row.empirical <= row.markov + 3.0 * row.empirical_se;
        out.rows.push_back(row);
    }
    return out;
}

std::vector<ScalingRow> sigma_scaling(int d, SlabSpec const& slab,
                                      std::vector<double> const& amplitudes, int r,
                                      std::int64_t n_env, std::uint64_t seed,
                                      ZOptions const& opts)
{
    std::vector<ScalingRow> rows;
    for (std::size_t i = 0; i < amplitudes.size(); ++i)
    {
        LawParams params;
        params.amplitude = amplitudes[i];
        auto const law = make_law(LawKind::two_point, d, params);
        ScalingRow row;
        row.amplitude = amplitudes[i];
        row.sigma_2r = sigma_of(law, r).value;
        auto const ens = sample_Z(law, slab, n_env, derive_seed(seed, i), opts);
        row.central_norm = central_norm(ens.z, 2.0 * r);
        row.ratio = row.central_norm.value / row.sigma_2r;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace rwre
