#include "rwre/green.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rwre/parallel.hpp"

namespace rwre
{

std::int64_t SlabSpec::state_count() const
{
    std::int64_t n = 2 * static_cast<std::int64_t>(L);
    for (int i = 1; i < d; ++i)
    {
        n *= W;
    }
    return n;
}

FieldSpec FieldSpec::parse(std::string const& text, int dim)
{
    if (text == "drift-e1")
    {
        return {FieldKind::drift_e1, {}};
    }
    if (text == "ones")
    {
        return {FieldKind::ones, {}};
    }
    std::string const prefix = "point-mass";
    if (text.rfind(prefix, 0) == 0)
    {
        FieldSpec spec{FieldKind::point_mass, {}};
        auto open = text.find('(');
        auto close = text.find(')');
        if (open == std::string::npos)
        {
            return spec;  // origin
        }
        if (close == std::string::npos || close < open)
        {
            throw std::invalid_argument("bad field '" + text + "'");
        }
        std::istringstream is(text.substr(open + 1, close - open - 1));
        std::string item;
        int i = 0;
        while (std::getline(is, item, ','))
        {
            if (i >= dim)
            {
                throw std::invalid_argument("point-mass site has too many coordinates");
            }
            spec.point[i++] = std::stoi(item);
        }
        if (i != dim)
        {
            throw std::invalid_argument("point-mass site needs " + std::to_string(dim)
                                        + " coordinates");
        }
        return spec;
    }
    throw std::invalid_argument("unknown field '" + text
                                + "' (expected drift-e1, ones or point-mass(x1,...))");
}

std::string FieldSpec::describe(int dim) const
{
    switch (kind)
    {
        case FieldKind::drift_e1:
            return "drift-e1";
        case FieldKind::ones:
            return "ones";
        case FieldKind::point_mass: {
            auto s = to_string(point, dim);
            return "point-mass" + s;
        }
    }
    return "unknown";
}

std::vector<double> make_field(Environment const& env, SlabSpec const& slab,
                               FieldSpec const& spec)
{
    auto const domain = slab.domain();
    std::vector<double> f(static_cast<std::size_t>(domain.size()), 0.0);
    switch (spec.kind)
    {
        case FieldKind::drift_e1:
            for (std::int64_t s = 0; s < domain.size(); ++s)
            {
                f[s] = env.at(domain.site_at(s)).drift(1);
            }
            break;
        case FieldKind::ones:
            std::fill(f.begin(), f.end(), 1.0);
            break;
        case FieldKind::point_mass: {
            auto const idx = domain.index(spec.point);
            if (idx < 0)
            {
                throw std::out_of_range("point-mass site outside slab");
            }
            f[idx] = 1.0;
            break;
        }
    }
    return f;
}

double GreenField::at(Site const& x) const
{
    auto const domain = slab.domain();
    Site const y = domain.fold(x);
    if (method == EvalMode::exact && static_cast<std::int64_t>(values.size()) == domain.size())
    {
        auto const idx = domain.index(y);
        if (idx < 0)
        {
            throw std::out_of_range("GreenField::at: site outside slab");
        }
        return values[idx];
    }
    for (std::size_t i = 0; i < sites.size(); ++i)
    {
        if (domain.fold(sites[i]) == y)
        {
            return values[i];
        }
    }
    throw std::out_of_range("GreenField::at: no value for site " + to_string(x, slab.d));
}

//---------------------------------------------------------------------------//

GreenField green_apply_exact(Environment const& env, SlabSpec const& slab,
                             std::span<double const> f, GreenOptions const& opts,
                             std::span<double const> warm_start)
{
    if (env.dim() != slab.d)
    {
        throw std::invalid_argument("green_apply_exact: dimension mismatch");
    }
    if (slab.state_count() > opts.state_cap)
    {
        throw std::length_error("green_apply_exact: " + std::to_string(slab.state_count())
                                + " slab states exceed the cap "
                                + std::to_string(opts.state_cap));
    }
    auto const domain = slab.domain();
    if (static_cast<std::int64_t>(f.size()) != domain.size())
    {
        throw std::invalid_argument("green_apply_exact: field has wrong size");
    }
    DomainKernel const kernel(env, domain);

    GreenField out;
    out.slab = slab;
    out.method = EvalMode::exact;
    if (warm_start.size() == f.size())
    {
        out.values.assign(warm_start.begin(), warm_start.end());
    }
    auto const result = bicgstab(kernel, f, out.values, opts.solver);
    out.residual = result.residual;
    out.iterations = result.iterations;
    if (!result.converged)
    {
        throw SolverError("green_apply_exact: residual " + std::to_string(result.residual)
                              + " above target after "
                              + std::to_string(result.iterations) + " iterations",
                          result);
    }
    out.sites.reserve(static_cast<std::size_t>(domain.size()));
    for (std::int64_t s = 0; s < domain.size(); ++s)
    {
        out.sites.push_back(domain.site_at(s));
    }
    return out;
}

GreenField green_apply_exact(Environment const& env, SlabSpec const& slab,
                             FieldSpec const& f, GreenOptions const& opts)
{
    auto const values = make_field(env, slab, f);
    return green_apply_exact(env, slab, values, opts);
}

GreenField green_apply_mc(Environment const& env, SlabSpec const& slab,
                          std::span<double const> f, std::int64_t n_walks,
                          std::uint64_t seed, GreenMcOptions const& opts)
{
    auto const domain = slab.domain();
    if (static_cast<std::int64_t>(f.size()) != domain.size())
    {
        throw std::invalid_argument("green_apply_mc: field has wrong size");
    }
    if (n_walks < 1)
    {
        throw std::invalid_argument("green_apply_mc: n_walks must be >= 1");
    }
    DomainKernel const kernel(env, domain);

    struct Partial
    {
        double sum = 0;
        double sum_sq = 0;
        std::int64_t completed = 0;
        std::int64_t censored = 0;
    };

    GreenField out;
    out.slab = slab;
    out.method = EvalMode::mc;
    std::int64_t const chunk = std::max<std::int64_t>(1, opts.chunk);
    std::int64_t const n_chunks = (n_walks + chunk - 1) / chunk;
    std::int64_t total_censored = 0;

    for (std::size_t si = 0; si < opts.starts.size(); ++si)
    {
        Site const start = domain.fold(opts.starts[si]);
        std::int64_t const s0 = domain.index(start);
        if (s0 < 0)
        {
            throw std::out_of_range("green_apply_mc: start outside slab");
        }
        std::int64_t const cap = opts.step_cap > 0 ? opts.step_cap
                                                   : default_step_cap(domain, start);
        std::uint64_t const start_seed = derive_seed(seed, static_cast<std::uint64_t>(si));
        std::vector<Partial> parts(static_cast<std::size_t>(n_chunks));
        parallel_for(n_chunks, opts.workers, [&](std::int64_t c) {
            Partial part;
            std::int64_t const end = std::min(n_walks, (c + 1) * chunk);
            for (std::int64_t j = c * chunk; j < end; ++j)
            {
                CounterStream rng(start_seed, static_cast<std::uint64_t>(j));
                std::int64_t s = s0;
                double path = 0;
                bool exited = false;
                for (std::int64_t t = 0; t < cap; ++t)
                {
                    path += f[s];
                    std::int64_t const next = kernel.neighbor(s, kernel.pick(s, rng.uniform()));
                    if (next < 0)
                    {
                        exited = true;
                        break;
                    }
                    s = next;
                }
                if (!exited)
                {
                    ++part.censored;
                    continue;
                }
                ++part.completed;
                part.sum += path;
                part.sum_sq += path * path;
            }
            parts[c] = part;
        });
        Partial total;
        for (auto const& p : parts)
        {
            total.sum += p.sum;
            total.sum_sq += p.sum_sq;
            total.completed += p.completed;
            total.censored += p.censored;
        }
        double const n = static_cast<double>(total.completed);
        double const mean = total.completed ? total.sum / n
                                            : std::numeric_limits<double>::quiet_NaN();
        double se = 0;
        if (total.completed > 1)
        {
            double const var = (total.sum_sq - n * mean * mean) / (n - 1);
            se = std::sqrt(std::max(0.0, var) / n);
        }
        out.sites.push_back(start);
        out.values.push_back(mean);
        out.std_errors.push_back(se);
        total_censored += total.censored;
    }
    out.censored_fraction = static_cast<double>(total_censored)
                            / static_cast<double>(n_walks * static_cast<std::int64_t>(opts.starts.size()));
    return out;
}

//---------------------------------------------------------------------------//

HatRho hat_rho_from_field(GreenField const& green, int M, int stride)
{
    if (green.method != EvalMode::exact)
    {
        throw std::invalid_argument("hat_rho needs an exact Green field");
    }
    if (stride < 1)
    {
        throw std::invalid_argument("hat_rho: stride must be >= 1");
    }
    auto const domain = green.slab.domain();
    double const L = green.slab.L;
    double const half = std::pow(static_cast<double>(M), 3) / 4.0;
    int const dim = green.slab.d;

    HatRho out;
    out.value = -std::numeric_limits<double>::infinity();
    out.min_green = std::numeric_limits<double>::infinity();
    out.residual = green.residual;
    // x.e1 = 0 is one contiguous block of states.
    std::int64_t const block = domain.stride(1);
    std::int64_t const first = -static_cast<std::int64_t>(domain.lo(1)) * block;
    for (std::int64_t s = first; s < first + block; ++s)
    {
        Site const x = domain.site_at(s);
        bool in_plane = true;
        bool sampled = true;
        for (int j = 1; j < dim; ++j)
        {
            in_plane = in_plane && std::abs(static_cast<double>(x[j])) < half;
            sampled = sampled && (x[j] - domain.lo(j + 1)) % stride == 0;
        }
        if (!in_plane)
        {
            continue;
        }
        ++out.sites_total;
        if (!sampled)
        {
            continue;
        }
        ++out.sites_evaluated;
        double const g = green.values[s] / L;
        out.min_green = std::min(out.min_green, green.values[s]);
        if (1 + g <= 0)
        {
            out.denominator_positive = false;
            out.value = std::numeric_limits<double>::infinity();
            out.argmax = x;
            continue;
        }
        double const ratio = (1 - g) / (1 + g);
        if (ratio > out.value)
        {
            out.value = ratio;
            out.argmax = x;
        }
    }
    return out;
}

HatRho hat_rho(Environment const& env, int M, int L, int W, int stride,
               GreenOptions const& opts)
{
    SlabSpec const slab{L, W, env.dim()};
    auto const green = green_apply_exact(env, slab, FieldSpec{FieldKind::drift_e1, {}}, opts);
    return hat_rho_from_field(green, M, stride);
}

//---------------------------------------------------------------------------//

SsrwSlabOperator::SsrwSlabOperator(SlabSpec const& slab) : dim_(slab.d)
{
    auto const domain = slab.domain();
    size_ = domain.size();
    for (int i = 0; i < dim_; ++i)
    {
        extent_[i] = domain.hi(i + 1) - domain.lo(i + 1) + 1;
        stride_[i] = domain.stride(i + 1);
    }
}

void SsrwSlabOperator::apply(std::span<double const> in, std::span<double> out) const
{
    double const w = 1.0 / (2.0 * dim_);
    std::copy(in.begin(), in.end(), out.begin());
    for (int a = 0; a < dim_; ++a)
    {
        std::int64_t const n_a = extent_[a];
        std::int64_t const s_a = stride_[a];
        std::int64_t const outer = size_ / (n_a * s_a);
        bool const periodic = a > 0;
        for (std::int64_t o = 0; o < outer; ++o)
        {
            std::int64_t const block = o * n_a * s_a;
            for (std::int64_t c = 0; c < n_a; ++c)
            {
                double* dst = &out[block + c * s_a];
                std::int64_t plus = c + 1 < n_a ? c + 1 : (periodic ? 0 : -1);
                std::int64_t minus = c > 0 ? c - 1 : (periodic ? n_a - 1 : -1);
                if (plus >= 0)
                {
                    double const* src = &in[block + plus * s_a];
                    for (std::int64_t i = 0; i < s_a; ++i)
                    {
                        dst[i] -= w * src[i];
                    }
                }
                if (minus >= 0)
                {
                    double const* src = &in[block + minus * s_a];
                    for (std::int64_t i = 0; i < s_a; ++i)
                    {
                        dst[i] -= w * src[i];
                    }
                }
            }
        }
    }
}

std::vector<double> ssrw_green_field(SlabSpec const& slab, double* residual)
{
    SsrwSlabOperator const op(slab);
    auto const domain = slab.domain();
    std::vector<double> rhs(static_cast<std::size_t>(op.size()), 0.0);
    rhs[domain.index(Site{})] = 1.0;
    std::vector<double> g;
    // I - P is symmetric here, so column 0 of the inverse equals row 0.
    auto const result = conjugate_gradient(op, rhs, g);
    if (!result.converged)
    {
        throw SolverError("ssrw_green_field: residual target not met", result);
    }
    if (residual)
    {
        *residual = result.residual;
    }
    return g;
}

double ssrw_green_slab(SlabSpec const& slab, Site const& x)
{
    auto const domain = slab.domain();
    auto const idx = domain.index(x);
    if (idx < 0)
    {
        throw std::out_of_range("ssrw_green_slab: site outside slab");
    }
    return ssrw_green_field(slab)[idx];
}

GammaWeightSum gamma_weight_sum(int L, int W, double alpha, int d, bool check_truncation)
{
    if (!(alpha > 0 && alpha < 1))
    {
        throw std::invalid_argument("gamma_weight_sum: alpha must lie in (0, 1)");
    }
    GammaWeightSum out;
    out.exponent = 2.0 / (2.0 - alpha);
    auto sum_for = [&](int width, double* residual) {
        auto const g = ssrw_green_field(SlabSpec{L, width, d}, residual);
        double total = 0;
        for (double v : g)
        {
            total += std::pow(std::max(v, 0.0), out.exponent);
        }
        return total;
    };
    out.value = sum_for(W, &out.residual);
    if (check_truncation)
    {
        double unused = 0;
        double const doubled = sum_for(2 * W, &unused);
        out.truncation_change = std::abs(doubled - out.value) / out.value;
        out.truncation_warning = out.truncation_change > 0.01;
    }
    return out;
}

}  // namespace rwre
