#include "rwre/kernel.hpp"

#include <stdexcept>

namespace rwre
{

DomainKernel::DomainKernel(LatticeDomain const& domain)
    : domain_(domain), dim_(domain.dim()), size_(domain.size())
{
    probs_.resize(static_cast<std::size_t>(size_ * n_dirs()));
    build_neighbors();
}

DomainKernel::DomainKernel(Environment const& env, LatticeDomain const& domain)
    : DomainKernel(domain)
{
    if (env.dim() != domain.dim())
    {
        throw std::invalid_argument("kernel: environment and domain dimensions differ");
    }
    int const nd = n_dirs();
    for (std::int64_t s = 0; s < size_; ++s)
    {
        auto const v = env.at(domain_.site_at(s));
        for (int k = 0; k < nd; ++k)
        {
            probs_[s * nd + k] = v[k];
        }
    }
    build_cumulative();
}

DomainKernel DomainKernel::ssrw(LatticeDomain const& domain)
{
    DomainKernel kernel(domain);
    double const w = 1.0 / kernel.n_dirs();
    std::fill(kernel.probs_.begin(), kernel.probs_.end(), w);
    kernel.build_cumulative();
    return kernel;
}

void DomainKernel::build_neighbors()
{
    int const nd = n_dirs();
    nbr_.resize(static_cast<std::size_t>(size_ * nd));
    for (std::int64_t s = 0; s < size_; ++s)
    {
        Site const x = domain_.site_at(s);
        for (int k = 0; k < nd; ++k)
        {
            Site const y = step(x, k);
            std::int64_t const idx = domain_.index(y);
            if (idx >= 0)
            {
                nbr_[s * nd + k] = idx;
                continue;
            }
            switch (domain_.classify_exit(y))
            {
                case ExitFace::front:
                    nbr_[s * nd + k] = kExitFront;
                    break;
                case ExitFace::back:
                    nbr_[s * nd + k] = kExitBack;
                    break;
                default:
                    nbr_[s * nd + k] = kExitSide;
                    break;
            }
        }
    }
}

void DomainKernel::build_cumulative()
{
    int const nd = n_dirs();
    cum_.resize(probs_.size());
    for (std::int64_t s = 0; s < size_; ++s)
    {
        double running = 0;
        for (int k = 0; k < nd; ++k)
        {
            running += probs_[s * nd + k];
            cum_[s * nd + k] = running;
        }
    }
}

ExitFace DomainKernel::face_of(std::int64_t code)
{
    switch (code)
    {
        case kExitFront:
            return ExitFace::front;
        case kExitBack:
            return ExitFace::back;
        case kExitSide:
            return ExitFace::side;
        default:
            return ExitFace::none;
    }
}

void DomainKernel::apply(std::span<double const> in, std::span<double> out) const
{
    int const nd = n_dirs();
    for (std::int64_t s = 0; s < size_; ++s)
    {
        double acc = in[s];
        double const* p = &probs_[s * nd];
        std::int64_t const* nb = &nbr_[s * nd];
        for (int k = 0; k < nd; ++k)
        {
            if (nb[k] >= 0)
            {
                acc -= p[k] * in[nb[k]];
            }
        }
        out[s] = acc;
    }
}

void DomainKernel::apply_transpose(std::span<double const> in, std::span<double> out) const
{
    int const nd = n_dirs();
    std::copy(in.begin(), in.end(), out.begin());
    for (std::int64_t s = 0; s < size_; ++s)
    {
        double const* p = &probs_[s * nd];
        std::int64_t const* nb = &nbr_[s * nd];
        for (int k = 0; k < nd; ++k)
        {
            if (nb[k] >= 0)
            {
                out[nb[k]] -= p[k] * in[s];
            }
        }
    }
}

std::vector<double> DomainKernel::one_step_exit(ExitFace face) const
{
    int const nd = n_dirs();
    std::vector<double> result(static_cast<std::size_t>(size_), 0.0);
    for (std::int64_t s = 0; s < size_; ++s)
    {
        for (int k = 0; k < nd; ++k)
        {
            std::int64_t const code = nbr_[s * nd + k];
            if (code < 0 && face_of(code) == face)
            {
                result[s] += probs_[s * nd + k];
            }
        }
    }
    return result;
}

}  // namespace rwre
