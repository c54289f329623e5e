#include "rwre/environment.hpp"

#include <stdexcept>

namespace rwre
{

Environment::Environment(EnvironmentLaw law, LatticeDomain domain,
                         std::uint64_t master_seed)
    : law_(std::make_shared<EnvironmentLaw const>(std::move(law)))
    , domain_(std::move(domain))
    , seed_(master_seed)
{
    if (domain_.dim() != law_->dimension())
    {
        throw std::invalid_argument("domain and law dimensions differ");
    }
}

TransitionVector draw_site(EnvironmentLaw const& law, std::uint64_t seed,
                           Site const& x)
{
    if (law.kind() == LawKind::deterministic_drift)
    {
        return law.mean();
    }
    CounterStream rng(seed, encode_site(x, law.dimension()));
    return law.sample(rng);
}

TransitionVector Environment::at(Site const& x) const
{
    Site const y = domain_.fold(x);
    if (!overrides_.empty())
    {
        if (auto it = overrides_.find(y); it != overrides_.end())
        {
            return it->second;
        }
    }
    return draw_site(*law_, seed_, y);
}

Environment Environment::with_override(Site const& x, TransitionVector const& v) const
{
    Environment result = *this;
    result.overrides_[domain_.fold(x)] = v;
    return result;
}

Environment sample_environment(EnvironmentLaw const& law,
                               LatticeDomain const& domain,
                               std::uint64_t master_seed)
{
    return Environment(law, domain, master_seed);
}

Environment resample_site(Environment const& env, Site const& x,
                          std::uint64_t fresh_seed)
{
    if (!env.domain().contains(x))
    {
        throw std::out_of_range("resample_site: site " + to_string(x, env.dim())
                                + " outside domain " + env.domain().describe());
    }
    // Key on the fresh seed mixed with the master seed so that equal fresh
    // seeds in different environments still give independent draws.
    auto const key = derive_seed(env.master_seed() ^ mix64(fresh_seed), "resample");
    return env.with_override(x, draw_site(env.law(), key, env.domain().fold(x)));
}

std::array<double, kMaxDim> local_drift(Environment const& env, Site const& x)
{
    if (!env.domain().contains(x))
    {
        throw std::out_of_range("local_drift: site " + to_string(x, env.dim())
                                + " outside domain " + env.domain().describe());
    }
    auto const v = env.at(x);
    std::array<double, kMaxDim> drift{};
    for (int axis = 1; axis <= env.dim(); ++axis)
    {
        drift[axis - 1] = v.drift(axis);
    }
    return drift;
}

}  // namespace rwre
