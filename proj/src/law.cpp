#include "rwre/law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rwre
{
namespace
{
// Running mean/variance (Welford).
struct Accumulator
{
    std::int64_t n = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x)
    {
        ++n;
        double const delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    double std_error() const
    {
        if (n < 2)
        {
            return 0;
        }
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

double max_deviation(TransitionVector const& v)
{
    double const base = 1.0 / v.size();
    double worst = 0;
    for (int k = 0; k < v.size(); ++k)
    {
        worst = std::max(worst, std::abs(v[k] - base));
    }
    return worst;
}

// (sum_i w_i |x_i|^q)^(1/q), scaled by max |x_i| so large q cannot underflow.
double power_sum_root(std::vector<double> const& x, std::vector<double> const& w, int q)
{
    double top = 0;
    for (double v : x)
    {
        top = std::max(top, std::abs(v));
    }
    if (top == 0)
    {
        return 0;
    }
    double sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sum += w[i] * std::pow(std::abs(x[i]) / top, q);
    }
    return top * std::pow(sum, 1.0 / q);
}

}  // namespace

std::string to_string(LawKind kind)
{
    switch (kind)
    {
        case LawKind::deterministic_drift:
            return "deterministic-drift";
        case LawKind::two_point:
            return "two-point";
        case LawKind::isotropic_plus_drift:
            return "isotropic-plus-drift";
        case LawKind::custom_table:
            return "custom-table";
    }
    return "unknown";
}

LawKind law_kind_from_string(std::string const& name)
{
    for (auto kind : {LawKind::deterministic_drift, LawKind::two_point,
                      LawKind::isotropic_plus_drift, LawKind::custom_table})
    {
        if (to_string(kind) == name)
        {
            return kind;
        }
    }
    throw std::invalid_argument("unknown law kind '" + name + "'");
}

//---------------------------------------------------------------------------//

EnvironmentLaw make_law(LawKind kind, int dimension, LawParams const& params)
{
    if (dimension < 2 || dimension > kMaxDim)
    {
        throw std::invalid_argument("law dimension must be in [2, "
                                    + std::to_string(kMaxDim) + "]");
    }
    if (!std::isfinite(params.lambda) || !std::isfinite(params.amplitude))
    {
        throw std::invalid_argument("law parameters must be finite");
    }
    if (params.amplitude < 0)
    {
        throw std::invalid_argument("amplitude must be nonnegative");
    }

    EnvironmentLaw law;
    law.kind_ = kind;
    law.dim_ = dimension;
    law.params_ = params;

    double const d = dimension;
    auto const base = TransitionVector::uniform(dimension);
    law.mean_ = base;

    switch (kind)
    {
        case LawKind::deterministic_drift:
            law.mean_[0] += params.lambda / 2;
            law.mean_[1] -= params.lambda / 2;
            law.epsilon_ = 4 * d * std::abs(params.lambda) / 2;
            law.params_.amplitude = 0;
            break;
        case LawKind::two_point:
            law.mean_[0] += params.lambda / 2;
            law.mean_[1] -= params.lambda / 2;
            law.epsilon_ = 4 * d * (std::abs(params.lambda) / 2 + params.amplitude);
            break;
        case LawKind::isotropic_plus_drift:
            law.mean_[0] += params.lambda / 2;
            law.mean_[1] -= params.lambda / 2;
            // sup |xi_e - mean(xi)| = 2 - 1/d for variates in [-1, 1]
            law.epsilon_ = 4 * d
                           * (params.amplitude * (2 - 1 / d)
                              + std::abs(params.lambda) / 2);
            break;
        case LawKind::custom_table: {
            if (params.atoms.empty())
            {
                throw std::invalid_argument("custom table needs at least one atom");
            }
            double total = 0;
            for (auto const& atom : params.atoms)
            {
                if (!(atom.weight > 0))
                {
                    throw std::invalid_argument("custom table weights must be positive");
                }
                if (atom.vector.dim != dimension)
                {
                    throw std::invalid_argument("custom table atom has wrong dimension");
                }
                check_probability_vector(atom.vector);
                total += atom.weight;
            }
            law.mean_ = TransitionVector{};
            law.mean_.dim = dimension;
            double worst = 0;
            double running = 0;
            for (auto const& atom : params.atoms)
            {
                running += atom.weight / total;
                law.atom_cdf_.push_back(running);
                for (int k = 0; k < 2 * dimension; ++k)
                {
                    law.mean_[k] += atom.weight / total * atom.vector[k];
                }
                worst = std::max(worst, max_deviation(atom.vector));
            }
            law.atom_cdf_.back() = 1.0;
            law.epsilon_ = 4 * d * worst;
            break;
        }
    }

    // epsilon < 1 keeps every entry in [1/(4d), 3/(4d)], inside [0, 1/d].
    if (!(law.epsilon_ < 1.0))
    {
        std::ostringstream os;
        os << to_string(kind) << " parameters give epsilon = " << law.epsilon_
           << " >= 1; entries could leave [1/(4d), 3/(4d)]";
        throw std::invalid_argument(os.str());
    }
    return law;
}

EnvironmentLaw ssrw_law(int dimension)
{
    return make_law(LawKind::deterministic_drift, dimension, LawParams{});
}

TransitionVector EnvironmentLaw::sample(CounterStream& rng) const
{
    switch (kind_)
    {
        case LawKind::deterministic_drift:
            return mean_;
        case LawKind::two_point: {
            TransitionVector v = mean_;
            double const shift = params_.amplitude * rng.sign();
            v[0] += shift;
            v[1] -= shift;
            return v;
        }
        case LawKind::isotropic_plus_drift: {
            int const n = 2 * dim_;
            std::array<double, kMaxDirs> xi{};
            double avg = 0;
            for (int k = 0; k < n; ++k)
            {
                xi[k] = params_.base == IsotropicBase::uniform
                            ? rng.symmetric()
                            : static_cast<double>(rng.sign());
                avg += xi[k];
            }
            avg /= n;
            TransitionVector v = mean_;
            for (int k = 0; k < n; ++k)
            {
                v[k] += params_.amplitude * (xi[k] - avg);
            }
            return v;
        }
        case LawKind::custom_table: {
            double const u = rng.uniform();
            auto const it = std::upper_bound(atom_cdf_.begin(), atom_cdf_.end(), u);
            auto const idx = std::min<std::size_t>(it - atom_cdf_.begin(),
                                                   atom_cdf_.size() - 1);
            return params_.atoms[idx].vector;
        }
    }
    return mean_;
}

std::optional<double> EnvironmentLaw::sigma_exact(int r) const
{
    switch (kind_)
    {
        case LawKind::deterministic_drift:
            return 0.0;
        case LawKind::two_point:
            return std::pow(2.0, 1.0 / (2 * r)) * params_.amplitude;
        case LawKind::custom_table: {
            double total_weight = 0;
            for (auto const& atom : params_.atoms)
            {
                total_weight += atom.weight;
            }
            std::vector<double> x, w;
            for (auto const& atom : params_.atoms)
            {
                for (int k = 0; k < 2 * dim_; ++k)
                {
                    x.push_back(atom.vector[k] - mean_[k]);
                    w.push_back(atom.weight / total_weight);
                }
            }
            return power_sum_root(x, w, 2 * r);
        }
        case LawKind::isotropic_plus_drift: {
            if (params_.amplitude == 0)
            {
                return 0.0;
            }
            if (params_.base != IsotropicBase::rademacher)
            {
                return std::nullopt;
            }
            // Enumerate the 2^(2d) equiprobable sign patterns.
            int const n = 2 * dim_;
            std::vector<double> x, w;
            double const weight = 1.0 / static_cast<double>(1u << n);
            for (unsigned mask = 0; mask < (1u << n); ++mask)
            {
                double avg = 0;
                for (int k = 0; k < n; ++k)
                {
                    avg += (mask >> k) & 1u ? 1.0 : -1.0;
                }
                avg /= n;
                for (int k = 0; k < n; ++k)
                {
                    double const xi = (mask >> k) & 1u ? 1.0 : -1.0;
                    x.push_back(params_.amplitude * (xi - avg));
                    w.push_back(weight);
                }
            }
            return power_sum_root(x, w, 2 * r);
        }
    }
    return std::nullopt;
}

bool EnvironmentLaw::is_deterministic() const
{
    switch (kind_)
    {
        case LawKind::deterministic_drift:
            return true;
        case LawKind::two_point:
        case LawKind::isotropic_plus_drift:
            return params_.amplitude == 0;
        case LawKind::custom_table:
            return std::all_of(params_.atoms.begin(), params_.atoms.end(),
                               [&](LawAtom const& a) {
                                   return a.vector == params_.atoms.front().vector;
                               });
    }
    return false;
}

std::string EnvironmentLaw::id() const
{
    std::ostringstream os;
    os.precision(10);
    os << to_string(kind_) << "(d=" << dim_;
    switch (kind_)
    {
        case LawKind::deterministic_drift:
            os << ",lambda=" << params_.lambda;
            break;
        case LawKind::two_point:
            os << ",a=" << params_.amplitude << ",lambda=" << params_.lambda;
            break;
        case LawKind::isotropic_plus_drift:
            os << ",a=" << params_.amplitude << ",lambda=" << params_.lambda
               << ",base="
               << (params_.base == IsotropicBase::uniform ? "uniform" : "rademacher");
            break;
        case LawKind::custom_table:
            os << ",atoms=" << params_.atoms.size();
            break;
    }
    os << ')';
    return os.str();
}

//---------------------------------------------------------------------------//

double epsilon_of(EnvironmentLaw const& law)
{
    return law.epsilon();
}

double lambda_of(EnvironmentLaw const& law)
{
    return law.lambda();
}

Estimate lambda_mc(EnvironmentLaw const& law, std::int64_t n_samples,
                   std::uint64_t seed)
{
    Accumulator acc;
    for (std::int64_t i = 0; i < n_samples; ++i)
    {
        CounterStream rng(seed, static_cast<std::uint64_t>(i));
        acc.add(law.sample(rng).drift(1));
    }
    return {acc.mean, acc.std_error()};
}

Estimate sigma_mc(EnvironmentLaw const& law, int r, std::int64_t n_samples,
                  std::uint64_t seed)
{
    if (r < 1)
    {
        throw std::invalid_argument("sigma_{2r} needs r >= 1");
    }
    auto const& mean = law.mean();
    // |omega(e) - E omega(e)| <= epsilon/(2d); moments are taken of the
    // deviation in units of that bound so that large r cannot underflow.
    double const scale = law.epsilon() / (2.0 * law.dimension());
    if (scale == 0)
    {
        return {0.0, 0.0};
    }
    Accumulator acc;
    for (std::int64_t i = 0; i < n_samples; ++i)
    {
        CounterStream rng(seed, static_cast<std::uint64_t>(i));
        auto const v = law.sample(rng);
        double s = 0;
        for (int k = 0; k < v.size(); ++k)
        {
            s += std::pow((v[k] - mean[k]) / scale, 2 * r);
        }
        acc.add(s);
    }
    if (acc.mean <= 0)
    {
        return {0.0, 0.0};
    }
    double const sigma = scale * std::pow(acc.mean, 1.0 / (2 * r));
    // delta method for m^(1/2r)
    return {sigma, sigma / (2.0 * r * acc.mean) * acc.std_error()};
}

Estimate sigma_of(EnvironmentLaw const& law, int r, std::int64_t n_samples,
                  std::uint64_t seed)
{
    if (r < 1)
    {
        throw std::invalid_argument("sigma_{2r} needs r >= 1");
    }
    if (auto exact = law.sigma_exact(r))
    {
        return {*exact, 0.0};
    }
    return sigma_mc(law, r, n_samples, seed);
}

MomentReport moment_report(EnvironmentLaw const& law,
                           std::vector<int> const& r_values,
                           std::int64_t n_samples, std::uint64_t seed)
{
    MomentReport report;
    report.epsilon = law.epsilon();
    report.lambda = law.lambda();
    for (int r : r_values)
    {
        auto const est = sigma_of(law, r, n_samples, derive_seed(seed, r));
        report.sigma[2 * r] = est.value;
        report.sigma_std_error[2 * r] = est.std_error;
        if (!law.sigma_exact(r))
        {
            report.sample_count = n_samples;
        }
    }
    return report;
}

Estimate variance_covariance_gap(EnvironmentLaw const& law,
                                 std::int64_t n_samples, std::uint64_t seed)
{
    auto const& mean = law.mean();
    Accumulator acc;
    for (std::int64_t i = 0; i < n_samples; ++i)
    {
        CounterStream rng(seed, static_cast<std::uint64_t>(i));
        auto const v = law.sample(rng);
        double const a = v[0] - mean[0];
        double const b = v[1] - mean[1];
        acc.add(a * a - a * b);
    }
    return {acc.mean, acc.std_error()};
}

}  // namespace rwre
