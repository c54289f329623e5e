#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwre
{

struct SolverOptions
{
    double tolerance = 1e-12;     //!< target for the true residual, max norm
    std::int64_t max_iterations = 0;  //!< 0: proportional to the state count
};

struct SolveResult
{
    std::int64_t iterations = 0;
    double residual = 0;  //!< ||A x - b||_inf at return
    bool converged = false;
};

//! Thrown when an iterative solve misses its residual target.
class SolverError : public std::runtime_error
{
  public:
    SolverError(std::string const& what, SolveResult result)
        : std::runtime_error(what), result_(result)
    {
    }
    SolveResult const& result() const { return result_; }

  private:
    SolveResult result_;
};

namespace detail
{
inline constexpr int kMaxRestarts = 200;

inline double dot(std::span<double const> a, std::span<double const> b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        s += a[i] * b[i];
    }
    return s;
}

inline double max_abs(std::span<double const> a)
{
    double m = 0;
    for (double v : a)
    {
        m = std::max(m, std::abs(v));
    }
    return m;
}

template<class Op>
double true_residual(Op const& op, std::span<double const> b,
                     std::span<double const> x, std::vector<double>& work)
{
    op.apply(x, work);
    double m = 0;
    for (std::size_t i = 0; i < b.size(); ++i)
    {
        m = std::max(m, std::abs(b[i] - work[i]));
    }
    return m;
}

inline std::int64_t iteration_cap(SolverOptions const& opts, std::int64_t n)
{
    return opts.max_iterations > 0 ? opts.max_iterations
                                   : std::max<std::int64_t>(1000, 10 * n);
}
}  // namespace detail

//---------------------------------------------------------------------------//
/*!
 * BiCGSTAB for a general operator with `size()` and `apply(in, out)`.
 *
 * `x` holds the initial guess on entry (warm start) and the solution on
 * return. The loop restarts from the current iterate whenever the
 * recursive residual meets the target but the true residual does not, or
 * on breakdown. Serial with a fixed reduction order, so results are
 * bitwise reproducible.
 */
template<class Op>
SolveResult bicgstab(Op const& op, std::span<double const> b, std::vector<double>& x,
                     SolverOptions const& opts = {})
{
    auto const n = static_cast<std::size_t>(op.size());
    if (b.size() != n)
    {
        throw std::invalid_argument("bicgstab: right-hand side has wrong size");
    }
    x.resize(n, 0.0);
    std::int64_t const cap = detail::iteration_cap(opts, op.size());
    // The 2-norm bounds the max norm, so this target is conservative.
    double const target = 0.5 * opts.tolerance;

    std::vector<double> r(n), r_hat(n), p(n), v(n), s(n), t(n), work(n);
    SolveResult result;
    int restarts = 0;

    while (true)
    {
        op.apply(x, work);
        for (std::size_t i = 0; i < n; ++i)
        {
            r[i] = b[i] - work[i];
        }
        result.residual = detail::max_abs(r);
        if (result.residual <= opts.tolerance)
        {
            result.converged = true;
            return result;
        }
        if (result.iterations >= cap || ++restarts > detail::kMaxRestarts)
        {
            return result;
        }
        r_hat = r;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        double rho = 1, alpha = 1, omega = 1;
        bool restart = false;

        while (!restart && result.iterations < cap)
        {
            ++result.iterations;
            double const rho_next = detail::dot(r_hat, r);
            if (rho_next == 0 || omega == 0)
            {
                restart = true;
                break;
            }
            double const beta = (rho_next / rho) * (alpha / omega);
            rho = rho_next;
            for (std::size_t i = 0; i < n; ++i)
            {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            op.apply(p, v);
            double const denom = detail::dot(r_hat, v);
            if (denom == 0)
            {
                restart = true;
                break;
            }
            alpha = rho / denom;
            for (std::size_t i = 0; i < n; ++i)
            {
                s[i] = r[i] - alpha * v[i];
            }
            if (std::sqrt(detail::dot(s, s)) <= target)
            {
                for (std::size_t i = 0; i < n; ++i)
                {
                    x[i] += alpha * p[i];
                }
                restart = true;
                break;
            }
            op.apply(s, t);
            double const tt = detail::dot(t, t);
            omega = tt > 0 ? detail::dot(t, s) / tt : 0.0;
            for (std::size_t i = 0; i < n; ++i)
            {
                x[i] += alpha * p[i] + omega * s[i];
                r[i] = s[i] - omega * t[i];
            }
            if (std::sqrt(detail::dot(r, r)) <= target)
            {
                restart = true;
            }
        }
    }
}

//---------------------------------------------------------------------------//
/*!
 * Conjugate gradients for a symmetric positive definite operator.
 */
template<class Op>
SolveResult conjugate_gradient(Op const& op, std::span<double const> b,
                               std::vector<double>& x, SolverOptions const& opts = {})
{
    auto const n = static_cast<std::size_t>(op.size());
    if (b.size() != n)
    {
        throw std::invalid_argument("conjugate_gradient: right-hand side has wrong size");
    }
    x.resize(n, 0.0);
    std::int64_t const cap = detail::iteration_cap(opts, op.size());
    double const target = 0.5 * opts.tolerance;

    std::vector<double> r(n), p(n), q(n);
    SolveResult result;
    int restarts = 0;
    while (true)
    {
        op.apply(x, q);
        for (std::size_t i = 0; i < n; ++i)
        {
            r[i] = b[i] - q[i];
        }
        result.residual = detail::max_abs(r);
        if (result.residual <= opts.tolerance)
        {
            result.converged = true;
            return result;
        }
        if (result.iterations >= cap || ++restarts > detail::kMaxRestarts)
        {
            return result;
        }
        p = r;
        double rr = detail::dot(r, r);
        while (result.iterations < cap)
        {
            ++result.iterations;
            op.apply(p, q);
            double const pq = detail::dot(p, q);
            if (pq <= 0)
            {
                break;
            }
            double const alpha = rr / pq;
            for (std::size_t i = 0; i < n; ++i)
            {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            double const rr_next = detail::dot(r, r);
            if (std::sqrt(rr_next) <= target)
            {
                break;
            }
            double const beta = rr_next / rr;
            rr = rr_next;
            for (std::size_t i = 0; i < n; ++i)
            {
                p[i] = r[i] + beta * p[i];
            }
        }
    }
}

//! Adapter presenting the transpose of an operator with apply_transpose().
template<class Op>
struct Transposed
{
    Op const& op;
    std::int64_t size() const { return op.size(); }
    void apply(std::span<double const> in, std::span<double> out) const
    {
        op.apply_transpose(in, out);
    }
};

}  // namespace rwre
