#pragma once

// Independent reference computations used by the unit and acceptance
// suites. Nothing here calls the library's solvers or domain indexing.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rwre/environment.hpp"

namespace rwre::testing
{

//! Dense G_U[f] on the slab -L <= x1 < L with transverse period W.
class DenseSlab
{
  public:
    DenseSlab(int d, int L, int W) : d_(d), L_(L), W_(W)
    {
        n_ = 2 * L;
        for (int i = 1; i < d; ++i)
            n_ *= W;
    }

    int size() const { return n_; }

    Site site(int idx) const
    {
        Site x{};
        for (int i = d_ - 1; i >= 1; --i)
        {
            x[i] = idx % W_ - W_ / 2;
            idx /= W_;
        }
        x[0] = idx - L_;
        return x;
    }

    //! -1 when x.e1 leaves [-L, L).
    int index(Site x) const
    {
        if (x[0] < -L_ || x[0] >= L_)
            return -1;
        int idx = x[0] + L_;
        for (int i = 1; i < d_; ++i)
        {
            int t = ((x[i] + W_ / 2) % W_ + W_) % W_;
            idx = idx * W_ + t;
        }
        return idx;
    }

    Eigen::VectorXd solve(Environment const& env,
                          std::function<double(Site const&)> const& f) const
    {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n_, n_);
        Eigen::VectorXd b(n_);
        for (int s = 0; s < n_; ++s)
        {
            Site const x = site(s);
            auto const v = env.at(x);
            b[s] = f(x);
            for (int k = 0; k < 2 * d_; ++k)
            {
                Site y = x;
                y[k / 2] += (k % 2 == 0) ? 1 : -1;
                int const t = index(y);
                if (t >= 0)
                    A(s, t) -= v[k];
            }
        }
        return A.partialPivLu().solve(b);
    }

  private:
    int d_, L_, W_, n_;
};

//! Expected absorption time from k of a walk on {0..N} stepping +1 w.p. p,
//! -1 w.p. q = 1 - p.
inline double ruin_time(double p, int k, int N)
{
    double const q = 1 - p;
    if (std::abs(p - q) < 1e-14)
        return static_cast<double>(k) * (N - k);
    double const r = q / p;
    return k / (q - p) - N / (q - p) * (1 - std::pow(r, k)) / (1 - std::pow(r, N));
}

//! E_0[T_U] on the slab for the constant-drift walk with e1-drift lambda.
inline double drift_slab_exit_time(int d, int L, double lambda)
{
    // the e1 coordinate moves with probability 1/d, upward w.p. 1/2 + d lambda/2
    return d * ruin_time(0.5 + d * lambda / 2, L + 1, 2 * L + 1);
}

}  // namespace rwre::testing
