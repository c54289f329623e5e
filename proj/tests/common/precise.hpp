#pragma once

// Arbitrary-precision re-evaluation of the renormalization formulas,
// written directly from their closed forms (no log-space tricks).

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace rwre::testing
{

using Big = boost::multiprecision::cpp_bin_float_50;

inline Big big_pos(Big x)
{
    return x > 0 ? x : Big(0);
}

inline Big precise_delta_inverse(Big M, Big L, Big H, Big h, Big g)
{
    Big const rate = g * M / (32 * L);
    Big const gap = big_pos(H * L / (2 * h * M) - 4 / g);
    return exp(-rate) + 10 * M / (g * L) * exp(-rate * gap * gap);
}

//! Requires rho < 1 and delta > 1.
inline Big precise_lemma1(Big rho, Big p, Big M, Big L, Big H, Big kappa, Big delta, int d)
{
    Big const M_bar = floor(M * M * M / (32 * H));
    Big const first = 2 * pow(rho, M / (2 * L)) / big_pos(1 - sqrt(rho));
    Big expo = 0;
    if (M_bar > 0)
    {
        Big const gap = big_pos(p - 7 * M / M_bar * (log(1 / kappa) / log(delta)));
        expo = -M_bar / 2 * gap * gap;
    }
    Big const second = 2 * d * pow(kappa, -M / 2) * exp(expo);
    return (first + second) / (kappa * kappa);
}

}  // namespace rwre::testing
