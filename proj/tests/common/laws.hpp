#pragma once

#include "rwre/law.hpp"

namespace rwre::testing
{

inline EnvironmentLaw drift(int d, double lambda)
{
    LawParams p;
    p.lambda = lambda;
    return make_law(LawKind::deterministic_drift, d, p);
}

inline EnvironmentLaw two_point(int d, double a, double lambda = 0)
{
    LawParams p;
    p.amplitude = a;
    p.lambda = lambda;
    return make_law(LawKind::two_point, d, p);
}

inline EnvironmentLaw isotropic(int d, double a, double lambda,
                                IsotropicBase base = IsotropicBase::uniform)
{
    LawParams p;
    p.amplitude = a;
    p.lambda = lambda;
    p.base = base;
    return make_law(LawKind::isotropic_plus_drift, d, p);
}

}  // namespace rwre::testing
