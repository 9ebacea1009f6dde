#pragma once

// Log-gamma and the first three polygamma functions on the positive reals.
//
// All four use the same scheme: shift the argument upward with the
// recurrence until x >= 10, then evaluate the asymptotic (Stirling /
// Bernoulli) series. Every function throws bglr::DomainError for x <= 0 or
// non-finite x.

namespace bglr::specfun {

double log_gamma(double x);

/// psi(x) = d/dx ln Gamma(x).
double digamma(double x);

/// psi'(x). Strictly positive and decreasing.
double trigamma(double x);

/// psi''(x). Strictly negative and increasing.
double tetragamma(double x);

}  // namespace bglr::specfun
