// Scalar special functions used by the gamma-family updates.
#ifndef SEMNET_SPECIAL_HPP
#define SEMNET_SPECIAL_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

namespace semnet {

// digamma(x) for x > 0: recurrence up to x >= 10, then the asymptotic series
// in 1/x^2 (abs error ~ 1e-15 over the shifted range).
template <typename Scalar>
Scalar digamma(Scalar x) {
    if (!(x > Scalar(0))) {
        throw std::domain_error("digamma: requires x > 0");
    }
    Scalar r = 0;
    while (x < Scalar(10)) {
        r -= Scalar(1) / x;
        x += Scalar(1);
    }
    const Scalar f = Scalar(1) / (x * x);
    const Scalar series =
        f * (Scalar(1) / 12 -
        f * (Scalar(1) / 120 -
        f * (Scalar(1) / 252 -
        f * (Scalar(1) / 240 -
        f * (Scalar(1) / 132 -
        f * (Scalar(691) / 32760))))));
    return r + std::log(x) - Scalar(0.5) / x - series;
}

// trigamma(x) for x > 0, same recurrence/asymptotic scheme.
template <typename Scalar>
Scalar trigamma(Scalar x) {
    if (!(x > Scalar(0))) {
        throw std::domain_error("trigamma: requires x > 0");
    }
    Scalar r = 0;
    while (x < Scalar(10)) {
        r += Scalar(1) / (x * x);
        x += Scalar(1);
    }
    const Scalar f = Scalar(1) / (x * x);
    const Scalar series =
        (f / x) * (Scalar(1) / 6 -
              f * (Scalar(1) / 30 -
              f * (Scalar(1) / 42 -
              f * (Scalar(1) / 30 -
              f * (Scalar(5) / 66)))));
    return r + Scalar(1) / x + f / 2 + series;
}

// Entropy of Gamma(shape a, rate b).
template <typename Scalar>
Scalar gamma_entropy(Scalar a, Scalar b) {
    return a - std::log(b) + std::lgamma(a) + (Scalar(1) - a) * digamma(a);
}

} // namespace semnet

#endif
