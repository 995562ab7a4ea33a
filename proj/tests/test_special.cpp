#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "semnet/rng.hpp"
#include "semnet/special.hpp"

using semnet::digamma;
using semnet::gamma_entropy;
using semnet::trigamma;

namespace {
constexpr double kEulerGamma = 0.57721566490153286;
}

TEST_CASE("digamma matches classical closed-form values") {
    CHECK(digamma(1.0) == doctest::Approx(-kEulerGamma).epsilon(1e-14));
    CHECK(digamma(0.5) == doctest::Approx(-kEulerGamma - 2.0 * std::log(2.0)).epsilon(1e-14));
    CHECK(digamma(2.0) == doctest::Approx(1.0 - kEulerGamma).epsilon(1e-14));
    // ψ(10) = H_9 − γ
    double h9 = 0.0;
    for (int k = 1; k <= 9; ++k) h9 += 1.0 / k;
    CHECK(digamma(10.0) == doctest::Approx(h9 - kEulerGamma).epsilon(1e-14));
}

TEST_CASE("digamma recurrence psi(x+1) = psi(x) + 1/x") {
    semnet::Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const double x = 1e-3 + 20.0 * rng.uniform();
        CHECK(digamma(x + 1.0) - digamma(x) ==
              doctest::Approx(1.0 / x).epsilon(1e-11));
    }
}

TEST_CASE("digamma reflection psi(1-x) - psi(x) = pi*cot(pi*x)") {
    semnet::Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        const double x = 0.05 + 0.9 * rng.uniform();
        const double lhs = digamma(1.0 - x) - digamma(x);
        const double rhs = std::numbers::pi / std::tan(std::numbers::pi * x);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("trigamma matches classical values and recurrence") {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(trigamma(1.0) == doctest::Approx(pi2 / 6.0).epsilon(1e-13));
    CHECK(trigamma(0.5) == doctest::Approx(pi2 / 2.0).epsilon(1e-13));
    double partial = 0.0;
    for (int k = 1; k <= 9; ++k) partial += 1.0 / (double(k) * k);
    CHECK(trigamma(10.0) == doctest::Approx(pi2 / 6.0 - partial).epsilon(1e-12));

    semnet::Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        const double x = 1e-3 + 20.0 * rng.uniform();
        CHECK(trigamma(x) - trigamma(x + 1.0) == doctest::Approx(1.0 / (x * x)).epsilon(1e-10));
    }
}

TEST_CASE("trigamma is the derivative of digamma") {
    semnet::Rng rng(17);
    for (int t = 0; t < 50; ++t) {
        const double x = 0.2 + 15.0 * rng.uniform();
        const double h = 1e-5 * std::max(1.0, x);
        const double numeric = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
        CHECK(trigamma(x) == doctest::Approx(numeric).epsilon(1e-6));
    }
}

TEST_CASE("gamma entropy: exponential case, scale rule, numeric integral") {
    // Γ(1,1) is Exp(1) with entropy 1; rate only shifts entropy by −log b
    CHECK(gamma_entropy(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_entropy(1.0, 2.5) == doctest::Approx(1.0 - std::log(2.5)).epsilon(1e-14));
    CHECK(gamma_entropy(3.3, 0.7) ==
          doctest::Approx(gamma_entropy(3.3, 1.0) - std::log(0.7)).epsilon(1e-13));

    // −∫ p log p by composite Simpson for a handful of shapes
    for (const double a : {1.0, 1.5, 2.0, 5.5}) {
        const double hi = a + 40.0 * std::sqrt(a) + 10.0;
        const int m = 200001;
        const double step = hi / (m - 1);
        double acc = 0.0;
        for (int i = 1; i < m; ++i) { // integrand vanishes at x = 0 for a ≥ 1
            const double x = i * step;
            const double logp = (a - 1.0) * std::log(x) - x - std::lgamma(a);
            const double w = (i == m - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * std::exp(logp) * logp;
        }
        const double numeric = -acc * step / 3.0;
        CHECK(gamma_entropy(a, 1.0) == doctest::Approx(numeric).epsilon(1e-5));
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS((void)digamma(0.0), std::domain_error);
    CHECK_THROWS_AS((void)digamma(-1.5), std::domain_error);
    CHECK_THROWS_AS((void)trigamma(0.0), std::domain_error);
}
