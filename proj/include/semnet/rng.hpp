// Deterministic random draws on top of mt19937_64. The uniform->variate
// transforms are spelled out here (not std::*_distribution) so that a given
// seed produces the same stream on every platform.
#ifndef SEMNET_RNG_HPP
#define SEMNET_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace semnet {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * kInv53;
    }

    // (0, 1]
    double uniform_pos() {
        return static_cast<double>((gen_() >> 11) + 1) * kInv53;
    }

    // integer in [0, n), rejection sampled
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::bounded: n must be > 0");
        const std::uint64_t lim = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= lim);
        return v % n;
    }

    // standard normal, Box-Muller (cosine branch only, no cached spare)
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    // Gamma(shape, rate), Marsaglia-Tsang squeeze with the shape<1 boost
    double gamma(double shape, double rate) {
        if (!(shape > 0.0) || !(rate > 0.0)) {
            throw std::invalid_argument("Rng::gamma: shape and rate must be > 0");
        }
        if (shape < 1.0) {
            const double u = uniform_pos();
            return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_pos();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
                return d * v / rate;
            }
        }
    }

  private:
    static constexpr double kInv53 = 1.0 / 9007199254740992.0; // 2^-53
    static constexpr double kPi = 3.141592653589793238462643383279502884;
    std::mt19937_64 gen_;
};

} // namespace semnet

#endif
