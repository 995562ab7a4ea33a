// Empirical-Bayes estimation of the shared precision-class hyperparameters
// (a0, b0, a1, b1): alternate network-wide variational fits with closed-form
// maximization of the summed lower bound over the gamma hyperparameters.
//
// The hyperparameter-dependent part of the summed bound is, per class, a
// gamma log-likelihood in the expectation sufficient statistics
//   T1 = avg of E(τ²),  T2 = avg of E(log τ²)
// taken over the equations where the class is non-empty, so the maximizer is
// the gamma MLE: b = a/T1 with a solving log a − ψ(a) = log T1 − T2.
#ifndef SEMNET_EB_HPP
#define SEMNET_EB_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "semnet/special.hpp"
#include "semnet/vb.hpp"

namespace semnet {

template <typename Scalar = double>
struct GammaMle {
    Scalar a = 0, b = 0;
    bool clamped = false; // a hit a bound of [1e-3, 1e6]
};

// Maximize a·log b − lgamma(a) + (a−1)·T2 − b·T1 over shape a and rate b.
// The optimum is b = a/T1 and log a − ψ(a) = Δ := log T1 − T2, solved by
// Newton with a bisection safeguard; Δ ≥ 0 by Jensen, and Δ → 0 means zero
// dispersion in log space, which pushes the shape to the upper clamp.
template <typename Scalar>
GammaMle<Scalar> gamma_mle(Scalar mean_stat, Scalar log_mean_stat) {
    if (!(mean_stat > Scalar(0)) || !std::isfinite(mean_stat) || !std::isfinite(log_mean_stat)) {
        throw std::invalid_argument("gamma_mle: mean_stat must be positive and stats finite");
    }
    Scalar delta = std::log(mean_stat) - log_mean_stat;
    if (delta < Scalar(0)) {
        if (delta < Scalar(-1e-9)) {
            throw std::invalid_argument("gamma_mle: log(mean_stat) < log_mean_stat violates Jensen");
        }
        delta = Scalar(0); // rounding noise from near-degenerate inputs
    }
    constexpr Scalar kMin = Scalar(1e-3);
    constexpr Scalar kMax = Scalar(1e6);
    const auto gap = [](Scalar a) { return std::log(a) - digamma(a); }; // strictly decreasing

    GammaMle<Scalar> out;
    if (delta <= gap(kMax)) {
        out.a = kMax;
        out.clamped = true;
    } else if (delta >= gap(kMin)) {
        out.a = kMin;
        out.clamped = true;
    } else {
        // Start from the classic closed-form approximation of the root.
        Scalar a = (Scalar(3) - delta + std::sqrt((delta - Scalar(3)) * (delta - Scalar(3)) +
                                                  Scalar(24) * delta)) /
                   (Scalar(12) * delta);
        a = std::min(std::max(a, kMin), kMax);
        Scalar lo = kMin, hi = kMax; // gap(lo) > delta > gap(hi)
        for (int it = 0; it < 100; ++it) {
            const Scalar f = gap(a) - delta;
            if (std::abs(f) <= Scalar(1e-13) * std::max(Scalar(1), delta)) break;
            (f > Scalar(0) ? lo : hi) = a;
            const Scalar fprime = Scalar(1) / a - trigamma(a);
            Scalar next = a - f / fprime;
            if (!(next > lo) || !(next < hi)) next = (lo + hi) / Scalar(2);
            if (std::abs(next - a) <= Scalar(1e-14) * a) {
                a = next;
                break;
            }
            a = next;
        }
        out.a = a;
    }
    out.b = out.a / mean_stat;
    return out;
}

namespace detail {

// Class sizes s_k per equation, needed to decide which equations inform
// which class.
inline std::vector<std::array<Index, 2>> class_counts(const std::vector<Eigen::VectorXi>& masks) {
    std::vector<std::array<Index, 2>> counts(masks.size());
    for (std::size_t i = 0; i < masks.size(); ++i) {
        Index s1 = 0;
        for (Index r = 0; r < masks[i].size(); ++r) s1 += masks[i](r);
        counts[i] = {masks[i].size() - s1, s1};
    }
    return counts;
}

// One hyperparameter update from fitted equations. Equations whose class k
// is empty carry no information about it and are skipped; if the class is
// empty everywhere, its hyperparameters pass through unchanged.
template <typename Scalar>
Hyperparameters<Scalar> eb_update_fits(const std::vector<EquationPosterior<Scalar>>& fits,
                                       const std::vector<std::array<Index, 2>>& counts,
                                       const Hyperparameters<Scalar>& current) {
    Scalar sum_mean[2] = {0, 0}, sum_log[2] = {0, 0};
    Index used[2] = {0, 0};
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const Scalar as[2] = {fits[i].a_tau0, fits[i].a_tau1};
        const Scalar bs[2] = {fits[i].b_tau0, fits[i].b_tau1};
        for (int k = 0; k < 2; ++k) {
            if (counts[i][static_cast<std::size_t>(k)] == 0) continue;
            sum_mean[k] += as[k] / bs[k];
            sum_log[k] += digamma(as[k]) - std::log(bs[k]);
            ++used[k];
        }
    }
    Hyperparameters<Scalar> next = current; // (a2, b2) are never re-estimated
    if (used[0] > 0) {
        const auto mle = gamma_mle(sum_mean[0] / Scalar(used[0]), sum_log[0] / Scalar(used[0]));
        next.a0 = mle.a;
        next.b0 = mle.b;
    }
    if (used[1] > 0) {
        const auto mle = gamma_mle(sum_mean[1] / Scalar(used[1]), sum_log[1] / Scalar(used[1]));
        next.a1 = mle.a;
        next.b1 = mle.b;
    }
    return next;
}

} // namespace detail

template <typename Scalar>
Hyperparameters<Scalar> eb_update(const NetworkPosterior<Scalar>& network,
                                  const Eigen::MatrixXi& prior,
                                  const Hyperparameters<Scalar>& current) {
    validate_adjacency(prior);
    const Index p = prior.rows();
    if (static_cast<Index>(network.equations.size()) != p) {
        throw std::invalid_argument("eb_update: network and prior sizes differ");
    }
    std::vector<Eigen::VectorXi> masks(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) {
        Eigen::VectorXi row(p - 1);
        for (Index r = 0; r < p - 1; ++r) row(r) = prior(i, r < i ? r : r + 1);
        masks[static_cast<std::size_t>(i)] = row;
    }
    return detail::eb_update_fits(network.equations, detail::class_counts(masks), current);
}

struct EbSettings {
    int outer_max = 100;
    double outer_tol = 1e-4;
    VbSettings vb;
    int threads = 1;
    // true interleaves single variational sweeps with hyperparameter updates
    // instead of running each inner fit to convergence (the final refit is
    // always a full fit).
    bool blended = false;

    void validate() const {
        if (outer_max < 1) throw std::invalid_argument("outer_max must be >= 1");
        if (!(outer_tol > 0)) throw std::invalid_argument("outer_tol must be > 0");
        vb.validate();
    }
};

template <typename Scalar = double>
struct EBFitResult {
    NetworkPosterior<Scalar> network; // fitted at final_hyper
    std::vector<Hyperparameters<Scalar>> hyper_trace; // initial values first
    Hyperparameters<Scalar> final_hyper;
    Scalar prior_mean_tau0 = 0; // â0/b̂0
    Scalar prior_mean_tau1 = 0; // â1/b̂1
    Scalar ratio = 0;           // prior_mean_tau0 / prior_mean_tau1
    bool converged = false;
    std::vector<Scalar> total_elbo_trace; // summed bound per outer round
};

template <typename Scalar>
EBFitResult<Scalar> eb_fit(const MatrixX<Scalar>& data, const Eigen::MatrixXi& prior,
                           const Hyperparameters<Scalar>& init = {},
                           const EbSettings& settings = {}) {
    init.validate();
    settings.validate();
    const std::vector<EquationData<Scalar>> eqs = build_equation_data(data, prior);
    std::vector<Eigen::VectorXi> masks;
    masks.reserve(eqs.size());
    for (const auto& eq : eqs) masks.push_back(eq.mask);
    const auto counts = detail::class_counts(masks);

    VbSettings inner = settings.vb;
    if (settings.blended) inner.max_iter = 1;

    EBFitResult<Scalar> result;
    result.hyper_trace.push_back(init);
    Hyperparameters<Scalar> hyper = init;
    std::vector<VbWarmStart<Scalar>> warm(eqs.size());
    bool have_warm = false;

    const auto rel_change = [](Scalar from, Scalar to) { return std::abs(to - from) / from; };

    for (int outer = 0; outer < settings.outer_max; ++outer) {
        const auto fits =
            fit_equations(eqs, hyper, inner, have_warm ? &warm : nullptr, settings.threads);
        Scalar total = 0;
        for (const auto& f : fits) total += f.elbo;
        result.total_elbo_trace.push_back(total);
        for (std::size_t i = 0; i < fits.size(); ++i) {
            warm[i] = {fits[i].a_tau0 / fits[i].b_tau0, fits[i].a_tau1 / fits[i].b_tau1,
                       fits[i].a_sigma_inv / fits[i].b_sigma_inv};
        }
        have_warm = true;
        const Hyperparameters<Scalar> next = detail::eb_update_fits(fits, counts, hyper);
        result.hyper_trace.push_back(next);
        const Scalar delta = std::max(std::max(rel_change(hyper.a0, next.a0), rel_change(hyper.b0, next.b0)),
                                      std::max(rel_change(hyper.a1, next.a1), rel_change(hyper.b1, next.b1)));
        hyper = next;
        if (delta < Scalar(settings.outer_tol)) {
            result.converged = true;
            break;
        }
    }

    // one full fit at the estimated hyperparameters
    result.network.equations =
        fit_equations(eqs, hyper, settings.vb, have_warm ? &warm : nullptr, settings.threads);
    result.network.hyper = hyper;
    result.network.total_elbo = 0;
    for (const auto& f : result.network.equations) result.network.total_elbo += f.elbo;
    result.final_hyper = hyper;
    result.prior_mean_tau0 = hyper.a0 / hyper.b0;
    result.prior_mean_tau1 = hyper.a1 / hyper.b1;
    result.ratio = result.prior_mean_tau0 / result.prior_mean_tau1;
    return result;
}

} // namespace semnet

#endif
