// Gibbs sampler for the exact per-equation posterior, used to validate the
// variational approximation. The four full conditionals reuse the parameter
// formulas of the variational updates with every expectation replaced by the
// current value from the conditioning:
//
//   β | τ, φ   ~ N(M⁻¹Xᵀy, M⁻¹/φ),  M = XᵀX + D(τ)
//   τ²_k | β,φ ~ Γ(a_k + s_k/2, b_k + (φ/2)·β_kᵀβ_k)
//   σ⁻² | β, τ ~ Γ(a2 + n/2 + s/2, b2 + ½βᵀDβ + ½‖y − Xβ‖²)
#ifndef SEMNET_GIBBS_HPP
#define SEMNET_GIBBS_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "semnet/rng.hpp"
#include "semnet/vb.hpp"

namespace semnet {

struct GibbsSettings {
    long n_iter = 100000;
    long burnin = 1000;
    long thin = 10;
    std::uint64_t seed = 0;

    long kept() const { return (n_iter - burnin) / thin; }
    void validate() const {
        if (burnin < 0 || n_iter <= burnin) throw std::invalid_argument("need n_iter > burnin >= 0");
        if (thin < 1) throw std::invalid_argument("thin must be >= 1");
        if (kept() < 2) throw std::invalid_argument("settings keep fewer than 2 draws");
    }
};

template <typename Scalar = double>
struct PosteriorSamples {
    MatrixX<Scalar> beta_draws; // kept × s
    VectorX<Scalar> tau0_draws, tau1_draws, sigma_inv_draws;
    GibbsSettings settings;
};

template <typename Scalar>
PosteriorSamples<Scalar> gibbs_sample_equation(const EquationData<Scalar>& eq,
                                               const Hyperparameters<Scalar>& hyper,
                                               const GibbsSettings& settings) {
    hyper.validate();
    settings.validate();
    detail::validate_mask(eq.mask);
    const Index s = eq.mask.size();
    const Index n = eq.n;
    if (eq.XtX.rows() != s || eq.XtX.cols() != s || eq.Xty.size() != s) {
        throw std::invalid_argument("equation statistics have inconsistent sizes");
    }

    Index s1 = 0;
    for (Index r = 0; r < s; ++r) s1 += eq.mask(r);
    const Index s0 = s - s1;
    const Scalar a0c = hyper.a0 + Scalar(s0) / Scalar(2);
    const Scalar a1c = hyper.a1 + Scalar(s1) / Scalar(2);
    const Scalar a2c = hyper.a2 + Scalar(n) / Scalar(2) + Scalar(s) / Scalar(2);

    Scalar t0 = hyper.a0 / hyper.b0;
    Scalar t1 = hyper.a1 / hyper.b1;
    Scalar phi = eq.yty > Scalar(0) ? Scalar(n) / eq.yty : Scalar(1);
    VectorX<Scalar> beta = VectorX<Scalar>::Zero(s);

    Rng rng(settings.seed);
    Eigen::LLT<MatrixX<Scalar>> llt;
    MatrixX<Scalar> m(s, s);
    VectorX<Scalar> z(s);

    const long kept = settings.kept();
    PosteriorSamples<Scalar> out;
    out.beta_draws.resize(kept, s);
    out.tau0_draws.resize(kept);
    out.tau1_draws.resize(kept);
    out.sigma_inv_draws.resize(kept);
    out.settings = settings;

    long stored = 0;
    for (long it = 1; it <= settings.n_iter; ++it) {
        m = eq.XtX;
        for (Index r = 0; r < s; ++r) m(r, r) += (eq.mask(r) == 0 ? t0 : t1);
        llt.compute(m);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("XtX + D factorization failed (not positive definite)");
        }
        for (Index r = 0; r < s; ++r) z(r) = static_cast<Scalar>(rng.normal());
        // β = M⁻¹Xᵀy + L⁻ᵀz/√φ has the target mean and covariance M⁻¹/φ
        beta = llt.solve(eq.Xty) +
               llt.matrixU().solve(z) / std::sqrt(phi);

        Scalar q0 = 0, q1 = 0;
        for (Index r = 0; r < s; ++r) (eq.mask(r) == 0 ? q0 : q1) += beta(r) * beta(r);
        t0 = static_cast<Scalar>(rng.gamma(static_cast<double>(a0c),
                                           static_cast<double>(hyper.b0 + Scalar(0.5) * phi * q0)));
        t1 = static_cast<Scalar>(rng.gamma(static_cast<double>(a1c),
                                           static_cast<double>(hyper.b1 + Scalar(0.5) * phi * q1)));

        const Scalar rss = eq.yty - Scalar(2) * beta.dot(eq.Xty) + beta.dot(eq.XtX * beta);
        const Scalar bquad = t0 * q0 + t1 * q1;
        phi = static_cast<Scalar>(
            rng.gamma(static_cast<double>(a2c),
                      static_cast<double>(hyper.b2 + Scalar(0.5) * bquad + Scalar(0.5) * rss)));

        if (it > settings.burnin && (it - settings.burnin) % settings.thin == 0 && stored < kept) {
            out.beta_draws.row(stored) = beta.transpose();
            out.tau0_draws(stored) = t0;
            out.tau1_draws(stored) = t1;
            out.sigma_inv_draws(stored) = phi;
            ++stored;
        }
    }
    return out;
}

template <typename Scalar>
PosteriorSamples<Scalar> gibbs_sample_equation(const VectorX<Scalar>& y, const MatrixX<Scalar>& X,
                                               const Eigen::VectorXi& prior_row,
                                               const Hyperparameters<Scalar>& hyper,
                                               const GibbsSettings& settings) {
    return gibbs_sample_equation(make_equation_data(y, X, prior_row), hyper, settings);
}

// Absolute mean gaps and relative standard-deviation gaps between the
// variational marginals and the Gibbs estimates (Gibbs sd in the denominator).
template <typename Scalar = double>
struct DiscrepancyReport {
    VectorX<Scalar> beta_mean_abs_diff;
    VectorX<Scalar> beta_sd_rel_diff;
    Scalar max_beta_mean_abs_diff = 0;
    Scalar max_beta_sd_rel_diff = 0;
    Scalar tau0_mean_abs_diff = 0, tau0_sd_rel_diff = 0;
    Scalar tau1_mean_abs_diff = 0, tau1_sd_rel_diff = 0;
    Scalar sigma_inv_mean_abs_diff = 0, sigma_inv_sd_rel_diff = 0;
};

namespace detail {

template <typename Scalar>
Scalar sample_sd(const VectorX<Scalar>& draws) {
    const Scalar mean = draws.mean();
    return std::sqrt((draws.array() - mean).square().sum() / Scalar(draws.size() - 1));
}

} // namespace detail

template <typename Scalar>
DiscrepancyReport<Scalar> compare_vb_gibbs(const EquationData<Scalar>& eq,
                                           const Hyperparameters<Scalar>& hyper,
                                           const VbSettings& vb_settings,
                                           const GibbsSettings& gibbs_settings) {
    const EquationPosterior<Scalar> vb = vb_fit_equation(eq, hyper, vb_settings);
    const PosteriorSamples<Scalar> gs = gibbs_sample_equation(eq, hyper, gibbs_settings);
    const Index s = eq.mask.size();

    DiscrepancyReport<Scalar> rep;
    rep.beta_mean_abs_diff.resize(s);
    rep.beta_sd_rel_diff.resize(s);
    for (Index r = 0; r < s; ++r) {
        const VectorX<Scalar> draws = gs.beta_draws.col(r);
        const Scalar sd_g = detail::sample_sd(draws);
        const Scalar sd_v = std::sqrt(vb.beta_cov(r, r));
        rep.beta_mean_abs_diff(r) = std::abs(vb.beta_mean(r) - draws.mean());
        rep.beta_sd_rel_diff(r) = std::abs(sd_v - sd_g) / sd_g;
    }
    rep.max_beta_mean_abs_diff = rep.beta_mean_abs_diff.maxCoeff();
    rep.max_beta_sd_rel_diff = rep.beta_sd_rel_diff.maxCoeff();

    const auto gamma_pair = [](Scalar a, Scalar b) {
        return std::pair<Scalar, Scalar>(a / b, std::sqrt(a) / b); // mean, sd
    };
    const auto fill = [&](Scalar a, Scalar b, const VectorX<Scalar>& draws, Scalar& mean_diff,
                          Scalar& sd_diff) {
        const auto [mv, sv] = gamma_pair(a, b);
        const Scalar mg = draws.mean();
        const Scalar sg = detail::sample_sd(draws);
        mean_diff = std::abs(mv - mg);
        sd_diff = std::abs(sv - sg) / sg;
    };
    fill(vb.a_tau0, vb.b_tau0, gs.tau0_draws, rep.tau0_mean_abs_diff, rep.tau0_sd_rel_diff);
    fill(vb.a_tau1, vb.b_tau1, gs.tau1_draws, rep.tau1_mean_abs_diff, rep.tau1_sd_rel_diff);
    fill(vb.a_sigma_inv, vb.b_sigma_inv, gs.sigma_inv_draws, rep.sigma_inv_mean_abs_diff,
         rep.sigma_inv_sd_rel_diff);
    return rep;
}

template <typename Scalar>
DiscrepancyReport<Scalar> compare_vb_gibbs(const VectorX<Scalar>& y, const MatrixX<Scalar>& X,
                                           const Eigen::VectorXi& prior_row,
                                           const Hyperparameters<Scalar>& hyper,
                                           const VbSettings& vb_settings,
                                           const GibbsSettings& gibbs_settings) {
    return compare_vb_gibbs(make_equation_data(y, X, prior_row), hyper, vb_settings, gibbs_settings);
}

} // namespace semnet

#endif
