// Variational inference for one regression equation under a two-class
// normal-gamma prior, and assembly of all p node-wise equations into a
// network fit.
//
// Model for a response y (n-vector) on predictors X (n×s), with a binary
// mask splitting the s coefficients into class 0 (mask 0) and class 1:
//
//   y | β, σ²          ~ N(Xβ, σ² I)
//   β_r | σ², τ²       ~ N(0, σ² / τ²_{class(r)})
//   τ²_0 ~ Γ(a0, b0),  τ²_1 ~ Γ(a1, b1),  σ⁻² ~ Γ(a2, b2)
//
// The variational family is the product q(β) q(τ²_0) q(τ²_1) q(σ⁻²) with a
// multivariate normal factor for β and gamma factors for the precisions.
// Coordinate ascent gives closed-form updates:
//
//   q(β)    = N(β*, Σ*),  β* = M⁻¹Xᵀy,  Σ* = M⁻¹ / E(σ⁻²),  M = XᵀX + D,
//             D = diag of E(τ²) per class
//   q(τ²_k) = Γ(a_k + s_k/2, b_k + ½·E(σ⁻²)·Σ_{r∈k}(β*_r² + Σ*_rr))
//   q(σ⁻²)  = Γ(a2 + n/2 + s/2, b2 + ½·E(βᵀDβ) + ½·E‖y − Xβ‖²)
//
// The evidence lower bound is evaluated in closed form after every sweep;
// it is non-decreasing and the iteration stops when its relative change
// (with a unit floor near zero) drops below rel_tol.
#ifndef SEMNET_VB_HPP
#define SEMNET_VB_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "semnet/graph_model.hpp"
#include "semnet/special.hpp"

namespace semnet {

template <typename Scalar = double>
struct Hyperparameters {
    Scalar a0 = Scalar(1), b0 = Scalar(1); // class-0 precision τ²_0
    Scalar a1 = Scalar(1), b1 = Scalar(1); // class-1 precision τ²_1
    Scalar a2 = Scalar(0.001), b2 = Scalar(0.001); // error precision σ⁻²

    void validate() const {
        for (Scalar v : {a0, b0, a1, b1, a2, b2}) {
            if (!(v > Scalar(0)) || !std::isfinite(v)) {
                throw std::invalid_argument("hyperparameters must be strictly positive");
            }
        }
    }
};

struct VbSettings {
    int max_iter = 200;
    double rel_tol = 1e-6;
    // Order in which the four factors are refreshed within one sweep:
    // 0 = β, 1 = τ²_0, 2 = τ²_1, 3 = σ⁻². Any permutation converges to the
    // same fixed point; the default matches the classic scheme.
    std::array<int, 4> update_order{0, 1, 2, 3};

    void validate() const {
        if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
        if (!(rel_tol > 0)) throw std::invalid_argument("rel_tol must be > 0");
        std::array<bool, 4> seen{};
        for (int u : update_order) {
            if (u < 0 || u > 3 || seen[static_cast<std::size_t>(u)]) {
                throw std::invalid_argument("update_order must be a permutation of {0,1,2,3}");
            }
            seen[static_cast<std::size_t>(u)] = true;
        }
    }
};

template <typename Scalar = double>
struct EquationPosterior {
    VectorX<Scalar> beta_mean;  // β*, length s
    MatrixX<Scalar> beta_cov;   // Σ*, s×s SPD
    Scalar a_tau0 = 0, b_tau0 = 0;
    Scalar a_tau1 = 0, b_tau1 = 0;
    Scalar a_sigma_inv = 0, b_sigma_inv = 0;
    Scalar elbo = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<Scalar> elbo_trace; // one value per sweep
};

template <typename Scalar = double>
struct NetworkPosterior {
    std::vector<EquationPosterior<Scalar>> equations; // index-aligned with nodes
    Hyperparameters<Scalar> hyper;                    // values the fit used
    Scalar total_elbo = 0;
};

// Sufficient statistics of one equation: everything the updates need.
template <typename Scalar = double>
struct EquationData {
    MatrixX<Scalar> XtX;  // s×s
    VectorX<Scalar> Xty;  // s
    Scalar yty = 0;
    Index n = 0;
    Eigen::VectorXi mask; // s entries in {0,1}; class of each coefficient
};

// Moments carried across refits of the same equation (outer loops start the
// sweep from the previous round's precisions instead of the prior means).
template <typename Scalar = double>
struct VbWarmStart {
    Scalar e_tau0 = 1, e_tau1 = 1, e_phi = 1;
};

namespace detail {

template <typename Scalar>
void require_finite(const MatrixX<Scalar>& m, const char* what) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

template <typename Scalar>
void require_finite(const VectorX<Scalar>& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

inline void validate_mask(const Eigen::VectorXi& mask) {
    if (mask.size() < 1) throw std::invalid_argument("mask must have at least one entry");
    for (Index r = 0; r < mask.size(); ++r) {
        if (mask(r) != 0 && mask(r) != 1) {
            throw std::invalid_argument("mask entries must be 0 or 1");
        }
    }
}

// E log t and E t of Γ(a,b).
template <typename Scalar>
struct GammaMoments {
    Scalar mean, log_mean;
    GammaMoments(Scalar a, Scalar b) : mean(a / b), log_mean(digamma(a) - std::log(b)) {}
};

// Scalar ingredients of the lower bound; how they are produced differs
// between the fit loop (cheap, from the factorization at hand) and the
// standalone evaluator (from an arbitrary posterior), but the formula is
// shared so the two cannot drift apart.
template <typename Scalar>
struct ElboParts {
    Index n = 0, s = 0, s0 = 0, s1 = 0;
    Scalar rss = 0;        // E‖y − Xβ‖² = ‖y − Xβ*‖² + tr(XᵀX Σ*)
    Scalar q0 = 0, q1 = 0; // Σ_{r∈k} (β*_r² + Σ*_rr)
    Scalar logdet_cov = 0; // log det Σ*
    Scalar a0s = 0, b0s = 0, a1s = 0, b1s = 0, a2s = 0, b2s = 0;
    bool skip_empty_class_terms = false; // see note below
};

// Prior-vs-entropy contribution of one gamma factor:
// E_q log p(t) + H[q] with p = Γ(a,b), q = Γ(a*,b*).
template <typename Scalar>
Scalar gamma_bracket(Scalar a, Scalar b, Scalar as, Scalar bs) {
    GammaMoments<Scalar> m(as, bs);
    const Scalar e_log_prior = a * std::log(b) - std::lgamma(a) + (a - Scalar(1)) * m.log_mean - b * m.mean;
    return e_log_prior + gamma_entropy(as, bs);
}

// Closed-form lower bound
//   E log N(y | Xβ, φ⁻¹I) + E log p(β | φ, τ) + Σ gamma brackets + H[q(β)]
// written so that swapping the two τ classes (mask complement plus swapped
// hyperparameters) permutes only commutative two-term sums: the value is
// bit-identical under the swap.
//
// When a class has no members its variational factor never moves off the
// prior during fitting and its bracket is exactly zero algebraically; the
// fit loop sets skip_empty_class_terms so that the stored trace is also
// bit-exactly invariant to that class's hyperparameters. The standalone
// evaluator keeps the general form, which is required for posteriors not
// produced by the fit (there the bracket is a genuine −KL term).
template <typename Scalar>
Scalar elbo_terms(const ElboParts<Scalar>& p, const Hyperparameters<Scalar>& h) {
    constexpr Scalar log2pi = Scalar(1.8378770664093454835606594728112353L);
    const GammaMoments<Scalar> t0(p.a0s, p.b0s), t1(p.a1s, p.b1s), phi(p.a2s, p.b2s);

    const Scalar e_lik = Scalar(-0.5) * Scalar(p.n) * log2pi +
                         Scalar(0.5) * Scalar(p.n) * phi.log_mean -
                         Scalar(0.5) * phi.mean * p.rss;
    const Scalar e_quad = t0.mean * p.q0 + t1.mean * p.q1;
    const Scalar e_beta_prior = Scalar(-0.5) * Scalar(p.s) * log2pi +
                                Scalar(0.5) * Scalar(p.s) * phi.log_mean +
                                Scalar(0.5) * (Scalar(p.s0) * t0.log_mean + Scalar(p.s1) * t1.log_mean) -
                                Scalar(0.5) * phi.mean * e_quad;
    const Scalar e_beta_entropy = Scalar(0.5) * Scalar(p.s) * (Scalar(1) + log2pi) +
                                  Scalar(0.5) * p.logdet_cov;
    const Scalar br0 = (p.skip_empty_class_terms && p.s0 == 0)
                           ? Scalar(0)
                           : gamma_bracket(h.a0, h.b0, p.a0s, p.b0s);
    const Scalar br1 = (p.skip_empty_class_terms && p.s1 == 0)
                           ? Scalar(0)
                           : gamma_bracket(h.a1, h.b1, p.a1s, p.b1s);
    const Scalar br2 = gamma_bracket(h.a2, h.b2, p.a2s, p.b2s);
    return ((e_lik + e_beta_prior) + (e_beta_entropy + br2)) + (br0 + br1);
}

} // namespace detail

template <typename Scalar>
EquationData<Scalar> make_equation_data(const VectorX<Scalar>& y, const MatrixX<Scalar>& X,
                                        const Eigen::VectorXi& prior_row) {
    if (X.rows() != y.size()) throw std::invalid_argument("X and y row counts differ");
    if (X.cols() != prior_row.size()) throw std::invalid_argument("mask length must equal predictor count");
    if (y.size() < 1 || X.cols() < 1) throw std::invalid_argument("need n >= 1 and s >= 1");
    detail::require_finite(y, "y");
    detail::require_finite(X, "X");
    detail::validate_mask(prior_row);
    EquationData<Scalar> eq;
    eq.XtX = X.transpose() * X;
    eq.Xty = X.transpose() * y;
    eq.yty = y.squaredNorm();
    eq.n = y.size();
    eq.mask = prior_row;
    return eq;
}

// Per-node sufficient statistics for the whole network, from one Gram matrix:
// equation i regresses column i on the remaining columns in their original
// order, so predictor r of equation i is node r when r < i and node r+1
// otherwise. mask(r) is the prior entry for that node pair.
template <typename Scalar>
std::vector<EquationData<Scalar>> build_equation_data(const MatrixX<Scalar>& data,
                                                      const Eigen::MatrixXi& prior) {
    const Index n = data.rows();
    const Index p = data.cols();
    if (n < 1 || p < 2) throw std::invalid_argument("data must have n >= 1 rows and p >= 2 columns");
    detail::require_finite(data, "data");
    validate_adjacency(prior);
    if (prior.rows() != p) throw std::invalid_argument("prior size must match column count");

    const MatrixX<Scalar> gram = data.transpose() * data;
    std::vector<EquationData<Scalar>> out(static_cast<std::size_t>(p));
    for (Index i = 0; i < p; ++i) {
        const Index s = p - 1;
        EquationData<Scalar>& eq = out[static_cast<std::size_t>(i)];
        eq.XtX.resize(s, s);
        eq.Xty.resize(s);
        eq.mask.resize(s);
        for (Index r = 0; r < s; ++r) {
            const Index node_r = r < i ? r : r + 1;
            eq.Xty(r) = gram(node_r, i);
            eq.mask(r) = prior(i, node_r);
            for (Index c = 0; c < s; ++c) {
                const Index node_c = c < i ? c : c + 1;
                eq.XtX(r, c) = gram(node_r, node_c);
            }
        }
        eq.yty = gram(i, i);
        eq.n = n;
    }
    return out;
}

// Coordinate-ascent fit of one equation from its sufficient statistics.
template <typename Scalar>
EquationPosterior<Scalar> vb_fit_equation(const EquationData<Scalar>& eq,
                                          const Hyperparameters<Scalar>& hyper,
                                          const VbSettings& settings,
                                          const VbWarmStart<Scalar>* warm = nullptr) {
    hyper.validate();
    settings.validate();
    detail::validate_mask(eq.mask);
    const Index s = eq.mask.size();
    const Index n = eq.n;
    if (eq.XtX.rows() != s || eq.XtX.cols() != s || eq.Xty.size() != s) {
        throw std::invalid_argument("equation statistics have inconsistent sizes");
    }
    if (n < 1) throw std::invalid_argument("need n >= 1");

    Index s1 = 0;
    for (Index r = 0; r < s; ++r) s1 += eq.mask(r);
    const Index s0 = s - s1;

    // shapes are fixed by the update equations; only rates move
    const Scalar a0s = hyper.a0 + Scalar(s0) / Scalar(2);
    const Scalar a1s = hyper.a1 + Scalar(s1) / Scalar(2);
    const Scalar a2s = hyper.a2 + Scalar(n) / Scalar(2) + Scalar(s) / Scalar(2);

    // moment state
    Scalar e_t0 = warm ? warm->e_tau0 : hyper.a0 / hyper.b0;
    Scalar e_t1 = warm ? warm->e_tau1 : hyper.a1 / hyper.b1;
    Scalar e_phi = warm ? warm->e_phi
                        : (eq.yty > Scalar(0) ? Scalar(n) / eq.yty : Scalar(1));
    Scalar b0s = hyper.b0, b1s = hyper.b1, b2s = hyper.b2;

    // q(β) state: N(bm, su / phi_beta) where phi_beta is E(σ⁻²) at the time
    // of the last β refresh. Placeholder start only matters if the sweep
    // order touches τ or σ before β.
    VectorX<Scalar> bm = VectorX<Scalar>::Zero(s);
    MatrixX<Scalar> su = MatrixX<Scalar>::Identity(s, s);
    Scalar phi_beta = e_phi;
    Scalar logdet_m = 0;

    Eigen::LLT<MatrixX<Scalar>> llt;
    MatrixX<Scalar> m(s, s);

    // Σ_{r∈k}(β*_r² + Σ*_rr) per class, one ascending pass (order-stable
    // under class swap).
    const auto class_sums = [&](Scalar& q0, Scalar& q1) {
        q0 = Scalar(0);
        q1 = Scalar(0);
        for (Index r = 0; r < s; ++r) {
            const Scalar term = bm(r) * bm(r) + su(r, r) / phi_beta;
            (eq.mask(r) == 0 ? q0 : q1) += term;
        }
    };
    const auto expected_rss = [&]() {
        return eq.yty - Scalar(2) * bm.dot(eq.Xty) + bm.dot(eq.XtX * bm) +
               eq.XtX.cwiseProduct(su).sum() / phi_beta;
    };

    const auto update_beta = [&]() {
        m = eq.XtX;
        for (Index r = 0; r < s; ++r) m(r, r) += (eq.mask(r) == 0 ? e_t0 : e_t1);
        llt.compute(m);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("XtX + D factorization failed (not positive definite)");
        }
        su.setIdentity(s, s);
        llt.solveInPlace(su);
        bm = llt.solve(eq.Xty);
        phi_beta = e_phi;
        logdet_m = Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
    };
    const auto update_tau0 = [&]() {
        Scalar q0, q1;
        class_sums(q0, q1);
        b0s = hyper.b0 + Scalar(0.5) * e_phi * q0;
        e_t0 = a0s / b0s;
    };
    const auto update_tau1 = [&]() {
        Scalar q0, q1;
        class_sums(q0, q1);
        b1s = hyper.b1 + Scalar(0.5) * e_phi * q1;
        e_t1 = a1s / b1s;
    };
    const auto update_sigma = [&]() {
        Scalar q0, q1;
        class_sums(q0, q1);
        b2s = hyper.b2 + Scalar(0.5) * (e_t0 * q0 + e_t1 * q1) + Scalar(0.5) * expected_rss();
        e_phi = a2s / b2s;
    };

    EquationPosterior<Scalar> post;
    post.elbo_trace.reserve(static_cast<std::size_t>(settings.max_iter));
    Scalar prev = 0;
    for (int it = 1; it <= settings.max_iter; ++it) {
        for (int u : settings.update_order) {
            switch (u) {
                case 0: update_beta(); break;
                case 1: update_tau0(); break;
                case 2: update_tau1(); break;
                case 3: update_sigma(); break;
            }
        }
        detail::ElboParts<Scalar> parts;
        parts.n = n;
        parts.s = s;
        parts.s0 = s0;
        parts.s1 = s1;
        parts.rss = expected_rss();
        class_sums(parts.q0, parts.q1);
        parts.logdet_cov = -(logdet_m + Scalar(s) * std::log(phi_beta));
        parts.a0s = a0s;
        parts.b0s = b0s;
        parts.a1s = a1s;
        parts.b1s = b1s;
        parts.a2s = a2s;
        parts.b2s = b2s;
        parts.skip_empty_class_terms = true;
        const Scalar value = detail::elbo_terms(parts, hyper);
        if (!std::isfinite(value)) throw std::runtime_error("lower bound diverged (non-finite)");
        post.elbo_trace.push_back(value);
        post.iterations = it;
        if (it > 1 && std::abs(value - prev) <= settings.rel_tol * std::max(Scalar(1), std::abs(value))) {
            post.converged = true;
            prev = value;
            break;
        }
        prev = value;
    }
    post.elbo = prev;
    post.beta_mean = bm;
    post.beta_cov = su / phi_beta;
    post.a_tau0 = a0s;
    post.b_tau0 = b0s;
    post.a_tau1 = a1s;
    post.b_tau1 = b1s;
    post.a_sigma_inv = a2s;
    post.b_sigma_inv = b2s;
    return post;
}

template <typename Scalar>
EquationPosterior<Scalar> vb_fit_equation(const VectorX<Scalar>& y, const MatrixX<Scalar>& X,
                                          const Eigen::VectorXi& prior_row,
                                          const Hyperparameters<Scalar>& hyper,
                                          const VbSettings& settings = {}) {
    return vb_fit_equation(make_equation_data(y, X, prior_row), hyper, settings);
}

// Lower bound of an arbitrary (dimensionally consistent) posterior; general
// form, valid away from the fixed point.
template <typename Scalar>
Scalar elbo(const EquationData<Scalar>& eq, const Hyperparameters<Scalar>& hyper,
            const EquationPosterior<Scalar>& post) {
    hyper.validate();
    detail::validate_mask(eq.mask);
    const Index s = eq.mask.size();
    if (post.beta_mean.size() != s || post.beta_cov.rows() != s || post.beta_cov.cols() != s) {
        throw std::invalid_argument("posterior dimensions do not match the equation");
    }
    Eigen::LLT<MatrixX<Scalar>> llt(post.beta_cov);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("posterior covariance is not positive definite");
    }
    detail::ElboParts<Scalar> parts;
    parts.n = eq.n;
    parts.s = s;
    parts.q0 = 0;
    parts.q1 = 0;
    for (Index r = 0; r < s; ++r) {
        const Scalar term = post.beta_mean(r) * post.beta_mean(r) + post.beta_cov(r, r);
        if (eq.mask(r) == 0) {
            ++parts.s0;
            parts.q0 += term;
        } else {
            ++parts.s1;
            parts.q1 += term;
        }
    }
    parts.rss = eq.yty - Scalar(2) * post.beta_mean.dot(eq.Xty) +
                post.beta_mean.dot(eq.XtX * post.beta_mean) +
                eq.XtX.cwiseProduct(post.beta_cov).sum();
    parts.logdet_cov = Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
    parts.a0s = post.a_tau0;
    parts.b0s = post.b_tau0;
    parts.a1s = post.a_tau1;
    parts.b1s = post.b_tau1;
    parts.a2s = post.a_sigma_inv;
    parts.b2s = post.b_sigma_inv;
    parts.skip_empty_class_terms = false;
    return detail::elbo_terms(parts, hyper);
}

template <typename Scalar>
Scalar elbo(const VectorX<Scalar>& y, const MatrixX<Scalar>& X, const Eigen::VectorXi& prior_row,
            const Hyperparameters<Scalar>& hyper, const EquationPosterior<Scalar>& post) {
    return elbo(make_equation_data(y, X, prior_row), hyper, post);
}

namespace detail {

// Static partition of [0, count) over a small thread pool. Each index writes
// only its own slot, so results are independent of scheduling; reductions
// happen after the join, in index order.
template <typename Fn>
void parallel_for(Index count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (Index i = 0; i < count; ++i) fn(i);
        return;
    }
    const int used = static_cast<int>(std::min<Index>(threads, count));
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(used));
    for (int t = 0; t < used; ++t) {
        pool.emplace_back([&]() {
            for (Index i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace detail

// Fit every equation at shared hyperparameters. Failures carry the equation
// index; with several failures the lowest index wins.
template <typename Scalar>
std::vector<EquationPosterior<Scalar>> fit_equations(const std::vector<EquationData<Scalar>>& eqs,
                                                     const Hyperparameters<Scalar>& hyper,
                                                     const VbSettings& settings,
                                                     const std::vector<VbWarmStart<Scalar>>* warm = nullptr,
                                                     int threads = 1) {
    if (warm && warm->size() != eqs.size()) {
        throw std::invalid_argument("warm-start count must match equation count");
    }
    const Index count = static_cast<Index>(eqs.size());
    std::vector<EquationPosterior<Scalar>> fits(eqs.size());
    std::vector<std::string> errors(eqs.size());
    detail::parallel_for(count, threads, [&](Index i) {
        const auto idx = static_cast<std::size_t>(i);
        try {
            fits[idx] = vb_fit_equation(eqs[idx], hyper, settings, warm ? &(*warm)[idx] : nullptr);
        } catch (const std::exception& ex) {
            errors[idx] = ex.what();
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i].empty()) {
            throw std::runtime_error("equation " + std::to_string(i) + ": " + errors[i]);
        }
    }
    return fits;
}

// Node-wise network fit: regress each column on all others under the prior
// network's class assignment.
template <typename Scalar>
NetworkPosterior<Scalar> fit_network(const MatrixX<Scalar>& data, const Eigen::MatrixXi& prior,
                                     const Hyperparameters<Scalar>& hyper,
                                     const VbSettings& settings = {}, int threads = 1) {
    NetworkPosterior<Scalar> net;
    net.equations = fit_equations(build_equation_data(data, prior), hyper, settings,
                                  static_cast<const std::vector<VbWarmStart<Scalar>>*>(nullptr), threads);
    net.hyper = hyper;
    net.total_elbo = 0;
    for (const auto& eqp : net.equations) net.total_elbo += eqp.elbo;
    return net;
}

} // namespace semnet

#endif
