#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "semnet/eb.hpp"
#include "semnet/graph_model.hpp"
#include "semnet/preprocess.hpp"
#include "semnet/rng.hpp"
#include "semnet/special.hpp"
#include "semnet/vb.hpp"

using namespace semnet;

namespace {

// gamma log likelihood in the sufficient statistics, the objective gamma_mle
// claims to maximize
double gamma_loglik(double a, double b, double t1, double t2) {
    return a * std::log(b) - std::lgamma(a) + (a - 1.0) * t2 - b * t1;
}

struct GridMax {
    double a, b, value;
};

GridMax grid_search(double t1, double t2, int points = 200) {
    const double lo = std::log(1e-3), hi = std::log(1e6);
    GridMax best{0, 0, -std::numeric_limits<double>::infinity()};
    for (int i = 0; i < points; ++i) {
        const double a = std::exp(lo + (hi - lo) * i / (points - 1));
        for (int j = 0; j < points; ++j) {
            const double b = std::exp(lo + (hi - lo) * j / (points - 1));
            const double v = gamma_loglik(a, b, t1, t2);
            if (v > best.value) best = {a, b, v};
        }
    }
    return best;
}

Hyperparameters<double> swapped_classes(const Hyperparameters<double>& h) {
    Hyperparameters<double> out = h;
    std::swap(out.a0, out.a1);
    std::swap(out.b0, out.b1);
    return out;
}

EquationPosterior<double> gamma_only_fit(double a0, double b0, double a1, double b1) {
    EquationPosterior<double> eq;
    eq.a_tau0 = a0;
    eq.b_tau0 = b0;
    eq.a_tau1 = a1;
    eq.b_tau1 = b1;
    eq.a_sigma_inv = 1.0;
    eq.b_sigma_inv = 1.0;
    return eq;
}

} // namespace

TEST_CASE("gamma_mle recovers the generating shape and rate from exact moments") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        const double a = std::exp(std::log(0.1) + rng.uniform() * (std::log(50.0) - std::log(0.1)));
        const double b = std::exp(std::log(0.1) + rng.uniform() * (std::log(50.0) - std::log(0.1)));
        const double t1 = a / b;
        const double t2 = digamma(a) - std::log(b);
        const auto mle = gamma_mle(t1, t2);
        CHECK(!mle.clamped);
        CHECK(std::abs(mle.a - a) / a < 1e-9);
        CHECK(std::abs(mle.b - b) / b < 1e-9);
    }
}

TEST_CASE("gamma_mle beats a dense log-scale grid on sampled statistics") {
    Rng rng(22);
    for (int t = 0; t < 20; ++t) {
        // statistics from an actual sample, so Jensen's gap is strictly positive
        const double shape = std::exp(std::log(0.3) + rng.uniform() * (std::log(20.0) - std::log(0.3)));
        const double rate = std::exp(std::log(0.2) + rng.uniform() * (std::log(10.0) - std::log(0.2)));
        const int m = 20 + static_cast<int>(rng.bounded(80));
        double t1 = 0, t2 = 0;
        for (int i = 0; i < m; ++i) {
            const double draw = rng.gamma(shape, rate);
            t1 += draw;
            t2 += std::log(draw);
        }
        t1 /= m;
        t2 /= m;
        const auto mle = gamma_mle(t1, t2);
        const auto grid = grid_search(t1, t2);
        CHECK(gamma_loglik(mle.a, mle.b, t1, t2) >= grid.value - 1e-9);
        if (!mle.clamped) {
            // the grid argmax sits within a couple of log-spacings of the root
            const double spacing = (std::log(1e6) - std::log(1e-3)) / 199.0;
            CHECK(std::abs(std::log(mle.a) - std::log(grid.a)) <= 2 * spacing + 1e-12);
            CHECK(std::abs(std::log(mle.b) - std::log(grid.b)) <= 2 * spacing + 1e-12);
        }
    }
}

TEST_CASE("gamma_mle rate scaling equivariance") {
    const double t1 = 1.7, t2 = std::log(t1) - 0.31;
    const auto base = gamma_mle(t1, t2);
    for (const double c : {0.01, 0.5, 3.0, 250.0}) {
        const auto scaled = gamma_mle(c * t1, t2 + std::log(c));
        CHECK(scaled.a == doctest::Approx(base.a).epsilon(1e-11));
        CHECK(scaled.b == doctest::Approx(base.b / c).epsilon(1e-11));
    }
}

TEST_CASE("gamma_mle clamps at zero log-dispersion and at huge dispersion") {
    const auto upper = gamma_mle(1.0, 0.0); // delta = 0
    CHECK(upper.clamped);
    CHECK(upper.a == 1e6);
    CHECK(upper.b == 1e6);

    const auto noisy = gamma_mle(1.0, 1e-10); // delta = -1e-10, rounding noise
    CHECK(noisy.clamped);
    CHECK(noisy.a == 1e6);

    const auto lower = gamma_mle(1.0, -1000.0); // delta beyond gap(1e-3)
    CHECK(lower.clamped);
    CHECK(lower.a == 1e-3);
    CHECK(lower.b == 1e-3);
}

TEST_CASE("gamma_mle input validation") {
    CHECK_THROWS_AS(gamma_mle(1.0, 0.1), std::invalid_argument); // Jensen violated
    CHECK_THROWS_AS(gamma_mle(0.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(gamma_mle(-2.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(gamma_mle(std::nan(""), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(gamma_mle(1.0, std::nan("")), std::invalid_argument);
}

TEST_CASE("eb_update pools the class statistics across equations") {
    // edges (0,1) and (2,3): every equation sees both classes
    Eigen::MatrixXi prior = Eigen::MatrixXi::Zero(4, 4);
    prior(0, 1) = prior(1, 0) = 1;
    prior(2, 3) = prior(3, 2) = 1;

    NetworkPosterior<double> net;
    for (int i = 0; i < 4; ++i) {
        net.equations.push_back(
            gamma_only_fit(2.0 + i, 1.0 + 0.5 * i, 3.0 + 2.0 * i, 2.0 + 0.25 * i));
    }

    Hyperparameters<double> current;
    current.a2 = 0.007;
    current.b2 = 0.013;
    const auto next = eb_update(net, prior, current);

    double t1[2] = {0, 0}, t2[2] = {0, 0};
    for (const auto& eq : net.equations) {
        t1[0] += eq.a_tau0 / eq.b_tau0;
        t2[0] += digamma(eq.a_tau0) - std::log(eq.b_tau0);
        t1[1] += eq.a_tau1 / eq.b_tau1;
        t2[1] += digamma(eq.a_tau1) - std::log(eq.b_tau1);
    }
    const auto mle0 = gamma_mle(t1[0] / 4.0, t2[0] / 4.0);
    const auto mle1 = gamma_mle(t1[1] / 4.0, t2[1] / 4.0);
    CHECK(next.a0 == mle0.a);
    CHECK(next.b0 == mle0.b);
    CHECK(next.a1 == mle1.a);
    CHECK(next.b1 == mle1.b);
    CHECK(next.a2 == current.a2);
    CHECK(next.b2 == current.b2);
}

TEST_CASE("eb_update is a fixed point when every posterior equals one gamma") {
    Eigen::MatrixXi prior = Eigen::MatrixXi::Zero(4, 4);
    prior(0, 1) = prior(1, 0) = 1;
    prior(2, 3) = prior(3, 2) = 1;
    NetworkPosterior<double> net;
    for (int i = 0; i < 4; ++i) net.equations.push_back(gamma_only_fit(3.0, 1.5, 7.0, 0.4));
    const auto next = eb_update(net, prior, Hyperparameters<double>{});
    CHECK(next.a0 == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(next.b0 == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(next.a1 == doctest::Approx(7.0).epsilon(1e-9));
    CHECK(next.b1 == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("eb_update leaves a globally empty class untouched") {
    const Index p = 4;
    Eigen::MatrixXi complete = Eigen::MatrixXi::Ones(p, p);
    complete.diagonal().setZero();
    NetworkPosterior<double> net;
    for (Index i = 0; i < p; ++i) net.equations.push_back(gamma_only_fit(2.0, 3.0, 4.0, 5.0));
    Hyperparameters<double> current;
    current.a0 = 0.123;
    current.b0 = 45.6;
    const auto next = eb_update(net, complete, current);
    CHECK(next.a0 == current.a0);
    CHECK(next.b0 == current.b0);
    CHECK(next.a1 != current.a1); // the populated class does move

    Eigen::MatrixXi empty = Eigen::MatrixXi::Zero(p, p);
    const auto next2 = eb_update(net, empty, current);
    CHECK(next2.a1 == current.a1);
    CHECK(next2.b1 == current.b1);
    CHECK(next2.a0 != current.a0);
}

TEST_CASE("eb_update swaps with the complement prior bitwise") {
    Rng rng(33);
    const Index p = 7;
    const auto omega = gen_precision(TopologySpec<double>{Topology::kBand, p, 2});
    const auto prior = precision_to_adjacency(omega);
    NetworkPosterior<double> net, net_swapped;
    for (Index i = 0; i < p; ++i) {
        const double a0 = 1.0 + rng.uniform(), b0 = 0.5 + rng.uniform();
        const double a1 = 1.0 + rng.uniform(), b1 = 0.5 + rng.uniform();
        net.equations.push_back(gamma_only_fit(a0, b0, a1, b1));
        net_swapped.equations.push_back(gamma_only_fit(a1, b1, a0, b0));
    }
    Hyperparameters<double> current;
    current.a0 = 1.2;
    current.b0 = 0.7;
    current.a1 = 2.5;
    current.b1 = 1.9;
    const auto next = eb_update(net, prior, current);
    const auto next_c = eb_update(net_swapped, complement(prior), swapped_classes(current));
    CHECK(next_c.a0 == next.a1);
    CHECK(next_c.b0 == next.b1);
    CHECK(next_c.a1 == next.a0);
    CHECK(next_c.b1 == next.b0);
}

TEST_CASE("eb_update validation") {
    NetworkPosterior<double> net;
    net.equations.push_back(gamma_only_fit(1, 1, 1, 1));
    Eigen::MatrixXi prior = Eigen::MatrixXi::Zero(3, 3);
    CHECK_THROWS_AS(eb_update(net, prior, Hyperparameters<double>{}), std::invalid_argument);
    prior(0, 1) = 1; // asymmetric
    net.equations.push_back(gamma_only_fit(1, 1, 1, 1));
    net.equations.push_back(gamma_only_fit(1, 1, 1, 1));
    CHECK_THROWS_AS(eb_update(net, prior, Hyperparameters<double>{}), std::invalid_argument);
}

TEST_CASE("eb_fit trace bookkeeping and summed bound monotonicity") {
    const Index p = 14, n = 40;
    TopologySpec<double> spec{Topology::kBand, p, 1};
    spec.magnitude = 0.9;
    const auto omega = gen_precision(spec);
    const auto data = standardize_columns(sample_ggm(omega, n, 7));
    const auto prior = precision_to_adjacency(omega);

    EbSettings settings;
    settings.outer_max = 25;
    const auto fit = eb_fit(data, prior, Hyperparameters<double>{}, settings);

    REQUIRE(fit.hyper_trace.size() == fit.total_elbo_trace.size() + 1);
    CHECK(fit.hyper_trace.front().a0 == Hyperparameters<double>{}.a0);
    CHECK(fit.hyper_trace.front().b1 == Hyperparameters<double>{}.b1);
    CHECK(fit.hyper_trace.back().a0 == fit.final_hyper.a0);
    CHECK(fit.hyper_trace.back().b0 == fit.final_hyper.b0);
    CHECK(fit.hyper_trace.back().a1 == fit.final_hyper.a1);
    CHECK(fit.hyper_trace.back().b1 == fit.final_hyper.b1);
    for (const auto& h : fit.hyper_trace) {
        CHECK(h.a2 == Hyperparameters<double>{}.a2);
        CHECK(h.b2 == Hyperparameters<double>{}.b2);
    }
    CHECK(fit.prior_mean_tau0 == fit.final_hyper.a0 / fit.final_hyper.b0);
    CHECK(fit.prior_mean_tau1 == fit.final_hyper.a1 / fit.final_hyper.b1);
    CHECK(fit.ratio == fit.prior_mean_tau0 / fit.prior_mean_tau1);
    CHECK(fit.network.hyper.a0 == fit.final_hyper.a0);
    double total = 0;
    for (const auto& eq : fit.network.equations) total += eq.elbo;
    CHECK(fit.network.total_elbo == total);

    for (std::size_t i = 1; i < fit.total_elbo_trace.size(); ++i) {
        const double prev = fit.total_elbo_trace[i - 1];
        CHECK(fit.total_elbo_trace[i] >= prev - 1e-6 * std::max(1.0, std::abs(prev)));
    }
    // the final full refit can only improve on the last recorded round
    CHECK(fit.network.total_elbo >=
          fit.total_elbo_trace.back() - 1e-6 * std::max(1.0, std::abs(fit.total_elbo_trace.back())));
}

TEST_CASE("eb_fit separates the classes on structured data") {
    const Index p = 20, n = 50;
    TopologySpec<double> spec{Topology::kBand, p, 1};
    spec.magnitude = 0.9;
    const auto omega = gen_precision(spec);
    const auto data = standardize_columns(sample_ggm(omega, n, 99));
    const auto prior = precision_to_adjacency(omega);
    EbSettings settings;
    settings.outer_max = 40;
    const auto fit = eb_fit(data, prior, Hyperparameters<double>{}, settings);
    // true-edge coefficients get the slack class: much smaller precision mean
    CHECK(fit.ratio > 3.0);
    CHECK(fit.prior_mean_tau1 < fit.prior_mean_tau0);
}

TEST_CASE("eb_fit on unstructured data leaves the classes comparable") {
    const Index p = 20, n = 60;
    const Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(p, p);
    const auto data = standardize_columns(sample_ggm(omega, n, 13));
    // an arbitrary band prior: there is nothing for it to find
    const auto prior = precision_to_adjacency(gen_precision(TopologySpec<double>{Topology::kBand, p, 1}));
    EbSettings settings;
    settings.outer_max = 40;
    const auto fit = eb_fit(data, prior, Hyperparameters<double>{}, settings);
    CHECK(fit.ratio > 0.5);
    CHECK(fit.ratio < 2.0);
}

TEST_CASE("eb_fit is deterministic and thread-count invariant") {
    const Index p = 10, n = 30;
    const auto omega = gen_precision(TopologySpec<double>{Topology::kBand, p, 1});
    const auto data = standardize_columns(sample_ggm(omega, n, 4));
    const auto prior = precision_to_adjacency(omega);
    EbSettings settings;
    settings.outer_max = 8;
    const auto a = eb_fit(data, prior, Hyperparameters<double>{}, settings);
    const auto b = eb_fit(data, prior, Hyperparameters<double>{}, settings);
    EbSettings threaded = settings;
    threaded.threads = 3;
    const auto c = eb_fit(data, prior, Hyperparameters<double>{}, threaded);
    CHECK(a.final_hyper.a0 == b.final_hyper.a0);
    CHECK(a.final_hyper.a0 == c.final_hyper.a0);
    CHECK(a.ratio == b.ratio);
    CHECK(a.ratio == c.ratio);
    REQUIRE(a.total_elbo_trace.size() == c.total_elbo_trace.size());
    for (std::size_t i = 0; i < a.total_elbo_trace.size(); ++i) {
        CHECK(a.total_elbo_trace[i] == c.total_elbo_trace[i]);
    }
    for (std::size_t i = 0; i < a.network.equations.size(); ++i) {
        CHECK(a.network.equations[i].beta_mean == c.network.equations[i].beta_mean);
    }
}

TEST_CASE("blended schedule also increases the summed bound") {
    const Index p = 10, n = 30;
    const auto omega = gen_precision(TopologySpec<double>{Topology::kBand, p, 1});
    const auto data = standardize_columns(sample_ggm(omega, n, 21));
    const auto prior = precision_to_adjacency(omega);
    EbSettings settings;
    settings.outer_max = 60;
    settings.blended = true;
    const auto fit = eb_fit(data, prior, Hyperparameters<double>{}, settings);
    CHECK(std::isfinite(fit.ratio));
    CHECK(fit.ratio > 0);
    REQUIRE(fit.total_elbo_trace.size() >= 2);
    for (std::size_t i = 1; i < fit.total_elbo_trace.size(); ++i) {
        const double prev = fit.total_elbo_trace[i - 1];
        CHECK(fit.total_elbo_trace[i] >= prev - 1e-6 * std::max(1.0, std::abs(prev)));
    }
}

TEST_CASE("single outer round produces exactly one update") {
    const Index p = 8, n = 25;
    const auto omega = gen_precision(TopologySpec<double>{Topology::kBand, p, 1});
    const auto data = standardize_columns(sample_ggm(omega, n, 2));
    const auto prior = precision_to_adjacency(omega);
    EbSettings settings;
    settings.outer_max = 1;
    const auto fit = eb_fit(data, prior, Hyperparameters<double>{}, settings);
    CHECK(fit.hyper_trace.size() == 2);
    CHECK(fit.total_elbo_trace.size() == 1);
    CHECK(fit.final_hyper.a0 == fit.hyper_trace[1].a0);
    CHECK(!fit.converged);
}

TEST_CASE("eb settings validation") {
    EbSettings bad;
    bad.outer_max = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = EbSettings{};
    bad.outer_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
