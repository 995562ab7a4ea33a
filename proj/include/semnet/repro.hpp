// Split-half reproducibility protocol: repeatedly split the samples into two
// halves, fit each half independently, and count how many of the top-k
// edges the two fits share.
#ifndef SEMNET_REPRO_HPP
#define SEMNET_REPRO_HPP

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "semnet/eb.hpp"
#include "semnet/preprocess.hpp"
#include "semnet/selection.hpp"

namespace semnet {

template <typename Scalar = double>
struct SplitReproSettings {
    std::vector<Index> ks;
    int replicates = 1;
    std::uint64_t seed = 0;
    bool use_eb = true;      // empirical-Bayes fit per half vs fixed hyperparameters
    bool standardize = true; // re-standardize each half after the split
    Hyperparameters<Scalar> hyper; // initial (EB) or fixed (no EB) values
    EbSettings eb;

    void validate() const {
        if (ks.empty()) throw std::invalid_argument("split-repro: need at least one k");
        if (replicates < 1) throw std::invalid_argument("split-repro: replicates must be >= 1");
        hyper.validate();
        eb.validate();
    }
};

struct SplitReproRow {
    int replicate; // 1-based
    Index k;
    Index overlap;
};

struct SplitReproResult {
    std::vector<SplitReproRow> rows; // ordered by replicate, then by the given k order
    std::vector<std::pair<Index, double>> mean_overlap; // per k, across replicates
};

// Replicate r uses seed + r - 1 for its split; fits are deterministic, so
// the whole table is reproducible from (data, prior, settings).
template <typename Scalar>
SplitReproResult run_split_repro(const MatrixX<Scalar>& data, const Eigen::MatrixXi& prior,
                                 const SplitReproSettings<Scalar>& settings) {
    settings.validate();
    const auto fit_scores = [&](const MatrixX<Scalar>& half) {
        const MatrixX<Scalar> values = settings.standardize ? standardize_columns(half) : half;
        NetworkPosterior<Scalar> net;
        if (settings.use_eb) {
            net = eb_fit(values, prior, settings.hyper, settings.eb).network;
        } else {
            net = fit_network(values, prior, settings.hyper, settings.eb.vb, settings.eb.threads);
        }
        return symmetrize(edge_scores(net));
    };

    SplitReproResult result;
    std::vector<double> sums(settings.ks.size(), 0.0);
    for (int rep = 1; rep <= settings.replicates; ++rep) {
        const auto halves = split_half(data, settings.seed + static_cast<std::uint64_t>(rep - 1));
        const auto scores_a = fit_scores(halves.first);
        const auto scores_b = fit_scores(halves.second);
        for (std::size_t t = 0; t < settings.ks.size(); ++t) {
            const Index k = settings.ks[t];
            const Index common = overlap(top_k(scores_a, k), top_k(scores_b, k));
            result.rows.push_back({rep, k, common});
            sums[t] += static_cast<double>(common);
        }
    }
    for (std::size_t t = 0; t < settings.ks.size(); ++t) {
        result.mean_overlap.emplace_back(settings.ks[t], sums[t] / settings.replicates);
    }
    return result;
}

} // namespace semnet

#endif
