// Edge ranking from fitted posteriors, ROC evaluation against a ground
// truth, and the split-half building blocks.
//
// The continuous edge-strength statistic is the posterior z-score
// |β*| / sd(β*) per direction; an undirected edge is only as strong as its
// weaker direction (min over the two), the continuous form of the AND rule.
#ifndef SEMNET_SELECTION_HPP
#define SEMNET_SELECTION_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "semnet/graph_model.hpp"
#include "semnet/rng.hpp"
#include "semnet/vb.hpp"

namespace semnet {

template <typename Scalar = double>
struct EdgeScoreMatrix {
    MatrixX<Scalar> z; // p×p, nonnegative, zero diagonal
    bool symmetrized = false;
    std::string definition = "abs_mean_over_sd";
};

using EdgeSet = std::vector<EdgePair>; // pairs with i < j

// Directed scores: entry (i, r-th predictor's node) of equation i.
template <typename Scalar>
EdgeScoreMatrix<Scalar> edge_scores(const NetworkPosterior<Scalar>& network) {
    const Index p = static_cast<Index>(network.equations.size());
    if (p < 2) throw std::invalid_argument("edge_scores: network must have >= 2 equations");
    EdgeScoreMatrix<Scalar> out;
    out.z = MatrixX<Scalar>::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
        const auto& eqp = network.equations[static_cast<std::size_t>(i)];
        if (eqp.beta_mean.size() != p - 1) {
            throw std::invalid_argument("edge_scores: equation " + std::to_string(i) +
                                        " has wrong size");
        }
        for (Index r = 0; r < p - 1; ++r) {
            const Index node = r < i ? r : r + 1;
            out.z(i, node) = std::abs(eqp.beta_mean(r)) / std::sqrt(eqp.beta_cov(r, r));
        }
    }
    return out;
}

template <typename Scalar>
EdgeScoreMatrix<Scalar> symmetrize(const EdgeScoreMatrix<Scalar>& scores) {
    if (scores.symmetrized) throw std::invalid_argument("symmetrize: scores already symmetrized");
    EdgeScoreMatrix<Scalar> out = scores;
    const Index p = scores.z.rows();
    for (Index i = 0; i < p; ++i) {
        for (Index j = i + 1; j < p; ++j) {
            const Scalar v = std::min(scores.z(i, j), scores.z(j, i));
            out.z(i, j) = v;
            out.z(j, i) = v;
        }
    }
    out.symmetrized = true;
    return out;
}

namespace detail {

template <typename Scalar>
struct ScoredPair {
    Scalar score;
    Index i, j;
};

// All unordered pairs, sorted by descending score with lexicographic
// tie-breaking — the shared ranking for top-k and the edge-list writer.
template <typename Scalar>
std::vector<ScoredPair<Scalar>> ranked_pairs(const EdgeScoreMatrix<Scalar>& scores) {
    if (!scores.symmetrized) throw std::invalid_argument("ranking requires symmetrized scores");
    const Index p = scores.z.rows();
    std::vector<ScoredPair<Scalar>> pairs;
    pairs.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
    for (Index i = 0; i < p; ++i)
        for (Index j = i + 1; j < p; ++j) pairs.push_back({scores.z(i, j), i, j});
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    return pairs;
}

} // namespace detail

template <typename Scalar>
EdgeSet top_k(const EdgeScoreMatrix<Scalar>& scores, Index k) {
    const Index p = scores.z.rows();
    if (k < 0 || k > p * (p - 1) / 2) throw std::invalid_argument("top_k: k out of range");
    const auto pairs = detail::ranked_pairs(scores);
    EdgeSet out;
    out.reserve(static_cast<std::size_t>(k));
    for (Index t = 0; t < k; ++t) out.emplace_back(pairs[static_cast<std::size_t>(t)].i,
                                                   pairs[static_cast<std::size_t>(t)].j);
    return out;
}

inline Index overlap(const EdgeSet& a, const EdgeSet& b) {
    EdgeSet sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    EdgeSet common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    return static_cast<Index>(common.size());
}

template <typename Scalar = double>
struct RocCurve {
    std::vector<Scalar> fpr, tpr; // non-decreasing, endpoints (0,0) and (1,1)
    Scalar auc = 0;
};

// Threshold sweep over unordered pairs. Ties enter together (one point per
// distinct score value), so constant scores give the chance diagonal and the
// curve is invariant under strictly increasing score transforms.
template <typename Scalar>
RocCurve<Scalar> roc(const EdgeScoreMatrix<Scalar>& scores, const Eigen::MatrixXi& truth) {
    validate_adjacency(truth);
    if (truth.rows() != scores.z.rows()) throw std::invalid_argument("roc: size mismatch");
    const auto pairs = detail::ranked_pairs(scores);
    Index pos = 0;
    for (const auto& pr : pairs) pos += truth(pr.i, pr.j);
    const Index neg = static_cast<Index>(pairs.size()) - pos;
    if (pos < 1 || neg < 1) {
        throw std::invalid_argument("roc: truth needs at least one present and one absent pair");
    }

    RocCurve<Scalar> curve;
    curve.fpr.push_back(0);
    curve.tpr.push_back(0);
    Index tp = 0, fp = 0;
    std::size_t t = 0;
    while (t < pairs.size()) {
        std::size_t u = t;
        while (u < pairs.size() && pairs[u].score == pairs[t].score) {
            (truth(pairs[u].i, pairs[u].j) != 0 ? tp : fp)++;
            ++u;
        }
        curve.fpr.push_back(Scalar(fp) / Scalar(neg));
        curve.tpr.push_back(Scalar(tp) / Scalar(pos));
        t = u;
    }
    curve.auc = 0;
    for (std::size_t q = 1; q < curve.fpr.size(); ++q) {
        curve.auc += (curve.fpr[q] - curve.fpr[q - 1]) * (curve.tpr[q] + curve.tpr[q - 1]) / Scalar(2);
    }
    return curve;
}

inline std::vector<double> default_fpr_grid(int points = 101) {
    if (points < 2) throw std::invalid_argument("fpr grid needs >= 2 points");
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = double(i) / double(points - 1);
    return grid;
}

namespace detail {

// Upper envelope of a step curve at one FPR value: vertical segments keep
// their top point, between support points TPR is linearly interpolated.
template <typename Scalar>
Scalar interp_tpr(const RocCurve<Scalar>& curve, Scalar x) {
    std::vector<Scalar> xs, ys;
    for (std::size_t t = 0; t < curve.fpr.size(); ++t) {
        if (!xs.empty() && curve.fpr[t] == xs.back()) {
            ys.back() = std::max(ys.back(), curve.tpr[t]);
        } else {
            xs.push_back(curve.fpr[t]);
            ys.push_back(curve.tpr[t]);
        }
    }
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const Scalar w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return ys[hi - 1] + w * (ys[hi] - ys[hi - 1]);
}

} // namespace detail

template <typename Scalar>
RocCurve<Scalar> average_roc(const std::vector<RocCurve<Scalar>>& per_replicate,
                             const std::vector<Scalar>& grid) {
    if (per_replicate.empty()) throw std::invalid_argument("average_roc: need >= 1 replicate");
    if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end())) {
        throw std::invalid_argument("average_roc: grid must be sorted with >= 2 points");
    }
    RocCurve<Scalar> out;
    out.fpr = grid;
    out.tpr.assign(grid.size(), Scalar(0));
    for (const auto& curve : per_replicate) {
        for (std::size_t g = 0; g < grid.size(); ++g) {
            out.tpr[g] += detail::interp_tpr(curve, grid[g]);
        }
    }
    for (auto& v : out.tpr) v /= Scalar(per_replicate.size());
    out.auc = 0;
    for (std::size_t q = 1; q < grid.size(); ++q) {
        out.auc += (out.fpr[q] - out.fpr[q - 1]) * (out.tpr[q] + out.tpr[q - 1]) / Scalar(2);
    }
    return out;
}

// Disjoint random halves of the rows: floor(n/2) and ceil(n/2), each half in
// ascending original-row order.
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> split_half(const MatrixX<Scalar>& data,
                                                       std::uint64_t seed) {
    const Index n = data.rows();
    if (n < 2) throw std::invalid_argument("split_half: need n >= 2");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    for (Index i = 0; i < n - 1; ++i) {
        const Index j = i + static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    const Index na = n / 2;
    std::vector<Index> a(idx.begin(), idx.begin() + na);
    std::vector<Index> b(idx.begin() + na, idx.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    MatrixX<Scalar> first(na, data.cols()), second(n - na, data.cols());
    for (std::size_t r = 0; r < a.size(); ++r) first.row(static_cast<Index>(r)) = data.row(a[r]);
    for (std::size_t r = 0; r < b.size(); ++r) second.row(static_cast<Index>(r)) = data.row(b[r]);
    return {std::move(first), std::move(second)};
}

} // namespace semnet

#endif
