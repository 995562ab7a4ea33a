// Ground-truth precision matrices for benchmark topologies, Gaussian
// graphical-model sampling, and adjacency-matrix utilities.
//
// Conventions: a precision matrix is a plain symmetric positive-definite
// Eigen matrix; an adjacency matrix is a symmetric 0/1 Eigen::MatrixXi with
// zero diagonal. Free functions validate what they need at the boundary.
#ifndef SEMNET_GRAPH_MODEL_HPP
#define SEMNET_GRAPH_MODEL_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semnet/rng.hpp"

namespace semnet {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;

enum class Topology { kBand, kCluster, kHub };

// Parameters of a benchmark precision matrix.
//
// band:    unit diagonal, entry at lag d is magnitude*(1 - d/(bandwidth+1))
//          for 1 <= d <= bandwidth. Diagonally dominant iff
//          magnitude*bandwidth < 1; default magnitude 0.4/bandwidth.
// cluster: block diagonal, unit diagonal, constant off-diagonal `magnitude`
//          inside consecutive blocks of `block_size` nodes (a trailing
//          smaller block if p is not a multiple). Requires
//          magnitude < 1/(block_size-1); default 0.3, hence the default
//          block size of 4.
// hub:     consecutive groups of (spokes+1) nodes; the first node of each
//          group connects to the rest with entry `magnitude`. Requires
//          spokes*magnitude^2 < 1 (Schur complement of the hub row);
//          default 0.25. Leftover single nodes stay isolated.
template <typename Scalar = double>
struct TopologySpec {
    Topology kind = Topology::kBand;
    Index p = 0;
    Index bandwidth = 1;  // band
    Index block_size = 4; // cluster
    Index spokes = 5;     // hub
    Scalar magnitude = Scalar(-1); // <= 0 selects the per-kind default

    Scalar effective_magnitude() const {
        if (magnitude > Scalar(0)) return magnitude;
        switch (kind) {
            case Topology::kBand: return Scalar(0.4) / Scalar(bandwidth);
            case Topology::kCluster: return Scalar(0.3);
            case Topology::kHub: return Scalar(0.25);
        }
        return Scalar(0);
    }
};

inline Topology topology_from_string(const std::string& s) {
    if (s == "band") return Topology::kBand;
    if (s == "cluster") return Topology::kCluster;
    if (s == "hub") return Topology::kHub;
    throw std::invalid_argument("unknown topology '" + s + "' (expected band, cluster or hub)");
}

namespace detail {

template <typename Scalar>
void require_spd(const MatrixX<Scalar>& omega, const char* what) {
    Eigen::LLT<MatrixX<Scalar>> llt(omega);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument(std::string(what) + ": matrix is not positive definite");
    }
}

} // namespace detail

// Deterministic construction of the named topology (no randomness involved).
template <typename Scalar = double>
MatrixX<Scalar> gen_precision(const TopologySpec<Scalar>& spec) {
    const Index p = spec.p;
    if (p < 2) throw std::invalid_argument("gen_precision: p must be >= 2");
    const Scalar v = spec.effective_magnitude();
    if (!(v > Scalar(0))) throw std::invalid_argument("gen_precision: magnitude must be > 0");

    MatrixX<Scalar> omega = MatrixX<Scalar>::Identity(p, p);
    switch (spec.kind) {
        case Topology::kBand: {
            const Index b = spec.bandwidth;
            if (b < 1 || b > p - 1) {
                throw std::invalid_argument("gen_precision: bandwidth must be in [1, p-1]");
            }
            for (Index i = 0; i < p; ++i) {
                for (Index d = 1; d <= b && i + d < p; ++d) {
                    const Scalar val = v * (Scalar(1) - Scalar(d) / Scalar(b + 1));
                    omega(i, i + d) = val;
                    omega(i + d, i) = val;
                }
            }
            break;
        }
        case Topology::kCluster: {
            const Index m = spec.block_size;
            if (m < 2) throw std::invalid_argument("gen_precision: block_size must be >= 2");
            if (!(v < Scalar(1) / Scalar(m - 1))) {
                throw std::invalid_argument("gen_precision: cluster magnitude must be < 1/(block_size-1)");
            }
            for (Index start = 0; start < p; start += m) {
                const Index end = std::min(start + m, p);
                for (Index i = start; i < end; ++i) {
                    for (Index j = i + 1; j < end; ++j) {
                        omega(i, j) = v;
                        omega(j, i) = v;
                    }
                }
            }
            break;
        }
        case Topology::kHub: {
            const Index m = spec.spokes;
            if (m < 1) throw std::invalid_argument("gen_precision: spokes must be >= 1");
            if (!(Scalar(m) * v * v < Scalar(1))) {
                throw std::invalid_argument("gen_precision: hub magnitude must satisfy spokes*magnitude^2 < 1");
            }
            const Index group = m + 1;
            for (Index start = 0; start + 1 < p; start += group) {
                const Index end = std::min(start + group, p);
                for (Index j = start + 1; j < end; ++j) {
                    omega(start, j) = v;
                    omega(j, start) = v;
                }
            }
            break;
        }
    }
    detail::require_spd(omega, "gen_precision");
    return omega;
}

// n iid rows from N(0, omega^-1); row j uses draws j*p..(j+1)*p-1 of the seed stream.
template <typename Scalar>
MatrixX<Scalar> sample_ggm(const MatrixX<Scalar>& omega, Index n, std::uint64_t seed) {
    if (omega.rows() != omega.cols() || omega.rows() < 1) {
        throw std::invalid_argument("sample_ggm: omega must be square");
    }
    if (n < 1) throw std::invalid_argument("sample_ggm: n must be >= 1");
    const Index p = omega.rows();
    Eigen::LLT<MatrixX<Scalar>> llt(omega);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("sample_ggm: omega is not positive definite");
    }
    Rng rng(seed);
    MatrixX<Scalar> data(n, p);
    VectorX<Scalar> z(p);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < p; ++i) z(i) = static_cast<Scalar>(rng.normal());
        // cov = omega^-1 = U^-1 U^-T for omega = U^T U
        data.row(j) = llt.matrixU().solve(z).transpose();
    }
    return data;
}

// Support of omega as a 0/1 adjacency: edge iff |omega_ij| > tol, i != j.
template <typename Scalar>
Eigen::MatrixXi precision_to_adjacency(const MatrixX<Scalar>& omega, Scalar tol = Scalar(1e-10)) {
    if (omega.rows() != omega.cols()) {
        throw std::invalid_argument("precision_to_adjacency: omega must be square");
    }
    if (tol < Scalar(0)) throw std::invalid_argument("precision_to_adjacency: tol must be >= 0");
    const Index p = omega.rows();
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
        for (Index j = 0; j < p; ++j) {
            if (i != j && std::abs(omega(i, j)) > tol) adj(i, j) = 1;
        }
    }
    return adj;
}

inline void validate_adjacency(const Eigen::MatrixXi& adj) {
    if (adj.rows() != adj.cols()) throw std::invalid_argument("adjacency must be square");
    for (Index i = 0; i < adj.rows(); ++i) {
        if (adj(i, i) != 0) {
            throw std::invalid_argument("adjacency diagonal must be zero at (" +
                                        std::to_string(i) + "," + std::to_string(i) + ")");
        }
        for (Index j = 0; j < adj.cols(); ++j) {
            if (adj(i, j) != 0 && adj(i, j) != 1) {
                throw std::invalid_argument("adjacency entries must be 0 or 1 at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
            if (adj(i, j) != adj(j, i)) {
                throw std::invalid_argument("adjacency must be symmetric, mismatch at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
}

using EdgePair = std::pair<Index, Index>; // always i < j

inline std::vector<EdgePair> present_edges(const Eigen::MatrixXi& adj) {
    std::vector<EdgePair> edges;
    for (Index i = 0; i < adj.rows(); ++i)
        for (Index j = i + 1; j < adj.cols(); ++j)
            if (adj(i, j) != 0) edges.emplace_back(i, j);
    return edges;
}

inline std::vector<EdgePair> absent_pairs(const Eigen::MatrixXi& adj) {
    std::vector<EdgePair> pairs;
    for (Index i = 0; i < adj.rows(); ++i)
        for (Index j = i + 1; j < adj.cols(); ++j)
            if (adj(i, j) == 0) pairs.emplace_back(i, j);
    return pairs;
}

inline Index edge_count(const Eigen::MatrixXi& adj) {
    return static_cast<Index>(present_edges(adj).size());
}

// Swap round(swap_fraction * |E|) present edges against the same number of
// absent pairs, both sampled uniformly without replacement on the upper
// triangle; the result keeps |E|, symmetry and the zero diagonal.
inline Eigen::MatrixXi perturb_prior(const Eigen::MatrixXi& truth, double swap_fraction,
                                     std::uint64_t seed) {
    validate_adjacency(truth);
    if (swap_fraction < 0.0 || swap_fraction > 1.0) {
        throw std::invalid_argument("perturb_prior: swap_fraction must be in [0,1]");
    }
    std::vector<EdgePair> present = present_edges(truth);
    std::vector<EdgePair> absent = absent_pairs(truth);
    const auto k = static_cast<std::size_t>(std::llround(swap_fraction * static_cast<double>(present.size())));
    if (k > absent.size()) {
        throw std::invalid_argument("perturb_prior: not enough absent pairs to swap in (need " +
                                    std::to_string(k) + ", have " + std::to_string(absent.size()) + ")");
    }
    Rng rng(seed);
    // partial Fisher-Yates: the first k entries become the sampled sets
    for (std::size_t t = 0; t < k; ++t) {
        std::swap(present[t], present[t + rng.bounded(present.size() - t)]);
    }
    for (std::size_t t = 0; t < k; ++t) {
        std::swap(absent[t], absent[t + rng.bounded(absent.size() - t)]);
    }
    Eigen::MatrixXi out = truth;
    for (std::size_t t = 0; t < k; ++t) {
        out(present[t].first, present[t].second) = 0;
        out(present[t].second, present[t].first) = 0;
        out(absent[t].first, absent[t].second) = 1;
        out(absent[t].second, absent[t].first) = 1;
    }
    return out;
}

// Flip every off-diagonal entry; the diagonal stays zero.
inline Eigen::MatrixXi complement(const Eigen::MatrixXi& adj) {
    validate_adjacency(adj);
    const Index p = adj.rows();
    Eigen::MatrixXi out(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
            out(i, j) = (i == j) ? 0 : 1 - adj(i, j);
    return out;
}

} // namespace semnet

#endif
