// Column-wise standardization of a data matrix (rows = observations).
#ifndef SEMNET_PREPROCESS_HPP
#define SEMNET_PREPROCESS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

#include "semnet/graph_model.hpp" // MatrixX / VectorX aliases

namespace semnet {

// Center each column to mean 0 and scale it to sample standard deviation 1
// (denominator n-1). A constant column has no scale and is an error.
template <typename Scalar>
MatrixX<Scalar> standardize_columns(const MatrixX<Scalar>& data) {
    const Index n = data.rows();
    const Index p = data.cols();
    if (n < 2) throw std::invalid_argument("standardize_columns: need at least 2 rows");
    MatrixX<Scalar> out(n, p);
    for (Index j = 0; j < p; ++j) {
        const Scalar mean = data.col(j).mean();
        VectorX<Scalar> centered = data.col(j).array() - mean;
        const Scalar var = centered.squaredNorm() / Scalar(n - 1);
        if (!(var > Scalar(0))) {
            throw std::invalid_argument("standardize_columns: column " + std::to_string(j) +
                                        " is constant");
        }
        out.col(j) = centered / std::sqrt(var);
    }
    return out;
}

} // namespace semnet

#endif
