// Plain-text artifacts: CSV data/adjacency matrices, TSV edge lists, ROC and
// overlap tables, JSON reports. Every writer builds the full payload in
// memory and publishes it with a temp-file + rename, so failures never leave
// partial files behind.
#ifndef SEMNET_IO_HPP
#define SEMNET_IO_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "semnet/selection.hpp"

namespace semnet {

struct Dataset {
    Eigen::MatrixXd values;         // n×p
    std::vector<std::string> names; // p column names
};

// Rectangular numeric CSV with an optional header row of node names; the
// header is detected by the first row failing strict numeric parsing.
Dataset read_data_csv(const std::string& path);

// p×p CSV of {0,1}; pass p <= 0 to infer the size from the file. The result
// is validated (symmetric, zero diagonal).
Eigen::MatrixXi read_adjacency_csv(const std::string& path, Eigen::Index p);

// Header row of names (generated as V1..Vp when empty), then one row per
// observation with round-trip-exact decimal formatting.
void write_data_csv(const std::string& path, const Eigen::MatrixXd& values,
                    const std::vector<std::string>& names = {});

void write_adjacency_csv(const std::string& path, const Eigen::MatrixXi& adj);

// TSV with columns node_i, node_j, score, in_prior for every unordered pair,
// sorted by descending score (ties in lexicographic pair order). Node
// indices are 1-based; scores use fixed 6-decimal formatting.
void write_edge_list(const EdgeScoreMatrix<double>& scores, const Eigen::MatrixXi& prior,
                     const std::string& path);

// fpr,tpr rows; the companion writer stores the scalar AUC.
void write_roc_csv(const RocCurve<double>& curve, const std::string& path);
void write_auc_csv(double auc, const std::string& path);

// Atomic text write used by all writers (exposed for the JSON reports).
void write_text_atomic(const std::string& path, const std::string& content);

} // namespace semnet

#endif
