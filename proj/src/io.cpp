#include "semnet/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace semnet {

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        std::string f = line.substr(start, pos == std::string::npos ? pos : pos - start);
        // tolerate surrounding blanks and CR line endings
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ' || f.back() == '\t')) f.pop_back();
        std::string::size_type lead = 0;
        while (lead < f.size() && (f[lead] == ' ' || f[lead] == '\t')) ++lead;
        fields.push_back(f.substr(lead));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return fields;
}

bool parse_double(const std::string& field, double& value) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, value);
    return res.ec == std::errc() && res.ptr == last && !field.empty();
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (in.bad()) throw std::runtime_error(path + ": read error");
    return lines;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Dataset read_data_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw std::runtime_error(path + ": empty file");

    Dataset ds;
    std::size_t first_row = 0;
    const auto head = split_fields(lines[0], ',');
    bool header = false;
    for (const auto& f : head) {
        double v;
        if (!parse_double(f, v)) {
            header = true;
            break;
        }
    }
    if (header) {
        ds.names = head;
        first_row = 1;
    }

    const std::size_t n = lines.size() - first_row;
    const std::size_t p = head.size();
    if (n < 2 || p < 2) throw std::runtime_error(path + ": need at least 2 rows and 2 columns");
    ds.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < n; ++r) {
        const auto fields = split_fields(lines[first_row + r], ',');
        if (fields.size() != p) {
            throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(p));
        }
        for (std::size_t c = 0; c < p; ++c) {
            double v;
            if (!parse_double(fields[c], v) || !std::isfinite(v)) {
                throw std::runtime_error(path + ": bad numeric field '" + fields[c] + "' at row " +
                                         std::to_string(r + 1));
            }
            ds.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    if (ds.names.empty()) {
        for (std::size_t c = 1; c <= p; ++c) ds.names.push_back("V" + std::to_string(c));
    }
    return ds;
}

Eigen::MatrixXi read_adjacency_csv(const std::string& path, Eigen::Index p) {
    const auto lines = read_lines(path);
    const auto rows = static_cast<Eigen::Index>(lines.size());
    if (p <= 0) p = rows;
    if (rows != p) {
        throw std::runtime_error(path + ": expected " + std::to_string(p) + " rows, found " +
                                 std::to_string(rows));
    }
    Eigen::MatrixXi adj(p, p);
    for (Eigen::Index r = 0; r < p; ++r) {
        const auto fields = split_fields(lines[static_cast<std::size_t>(r)], ',');
        if (static_cast<Eigen::Index>(fields.size()) != p) {
            throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(p));
        }
        for (Eigen::Index c = 0; c < p; ++c) {
            const auto& f = fields[static_cast<std::size_t>(c)];
            if (f == "0") {
                adj(r, c) = 0;
            } else if (f == "1") {
                adj(r, c) = 1;
            } else {
                throw std::runtime_error(path + ": entry '" + f + "' at row " +
                                         std::to_string(r + 1) + " is not 0 or 1");
            }
        }
    }
    try {
        validate_adjacency(adj);
    } catch (const std::exception& ex) {
        throw std::runtime_error(path + ": " + ex.what());
    }
    return adj;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(tmp + ": cannot open for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error(tmp + ": write error");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        const int err = errno;
        std::remove(tmp.c_str());
        throw std::runtime_error(path + ": rename failed: " + std::strerror(err));
    }
}

void write_data_csv(const std::string& path, const Eigen::MatrixXd& values,
                    const std::vector<std::string>& names) {
    const Eigen::Index p = values.cols();
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != p) {
        throw std::invalid_argument(path + ": name count does not match column count");
    }
    std::string text;
    for (Eigen::Index c = 0; c < p; ++c) {
        if (c) text += ',';
        text += names.empty() ? "V" + std::to_string(c + 1) : names[static_cast<std::size_t>(c)];
    }
    text += '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < p; ++c) {
            if (c) text += ',';
            text += format_double(values(r, c));
        }
        text += '\n';
    }
    write_text_atomic(path, text);
}

void write_adjacency_csv(const std::string& path, const Eigen::MatrixXi& adj) {
    validate_adjacency(adj);
    std::string text;
    for (Eigen::Index r = 0; r < adj.rows(); ++r) {
        for (Eigen::Index c = 0; c < adj.cols(); ++c) {
            if (c) text += ',';
            text += adj(r, c) ? '1' : '0';
        }
        text += '\n';
    }
    write_text_atomic(path, text);
}

void write_edge_list(const EdgeScoreMatrix<double>& scores, const Eigen::MatrixXi& prior,
                     const std::string& path) {
    if (!scores.symmetrized) throw std::invalid_argument("write_edge_list: scores must be symmetrized");
    validate_adjacency(prior);
    if (prior.rows() != scores.z.rows()) {
        throw std::invalid_argument("write_edge_list: prior and score sizes differ");
    }
    const auto pairs = detail::ranked_pairs(scores);
    std::string text = "node_i\tnode_j\tscore\tin_prior\n";
    char buf[64];
    for (const auto& pr : pairs) {
        std::snprintf(buf, sizeof buf, "%lld\t%lld\t%.6f\t%d\n",
                      static_cast<long long>(pr.i + 1), static_cast<long long>(pr.j + 1), pr.score,
                      prior(pr.i, pr.j));
        text += buf;
    }
    write_text_atomic(path, text);
}

void write_roc_csv(const RocCurve<double>& curve, const std::string& path) {
    std::string text = "fpr,tpr\n";
    for (std::size_t t = 0; t < curve.fpr.size(); ++t) {
        text += format_double(curve.fpr[t]);
        text += ',';
        text += format_double(curve.tpr[t]);
        text += '\n';
    }
    write_text_atomic(path, text);
}

void write_auc_csv(double auc, const std::string& path) {
    write_text_atomic(path, "auc\n" + format_double(auc) + "\n");
}

} // namespace semnet
