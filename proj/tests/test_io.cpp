#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <unistd.h>

#include "semnet/graph_model.hpp"
#include "semnet/io.hpp"
#include "semnet/rng.hpp"

using namespace semnet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("semnet_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(bool(out));
    out << content;
}

} // namespace

TEST_CASE("data CSV round trip is value-exact") {
    TempDir dir;
    Eigen::MatrixXd values(4, 3);
    values << 1.0 / 3.0, -2.5e-17, 1e300,
              0.1, -0.0, 123456789.123456789,
              -1.0, 2.0, 3.0,
              5e-324, 1.7976931348623157e308, -0.25;
    const std::vector<std::string> names{"alpha", "beta_2", "x.y"};
    const auto path = dir.file("data.csv");
    write_data_csv(path, values, names);

    const auto ds = read_data_csv(path);
    REQUIRE(ds.values.rows() == 4);
    REQUIRE(ds.values.cols() == 3);
    CHECK(ds.values == values);
    CHECK(ds.names == names);

    // default names when none are given
    write_data_csv(path, values);
    const auto ds2 = read_data_csv(path);
    CHECK(ds2.names == std::vector<std::string>{"V1", "V2", "V3"});
    CHECK(ds2.values == values);
}

TEST_CASE("header detection") {
    TempDir dir;
    const auto path = dir.file("data.csv");

    spit(path, "1.5,2.5\n3.5,4.5\n5.5,6.5\n"); // headerless
    const auto bare = read_data_csv(path);
    CHECK(bare.names == std::vector<std::string>{"V1", "V2"});
    CHECK(bare.values.rows() == 3);
    CHECK(bare.values(0, 0) == 1.5);

    spit(path, "x1,x2\n1,2\n3,4\n");
    const auto named = read_data_csv(path);
    CHECK(named.names == std::vector<std::string>{"x1", "x2"});
    CHECK(named.values.rows() == 2);

    // blanks and CR endings are tolerated
    spit(path, " x1 , x2 \r\n 1 ,2\r\n3, 4 \r\n");
    const auto padded = read_data_csv(path);
    CHECK(padded.names == std::vector<std::string>{"x1", "x2"});
    CHECK(padded.values(1, 1) == 4.0);
}

TEST_CASE("malformed data files are rejected with the path in the message") {
    TempDir dir;
    const auto path = dir.file("bad.csv");

    spit(path, "");
    CHECK_THROWS_AS(read_data_csv(path), std::runtime_error);

    spit(path, "a,b\n1,2\n3\n");
    CHECK_THROWS_WITH_AS(read_data_csv(path), doctest::Contains("row 2"), std::runtime_error);

    spit(path, "a,b\n1,oops\n3,4\n");
    CHECK_THROWS_WITH_AS(read_data_csv(path), doctest::Contains("oops"), std::runtime_error);

    spit(path, "a,b\n1,nan\n3,4\n"); // parses but is not finite
    CHECK_THROWS_AS(read_data_csv(path), std::runtime_error);

    spit(path, "a,b\n1,inf\n3,4\n");
    CHECK_THROWS_AS(read_data_csv(path), std::runtime_error);

    spit(path, "a\n1\n2\n"); // single column
    CHECK_THROWS_AS(read_data_csv(path), std::runtime_error);

    spit(path, "a,b\n1,2\n"); // single data row
    CHECK_THROWS_AS(read_data_csv(path), std::runtime_error);

    CHECK_THROWS_WITH_AS(read_data_csv(dir.file("missing.csv")), doctest::Contains("missing.csv"),
                         std::runtime_error);
}

TEST_CASE("adjacency round trip, inference, and rejection") {
    TempDir dir;
    const auto path = dir.file("adj.csv");
    const auto omega = gen_precision(TopologySpec<double>{Topology::kBand, 6, 2});
    const auto adj = precision_to_adjacency(omega);
    write_adjacency_csv(path, adj);
    CHECK(read_adjacency_csv(path, 6) == adj);
    CHECK(read_adjacency_csv(path, 0) == adj);  // inferred size
    CHECK(read_adjacency_csv(path, -1) == adj); // any non-positive requests inference
    CHECK_THROWS_AS(read_adjacency_csv(path, 5), std::runtime_error);

    spit(path, "0,1\n1,0\n0,1\n");
    CHECK_THROWS_AS(read_adjacency_csv(path, 0), std::runtime_error); // not square

    spit(path, "0,2\n2,0\n");
    CHECK_THROWS_WITH_AS(read_adjacency_csv(path, 0), doctest::Contains("not 0 or 1"),
                         std::runtime_error);

    spit(path, "0,0.0\n0,0\n");
    CHECK_THROWS_AS(read_adjacency_csv(path, 0), std::runtime_error);

    spit(path, "0,1\n0,0\n"); // asymmetric
    CHECK_THROWS_WITH_AS(read_adjacency_csv(path, 0), doctest::Contains("adj.csv"),
                         std::runtime_error);

    spit(path, "1,0\n0,0\n"); // nonzero diagonal
    CHECK_THROWS_AS(read_adjacency_csv(path, 0), std::runtime_error);

    Eigen::MatrixXi bad = Eigen::MatrixXi::Zero(3, 3);
    bad(0, 1) = 1;
    CHECK_THROWS_AS(write_adjacency_csv(path, bad), std::invalid_argument);
}

TEST_CASE("edge list bytes: header, ranking, 1-based ids, fixed decimals") {
    TempDir dir;
    EdgeScoreMatrix<double> scores;
    scores.z = Eigen::MatrixXd::Zero(4, 4);
    const auto set = [&](Index i, Index j, double v) { scores.z(i, j) = scores.z(j, i) = v; };
    set(0, 1, 1.25);
    set(0, 2, 2.0);
    set(0, 3, 0.5);
    set(1, 2, 2.0); // tie with (0,2): lexicographic order decides
    set(1, 3, 0.123456789);
    set(2, 3, 0.0);
    scores.symmetrized = true;

    Eigen::MatrixXi prior = Eigen::MatrixXi::Zero(4, 4);
    prior(0, 2) = prior(2, 0) = 1;
    prior(1, 3) = prior(3, 1) = 1;

    const auto path = dir.file("edges.tsv");
    write_edge_list(scores, prior, path);
    CHECK(slurp(path) ==
          "node_i\tnode_j\tscore\tin_prior\n"
          "1\t3\t2.000000\t1\n"
          "2\t3\t2.000000\t0\n"
          "1\t2\t1.250000\t0\n"
          "1\t4\t0.500000\t0\n"
          "2\t4\t0.123457\t1\n"
          "3\t4\t0.000000\t0\n");

    EdgeScoreMatrix<double> directed;
    directed.z = scores.z;
    CHECK_THROWS_AS(write_edge_list(directed, prior, path), std::invalid_argument);
    Eigen::MatrixXi small = Eigen::MatrixXi::Zero(3, 3);
    CHECK_THROWS_AS(write_edge_list(scores, small, path), std::invalid_argument);
}

TEST_CASE("roc and auc writers") {
    TempDir dir;
    RocCurve<double> curve;
    curve.fpr = {0.0, 0.5, 1.0};
    curve.tpr = {0.0, 1.0, 1.0};
    curve.auc = 0.75;
    const auto roc_path = dir.file("roc.csv");
    write_roc_csv(curve, roc_path);
    CHECK(slurp(roc_path) == "fpr,tpr\n0,0\n0.5,1\n1,1\n");

    const auto auc_path = dir.file("auc.csv");
    write_auc_csv(curve.auc, auc_path);
    CHECK(slurp(auc_path) == "auc\n0.75\n");
}

TEST_CASE("atomic writes leave no residue") {
    TempDir dir;
    const auto path = dir.file("out.txt");
    write_text_atomic(path, "hello\n");
    CHECK(slurp(path) == "hello\n");
    CHECK(!fs::exists(path + ".tmp"));

    // overwrite replaces the content wholesale
    write_text_atomic(path, "x");
    CHECK(slurp(path) == "x");

    // unwritable destination: nothing is created
    const auto bad = (dir.path / "no_such_dir" / "f.txt").string();
    CHECK_THROWS_AS(write_text_atomic(bad, "y"), std::runtime_error);
    CHECK(!fs::exists(bad));
    CHECK(!fs::exists(bad + ".tmp"));
}

TEST_CASE("data writer validates the name count") {
    TempDir dir;
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(write_data_csv(dir.file("x.csv"), values, {"only_one"}),
                    std::invalid_argument);
}
