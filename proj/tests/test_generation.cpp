#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "udbm/generation.hpp"

using namespace udbm;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

DbmModel zero_model() {
    DbmModel m;
    m.weights = {Eigen::MatrixXd::Zero(7, 7), Eigen::MatrixXd::Zero(7, 1)};
    return m;
}

DbmModel random_771(std::uint64_t seed) {
    Rng rng(seed);
    return random_dbm({7, 7, 1}, rng, 1.0);
}

}  // namespace

TEST_CASE("top_down_potential basics") {
    const DbmModel zero = zero_model();
    const Eigen::VectorXd on = Eigen::VectorXd::Ones(1);
    CHECK(top_down_potential(zero, on).isApproxToConstant(0.5));

    DbmModel tiny;
    tiny.weights = {Eigen::MatrixXd::Constant(1, 1, 4.0), Eigen::MatrixXd::Constant(1, 1, 4.0)};
    const double h1 = sig(4.0);
    CHECK(top_down_potential(tiny, on)(0) == doctest::Approx(sig(4.0 * h1)).epsilon(1e-12));

    CHECK_THROWS_AS(top_down_potential(zero, Eigen::VectorXd::Ones(2)), DimensionError);
}

TEST_CASE("top_down_potential matches a scalar-loop re-implementation") {
    for (int trial = 0; trial < 10; ++trial) {
        const DbmModel m = random_771(500 + trial);
        const Eigen::VectorXd h_top = Eigen::VectorXd::Ones(1);
        // layer by layer with explicit loops
        std::vector<double> p = {1.0};
        for (int l = 1; l >= 0; --l) {
            std::vector<double> next(m.weights[l].rows());
            for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i) {
                double act = 0.0;
                for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j)
                    act += m.weights[l](i, j) * p[j];
                next[i] = sig(act);
            }
            p = next;
        }
        const Eigen::VectorXd got = top_down_potential(m, h_top);
        for (int i = 0; i < 7; ++i) CHECK(got(i) == doctest::Approx(p[i]).epsilon(1e-12));
        CHECK(got.minCoeff() > 0.0);
        CHECK(got.maxCoeff() < 1.0);
    }
}

TEST_CASE("sample_binary edge potentials") {
    Rng rng(1);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
    CHECK(sample_binary(ones, 50, rng).minCoeff() == 1);
    const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(4);
    CHECK(sample_binary(zeros, 50, rng).maxCoeff() == 0);
    CHECK_THROWS_AS(sample_binary(Eigen::VectorXd::Constant(2, 1.5), 1, rng), DataError);
    CHECK_THROWS_AS(sample_binary(ones, 0, rng), DataError);
}

TEST_CASE("sample_binary hits the binomial interval at p=0.7") {
    Rng rng(2);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(3, 0.7);
    const Eigen::MatrixXi s = sample_binary(p, 10000, rng);
    for (int j = 0; j < 3; ++j) {
        const double mean = s.col(j).cast<double>().mean();
        CHECK(mean > 0.68);
        CHECK(mean < 0.72);
    }
}

TEST_CASE("usage_heatmap on the zero model gives two flat rows") {
    Rng rng(3);
    const PatternTable t = usage_heatmap(zero_model(), 10000, rng);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].label == "on");
    CHECK(t.rows[1].label == "off");
    for (const auto& row : t.rows)
        for (double f : row.freq) {
            CHECK(f > 0.47);
            CHECK(f < 0.53);
        }
}

TEST_CASE("usage_heatmap is bit reproducible for a fixed seed") {
    const DbmModel m = random_771(9);
    Rng a(77), b(77);
    const PatternTable ta = usage_heatmap(m, 2000, a);
    const PatternTable tb = usage_heatmap(m, 2000, b);
    for (int r = 0; r < 2; ++r)
        for (int j = 0; j < 7; ++j) CHECK(ta.rows[r].freq[j] == tb.rows[r].freq[j]);
}

TEST_CASE("frequencies are exact column means of the drawn samples") {
    const DbmModel m = random_771(10);
    Rng rng(5), replay(5);
    const PatternTable t = usage_heatmap(m, 500, rng);
    for (const char* label : {"on", "off"}) {
        const double bit = std::string(label) == "on" ? 1.0 : 0.0;
        const Eigen::VectorXd pot = top_down_potential(m, Eigen::VectorXd::Constant(1, bit));
        const Eigen::MatrixXi s = sample_binary(pot, 500, replay);
        const auto& row = t.rows[bit == 1.0 ? 0 : 1];
        for (int j = 0; j < 7; ++j)
            CHECK(row.freq[j] == s.col(j).cast<double>().mean());
    }
}

TEST_CASE("raising a positively used W1 column never lowers fed potentials") {
    DbmModel m = zero_model();
    m.weights[1].col(0).setConstant(2.0);  // h1 potential entries > 0
    const Eigen::VectorXd on = Eigen::VectorXd::Ones(1);
    const Eigen::VectorXd before = top_down_potential(m, on);
    m.weights[0].col(3).setConstant(1.0);
    Eigen::VectorXd after = top_down_potential(m, on);
    for (int i = 0; i < 7; ++i) CHECK(after(i) >= before(i));
    m.weights[0].col(3).setConstant(2.0);
    const Eigen::VectorXd more = top_down_potential(m, on);
    for (int i = 0; i < 7; ++i) CHECK(more(i) >= after(i));
}

TEST_CASE("pattern CSV and PGM formats") {
    PatternTable t;
    t.sample_count = 4;
    t.rows = {{"on", {1, 0.5, 0, 0.25, 0.75, 1, 0}}, {"off", {0, 0, 0, 0, 0, 0, 1}}};
    std::ostringstream csv;
    write_pattern_csv(t, csv);
    CHECK(csv.str() ==
          "condition,mon,tue,wed,thu,fri,sat,sun,n_samples\n"
          "on,1.000000,0.500000,0.000000,0.250000,0.750000,1.000000,0.000000,4\n"
          "off,0.000000,0.000000,0.000000,0.000000,0.000000,0.000000,1.000000,4\n");

    std::ostringstream pgm;
    write_pattern_pgm(t, pgm, 1);
    CHECK(pgm.str() ==
          "P2\n7 2\n255\n"
          "0 127 255 191 64 0 255\n"
          "255 255 255 255 255 255 0\n");
}
