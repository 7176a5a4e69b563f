#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "udbm/oracle.hpp"

using namespace udbm;

namespace {

DbmModel zero_111() {
    DbmModel m;
    m.weights = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
    return m;
}

DbmModel random_model(std::vector<Eigen::Index> sizes, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    return random_dbm(sizes, rng, scale);
}

}  // namespace

TEST_CASE("partition function on uniform models") {
    CHECK(oracle::partition_function(zero_111()) == doctest::Approx(std::log(8.0)).epsilon(1e-12));
    DbmModel big;
    big.weights = {Eigen::MatrixXd::Zero(7, 7), Eigen::MatrixXd::Zero(7, 1)};
    CHECK(oracle::partition_function(big) ==
          doctest::Approx(15.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("partition function of the 1-1-1 model with W1=1, W2=1") {
    // hand enumeration of the 8 states (v,h1,h2), E = -v*h1 - h1*h2:
    //   energy 0:  the four h1=0 states plus (0,1,0)        -> 5 states
    //   energy -1: (1,1,0) and (0,1,1)                      -> 2 states
    //   energy -2: (1,1,1)                                  -> 1 state
    // so Z = 5 + 2e + e^2
    DbmModel m;
    m.weights = {Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, 1.0)};
    const double z = 5.0 + 2.0 * std::exp(1.0) + std::exp(2.0);
    CHECK(oracle::partition_function(m) == doctest::Approx(std::log(z)).epsilon(1e-12));
}

TEST_CASE("enumeration guard") {
    DbmModel huge;
    huge.weights = {Eigen::MatrixXd::Zero(20, 20)};
    CHECK_THROWS_AS(oracle::partition_function(huge), DataError);
}

TEST_CASE("exact_loglik on uniform model is -n0 log 2 per row") {
    DbmModel m;
    m.weights = {Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(2, 2)};
    Eigen::MatrixXd data(2, 3);
    data << 1, 0, 1, 0, 0, 0;
    const auto rows = oracle::exact_loglik_rows(m, data);
    for (double ll : rows) CHECK(ll == doctest::Approx(-3.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("log-probabilities are never positive") {
    const DbmModel m = random_model({3, 2, 2}, 1);
    Eigen::MatrixXd data(1, 3);
    data << 1, 1, 0;
    CHECK(oracle::exact_loglik(m, data) <= 0.0);
    CHECK_THROWS_AS(oracle::exact_loglik(m, Eigen::MatrixXd(0, 3)), DataError);
}

TEST_CASE("loglik agrees with the visible marginal path") {
    for (int trial = 0; trial < 20; ++trial) {
        const DbmModel m = random_model({3, 2, 2}, 600 + trial);
        const auto marginal = oracle::exact_visible_marginal(m);
        double total = 0.0;
        for (double p : marginal) total += p;
        CHECK(std::abs(total - 1.0) < 1e-10);
        Eigen::MatrixXd data(1, 3);
        for (int idx = 0; idx < 8; ++idx) {
            for (int i = 0; i < 3; ++i) data(0, i) = (idx >> i) & 1;
            const double direct = oracle::exact_loglik(m, data);
            CHECK(std::abs(std::exp(direct) - marginal[idx]) < 1e-10);
        }
    }
}

TEST_CASE("uniform model has a uniform visible marginal") {
    DbmModel m;
    m.weights = {Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(2, 2)};
    for (double p : oracle::exact_visible_marginal(m))
        CHECK(p == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("scaling weights by 50 keeps log Z finite") {
    DbmModel m = random_model({3, 2, 2}, 5);
    for (auto& w : m.weights) w *= 50.0;
    CHECK(std::isfinite(oracle::partition_function(m)));
    DbmModel big = random_model({7, 7, 1}, 6);
    for (auto& w : big.weights) w *= 50.0;
    CHECK(std::isfinite(oracle::partition_function(big)));
}

TEST_CASE("zero-weight model with symmetric data has zero W2 gradient") {
    DbmModel m;
    m.weights = {Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1)};
    Eigen::MatrixXd data(4, 2);
    data << 0, 0, 0, 1, 1, 0, 1, 1;
    const auto grad = oracle::exact_gradient(m, data);
    CHECK(grad[1].cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact_gradient matches central finite differences") {
    Rng bits(9);
    for (int trial = 0; trial < 5; ++trial) {
        DbmModel m = random_model({3, 2, 2}, 700 + trial);
        Eigen::MatrixXd data(3, 3);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) data(r, c) = bits.bernoulli(0.5);
        const auto grad = oracle::exact_gradient(m, data);
        const double h = 1e-5;
        for (std::size_t l = 0; l < m.weights.size(); ++l)
            for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i)
                for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j) {
                    const double keep = m.weights[l](i, j);
                    m.weights[l](i, j) = keep + h;
                    const double up = oracle::exact_loglik(m, data);
                    m.weights[l](i, j) = keep - h;
                    const double down = oracle::exact_loglik(m, data);
                    m.weights[l](i, j) = keep;
                    CHECK(std::abs(grad[l](i, j) - (up - down) / (2 * h)) < 1e-6);
                }
    }
}

TEST_CASE("gradient vanishes at a maximum reached by exact ascent") {
    DbmModel m = random_model({2, 2, 1}, 11);
    Eigen::MatrixXd data(2, 2);
    data << 1, 1, 0, 0;
    for (int it = 0; it < 300000; ++it) {
        const auto grad = oracle::exact_gradient(m, data);
        double biggest = 0.0;
        for (std::size_t l = 0; l < grad.size(); ++l) {
            m.weights[l] += grad[l];
            biggest = std::max(biggest, grad[l].cwiseAbs().maxCoeff());
        }
        if (biggest < 5e-5) break;
    }
    const auto grad = oracle::exact_gradient(m, data);
    for (const auto& g : grad) CHECK(g.cwiseAbs().maxCoeff() < 1e-4);
}
