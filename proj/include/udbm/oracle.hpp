#pragma once

#include <vector>

#include <Eigen/Core>

#include "udbm/dbm.hpp"

namespace udbm::oracle {

// Exact brute-force ground truth for small models. Everything here is naive
// nested loops over unit states, independent of the Eigen code paths it checks.

inline constexpr int kMaxTotalUnits = 24;
inline constexpr int kMaxVisibleUnits = 20;

// log Z, enumerated over every joint configuration with log-sum-exp stabilization
double partition_function(const DbmModel& model);

// log p(v) per data row
std::vector<double> exact_loglik_rows(const DbmModel& model, const Eigen::MatrixXd& data);

// mean of exact_loglik_rows
double exact_loglik(const DbmModel& model, const Eigen::MatrixXd& data);

// d exact_loglik / d W^l via exact posterior and model expectations
std::vector<Eigen::MatrixXd> exact_gradient(const DbmModel& model, const Eigen::MatrixXd& data);

// p(v) for every visible configuration; index k encodes v_i = (k >> i) & 1
std::vector<double> exact_visible_marginal(const DbmModel& model);

}  // namespace udbm::oracle
