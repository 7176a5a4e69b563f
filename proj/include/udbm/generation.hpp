#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "udbm/dbm.hpp"
#include "udbm/rng.hpp"

namespace udbm {

// Per-weekday activation frequencies conditioned on the top hidden unit.
struct PatternTable {
    struct Row {
        std::string label;  // "on" / "off"
        std::array<double, 7> freq{};
    };
    std::vector<Row> rows;
    long sample_count = 0;
};

// Deterministic top-down propagation: p^{L-1} = sigma(W^L h_top), then
// p^{l-1} = sigma(W^l p^l) down to the visible layer. Potentials are used as
// real-valued inputs, never sampled.
Eigen::VectorXd top_down_potential(const DbmModel& model, const Eigen::VectorXd& h_top);

// n independent Bernoulli draws per entry: bit = 1 iff potential > u.
Eigen::MatrixXi sample_binary(const Eigen::VectorXd& potential, long n, Rng& rng);

// Clamps the top layer all-on then all-off, samples n visible vectors per
// condition and records per-day activation frequencies.
PatternTable usage_heatmap(const DbmModel& model, long n, Rng& rng);

// header `condition,mon,...,sun,n_samples`, rows "on" then "off"
void write_pattern_csv(const PatternTable& table, std::ostream& out);

// plain-text PGM, one cell block per table entry, darker = higher frequency
void write_pattern_pgm(const PatternTable& table, std::ostream& out, int cell_size = 32);

}  // namespace udbm
