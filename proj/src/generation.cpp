#include "udbm/generation.hpp"

#include <cmath>
#include <ostream>

namespace udbm {

Eigen::VectorXd top_down_potential(const DbmModel& model, const Eigen::VectorXd& h_top) {
    const auto sizes = model.layer_sizes();
    if (h_top.size() != sizes.back())
        throw DimensionError("top_down_potential: h_top has wrong length");
    Eigen::VectorXd p = h_top;
    for (std::size_t l = model.weights.size(); l-- > 0;) {
        Eigen::VectorXd input = model.weights[l] * p;
        if (model.has_biases()) input += model.biases[l];
        p = input.unaryExpr([](double x) { return sigmoid(x); });
    }
    return p;
}

Eigen::MatrixXi sample_binary(const Eigen::VectorXd& potential, long n, Rng& rng) {
    if (n < 1) throw DataError("sample_binary: n must be >= 1");
    for (Eigen::Index i = 0; i < potential.size(); ++i)
        if (!(potential(i) >= 0.0 && potential(i) <= 1.0))
            throw DataError("sample_binary: potential entry outside [0,1]");
    Eigen::MatrixXi out(n, potential.size());
    for (long k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < potential.size(); ++i)
            out(k, i) = rng.bernoulli(potential(i));
    return out;
}

PatternTable usage_heatmap(const DbmModel& model, long n, Rng& rng) {
    const auto sizes = model.layer_sizes();
    if (sizes.front() != 7)
        throw DataError("usage_heatmap: model visible layer must have 7 units");
    if (sizes.back() < 1) throw DataError("usage_heatmap: empty top layer");

    PatternTable table;
    table.sample_count = n;
    for (const char* label : {"on", "off"}) {
        const double bit = (std::string(label) == "on") ? 1.0 : 0.0;
        const Eigen::VectorXd h_top = Eigen::VectorXd::Constant(sizes.back(), bit);
        const Eigen::VectorXd potential = top_down_potential(model, h_top);
        const Eigen::MatrixXi samples = sample_binary(potential, n, rng);
        PatternTable::Row row;
        row.label = label;
        for (int j = 0; j < 7; ++j)
            row.freq[j] = samples.col(j).cast<double>().mean();
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_pattern_csv(const PatternTable& table, std::ostream& out) {
    out << "condition,mon,tue,wed,thu,fri,sat,sun,n_samples\n";
    char buf[32];
    for (const auto& row : table.rows) {
        out << row.label;
        for (double f : row.freq) {
            std::snprintf(buf, sizeof(buf), "%.6f", f);
            out << ',' << buf;
        }
        out << ',' << table.sample_count << '\n';
    }
}

void write_pattern_pgm(const PatternTable& table, std::ostream& out, int cell_size) {
    if (cell_size < 1) throw DataError("write_pattern_pgm: cell_size must be >= 1");
    const int width = 7 * cell_size;
    const int height = static_cast<int>(table.rows.size()) * cell_size;
    out << "P2\n" << width << ' ' << height << "\n255\n";
    for (const auto& row : table.rows) {
        std::array<int, 7> gray;
        for (int j = 0; j < 7; ++j)
            gray[j] = 255 - static_cast<int>(std::lround(row.freq[j] * 255.0));
        for (int y = 0; y < cell_size; ++y) {
            for (int x = 0; x < width; ++x) {
                if (x) out << ' ';
                out << gray[x / cell_size];
            }
            out << '\n';
        }
    }
}

}  // namespace udbm
