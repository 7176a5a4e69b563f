#include "udbm/oracle.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace udbm::oracle {

namespace {

struct Layout {
    std::vector<int> sizes;  // per layer, visible first
    int total = 0;
    int n_visible = 0;
    int n_hidden_bits = 0;
};

Layout checked_layout(const DbmModel& model) {
    model.validate();
    Layout lay;
    for (auto n : model.layer_sizes()) {
        lay.sizes.push_back(static_cast<int>(n));
        lay.total += static_cast<int>(n);
    }
    lay.n_visible = lay.sizes[0];
    lay.n_hidden_bits = lay.total - lay.n_visible;
    if (lay.total > kMaxTotalUnits)
        throw DataError("model too large for enumeration (" + std::to_string(lay.total) +
                        " units, limit " + std::to_string(kMaxTotalUnits) + ")");
    return lay;
}

// decode mask into per-layer bit vectors; bit order is layer by layer, unit 0 first
void decode(const Layout& lay, std::uint32_t mask, std::vector<std::vector<int>>& bits) {
    bits.resize(lay.sizes.size());
    for (std::size_t l = 0; l < lay.sizes.size(); ++l) {
        bits[l].resize(lay.sizes[l]);
        for (int i = 0; i < lay.sizes[l]; ++i) {
            bits[l][i] = mask & 1u;
            mask >>= 1;
        }
    }
}

double state_energy(const DbmModel& model, const std::vector<std::vector<int>>& bits) {
    double e = 0.0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        for (int i = 0; i < w.rows(); ++i) {
            if (!bits[l][i]) continue;
            for (int j = 0; j < w.cols(); ++j)
                if (bits[l + 1][j]) e -= w(i, j);
        }
    }
    if (model.has_biases())
        for (std::size_t l = 0; l < bits.size(); ++l)
            for (std::size_t i = 0; i < bits[l].size(); ++i)
                if (bits[l][i]) e -= model.biases[l](static_cast<int>(i));
    return e;
}

// log sum over masks [0, count) of exp(-E), with v bits optionally fixed.
// Two passes: find the max, then accumulate in extended precision.
double logsumexp_states(const DbmModel& model, const Layout& lay, bool clamp_visible,
                        const std::vector<int>& v_fixed) {
    const int free_bits = clamp_visible ? lay.n_hidden_bits : lay.total;
    const std::uint64_t count = 1ull << free_bits;
    std::vector<std::vector<int>> bits;
    auto fill = [&](std::uint64_t mask) {
        if (clamp_visible) {
            decode(lay, static_cast<std::uint32_t>(mask) << lay.n_visible, bits);
            bits[0] = v_fixed;
        } else {
            decode(lay, static_cast<std::uint32_t>(mask), bits);
        }
    };
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        fill(mask);
        best = std::max(best, -state_energy(model, bits));
    }
    long double acc = 0.0L;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        fill(mask);
        acc += expl(static_cast<long double>(-state_energy(model, bits)) - best);
    }
    return best + static_cast<double>(logl(acc));
}

std::vector<int> row_bits(const Eigen::MatrixXd& data, Eigen::Index r, int n_visible) {
    std::vector<int> v(n_visible);
    for (int i = 0; i < n_visible; ++i) v[i] = data(r, i) != 0.0 ? 1 : 0;
    return v;
}

}  // namespace

double partition_function(const DbmModel& model) {
    const Layout lay = checked_layout(model);
    return logsumexp_states(model, lay, false, {});
}

std::vector<double> exact_loglik_rows(const DbmModel& model, const Eigen::MatrixXd& data) {
    const Layout lay = checked_layout(model);
    if (data.rows() == 0) throw DataError("exact_loglik: empty dataset");
    if (data.cols() != lay.n_visible)
        throw DimensionError("exact_loglik: data column count does not match visible layer");
    const double log_z = logsumexp_states(model, lay, false, {});
    std::vector<double> out;
    out.reserve(data.rows());
    for (Eigen::Index r = 0; r < data.rows(); ++r)
        out.push_back(logsumexp_states(model, lay, true, row_bits(data, r, lay.n_visible)) - log_z);
    return out;
}

double exact_loglik(const DbmModel& model, const Eigen::MatrixXd& data) {
    const auto rows = exact_loglik_rows(model, data);
    long double acc = 0.0L;
    for (double x : rows) acc += x;
    return static_cast<double>(acc / static_cast<long double>(rows.size()));
}

std::vector<Eigen::MatrixXd> exact_gradient(const DbmModel& model, const Eigen::MatrixXd& data) {
    const Layout lay = checked_layout(model);
    if (data.rows() == 0) throw DataError("exact_gradient: empty dataset");
    if (data.cols() != lay.n_visible)
        throw DimensionError("exact_gradient: data column count does not match visible layer");

    const std::size_t n_pairs = model.weights.size();
    std::vector<std::vector<std::vector<long double>>> model_corr(n_pairs), data_corr(n_pairs);
    for (std::size_t l = 0; l < n_pairs; ++l) {
        model_corr[l].assign(lay.sizes[l], std::vector<long double>(lay.sizes[l + 1], 0.0L));
        data_corr[l].assign(lay.sizes[l], std::vector<long double>(lay.sizes[l + 1], 0.0L));
    }

    // model expectation over the full joint
    {
        const double log_z = logsumexp_states(model, lay, false, {});
        const std::uint64_t count = 1ull << lay.total;
        std::vector<std::vector<int>> bits;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            decode(lay, static_cast<std::uint32_t>(mask), bits);
            const long double p = expl(static_cast<long double>(-state_energy(model, bits)) - log_z);
            for (std::size_t l = 0; l < n_pairs; ++l)
                for (int i = 0; i < lay.sizes[l]; ++i) {
                    if (!bits[l][i]) continue;
                    for (int j = 0; j < lay.sizes[l + 1]; ++j)
                        if (bits[l + 1][j]) model_corr[l][i][j] += p;
                }
        }
    }

    // posterior expectation per data row
    const std::uint64_t h_count = 1ull << lay.n_hidden_bits;
    std::vector<std::vector<int>> bits;
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        const std::vector<int> v = row_bits(data, r, lay.n_visible);
        const double log_pv =
            logsumexp_states(model, lay, true, v);  // log of the unnormalized row mass
        for (std::uint64_t mask = 0; mask < h_count; ++mask) {
            decode(lay, static_cast<std::uint32_t>(mask) << lay.n_visible, bits);
            bits[0] = v;
            const long double p =
                expl(static_cast<long double>(-state_energy(model, bits)) - log_pv);
            for (std::size_t l = 0; l < n_pairs; ++l)
                for (int i = 0; i < lay.sizes[l]; ++i) {
                    if (!bits[l][i]) continue;
                    for (int j = 0; j < lay.sizes[l + 1]; ++j)
                        if (bits[l + 1][j]) data_corr[l][i][j] += p;
                }
        }
    }

    std::vector<Eigen::MatrixXd> grad;
    const long double n_rows = static_cast<long double>(data.rows());
    for (std::size_t l = 0; l < n_pairs; ++l) {
        Eigen::MatrixXd g(lay.sizes[l], lay.sizes[l + 1]);
        for (int i = 0; i < lay.sizes[l]; ++i)
            for (int j = 0; j < lay.sizes[l + 1]; ++j)
                g(i, j) = static_cast<double>(data_corr[l][i][j] / n_rows - model_corr[l][i][j]);
        grad.push_back(std::move(g));
    }
    return grad;
}

std::vector<double> exact_visible_marginal(const DbmModel& model) {
    const Layout lay = checked_layout(model);
    if (lay.n_visible > kMaxVisibleUnits)
        throw DataError("visible layer too large for marginal enumeration");
    const double log_z = logsumexp_states(model, lay, false, {});
    const std::uint64_t v_count = 1ull << lay.n_visible;
    std::vector<double> out;
    out.reserve(v_count);
    std::vector<int> v(lay.n_visible);
    for (std::uint64_t k = 0; k < v_count; ++k) {
        for (int i = 0; i < lay.n_visible; ++i) v[i] = (k >> i) & 1;
        out.push_back(std::exp(logsumexp_states(model, lay, true, v) - log_z));
    }
    return out;
}

}  // namespace udbm::oracle
