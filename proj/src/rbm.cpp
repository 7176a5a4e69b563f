#include "udbm/rbm.hpp"

#include <cmath>

namespace udbm {

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw DataError("learning_rate must be > 0");
    if (epochs < 1) throw DataError("epochs must be >= 1");
    if (batch_size < 1) throw DataError("batch_size must be >= 1");
    if (gibbs_steps < 1) throw DataError("gibbs_steps must be >= 1");
}

RbmModel make_rbm(Eigen::Index n_visible, Eigen::Index n_hidden) {
    RbmModel m;
    m.weights = Eigen::MatrixXd::Zero(n_visible, n_hidden);
    m.visible_bias = Eigen::VectorXd::Zero(n_visible);
    m.hidden_bias = Eigen::VectorXd::Zero(n_hidden);
    return m;
}

RbmModel random_rbm(Eigen::Index n_visible, Eigen::Index n_hidden, Rng& rng, double scale) {
    RbmModel m = make_rbm(n_visible, n_hidden);
    for (Eigen::Index i = 0; i < n_visible; ++i)
        for (Eigen::Index j = 0; j < n_hidden; ++j) m.weights(i, j) = rng.uniform(-scale, scale);
    return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd hidden_potential(const RbmModel& model, const Eigen::VectorXd& v) {
    if (v.size() != model.n_visible())
        throw DimensionError("hidden_potential: visible vector has wrong length");
    Eigen::VectorXd act = model.input_scale * (model.weights.transpose() * v) + model.hidden_bias;
    return act.unaryExpr([](double x) { return sigmoid(x); });
}

Eigen::VectorXd visible_potential(const RbmModel& model, const Eigen::VectorXd& h) {
    if (h.size() != model.n_hidden())
        throw DimensionError("visible_potential: hidden vector has wrong length");
    Eigen::VectorXd act = model.output_scale * (model.weights * h) + model.visible_bias;
    return act.unaryExpr([](double x) { return sigmoid(x); });
}

namespace {

Eigen::VectorXd sample_bernoulli(const Eigen::VectorXd& p, Rng& rng) {
    Eigen::VectorXd out(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) out(i) = rng.bernoulli(p(i));
    return out;
}

}  // namespace

RbmModel train_rbm(const Eigen::MatrixXd& data, const TrainConfig& config,
                   const RbmModel& model_init) {
    config.validate();
    if (data.rows() == 0) throw DataError("train_rbm: empty dataset");
    if (data.cols() != model_init.n_visible())
        throw DimensionError("train_rbm: data column count does not match n_visible");

    RbmModel model = model_init;
    Rng rng(config.seed);
    const Eigen::Index n_rows = data.rows();
    const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n_rows);

    // persistent chains, one per minibatch slot, started from the first minibatch
    std::vector<Eigen::VectorXd> chains(batch);
    for (Eigen::Index c = 0; c < batch; ++c) chains[c] = data.row(c % n_rows).transpose();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (Eigen::Index start = 0; start < n_rows; start += batch) {
            const Eigen::Index m = std::min(batch, n_rows - start);

            Eigen::MatrixXd data_corr =
                Eigen::MatrixXd::Zero(model.n_visible(), model.n_hidden());
            Eigen::VectorXd data_v = Eigen::VectorXd::Zero(model.n_visible());
            Eigen::VectorXd data_h = Eigen::VectorXd::Zero(model.n_hidden());
            for (Eigen::Index r = 0; r < m; ++r) {
                const Eigen::VectorXd v = data.row(start + r).transpose();
                const Eigen::VectorXd h = hidden_potential(model, v);
                data_corr += v * h.transpose();
                data_v += v;
                data_h += h;
            }

            Eigen::MatrixXd model_corr =
                Eigen::MatrixXd::Zero(model.n_visible(), model.n_hidden());
            Eigen::VectorXd model_v = Eigen::VectorXd::Zero(model.n_visible());
            Eigen::VectorXd model_h = Eigen::VectorXd::Zero(model.n_hidden());
            for (Eigen::Index c = 0; c < m; ++c) {
                for (int k = 0; k < config.gibbs_steps; ++k) {
                    const Eigen::VectorXd h = sample_bernoulli(hidden_potential(model, chains[c]), rng);
                    chains[c] = sample_bernoulli(visible_potential(model, h), rng);
                }
                const Eigen::VectorXd h = hidden_potential(model, chains[c]);
                model_corr += chains[c] * h.transpose();
                model_v += chains[c];
                model_h += h;
            }

            const double inv_m = 1.0 / static_cast<double>(m);
            model.weights +=
                correlation_update(config.learning_rate, data_corr * inv_m, model_corr * inv_m);
            if (config.use_biases) {
                model.visible_bias += config.learning_rate * inv_m * (data_v - model_v);
                model.hidden_bias += config.learning_rate * inv_m * (data_h - model_h);
            }
        }
    }
    return model;
}

std::vector<RbmModel> pretrain_stack(const std::vector<Eigen::Index>& layer_dims,
                                     const Eigen::MatrixXd& data, const TrainConfig& config) {
    if (layer_dims.size() < 2) throw DataError("pretrain_stack: need at least 2 layer dims");
    for (auto d : layer_dims)
        if (d < 1) throw DataError("pretrain_stack: layer dims must be >= 1");
    if (data.cols() != layer_dims[0])
        throw DimensionError("pretrain_stack: data column count does not match layer_dims[0]");

    const std::size_t n_blocks = layer_dims.size() - 1;
    std::vector<RbmModel> stack;
    stack.reserve(n_blocks);
    Eigen::MatrixXd layer_data = data;

    for (std::size_t l = 0; l < n_blocks; ++l) {
        Rng init_rng(Rng::derive_seed(config.seed, l));
        RbmModel init = random_rbm(layer_dims[l], layer_dims[l + 1], init_rng);
        if (n_blocks > 1) {
            init.input_scale = (l == 0 || l + 1 < n_blocks) ? 2.0 : 1.0;
            init.output_scale = (l + 1 == n_blocks || l > 0) ? 2.0 : 1.0;
        }
        TrainConfig block_config = config;
        block_config.seed = Rng::derive_seed(config.seed, 1000 + l);
        stack.push_back(train_rbm(layer_data, block_config, init));

        if (l + 1 < n_blocks) {
            Eigen::MatrixXd next(layer_data.rows(), layer_dims[l + 1]);
            for (Eigen::Index r = 0; r < layer_data.rows(); ++r)
                next.row(r) = hidden_potential(stack.back(), layer_data.row(r).transpose()).transpose();
            layer_data = std::move(next);
        }
    }
    return stack;
}

}  // namespace udbm
