#include "udbm/dbm.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace udbm {

std::vector<Eigen::Index> DbmModel::layer_sizes() const {
    std::vector<Eigen::Index> sizes;
    if (weights.empty()) return sizes;
    sizes.push_back(weights[0].rows());
    for (const auto& w : weights) sizes.push_back(w.cols());
    return sizes;
}

void DbmModel::validate() const {
    if (weights.empty()) throw DataError("model has no weight matrices");
    for (std::size_t l = 0; l + 1 < weights.size(); ++l)
        if (weights[l].cols() != weights[l + 1].rows())
            throw DataError("weight matrix shapes do not chain at layer " + std::to_string(l + 1));
    for (const auto& w : weights)
        if (!w.allFinite()) throw DataError("non-finite weight entry");
    if (!biases.empty()) {
        const auto sizes = layer_sizes();
        if (biases.size() != sizes.size()) throw DataError("bias vector count mismatch");
        for (std::size_t l = 0; l < biases.size(); ++l) {
            if (biases[l].size() != sizes[l])
                throw DataError("bias length mismatch at layer " + std::to_string(l));
            if (!biases[l].allFinite()) throw DataError("non-finite bias entry");
        }
    }
}

namespace {

void check_state_shapes(const DbmModel& model, const std::vector<Eigen::VectorXd>& state) {
    const auto sizes = model.layer_sizes();
    if (state.size() != sizes.size())
        throw DimensionError("state has wrong number of layers");
    for (std::size_t l = 0; l < sizes.size(); ++l)
        if (state[l].size() != sizes[l])
            throw DimensionError("state layer " + std::to_string(l) + " has wrong length");
}

Eigen::VectorXd sigmoid_vec(Eigen::VectorXd x) {
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

double energy(const DbmModel& model, const std::vector<Eigen::VectorXd>& state) {
    check_state_shapes(model, state);
    double e = 0.0;
    for (std::size_t l = 0; l < model.weights.size(); ++l)
        e -= state[l].dot(model.weights[l] * state[l + 1]);
    if (model.has_biases())
        for (std::size_t l = 0; l < state.size(); ++l) e -= model.biases[l].dot(state[l]);
    return e;
}

double energy(const DbmModel& model, const Eigen::VectorXd& v, const Eigen::VectorXd& h1,
              const Eigen::VectorXd& h2) {
    return energy(model, std::vector<Eigen::VectorXd>{v, h1, h2});
}

Eigen::VectorXd conditional_layer(const DbmModel& model, std::size_t layer,
                                  const std::vector<Eigen::VectorXd>& state) {
    check_state_shapes(model, state);
    const auto sizes = model.layer_sizes();
    Eigen::VectorXd input = Eigen::VectorXd::Zero(sizes[layer]);
    if (layer > 0) input += model.weights[layer - 1].transpose() * state[layer - 1];
    if (layer < model.weights.size()) input += model.weights[layer] * state[layer + 1];
    if (model.has_biases()) input += model.biases[layer];
    return sigmoid_vec(std::move(input));
}

Eigen::VectorXd conditional_h1(const DbmModel& model, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& h2) {
    if (model.n_layers() != 2) throw DimensionError("conditional_h1 requires a 2-hidden-layer model");
    if (v.size() != model.weights[0].rows() || h2.size() != model.weights[1].cols())
        throw DimensionError("conditional_h1: shape mismatch");
    Eigen::VectorXd input = model.weights[0].transpose() * v + model.weights[1] * h2;
    if (model.has_biases()) input += model.biases[1];
    return sigmoid_vec(std::move(input));
}

Eigen::VectorXd conditional_h2(const DbmModel& model, const Eigen::VectorXd& h1) {
    if (model.n_layers() != 2) throw DimensionError("conditional_h2 requires a 2-hidden-layer model");
    if (h1.size() != model.weights[1].rows()) throw DimensionError("conditional_h2: shape mismatch");
    Eigen::VectorXd input = model.weights[1].transpose() * h1;
    if (model.has_biases()) input += model.biases[2];
    return sigmoid_vec(std::move(input));
}

Eigen::VectorXd conditional_v(const DbmModel& model, const Eigen::VectorXd& h1) {
    if (h1.size() != model.weights[0].cols()) throw DimensionError("conditional_v: shape mismatch");
    Eigen::VectorXd input = model.weights[0] * h1;
    if (model.has_biases()) input += model.biases[0];
    return sigmoid_vec(std::move(input));
}

namespace {

// One mean-field update of hidden layer l (1-based over hidden layers).
Eigen::VectorXd mf_update(const DbmModel& model, const Eigen::VectorXd& v,
                          const std::vector<Eigen::VectorXd>& mu, std::size_t l) {
    const Eigen::VectorXd& below = (l == 0) ? v : mu[l - 1];
    Eigen::VectorXd input = model.weights[l].transpose() * below;
    if (l + 1 < model.n_layers()) input += model.weights[l + 1] * mu[l + 1];
    if (model.has_biases()) input += model.biases[l + 1];
    return sigmoid_vec(std::move(input));
}

}  // namespace

MeanFieldState mean_field_infer(const DbmModel& model, const Eigen::VectorXd& v,
                                double tolerance, int max_iters) {
    if (v.size() != model.weights[0].rows())
        throw DimensionError("mean_field_infer: visible vector has wrong length");
    if (!(tolerance > 0)) throw DataError("mean_field_infer: tolerance must be > 0");

    const std::size_t L = model.n_layers();
    MeanFieldState mf;
    mf.mu.resize(L);
    // warm start: bottom-up pass without top-down input
    for (std::size_t l = 0; l < L; ++l) {
        const Eigen::VectorXd& below = (l == 0) ? v : mf.mu[l - 1];
        Eigen::VectorXd input = model.weights[l].transpose() * below;
        if (model.has_biases()) input += model.biases[l + 1];
        mf.mu[l] = sigmoid_vec(std::move(input));
    }

    for (int iter = 0; iter < max_iters; ++iter) {
        for (std::size_t l = 0; l < L; ++l) mf.mu[l] = mf_update(model, v, mf.mu, l);
        mf.iterations = iter + 1;
        double residual = 0.0;
        for (std::size_t l = 0; l < L; ++l)
            residual = std::max(residual,
                                (mf_update(model, v, mf.mu, l) - mf.mu[l]).cwiseAbs().maxCoeff());
        if (residual < tolerance) {
            mf.converged = true;
            break;
        }
    }
    return mf;
}

double variational_bound_unnormalized(const DbmModel& model, const Eigen::VectorXd& v,
                                      const MeanFieldState& mf) {
    std::vector<Eigen::VectorXd> state;
    state.reserve(mf.mu.size() + 1);
    state.push_back(v);
    for (const auto& mu : mf.mu) state.push_back(mu);
    double bound = -energy(model, state);
    auto entropy = [](double p) {
        double h = 0.0;
        if (p > 0.0) h -= p * std::log(p);
        if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
        return h;
    };
    for (const auto& mu : mf.mu)
        for (Eigen::Index i = 0; i < mu.size(); ++i) bound += entropy(mu(i));
    return bound;
}

GibbsParticle random_particle(const DbmModel& model, Rng& rng) {
    GibbsParticle p;
    for (auto n : model.layer_sizes()) {
        Eigen::VectorXd layer(n);
        for (Eigen::Index i = 0; i < n; ++i) layer(i) = rng.bernoulli(0.5);
        p.state.push_back(std::move(layer));
    }
    return p;
}

GibbsParticle gibbs_step(const DbmModel& model, const GibbsParticle& particle, Rng& rng) {
    check_state_shapes(model, particle.state);
    GibbsParticle next = particle;
    auto sample_layer = [&](std::size_t l) {
        const Eigen::VectorXd p = conditional_layer(model, l, next.state);
        for (Eigen::Index i = 0; i < p.size(); ++i) next.state[l](i) = rng.bernoulli(p(i));
    };
    // even layers (v, h^2, ...) are conditionally independent given the odd ones
    for (std::size_t l = 0; l < next.state.size(); l += 2) sample_layer(l);
    for (std::size_t l = 1; l < next.state.size(); l += 2) sample_layer(l);
    return next;
}

DbmModel stack_to_dbm(const std::vector<RbmModel>& rbms) {
    if (rbms.empty()) throw DataError("stack_to_dbm: empty stack");
    DbmModel model;
    for (std::size_t l = 0; l + 1 < rbms.size(); ++l)
        if (rbms[l].n_hidden() != rbms[l + 1].n_visible())
            throw DataError("stack_to_dbm: RBM shapes do not chain at block " + std::to_string(l));
    bool any_bias = false;
    for (const auto& r : rbms)
        if ((r.visible_bias.array() != 0).any() || (r.hidden_bias.array() != 0).any())
            any_bias = true;
    for (const auto& r : rbms) model.weights.push_back(r.weights);
    if (any_bias) {
        model.biases.push_back(rbms[0].visible_bias);
        // an intermediate layer is hidden in one block and visible in the next,
        // so two pretrained estimates of its bias exist; average them
        for (std::size_t l = 0; l < rbms.size(); ++l) {
            Eigen::VectorXd b = rbms[l].hidden_bias;
            if (l + 1 < rbms.size()) b = 0.5 * (b + rbms[l + 1].visible_bias);
            model.biases.push_back(std::move(b));
        }
    }
    model.metadata.generator_id = Rng::generator_id();
    model.validate();
    return model;
}

DbmModel random_dbm(const std::vector<Eigen::Index>& layer_sizes, Rng& rng, double scale) {
    if (layer_sizes.size() < 2) throw DataError("random_dbm: need at least 2 layer sizes");
    DbmModel model;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        Eigen::MatrixXd w(layer_sizes[l], layer_sizes[l + 1]);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-scale, scale);
        model.weights.push_back(std::move(w));
    }
    model.metadata.generator_id = Rng::generator_id();
    return model;
}

DbmModel train_dbm(const DbmModel& model_init, const Eigen::MatrixXd& data,
                   const TrainConfig& config) {
    config.validate();
    model_init.validate();
    if (data.rows() == 0) throw DataError("train_dbm: empty dataset");
    if (data.cols() != model_init.weights[0].rows())
        throw DimensionError("train_dbm: data column count does not match visible layer");

    DbmModel model = model_init;
    const std::size_t L = model.n_layers();
    const bool use_biases = config.use_biases;
    if (use_biases && !model.has_biases())
        for (auto n : model.layer_sizes()) model.biases.push_back(Eigen::VectorXd::Zero(n));

    Rng rng(config.seed);
    const Eigen::Index n_rows = data.rows();
    const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n_rows);

    std::vector<GibbsParticle> particles;
    particles.reserve(batch);
    for (Eigen::Index c = 0; c < batch; ++c) particles.push_back(random_particle(model, rng));

    std::vector<Eigen::MatrixXd> data_corr(L), model_corr(L);
    std::vector<Eigen::VectorXd> data_act(L + 1), model_act(L + 1);
    const auto sizes = model.layer_sizes();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (Eigen::Index start = 0; start < n_rows; start += batch) {
            const Eigen::Index m = std::min(batch, n_rows - start);
            for (std::size_t l = 0; l < L; ++l) {
                data_corr[l] = Eigen::MatrixXd::Zero(sizes[l], sizes[l + 1]);
                model_corr[l] = Eigen::MatrixXd::Zero(sizes[l], sizes[l + 1]);
            }
            for (std::size_t l = 0; l <= L; ++l) {
                data_act[l] = Eigen::VectorXd::Zero(sizes[l]);
                model_act[l] = Eigen::VectorXd::Zero(sizes[l]);
            }

            // data-dependent expectation from the variational posterior
            for (Eigen::Index r = 0; r < m; ++r) {
                const Eigen::VectorXd v = data.row(start + r).transpose();
                const MeanFieldState mf = mean_field_infer(model, v);
                data_corr[0] += v * mf.mu[0].transpose();
                data_act[0] += v;
                for (std::size_t l = 1; l < L; ++l)
                    data_corr[l] += mf.mu[l - 1] * mf.mu[l].transpose();
                for (std::size_t l = 0; l < L; ++l) data_act[l + 1] += mf.mu[l];
            }

            // data-independent expectation from the persistent particles
            for (Eigen::Index c = 0; c < m; ++c) {
                for (int k = 0; k < config.gibbs_steps; ++k)
                    particles[c] = gibbs_step(model, particles[c], rng);
                const auto& s = particles[c].state;
                for (std::size_t l = 0; l < L; ++l) model_corr[l] += s[l] * s[l + 1].transpose();
                for (std::size_t l = 0; l <= L; ++l) model_act[l] += s[l];
            }

            const double inv_m = 1.0 / static_cast<double>(m);
            for (std::size_t l = 0; l < L; ++l)
                model.weights[l] += correlation_update(config.learning_rate, data_corr[l] * inv_m,
                                                       model_corr[l] * inv_m);
            if (use_biases)
                for (std::size_t l = 0; l <= L; ++l)
                    model.biases[l] += config.learning_rate * inv_m * (data_act[l] - model_act[l]);
        }
    }

    model.metadata.generator_id = Rng::generator_id();
    model.metadata.seed = config.seed;
    model.metadata.config = config;
    return model;
}

void save_model(const DbmModel& model, std::ostream& out) {
    model.validate();
    nlohmann::json j;
    j["version"] = model.metadata.format_version;
    j["generator_id"] = model.metadata.generator_id.empty() ? Rng::generator_id()
                                                            : model.metadata.generator_id;
    j["seed"] = model.metadata.seed;
    std::vector<long> sizes;
    for (auto n : model.layer_sizes()) sizes.push_back(static_cast<long>(n));
    j["layer_sizes"] = sizes;
    auto weights = nlohmann::json::array();
    for (const auto& w : model.weights) {
        auto rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            auto row = nlohmann::json::array();
            for (Eigen::Index k = 0; k < w.cols(); ++k) row.push_back(w(i, k));
            rows.push_back(std::move(row));
        }
        weights.push_back(std::move(rows));
    }
    j["weights"] = std::move(weights);
    if (model.has_biases()) {
        auto vb = nlohmann::json::array();
        for (Eigen::Index i = 0; i < model.biases[0].size(); ++i) vb.push_back(model.biases[0](i));
        j["visible_bias"] = std::move(vb);
        auto hbs = nlohmann::json::array();
        for (std::size_t l = 1; l < model.biases.size(); ++l) {
            auto hb = nlohmann::json::array();
            for (Eigen::Index i = 0; i < model.biases[l].size(); ++i)
                hb.push_back(model.biases[l](i));
            hbs.push_back(std::move(hb));
        }
        j["hidden_biases"] = std::move(hbs);
    }
    const auto& c = model.metadata.config;
    j["config"] = {{"learning_rate", c.learning_rate}, {"epochs", c.epochs},
                   {"batch_size", c.batch_size},       {"gibbs_steps", c.gibbs_steps},
                   {"seed", c.seed},                   {"use_biases", c.use_biases}};
    out << j.dump(2) << '\n';
}

DbmModel load_model(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        const int version = j.at("version").get<int>();
        if (version != 1)
            throw DataError("unsupported model format version " + std::to_string(version));
        DbmModel model;
        model.metadata.format_version = version;
        model.metadata.generator_id = j.at("generator_id").get<std::string>();
        model.metadata.seed = j.at("seed").get<std::uint64_t>();
        const auto sizes = j.at("layer_sizes").get<std::vector<long>>();
        const auto& weights = j.at("weights");
        if (sizes.size() < 2 || weights.size() != sizes.size() - 1)
            throw DataError("layer_sizes and weights disagree");
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const auto& rows = weights.at(l);
            if (static_cast<long>(rows.size()) != sizes[l])
                throw DataError("weight matrix " + std::to_string(l) + " has wrong row count");
            Eigen::MatrixXd w(sizes[l], sizes[l + 1]);
            for (long i = 0; i < sizes[l]; ++i) {
                const auto& row = rows.at(i);
                if (static_cast<long>(row.size()) != sizes[l + 1])
                    throw DataError("weight matrix " + std::to_string(l) + " has wrong column count");
                for (long k = 0; k < sizes[l + 1]; ++k) {
                    const double x = row.at(k).get<double>();
                    if (!std::isfinite(x)) throw DataError("non-finite value in model file");
                    w(i, k) = x;
                }
            }
            model.weights.push_back(std::move(w));
        }
        if (j.contains("visible_bias") || j.contains("hidden_biases")) {
            const auto vb = j.at("visible_bias").get<std::vector<double>>();
            const auto hbs = j.at("hidden_biases").get<std::vector<std::vector<double>>>();
            if (static_cast<long>(vb.size()) != sizes[0] || hbs.size() != sizes.size() - 1)
                throw DataError("bias shapes disagree with layer_sizes");
            model.biases.push_back(Eigen::Map<const Eigen::VectorXd>(vb.data(), vb.size()));
            for (std::size_t l = 0; l < hbs.size(); ++l) {
                if (static_cast<long>(hbs[l].size()) != sizes[l + 1])
                    throw DataError("hidden bias " + std::to_string(l) + " has wrong length");
                model.biases.push_back(
                    Eigen::Map<const Eigen::VectorXd>(hbs[l].data(), hbs[l].size()));
            }
        }
        if (j.contains("config")) {
            const auto& c = j.at("config");
            model.metadata.config.learning_rate = c.at("learning_rate").get<double>();
            model.metadata.config.epochs = c.at("epochs").get<int>();
            model.metadata.config.batch_size = c.at("batch_size").get<int>();
            model.metadata.config.gibbs_steps = c.at("gibbs_steps").get<int>();
            model.metadata.config.seed = c.at("seed").get<std::uint64_t>();
            model.metadata.config.use_biases = c.at("use_biases").get<bool>();
        }
        model.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace udbm
