#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "udbm/errors.hpp"
#include "udbm/rng.hpp"

namespace udbm {

// One binary-binary RBM block. input_scale/output_scale carry the boundary
// doubling used during greedy layerwise pretraining (1 or 2).
struct RbmModel {
    Eigen::MatrixXd weights;      // n_visible x n_hidden
    Eigen::VectorXd visible_bias; // length n_visible
    Eigen::VectorXd hidden_bias;  // length n_hidden
    double input_scale = 1.0;
    double output_scale = 1.0;

    Eigen::Index n_visible() const { return weights.rows(); }
    Eigen::Index n_hidden() const { return weights.cols(); }
};

struct TrainConfig {
    double learning_rate = 0.007;
    int epochs = 40;
    int batch_size = 1;
    int gibbs_steps = 1;
    std::uint64_t seed = 0;
    bool use_biases = false;

    void validate() const;
};

RbmModel make_rbm(Eigen::Index n_visible, Eigen::Index n_hidden);

// zero-mean uniform weights in [-scale, scale], zero biases
RbmModel random_rbm(Eigen::Index n_visible, Eigen::Index n_hidden, Rng& rng,
                    double scale = 0.01);

double sigmoid(double x);

// p(h_j = 1 | v): sigma(input_scale * W^T v + hidden_bias)
Eigen::VectorXd hidden_potential(const RbmModel& model, const Eigen::VectorXd& v);

// p(v_i = 1 | h): sigma(output_scale * W h + visible_bias)
Eigen::VectorXd visible_potential(const RbmModel& model, const Eigen::VectorXd& h);

// The CD/PCD weight step: lr * (data correlations - model correlations).
inline Eigen::MatrixXd correlation_update(double lr, const Eigen::MatrixXd& data_corr,
                                          const Eigen::MatrixXd& model_corr) {
    return lr * (data_corr - model_corr);
}

// Persistent contrastive divergence. data holds one sample per row; entries
// may be real-valued probabilities (upper layers of a pretraining stack).
// Deterministic per (generator id, seed).
RbmModel train_rbm(const Eigen::MatrixXd& data, const TrainConfig& config,
                   const RbmModel& model_init);

// Greedy layerwise pretraining with boundary doubling: the bottom RBM doubles
// its bottom-up input, the top RBM its top-down input, intermediate ones both.
// Each upper RBM trains on the hidden potentials of the block below.
std::vector<RbmModel> pretrain_stack(const std::vector<Eigen::Index>& layer_dims,
                                     const Eigen::MatrixXd& data, const TrainConfig& config);

}  // namespace udbm
