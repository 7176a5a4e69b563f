#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "udbm/errors.hpp"
#include "udbm/rbm.hpp"
#include "udbm/rng.hpp"

namespace udbm {

// Deep Boltzmann machine with layers v = a^0, h^1, ..., h^L and weight
// matrices W^l of shape (n_{l-1} x n_l). Biases are optional (empty when
// disabled, one vector per layer otherwise).
struct DbmModel {
    std::vector<Eigen::MatrixXd> weights;  // W^1 .. W^L
    std::vector<Eigen::VectorXd> biases;   // empty, or L+1 vectors

    struct Metadata {
        std::string generator_id;
        std::uint64_t seed = 0;
        TrainConfig config;
        int format_version = 1;
    } metadata;

    std::size_t n_layers() const { return weights.size(); }  // hidden layers
    std::vector<Eigen::Index> layer_sizes() const;
    bool has_biases() const { return !biases.empty(); }
    void validate() const;  // shape chaining and finiteness
};

// Per-hidden-layer activation probabilities of the factorized posterior.
struct MeanFieldState {
    std::vector<Eigen::VectorXd> mu;  // mu[l] is layer l+1's probabilities
    bool converged = false;
    int iterations = 0;
};

// One fantasy-particle state (v, h^1, ..., h^L), entries in {0,1}.
struct GibbsParticle {
    std::vector<Eigen::VectorXd> state;
};

// -sum_l a^{l-1,T} W^l a^l, minus bias terms when enabled.
double energy(const DbmModel& model, const std::vector<Eigen::VectorXd>& state);
double energy(const DbmModel& model, const Eigen::VectorXd& v, const Eigen::VectorXd& h1,
              const Eigen::VectorXd& h2);

// Conditional activation probabilities for the two-hidden-layer model.
Eigen::VectorXd conditional_h1(const DbmModel& model, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& h2);
Eigen::VectorXd conditional_h2(const DbmModel& model, const Eigen::VectorXd& h1);
Eigen::VectorXd conditional_v(const DbmModel& model, const Eigen::VectorXd& h1);

// General layer conditional: sigma of bottom-up plus top-down input to layer l
// (0 = visible). neighbors must hold the full state; only adjacent layers are read.
Eigen::VectorXd conditional_layer(const DbmModel& model, std::size_t layer,
                                  const std::vector<Eigen::VectorXd>& state);

// Fixed-point iteration mu^l <- sigma(W^{l,T} a^{l-1} + W^{l+1} mu^{l+1}),
// warm-started bottom-up. Converged when the residual of both update
// equations drops below tolerance.
MeanFieldState mean_field_infer(const DbmModel& model, const Eigen::VectorXd& v,
                                double tolerance = 1e-6, int max_iters = 50);

// Unnormalized variational lower bound: E_q[-E] + H(q). Subtract log Z to get
// the bound on log p(v).
double variational_bound_unnormalized(const DbmModel& model, const Eigen::VectorXd& v,
                                      const MeanFieldState& mf);

// One alternating-block sweep: even layers (v, h^2, ...) given odd, then odd
// layers given even.
GibbsParticle gibbs_step(const DbmModel& model, const GibbsParticle& particle, Rng& rng);

GibbsParticle random_particle(const DbmModel& model, Rng& rng);

// Copies pretrained weights into a DBM, scales reset to 1.
DbmModel stack_to_dbm(const std::vector<RbmModel>& rbms);

DbmModel random_dbm(const std::vector<Eigen::Index>& layer_sizes, Rng& rng, double scale = 0.01);

// Mean-field / PCD stochastic gradient ascent per the two-expectation update
// rule. Deterministic per (generator id, seed).
DbmModel train_dbm(const DbmModel& model_init, const Eigen::MatrixXd& data,
                   const TrainConfig& config);

// Versioned JSON persistence; round-trip is bit-exact.
void save_model(const DbmModel& model, std::ostream& out);
DbmModel load_model(std::istream& in);

}  // namespace udbm
