#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lml/dataset.hpp"
#include "lml/matrix.hpp"
#include "lml/rng.hpp"

namespace lml {

enum class Activation { Relu, Sigmoid, Linear };

struct DenseLayer {
    Matrix weights;            // in_dim x out_dim
    std::vector<double> bias;  // out_dim
    Activation activation = Activation::Linear;

    std::size_t in_dim() const { return weights.rows(); }
    std::size_t out_dim() const { return weights.cols(); }
};

// Dense-layer VAE: relu hidden stacks, linear mean/logvar heads, sigmoid
// reconstruction output. The decoder mirrors the encoder hidden widths.
struct VaeModel {
    std::vector<DenseLayer> encoder_hidden;
    DenseLayer mean_head;
    DenseLayer logvar_head;
    std::vector<DenseLayer> decoder_hidden;
    DenseLayer output_layer;
    std::size_t input_dim = 0;
    std::size_t latent_dim = 0;
};

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 42;
};

// Per-sample batch means; total == reconstruction + kl by construction.
struct LossBreakdown {
    double total = 0.0;
    double reconstruction = 0.0;
    double kl = 0.0;
};

struct LayerGrads {
    Matrix weights;
    std::vector<double> bias;
};

// Gradients in canonical layer order: encoder hidden layers, mean head,
// logvar head, decoder hidden layers, output layer.
struct VaeGradients {
    std::vector<LayerGrads> layers;
};

struct AdamState {
    std::vector<LayerGrads> first_moment;
    std::vector<LayerGrads> second_moment;
    std::size_t timestep = 0;
};

// z_log_var is clamped to this window inside encode, before anything
// exponentiates it.
inline constexpr double kLogVarMin = -30.0;
inline constexpr double kLogVarMax = 20.0;

// Glorot-uniform weights, zero biases; decoder mirrors hidden_dims reversed.
VaeModel init_vae(std::size_t input_dim, const std::vector<std::size_t>& hidden_dims,
                  std::size_t latent_dim, std::uint64_t seed);

// Canonical parameter traversal used by training, persistence and tests.
std::vector<DenseLayer*> layer_sequence(VaeModel& model);
std::vector<const DenseLayer*> layer_sequence(const VaeModel& model);

Matrix dense_forward(const DenseLayer& layer, const Matrix& x);

std::pair<Matrix, Matrix> encode(const VaeModel& model, const Matrix& x);

// z = mean + exp(0.5 * logvar) .* eps, eps ~ N(0,I) from rng.
Matrix reparameterize(const Matrix& z_mean, const Matrix& z_log_var, Rng& rng);

Matrix decode(const VaeModel& model, const Matrix& z);

LossBreakdown vae_loss(const Matrix& x, const Matrix& x_hat, const Matrix& z_mean,
                       const Matrix& z_log_var);

// Loss under one fixed noise draw; the deterministic function the gradient
// check differentiates.
LossBreakdown vae_loss_with_noise(const VaeModel& model, const Matrix& x, const Matrix& eps);

// Analytic gradients of vae_loss_with_noise, reusing the forward-pass eps.
VaeGradients vae_backward(const VaeModel& model, const Matrix& x, const Matrix& eps);

// Draws eps from rng, then vae_backward.
VaeGradients backward(const VaeModel& model, const Matrix& batch, Rng& rng);

void adam_step(VaeModel& model, const VaeGradients& grads, AdamState& state,
               const TrainConfig& config);

// Mini-batch Adam training; returns the model and one mean LossBreakdown per
// epoch. Requires features already scaled to [0,1].
std::pair<VaeModel, std::vector<LossBreakdown>> train_vae(VaeModel model, const Dataset& train,
                                                          const TrainConfig& config);

// New dataset whose features are z_mean (no sampling); labels copied.
Dataset extract_latent(const VaeModel& model, const Dataset& ds);

}  // namespace lml
