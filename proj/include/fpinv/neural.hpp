#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fpinv/dataset.hpp"

// Dense feed-forward networks with exact backpropagation (including gradients
// w.r.t. the inputs, needed for inverse design), Adam, mini-batch training
// with early stopping and JSON model persistence. Everything is double
// precision and deterministic for a given seed.

namespace fpinv::neural {

enum class ActivationKind { relu, elu, swish, sigmoid, tanh, sin, linear };

std::string activation_name(ActivationKind kind);
ActivationKind activation_from_name(const std::string& name);

double activation_eval(ActivationKind kind, double x, double elu_alpha = 1.0);
double activation_grad(ActivationKind kind, double x, double elu_alpha = 1.0);

/// Label-grid metadata carried along with a trained model.
struct GridMeta {
    std::string kind = "wavelength";  // "wavelength" | "angle" | "none"
    double start = 400.0;
    double step = 2.0;
    std::size_t count = 200;
};

struct MlpModel {
    std::vector<std::size_t> layer_dims;  // input, hidden..., output
    ActivationKind hidden_activation = ActivationKind::swish;
    ActivationKind first_activation = ActivationKind::swish;  // first hidden layer only
    double elu_alpha = 1.0;
    std::vector<Eigen::MatrixXd> weights;  // per layer, fan_out x fan_in
    std::vector<Eigen::VectorXd> biases;
    dataset::NormalizationSpec normalization;
    GridMeta grid;
    std::string training_fingerprint;

    ActivationKind activation_at(std::size_t layer) const {
        return layer == 0 ? first_activation : hidden_activation;
    }
    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t layer_count() const { return weights.size(); }
};

/// Glorot-uniform weights, zero biases.
MlpModel make_mlp(const std::vector<std::size_t>& layer_dims, ActivationKind hidden_activation,
                  std::uint64_t seed);

/// Turn the first hidden layer into a sinusoidal feature layer: activation sin,
/// weights ~ N(0, weight_stddev), biases ~ U(-pi, pi). High-frequency targets
/// train far faster through such a layer than through a saturating one.
void sinusoidal_input_layer(MlpModel& model, double weight_stddev, std::uint64_t seed);

/// Intermediate activations of one forward pass; acts[0] is the input batch.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> preacts;
    std::vector<Eigen::MatrixXd> acts;
};

/// Batched forward pass; columns are samples.
Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& inputs);
Eigen::MatrixXd forward_cached(const MlpModel& model, const Eigen::MatrixXd& inputs,
                               ForwardCache& cache);
std::vector<double> forward(const MlpModel& model, const std::vector<double>& features);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::MatrixXd inputs;
};

/// Pull an arbitrary output gradient dL/dY back through the network.
Gradients backprop(const MlpModel& model, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_grad);

/// Gradient of mean-squared error (mean over outputs and batch) w.r.t. all
/// parameters and the input features.
Gradients backward(const MlpModel& model, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& targets, double* loss_out = nullptr);

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);
double mae_metric(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);
double mse_loss(const std::vector<double>& pred, const std::vector<double>& target);
double mae_metric(const std::vector<double>& pred, const std::vector<double>& target);

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 200;
    std::size_t patience = 30;
    std::size_t max_epochs = 1000;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

/// First/second moment accumulators mirroring one set of parameters.
struct AdamState {
    std::vector<Eigen::MatrixXd> m_weights, v_weights;
    std::vector<Eigen::VectorXd> m_biases, v_biases;
    long step = 0;

    static AdamState for_model(const MlpModel& model);
};

void adam_step(AdamState& state, MlpModel& model, const Gradients& grads,
               const TrainConfig& config);

/// Standalone Adam on a flat parameter vector (used for inversion).
struct AdamVector {
    Eigen::VectorXd m, v;
    long step = 0;

    explicit AdamVector(Eigen::Index size)
        : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)) {}
    void update(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double learning_rate,
                double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
};

struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    std::size_t best_epoch = 0;
    std::string stopped_by;  // "patience" | "max_epochs"
    double wall_seconds = 0.0;
};

/// Mini-batch Adam training on MSE with per-epoch reshuffling, early stopping
/// on the validation loss and restoration of the best-validation weights.
TrainReport train(MlpModel& model, const dataset::Dataset& data, const dataset::DataSplit& split,
                  const TrainConfig& config);

/// Pack a subset of records into feature/label matrices (columns = samples).
void pack_batch(const dataset::Dataset& data, const std::vector<std::size_t>& indices,
                Eigen::MatrixXd& features, Eigen::MatrixXd& labels);

/// Mean MAE of the model over the given record indices.
double evaluate_mae(const MlpModel& model, const dataset::Dataset& data,
                    const std::vector<std::size_t>& indices);

void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);
std::string model_to_json_string(const MlpModel& model);
MlpModel model_from_json_string(const std::string& text);

}  // namespace fpinv::neural
