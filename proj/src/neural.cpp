#include "fpinv/neural.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace fpinv::neural {

using nlohmann::json;

std::string activation_name(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::elu: return "elu";
        case ActivationKind::swish: return "swish";
        case ActivationKind::sigmoid: return "sigmoid";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::sin: return "sin";
        case ActivationKind::linear: return "linear";
    }
    throw std::logic_error("activation_name: bad kind");
}

ActivationKind activation_from_name(const std::string& name) {
    if (name == "relu") return ActivationKind::relu;
    if (name == "elu") return ActivationKind::elu;
    if (name == "swish") return ActivationKind::swish;
    if (name == "sigmoid") return ActivationKind::sigmoid;
    if (name == "tanh") return ActivationKind::tanh;
    if (name == "sin") return ActivationKind::sin;
    if (name == "linear") return ActivationKind::linear;
    throw std::invalid_argument("unknown activation: " + name);
}

double activation_eval(ActivationKind kind, double x, double elu_alpha) {
    switch (kind) {
        case ActivationKind::relu: return x > 0.0 ? x : 0.0;
        case ActivationKind::elu: return x >= 0.0 ? x : elu_alpha * (std::exp(x) - 1.0);
        case ActivationKind::swish: return x / (1.0 + std::exp(-x));
        case ActivationKind::sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case ActivationKind::tanh: return std::tanh(x);
        case ActivationKind::sin: return std::sin(x);
        case ActivationKind::linear: return x;
    }
    throw std::logic_error("activation_eval: bad kind");
}

double activation_grad(ActivationKind kind, double x, double elu_alpha) {
    switch (kind) {
        case ActivationKind::relu: return x > 0.0 ? 1.0 : 0.0;
        case ActivationKind::elu: return x >= 0.0 ? 1.0 : elu_alpha * std::exp(x);
        case ActivationKind::swish: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 + x * (1.0 - s));
        }
        case ActivationKind::sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-x));
            return s * (1.0 - s);
        }
        case ActivationKind::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case ActivationKind::sin: return std::cos(x);
        case ActivationKind::linear: return 1.0;
    }
    throw std::logic_error("activation_grad: bad kind");
}

namespace {

Eigen::MatrixXd apply_activation(ActivationKind kind, double alpha, const Eigen::MatrixXd& z) {
    return z.unaryExpr([kind, alpha](double x) { return activation_eval(kind, x, alpha); });
}

Eigen::MatrixXd activation_derivative(ActivationKind kind, double alpha, const Eigen::MatrixXd& z) {
    return z.unaryExpr([kind, alpha](double x) { return activation_grad(kind, x, alpha); });
}

}  // namespace

MlpModel make_mlp(const std::vector<std::size_t>& layer_dims, ActivationKind hidden_activation,
                  std::uint64_t seed) {
    if (layer_dims.size() < 2) {
        throw std::invalid_argument("make_mlp: need at least input and output dims");
    }
    MlpModel model;
    model.layer_dims = layer_dims;
    model.hidden_activation = hidden_activation;
    model.first_activation = hidden_activation;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
        const auto fan_in = static_cast<Eigen::Index>(layer_dims[i]);
        const auto fan_out = static_cast<Eigen::Index>(layer_dims[i + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index c = 0; c < fan_in; ++c) {
            for (Eigen::Index r = 0; r < fan_out; ++r) w(r, c) = dist(rng);
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return model;
}

void sinusoidal_input_layer(MlpModel& model, double weight_stddev, std::uint64_t seed) {
    if (model.weights.empty()) throw std::invalid_argument("sinusoidal_input_layer: empty model");
    model.first_activation = ActivationKind::sin;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> wdist(0.0, weight_stddev);
    std::uniform_real_distribution<double> bdist(-std::numbers::pi, std::numbers::pi);
    Eigen::MatrixXd& w = model.weights.front();
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = wdist(rng);
    }
    Eigen::VectorXd& b = model.biases.front();
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = bdist(rng);
}

Eigen::MatrixXd forward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
    if (static_cast<std::size_t>(inputs.rows()) != model.input_dim()) {
        throw std::invalid_argument("forward: feature dimension mismatch");
    }
    Eigen::MatrixXd a = inputs;
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        Eigen::MatrixXd z = (model.weights[i] * a).colwise() + model.biases[i];
        if (i + 1 < model.layer_count()) {
            a = apply_activation(model.activation_at(i), model.elu_alpha, z);
        } else {
            a = std::move(z);  // linear output layer
        }
    }
    return a;
}

Eigen::MatrixXd forward_cached(const MlpModel& model, const Eigen::MatrixXd& inputs,
                               ForwardCache& cache) {
    if (static_cast<std::size_t>(inputs.rows()) != model.input_dim()) {
        throw std::invalid_argument("forward: feature dimension mismatch");
    }
    cache.preacts.clear();
    cache.acts.clear();
    cache.acts.push_back(inputs);
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        Eigen::MatrixXd z = (model.weights[i] * cache.acts.back()).colwise() + model.biases[i];
        cache.preacts.push_back(z);
        if (i + 1 < model.layer_count()) {
            cache.acts.push_back(apply_activation(model.activation_at(i), model.elu_alpha, z));
        } else {
            cache.acts.push_back(std::move(z));
        }
    }
    return cache.acts.back();
}

std::vector<double> forward(const MlpModel& model, const std::vector<double>& features) {
    Eigen::Map<const Eigen::VectorXd> x(features.data(), static_cast<Eigen::Index>(features.size()));
    Eigen::MatrixXd y = forward(model, Eigen::MatrixXd(x));
    return {y.data(), y.data() + y.size()};
}

Gradients backprop(const MlpModel& model, const ForwardCache& cache,
                   const Eigen::MatrixXd& output_grad) {
    const std::size_t layers = model.layer_count();
    Gradients grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);

    Eigen::MatrixXd delta = output_grad;  // dL/dz of the current layer
    for (std::size_t i = layers; i-- > 0;) {
        if (i + 1 < layers) {
            delta = delta.cwiseProduct(
                activation_derivative(model.activation_at(i), model.elu_alpha, cache.preacts[i]));
        }
        grads.weights[i].noalias() = delta * cache.acts[i].transpose();
        grads.biases[i] = delta.rowwise().sum();
        if (i > 0) {
            delta = model.weights[i].transpose() * delta;
        } else {
            grads.inputs.noalias() = model.weights[0].transpose() * delta;
        }
    }
    return grads;
}

Gradients backward(const MlpModel& model, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& targets, double* loss_out) {
    if (inputs.cols() == 0) throw std::invalid_argument("backward: empty batch");
    ForwardCache cache;
    const Eigen::MatrixXd pred = forward_cached(model, inputs, cache);
    if (pred.rows() != targets.rows() || pred.cols() != targets.cols()) {
        throw std::invalid_argument("backward: target shape mismatch");
    }
    const Eigen::MatrixXd residual = pred - targets;
    if (loss_out != nullptr) {
        *loss_out = residual.squaredNorm() / static_cast<double>(residual.size());
    }
    const double scale = 2.0 / static_cast<double>(residual.size());
    return backprop(model, cache, scale * residual);
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw std::invalid_argument("mse_loss: shape mismatch");
    }
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

double mae_metric(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw std::invalid_argument("mae_metric: shape mismatch");
    }
    return (pred - target).cwiseAbs().sum() / static_cast<double>(pred.size());
}

double mse_loss(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size()) throw std::invalid_argument("mse_loss: length mismatch");
    Eigen::Map<const Eigen::VectorXd> a(pred.data(), static_cast<Eigen::Index>(pred.size()));
    Eigen::Map<const Eigen::VectorXd> b(target.data(), static_cast<Eigen::Index>(target.size()));
    return (a - b).squaredNorm() / static_cast<double>(pred.size());
}

double mae_metric(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size()) throw std::invalid_argument("mae_metric: length mismatch");
    Eigen::Map<const Eigen::VectorXd> a(pred.data(), static_cast<Eigen::Index>(pred.size()));
    Eigen::Map<const Eigen::VectorXd> b(target.data(), static_cast<Eigen::Index>(target.size()));
    return (a - b).cwiseAbs().sum() / static_cast<double>(pred.size());
}

AdamState AdamState::for_model(const MlpModel& model) {
    AdamState state;
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        state.m_weights.push_back(Eigen::MatrixXd::Zero(model.weights[i].rows(),
                                                        model.weights[i].cols()));
        state.v_weights.push_back(Eigen::MatrixXd::Zero(model.weights[i].rows(),
                                                        model.weights[i].cols()));
        state.m_biases.push_back(Eigen::VectorXd::Zero(model.biases[i].size()));
        state.v_biases.push_back(Eigen::VectorXd::Zero(model.biases[i].size()));
    }
    return state;
}

namespace {

template <typename Param, typename Grad>
void adam_update_one(Param& param, const Grad& grad, Param& m, Param& v, double bias1,
                     double bias2, const TrainConfig& cfg) {
    m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
    v = cfg.adam_beta2 * v.array().matrix() + (1.0 - cfg.adam_beta2) * grad.array().square().matrix();
    param.array() -= cfg.learning_rate * (m.array() / bias1) /
                     ((v.array() / bias2).sqrt() + cfg.adam_epsilon);
}

}  // namespace

void adam_step(AdamState& state, MlpModel& model, const Gradients& grads,
               const TrainConfig& config) {
    ++state.step;
    const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        adam_update_one(model.weights[i], grads.weights[i], state.m_weights[i], state.v_weights[i],
                        bias1, bias2, config);
        adam_update_one(model.biases[i], grads.biases[i], state.m_biases[i], state.v_biases[i],
                        bias1, bias2, config);
    }
}

void AdamVector::update(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double learning_rate,
                        double beta1, double beta2, double epsilon) {
    ++step;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v.array().matrix() + (1.0 - beta2) * grad.array().square().matrix();
    const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    params.array() -=
        learning_rate * (m.array() / bias1) / ((v.array() / bias2).sqrt() + epsilon);
}

void pack_batch(const dataset::Dataset& data, const std::vector<std::size_t>& indices,
                Eigen::MatrixXd& features, Eigen::MatrixXd& labels) {
    if (indices.empty()) throw std::invalid_argument("pack_batch: empty index set");
    const auto arity = static_cast<Eigen::Index>(data.normalization.arity());
    const auto label_len = static_cast<Eigen::Index>(data.label_length);
    features.resize(arity, static_cast<Eigen::Index>(indices.size()));
    labels.resize(label_len, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const auto& rec = data.records[indices[c]];
        for (Eigen::Index r = 0; r < arity; ++r) features(r, static_cast<Eigen::Index>(c)) = rec.features[r];
        for (Eigen::Index r = 0; r < label_len; ++r) labels(r, static_cast<Eigen::Index>(c)) = rec.label[r];
    }
}

double evaluate_mae(const MlpModel& model, const dataset::Dataset& data,
                    const std::vector<std::size_t>& indices) {
    Eigen::MatrixXd x, y;
    pack_batch(data, indices, x, y);
    return mae_metric(forward(model, x), y);
}

TrainReport train(MlpModel& model, const dataset::Dataset& data, const dataset::DataSplit& split,
                  const TrainConfig& config) {
    if (split.train.empty() || split.validation.empty()) {
        throw std::invalid_argument("train: empty split");
    }
    const auto start_time = std::chrono::steady_clock::now();

    Eigen::MatrixXd val_x, val_y;
    pack_batch(data, split.validation, val_x, val_y);

    std::vector<std::size_t> order = split.train;
    std::mt19937_64 rng(config.seed);

    AdamState adam = AdamState::for_model(model);
    TrainReport report;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<Eigen::MatrixXd> best_weights = model.weights;
    std::vector<Eigen::VectorXd> best_biases = model.biases;
    std::size_t epochs_since_best = 0;

    Eigen::MatrixXd batch_x, batch_y;
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, order.size());
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            pack_batch(data, batch, batch_x, batch_y);
            double loss = 0.0;
            Gradients grads = backward(model, batch_x, batch_y, &loss);
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train: loss diverged (NaN/inf) at epoch " +
                                         std::to_string(epoch));
            }
            adam_step(adam, model, grads, config);
            epoch_loss += loss;
            ++batches;
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(batches));

        const double val_loss = mse_loss(forward(model, val_x), val_y);
        report.validation_loss.push_back(val_loss);
        if (!std::isfinite(val_loss)) {
            throw std::runtime_error("train: validation loss diverged at epoch " +
                                     std::to_string(epoch));
        }

        if (val_loss < best_val) {
            best_val = val_loss;
            report.best_epoch = epoch;
            best_weights = model.weights;
            best_biases = model.biases;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best >= config.patience) {
                report.stopped_by = "patience";
                break;
            }
        }
    }
    if (report.stopped_by.empty()) report.stopped_by = "max_epochs";

    model.weights = std::move(best_weights);
    model.biases = std::move(best_biases);

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return report;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw std::runtime_error("model file: ragged weight matrix");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

}  // namespace

namespace {

json model_to_json(const MlpModel& model) {
    json j;
    j["schema_version"] = dataset::kSchemaVersion;
    j["layer_dims"] = model.layer_dims;
    j["activation"] = activation_name(model.hidden_activation);
    j["first_activation"] = activation_name(model.first_activation);
    j["elu_alpha"] = model.elu_alpha;
    json weights = json::array();
    json biases = json::array();
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        weights.push_back(matrix_to_json(model.weights[i]));
        biases.push_back(std::vector<double>(model.biases[i].data(),
                                             model.biases[i].data() + model.biases[i].size()));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["normalization"] = {{"feature_names", model.normalization.feature_names},
                          {"source_min", model.normalization.source_min},
                          {"source_max", model.normalization.source_max},
                          {"target_lo", model.normalization.target_lo},
                          {"target_hi", model.normalization.target_hi}};
    j["grid"] = {{"kind", model.grid.kind},
                 {"start", model.grid.start},
                 {"step", model.grid.step},
                 {"count", model.grid.count}};
    j["training_fingerprint"] = model.training_fingerprint;
    return j;
}

MlpModel model_from_json(const json& j) {
    if (j.at("schema_version").get<int>() != dataset::kSchemaVersion) {
        throw std::runtime_error("model file: unsupported schema_version");
    }
    MlpModel model;
    model.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    model.hidden_activation = activation_from_name(j.at("activation").get<std::string>());
    model.first_activation = activation_from_name(
        j.value("first_activation", j.at("activation").get<std::string>()));
    model.elu_alpha = j.value("elu_alpha", 1.0);
    for (const auto& w : j.at("weights")) model.weights.push_back(matrix_from_json(w));
    for (const auto& b : j.at("biases")) {
        auto vec = b.get<std::vector<double>>();
        model.biases.emplace_back(
            Eigen::Map<const Eigen::VectorXd>(vec.data(), static_cast<Eigen::Index>(vec.size())));
    }
    if (model.weights.size() + 1 != model.layer_dims.size() ||
        model.biases.size() != model.weights.size()) {
        throw std::runtime_error("load_model: inconsistent layer shapes");
    }
    const auto& nj = j.at("normalization");
    model.normalization.feature_names = nj.at("feature_names").get<std::vector<std::string>>();
    model.normalization.source_min = nj.at("source_min").get<std::vector<double>>();
    model.normalization.source_max = nj.at("source_max").get<std::vector<double>>();
    model.normalization.target_lo = nj.at("target_lo").get<double>();
    model.normalization.target_hi = nj.at("target_hi").get<double>();
    const auto& gj = j.at("grid");
    model.grid = {gj.at("kind").get<std::string>(), gj.at("start").get<double>(),
                  gj.at("step").get<double>(), gj.at("count").get<std::size_t>()};
    model.training_fingerprint = j.value("training_fingerprint", "");
    return model;
}

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_model: cannot open " + path.string());
    os << model_to_json(model).dump() << "\n";
}

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_model: cannot open " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("load_model: parse error in " + path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

std::string model_to_json_string(const MlpModel& model) { return model_to_json(model).dump(); }

MlpModel model_from_json_string(const std::string& text) {
    return model_from_json(json::parse(text));
}

}  // namespace fpinv::neural
