#include "fpinv/vae.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace fpinv::vae {

using nlohmann::json;

VaeModel make_vae(std::size_t spectrum_dim, std::size_t latent_dim, std::uint64_t seed) {
    VaeModel model;
    model.latent_dim = latent_dim;
    model.encoder = neural::make_mlp({spectrum_dim, 100, 100, 100, 100, 2 * latent_dim},
                                     neural::ActivationKind::swish, seed);
    model.decoder = neural::make_mlp({latent_dim, 100, 100, 100, 100, spectrum_dim},
                                     neural::ActivationKind::swish, seed + 1);
    return model;
}

Encoding encode(const VaeModel& model, const Eigen::MatrixXd& spectra) {
    const Eigen::MatrixXd out = neural::forward(model.encoder, spectra);
    const auto k = static_cast<Eigen::Index>(model.latent_dim);
    return {out.topRows(k), out.bottomRows(k)};
}

std::pair<std::vector<double>, std::vector<double>> encode(const VaeModel& model,
                                                           const std::vector<double>& spectrum) {
    Eigen::Map<const Eigen::VectorXd> x(spectrum.data(), static_cast<Eigen::Index>(spectrum.size()));
    const Encoding enc = encode(model, Eigen::MatrixXd(x));
    return {{enc.mu.data(), enc.mu.data() + enc.mu.size()},
            {enc.logvar.data(), enc.logvar.data() + enc.logvar.size()}};
}

Eigen::MatrixXd reparameterize(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar,
                               const Eigen::MatrixXd& noise) {
    if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols() || mu.rows() != noise.rows() ||
        mu.cols() != noise.cols()) {
        throw std::invalid_argument("reparameterize: shape mismatch");
    }
    return mu.array() + noise.array() * (logvar.array() / 2.0).exp();
}

double kl_unit_gaussian(const Eigen::VectorXd& mu, const Eigen::VectorXd& logvar) {
    if (mu.size() != logvar.size()) {
        throw std::invalid_argument("kl_unit_gaussian: length mismatch");
    }
    return 0.5 * (mu.array().square() + logvar.array().exp() - logvar.array() - 1.0).sum();
}

Eigen::VectorXd kl_unit_gaussian_batch(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar) {
    return 0.5 *
           (mu.array().square() + logvar.array().exp() - logvar.array() - 1.0).colwise().sum();
}

namespace {

struct VaeForwardState {
    neural::ForwardCache encoder_cache;
    neural::ForwardCache decoder_cache;
    Eigen::MatrixXd mu, logvar, sigma, z, reconstruction;
};

VaeLossParts vae_forward(const VaeModel& model, const Eigen::MatrixXd& batch,
                         const VaeConfig& config, const Eigen::MatrixXd& noise,
                         VaeForwardState& state) {
    if (batch.cols() == 0) throw std::invalid_argument("vae_loss: empty batch");
    const auto k = static_cast<Eigen::Index>(model.latent_dim);
    const auto batch_size = static_cast<double>(batch.cols());

    const Eigen::MatrixXd enc_out =
        neural::forward_cached(model.encoder, batch, state.encoder_cache);
    state.mu = enc_out.topRows(k);
    state.logvar = enc_out.bottomRows(k);
    state.sigma = (state.logvar.array() / 2.0).exp();
    state.z = state.mu.array() + noise.array() * state.sigma.array();
    state.reconstruction = neural::forward_cached(model.decoder, state.z, state.decoder_cache);

    VaeLossParts parts;
    parts.recon = (state.reconstruction - batch).squaredNorm() /
                  (2.0 * config.recon_scale_c * batch_size);
    parts.kl = kl_unit_gaussian_batch(state.mu, state.logvar).sum() / batch_size;
    parts.total = parts.recon + config.beta * parts.kl;
    return parts;
}

}  // namespace

VaeLossParts vae_loss(const VaeModel& model, const Eigen::MatrixXd& batch,
                      const VaeConfig& config, const Eigen::MatrixXd& noise) {
    VaeForwardState state;
    return vae_forward(model, batch, config, noise, state);
}

VaeLossParts vae_backward(const VaeModel& model, const Eigen::MatrixXd& batch,
                          const VaeConfig& config, const Eigen::MatrixXd& noise,
                          VaeGradients& grads) {
    VaeForwardState state;
    const VaeLossParts parts = vae_forward(model, batch, config, noise, state);
    const auto batch_size = static_cast<double>(batch.cols());

    // d recon / d x_hat, recon summed over points and averaged over the batch.
    const Eigen::MatrixXd recon_grad =
        (state.reconstruction - batch) / (config.recon_scale_c * batch_size);
    grads.decoder = neural::backprop(model.decoder, state.decoder_cache, recon_grad);
    const Eigen::MatrixXd& dz = grads.decoder.inputs;

    const double kl_scale = config.beta / batch_size;
    const Eigen::MatrixXd dmu = dz + kl_scale * state.mu;
    const Eigen::MatrixXd dlogvar =
        (0.5 * dz.array() * noise.array() * state.sigma.array() +
         0.5 * kl_scale * (state.logvar.array().exp() - 1.0))
            .matrix();

    Eigen::MatrixXd enc_grad(dmu.rows() + dlogvar.rows(), dmu.cols());
    enc_grad << dmu, dlogvar;
    grads.encoder = neural::backprop(model.encoder, state.encoder_cache, enc_grad);
    return parts;
}

double reconstruction_mae(const VaeModel& model, const dataset::Dataset& data,
                          const std::vector<std::size_t>& indices) {
    Eigen::MatrixXd x, y;
    neural::pack_batch(data, indices, x, y);
    const Encoding enc = encode(model, y);
    const Eigen::MatrixXd recon = neural::forward(model.decoder, enc.mu);
    return neural::mae_metric(recon, y);
}

VaeTrainReport train_vae(VaeModel& model, const dataset::Dataset& data,
                         const dataset::DataSplit& split, const VaeConfig& config) {
    if (split.train.empty()) throw std::invalid_argument("train_vae: empty train split");
    const auto start_time = std::chrono::steady_clock::now();
    const auto k = static_cast<Eigen::Index>(model.latent_dim);

    std::vector<std::size_t> order = split.train;
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    neural::TrainConfig adam_cfg;
    adam_cfg.learning_rate = config.learning_rate;
    neural::AdamState enc_adam = neural::AdamState::for_model(model.encoder);
    neural::AdamState dec_adam = neural::AdamState::for_model(model.decoder);

    VaeTrainReport report;
    Eigen::MatrixXd batch_x, batch_labels;
    VaeGradients grads;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0, recon_sum = 0.0, kl_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, order.size());
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            neural::pack_batch(data, batch, batch_x, batch_labels);
            // spectra are the labels of the dataset; the VAE autoencodes them
            Eigen::MatrixXd noise(k, batch_labels.cols());
            for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = gauss(rng);

            const VaeLossParts parts = vae_backward(model, batch_labels, config, noise, grads);
            if (!std::isfinite(parts.total)) {
                throw std::runtime_error("train_vae: loss diverged at epoch " +
                                         std::to_string(epoch));
            }
            neural::adam_step(enc_adam, model.encoder, grads.encoder, adam_cfg);
            neural::adam_step(dec_adam, model.decoder, grads.decoder, adam_cfg);
            loss_sum += parts.total;
            recon_sum += parts.recon;
            kl_sum += parts.kl;
            ++batches;
        }
        report.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
        report.epoch_recon.push_back(recon_sum / static_cast<double>(batches));
        report.epoch_kl.push_back(kl_sum / static_cast<double>(batches));
    }

    report.test_reconstruction_mae = reconstruction_mae(model, data, split.test);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return report;
}

SupervisedAutoencoder supervised_autoencoder(const dataset::Dataset& fd_data,
                                             const dataset::DataSplit& split,
                                             std::uint64_t seed) {
    if (fd_data.problem != dataset::ProblemKind::simplified) {
        throw std::invalid_argument("supervised_autoencoder: needs a simplified (F, delta0) dataset");
    }
    const std::size_t spectrum_dim = fd_data.label_length;

    // Encoder regression target is the normalized (F, delta0) pair, so build a
    // flipped view of the dataset with spectra as features.
    dataset::Dataset flipped;
    flipped.problem = fd_data.problem;
    flipped.label_length = fd_data.normalization.arity();
    flipped.normalization = fd_data.normalization;
    flipped.records.resize(fd_data.records.size());
    for (std::size_t i = 0; i < fd_data.records.size(); ++i) {
        flipped.records[i].features = fd_data.records[i].label;
        flipped.records[i].label = fd_data.records[i].features;
        flipped.records[i].raw_params = fd_data.records[i].raw_params;
    }
    // pack_batch sizes features by normalization arity; give the flipped view a
    // dummy per-point identity map over the spectrum.
    flipped.normalization.feature_names.assign(spectrum_dim, "t");
    flipped.normalization.source_min.assign(spectrum_dim, 0.0);
    flipped.normalization.source_max.assign(spectrum_dim, 1.0);

    SupervisedAutoencoder result;
    result.encoder = neural::make_mlp({spectrum_dim, 100, 100, 100, 100, 2},
                                      neural::ActivationKind::swish, seed);
    result.decoder = neural::make_mlp({2, 100, 100, 100, 100, spectrum_dim},
                                      neural::ActivationKind::swish, seed + 1);
    result.encoder.normalization = fd_data.normalization;
    result.decoder.normalization = fd_data.normalization;

    neural::TrainConfig enc_cfg;
    enc_cfg.seed = seed;
    neural::train(result.encoder, flipped, split, enc_cfg);

    neural::TrainConfig dec_cfg;
    dec_cfg.seed = seed + 1;
    dec_cfg.patience = 50;
    neural::train(result.decoder, fd_data, split, dec_cfg);

    Eigen::MatrixXd test_features, test_spectra;
    neural::pack_batch(fd_data, split.test, test_features, test_spectra);
    result.decoder_test_mae =
        neural::mae_metric(neural::forward(result.decoder, test_features), test_spectra);
    const Eigen::MatrixXd predicted_params = neural::forward(result.encoder, test_spectra);
    result.composed_test_mae =
        neural::mae_metric(neural::forward(result.decoder, predicted_params), test_spectra);
    return result;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("pearson: need two equal-length series");
    }
    const auto n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return cov / std::sqrt(var_a * var_b);
}

std::size_t LatentStats::informative_dims(double kl_threshold) const {
    std::size_t count = 0;
    for (double kl : mean_kl) {
        if (kl >= kl_threshold) ++count;
    }
    return count;
}

LatentStats latent_analysis(const VaeModel& model, const dataset::Dataset& fd_data,
                            const std::vector<std::size_t>& indices) {
    if (fd_data.problem != dataset::ProblemKind::simplified) {
        throw std::invalid_argument("latent_analysis: needs a simplified (F, delta0) dataset");
    }
    Eigen::MatrixXd features, spectra;
    neural::pack_batch(fd_data, indices, features, spectra);
    const Encoding enc = encode(model, spectra);
    const auto k = static_cast<Eigen::Index>(model.latent_dim);
    const auto n = static_cast<Eigen::Index>(indices.size());

    LatentStats stats;
    stats.mu = enc.mu;
    stats.kl = 0.5 * (enc.mu.array().square() + enc.logvar.array().exp() - enc.logvar.array() - 1.0);
    stats.mean_kl.resize(static_cast<std::size_t>(k));
    for (Eigen::Index d = 0; d < k; ++d) {
        stats.mean_kl[static_cast<std::size_t>(d)] = stats.kl.row(d).mean();
    }

    stats.f_coeff.resize(static_cast<std::size_t>(n));
    stats.delta0.resize(static_cast<std::size_t>(n));
    stats.inv_one_plus_f.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& raw = fd_data.records[indices[static_cast<std::size_t>(i)]].raw_params;
        stats.f_coeff[static_cast<std::size_t>(i)] = raw[0];
        stats.delta0[static_cast<std::size_t>(i)] = raw[1];
        stats.inv_one_plus_f[static_cast<std::size_t>(i)] = 1.0 / (1.0 + raw[0]);
    }

    for (Eigen::Index d = 0; d < k; ++d) {
        std::vector<double> mu_d(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) mu_d[static_cast<std::size_t>(i)] = stats.mu(d, i);
        stats.corr_f.push_back(pearson(mu_d, stats.f_coeff));
        stats.corr_delta0.push_back(pearson(mu_d, stats.delta0));
        stats.corr_inv_one_plus_f.push_back(pearson(mu_d, stats.inv_one_plus_f));
    }
    return stats;
}

void write_latent_csv(const LatentStats& stats, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_latent_csv: cannot open " + path.string());
    const auto k = stats.mu.rows();
    os << "sample_id,F,delta0,one_over_1_plus_F";
    for (Eigen::Index d = 0; d < k; ++d) os << ",mu_" << (d + 1);
    for (Eigen::Index d = 0; d < k; ++d) os << ",kl_" << (d + 1);
    os << "\n";
    os.precision(12);
    for (Eigen::Index i = 0; i < stats.mu.cols(); ++i) {
        os << i << ',' << stats.f_coeff[static_cast<std::size_t>(i)] << ','
           << stats.delta0[static_cast<std::size_t>(i)] << ','
           << stats.inv_one_plus_f[static_cast<std::size_t>(i)];
        for (Eigen::Index d = 0; d < k; ++d) os << ',' << stats.mu(d, i);
        for (Eigen::Index d = 0; d < k; ++d) os << ',' << stats.kl(d, i);
        os << "\n";
    }
}

void save_vae(const VaeModel& model, const std::filesystem::path& path) {
    json j;
    j["schema_version"] = dataset::kSchemaVersion;
    j["latent_dim"] = model.latent_dim;
    j["encoder"] = json::parse(neural::model_to_json_string(model.encoder));
    j["decoder"] = json::parse(neural::model_to_json_string(model.decoder));
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_vae: cannot open " + path.string());
    os << j.dump() << "\n";
}

VaeModel load_vae(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_vae: cannot open " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("load_vae: parse error in " + path.string() + ": " + e.what());
    }
    if (j.at("schema_version").get<int>() != dataset::kSchemaVersion) {
        throw std::runtime_error("load_vae: unsupported schema_version");
    }
    VaeModel model;
    model.latent_dim = j.at("latent_dim").get<std::size_t>();
    model.encoder = neural::model_from_json_string(j.at("encoder").dump());
    model.decoder = neural::model_from_json_string(j.at("decoder").dump());
    if (model.encoder.output_dim() != 2 * model.latent_dim ||
        model.decoder.input_dim() != model.latent_dim) {
        throw std::runtime_error("load_vae: inconsistent latent dimension");
    }
    return model;
}

}  // namespace fpinv::vae
