#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fpinv/dataset.hpp"
#include "fpinv/neural.hpp"

// Beta-variational autoencoder over transmission spectra: Gaussian encoder
// (means and log-variances), reparameterized sampling, KL against the unit
// Gaussian prior, fixed-epoch training and latent-structure analysis against
// the physical parameters F and delta0.

namespace fpinv::vae {

inline constexpr std::size_t kDefaultLatentDim = 5;

struct VaeModel {
    neural::MlpModel encoder;  // spectrum -> (mu, logvar), output dim = 2 * latent_dim
    neural::MlpModel decoder;  // latent -> spectrum
    std::size_t latent_dim = kDefaultLatentDim;
};

struct VaeConfig {
    double beta = 0.001;
    double recon_scale_c = 1.0;  // decoder-variance constant in exp[-(x-f(z))^2 / 2c]
    std::size_t batch_size = 100;
    std::size_t epochs = 100;
    double learning_rate = 0.001;
    std::uint64_t seed = 0;
};

/// Encoder/decoder with 4 hidden layers of 100 Swish nodes each.
VaeModel make_vae(std::size_t spectrum_dim, std::size_t latent_dim, std::uint64_t seed);

struct Encoding {
    Eigen::MatrixXd mu;      // latent_dim x batch
    Eigen::MatrixXd logvar;  // latent_dim x batch
};

Encoding encode(const VaeModel& model, const Eigen::MatrixXd& spectra);
std::pair<std::vector<double>, std::vector<double>> encode(const VaeModel& model,
                                                           const std::vector<double>& spectrum);

/// z = mu + noise .* exp(logvar / 2); noise is standard normal, supplied
/// externally so gradients flow to mu and logvar only.
Eigen::MatrixXd reparameterize(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar,
                               const Eigen::MatrixXd& noise);

/// KL(q || N(0, I)) = 0.5 sum(mu^2 + exp(logvar) - logvar - 1), per column.
double kl_unit_gaussian(const Eigen::VectorXd& mu, const Eigen::VectorXd& logvar);
Eigen::VectorXd kl_unit_gaussian_batch(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar);

struct VaeLossParts {
    double total = 0.0;
    double recon = 0.0;  // mean over batch of sum_points (x - f(z))^2 / 2c
    double kl = 0.0;     // mean over batch of KL to the prior
};

/// Forward loss with one externally supplied noise draw per sample.
VaeLossParts vae_loss(const VaeModel& model, const Eigen::MatrixXd& batch,
                      const VaeConfig& config, const Eigen::MatrixXd& noise);

struct VaeGradients {
    neural::Gradients encoder;
    neural::Gradients decoder;
};

/// Loss plus exact gradients for both networks under fixed noise.
VaeLossParts vae_backward(const VaeModel& model, const Eigen::MatrixXd& batch,
                          const VaeConfig& config, const Eigen::MatrixXd& noise,
                          VaeGradients& grads);

struct VaeTrainReport {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_recon;
    std::vector<double> epoch_kl;
    double test_reconstruction_mae = 0.0;  // deterministic (z = mu) reconstruction
    double wall_seconds = 0.0;
};

/// Fixed-epoch Adam training (no early stopping) on the train split.
VaeTrainReport train_vae(VaeModel& model, const dataset::Dataset& data,
                         const dataset::DataSplit& split, const VaeConfig& config);

/// Deterministic reconstruction (z = mu) MAE over the given records.
double reconstruction_mae(const VaeModel& model, const dataset::Dataset& data,
                          const std::vector<std::size_t>& indices);

struct SupervisedAutoencoder {
    neural::MlpModel encoder;  // spectrum -> normalized (F, delta0)
    neural::MlpModel decoder;  // normalized (F, delta0) -> spectrum
    double composed_test_mae = 0.0;
    double decoder_test_mae = 0.0;  // decoder alone on true (F, delta0)
};

/// Trains encoder and decoder independently by supervised regression on a
/// simplified (F, delta0) dataset, then composes them.
SupervisedAutoencoder supervised_autoencoder(const dataset::Dataset& fd_data,
                                             const dataset::DataSplit& split,
                                             std::uint64_t seed);

struct LatentStats {
    std::vector<double> mean_kl;              // per latent dimension
    Eigen::MatrixXd mu;                       // latent_dim x samples
    Eigen::MatrixXd kl;                       // latent_dim x samples
    std::vector<double> f_coeff;              // per sample
    std::vector<double> delta0;               // per sample
    std::vector<double> inv_one_plus_f;       // per sample
    std::vector<double> corr_f;               // Pearson r per dimension (NaN if degenerate)
    std::vector<double> corr_delta0;
    std::vector<double> corr_inv_one_plus_f;

    std::size_t informative_dims(double kl_threshold = 0.05) const;
};

/// Pearson correlation; NaN when either side has zero variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

/// Latent means, per-dimension KL and correlations against F, delta0 and
/// 1/(1+F) over the given records of a simplified dataset.
LatentStats latent_analysis(const VaeModel& model, const dataset::Dataset& fd_data,
                            const std::vector<std::size_t>& indices);

/// Scatter CSV: sample_id, F, delta0, one_over_1_plus_F, mu_1..mu_k, kl_1..kl_k.
void write_latent_csv(const LatentStats& stats, const std::filesystem::path& path);

void save_vae(const VaeModel& model, const std::filesystem::path& path);
VaeModel load_vae(const std::filesystem::path& path);

}  // namespace fpinv::vae
