#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpinv/neural.hpp"
#include "fpinv/optics.hpp"

// Gradient-based inverse design through a frozen forward surrogate. Gradient
// descent always runs on the transmission MSE; a configurable secondary loss
// drives the 1-D grid searches used for initialization and periodic
// re-initialization. All parameters live in the surrogate's normalized range.

namespace fpinv::inverse {

enum class InitLoss { transmission_mse, fourier_mse, combined };

std::string init_loss_name(InitLoss loss);
InitLoss init_loss_from_name(const std::string& name);

struct InverseConfig {
    InitLoss init_loss = InitLoss::combined;
    std::size_t reinit_every = 100;  // gradient steps between re-initializations; 0 disables
    std::size_t max_iters = 1000;
    double learning_rate = 0.01;
    std::size_t grid_points = 200;
    bool clamp_to_range = true;
    /// Start delta0 at the low edge of the range instead of the grid search
    /// (local-minimum demonstration mode).
    bool edge_init = false;
    std::uint64_t seed = 0;
};

struct TrajectoryPoint {
    std::vector<double> params;  // normalized
    double mse = 0.0;
};

struct InverseResult {
    std::vector<TrajectoryPoint> trajectory;
    std::vector<double> final_params_normalized;
    std::vector<double> final_params_physical;
    std::vector<double> final_spectrum;
    double final_mse = 0.0;
    double final_mae = 0.0;
    std::optional<double> baseline_mae;  // MAE of surrogate(true params) vs target
};

struct TargetSpectrum {
    std::vector<double> values;
    std::string provenance;  // "test:IDX" or "file:PATH"
    /// Normalized true parameters, when the target comes from the test set.
    std::optional<std::vector<double>> true_params_normalized;
};

/// Transmission MSE between the surrogate output and the target plus its
/// gradient w.r.t. the normalized input parameters.
std::pair<double, Eigen::VectorXd> objective_grad(const neural::MlpModel& model,
                                                  const Eigen::VectorXd& params_normalized,
                                                  const std::vector<double>& target);

/// Secondary loss value of the surrogate prediction at the given parameters.
double init_loss_value(const neural::MlpModel& model, const Eigen::VectorXd& params_normalized,
                       const std::vector<double>& target, InitLoss loss);

/// Argmin of the secondary loss over grid_points values of delta0 with F held
/// fixed; ties break toward the smallest delta0.
double grid_init_delta0(const neural::MlpModel& model, const std::vector<double>& target,
                        double f_fixed_normalized, const InverseConfig& config);

/// Inversion of an (F, delta0) surrogate: F starts at the normalized midpoint,
/// delta0 by section search, Adam on the transmission MSE with periodic
/// delta0 re-initialization at the current F.
InverseResult invert_fd(const neural::MlpModel& model, const TargetSpectrum& target,
                        const InverseConfig& config);

/// Inversion of a (theta, n, l) surrogate with the sequential 3-step grid
/// initialization and full 3-step re-initialization.
InverseResult invert_mat(const neural::MlpModel& model, const TargetSpectrum& target,
                         const InverseConfig& config);

/// Dispatches on the surrogate arity (2 -> invert_fd, 3 -> invert_mat).
InverseResult invert(const neural::MlpModel& model, const TargetSpectrum& target,
                     const InverseConfig& config);

struct BatchRow {
    std::size_t target_id = 0;
    std::string provenance;
    double final_mae = 0.0;
    std::optional<double> baseline_mae;
    double delta = 0.0;  // final_mae - baseline_mae (final_mae when no baseline)
};

struct BatchReport {
    std::vector<BatchRow> rows;
    std::vector<std::size_t> histogram;  // 1-percentage-point bins of delta;
                                         // bin 0 also collects negative deltas
    std::vector<std::pair<std::size_t, std::string>> failures;

    double first_bin_fraction() const;
};

/// Runs one inversion per target; individual failures are recorded and the
/// batch continues. Deterministic for a fixed config seed, also with threads.
BatchReport evaluate_batch(const neural::MlpModel& model,
                           const std::vector<TargetSpectrum>& targets,
                           const InverseConfig& config, std::size_t threads = 1);

/// Loads a (x, value) CSV and linearly interpolates it onto the grid;
/// out-of-range x values clip to the nearest sample.
TargetSpectrum load_target(const std::filesystem::path& path, const optics::WavelengthGrid& grid);

void write_trajectory_csv(const InverseResult& result, const std::vector<std::string>& param_names,
                          const std::filesystem::path& path);
void write_batch_csv(const BatchReport& report, const std::filesystem::path& path);
void write_histogram_csv(const BatchReport& report, const std::filesystem::path& path);

}  // namespace fpinv::inverse
