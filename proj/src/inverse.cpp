#include "fpinv/inverse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fpinv/spectral.hpp"

namespace fpinv::inverse {

std::string init_loss_name(InitLoss loss) {
    switch (loss) {
        case InitLoss::transmission_mse: return "mse";
        case InitLoss::fourier_mse: return "fourier";
        case InitLoss::combined: return "combined";
    }
    throw std::logic_error("init_loss_name: bad value");
}

InitLoss init_loss_from_name(const std::string& name) {
    if (name == "mse" || name == "transmission_mse") return InitLoss::transmission_mse;
    if (name == "fourier" || name == "fourier_mse") return InitLoss::fourier_mse;
    if (name == "combined") return InitLoss::combined;
    throw std::invalid_argument("unknown init loss: " + name);
}

namespace {

std::vector<double> predict(const neural::MlpModel& model, const Eigen::VectorXd& params) {
    const Eigen::MatrixXd out = neural::forward(model, Eigen::MatrixXd(params));
    return {out.data(), out.data() + out.size()};
}

double secondary_loss(const std::vector<double>& pred, const std::vector<double>& target,
                      const spectral::PowerSpectrum& target_power, InitLoss loss) {
    switch (loss) {
        case InitLoss::transmission_mse: return spectral::mse(pred, target);
        case InitLoss::fourier_mse:
            return spectral::fourier_mse(spectral::power_spectrum(pred), target_power);
        case InitLoss::combined:
            return spectral::mse(pred, target) +
                   spectral::fourier_mse(spectral::power_spectrum(pred), target_power);
    }
    throw std::logic_error("secondary_loss: bad value");
}

/// 1-D section search: scan `grid_points` values of coordinate `coord` with the
/// other coordinates fixed, return the argmin value (ties -> smallest value).
double section_search(const neural::MlpModel& model, Eigen::VectorXd params, Eigen::Index coord,
                      const std::vector<double>& target,
                      const spectral::PowerSpectrum& target_power, const InverseConfig& config) {
    const double lo = model.normalization.target_lo;
    const double hi = model.normalization.target_hi;
    const auto points = static_cast<Eigen::Index>(config.grid_points);

    Eigen::MatrixXd batch(params.size(), points);
    for (Eigen::Index i = 0; i < points; ++i) {
        params[coord] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        batch.col(i) = params;
    }
    const Eigen::MatrixXd preds = neural::forward(model, batch);

    double best_value = lo;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<double> pred(static_cast<std::size_t>(preds.rows()));
    for (Eigen::Index i = 0; i < points; ++i) {
        for (Eigen::Index r = 0; r < preds.rows(); ++r) {
            pred[static_cast<std::size_t>(r)] = preds(r, i);
        }
        const double loss = secondary_loss(pred, target, target_power, config.init_loss);
        if (loss < best_loss) {  // strict: first (smallest) argmin wins
            best_loss = loss;
            best_value = batch(coord, i);
        }
    }
    return best_value;
}

void clamp_params(Eigen::VectorXd& params, const neural::MlpModel& model,
                  const InverseConfig& config) {
    if (!config.clamp_to_range) return;
    const double lo = model.normalization.target_lo;
    const double hi = model.normalization.target_hi;
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        params[i] = std::clamp(params[i], lo, hi);
    }
}

InverseResult run_descent(const neural::MlpModel& model, const TargetSpectrum& target,
                          const InverseConfig& config, Eigen::VectorXd params,
                          const spectral::PowerSpectrum& target_power,
                          const std::function<void(Eigen::VectorXd&)>& reinitialize) {
    InverseResult result;
    result.trajectory.reserve(config.max_iters + 1);

    neural::AdamVector adam(params.size());
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        if (config.reinit_every > 0 && iter > 0 && iter % config.reinit_every == 0) {
            reinitialize(params);
            adam = neural::AdamVector(params.size());  // moments are stale after the jump
        }
        auto [mse, grad] = objective_grad(model, params, target.values);
        if (!std::isfinite(mse)) {
            throw std::runtime_error("inversion diverged (NaN) at iteration " +
                                     std::to_string(iter));
        }
        result.trajectory.push_back({{params.data(), params.data() + params.size()}, mse});
        adam.update(params, grad, config.learning_rate);
        clamp_params(params, model, config);
    }

    const std::vector<double> final_pred = predict(model, params);
    result.final_mse = spectral::mse(final_pred, target.values);
    result.trajectory.push_back({{params.data(), params.data() + params.size()}, result.final_mse});
    result.final_params_normalized.assign(params.data(), params.data() + params.size());
    // models without an attached normalization report normalized values as-is
    result.final_params_physical =
        model.normalization.arity() == result.final_params_normalized.size()
            ? model.normalization.denormalize_all(result.final_params_normalized)
            : result.final_params_normalized;
    result.final_spectrum = final_pred;
    result.final_mae = neural::mae_metric(final_pred, target.values);

    if (target.true_params_normalized) {
        Eigen::Map<const Eigen::VectorXd> truth(target.true_params_normalized->data(),
                                                static_cast<Eigen::Index>(
                                                    target.true_params_normalized->size()));
        result.baseline_mae =
            neural::mae_metric(predict(model, truth), target.values);
    }
    return result;
}

}  // namespace

std::pair<double, Eigen::VectorXd> objective_grad(const neural::MlpModel& model,
                                                  const Eigen::VectorXd& params_normalized,
                                                  const std::vector<double>& target) {
    if (static_cast<std::size_t>(params_normalized.size()) != model.input_dim()) {
        throw std::invalid_argument("objective_grad: parameter arity mismatch");
    }
    if (target.size() != model.output_dim()) {
        throw std::invalid_argument("objective_grad: target length mismatch");
    }
    Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(target.size()));
    double loss = 0.0;
    const neural::Gradients grads =
        neural::backward(model, Eigen::MatrixXd(params_normalized), Eigen::MatrixXd(y), &loss);
    return {loss, Eigen::VectorXd(grads.inputs.col(0))};
}

double init_loss_value(const neural::MlpModel& model, const Eigen::VectorXd& params_normalized,
                       const std::vector<double>& target, InitLoss loss) {
    return secondary_loss(predict(model, params_normalized), target,
                          spectral::power_spectrum(target), loss);
}

double grid_init_delta0(const neural::MlpModel& model, const std::vector<double>& target,
                        double f_fixed_normalized, const InverseConfig& config) {
    if (model.input_dim() != 2) {
        throw std::invalid_argument("grid_init_delta0: needs an (F, delta0) surrogate");
    }
    Eigen::VectorXd params(2);
    params << f_fixed_normalized, model.normalization.target_lo;
    return section_search(model, params, 1, target, spectral::power_spectrum(target), config);
}

InverseResult invert_fd(const neural::MlpModel& model, const TargetSpectrum& target,
                        const InverseConfig& config) {
    if (model.input_dim() != 2) {
        throw std::invalid_argument("invert_fd: needs an (F, delta0) surrogate");
    }
    const double lo = model.normalization.target_lo;
    const double hi = model.normalization.target_hi;
    const double mid = 0.5 * (lo + hi);
    const spectral::PowerSpectrum target_power = spectral::power_spectrum(target.values);

    Eigen::VectorXd params(2);
    params[0] = mid;
    params[1] = config.edge_init ? lo : grid_init_delta0(model, target.values, mid, config);

    auto reinit = [&](Eigen::VectorXd& p) {
        p[1] = section_search(model, p, 1, target.values, target_power, config);
    };
    return run_descent(model, target, config, params, target_power, reinit);
}

InverseResult invert_mat(const neural::MlpModel& model, const TargetSpectrum& target,
                         const InverseConfig& config) {
    if (model.input_dim() != 3) {
        throw std::invalid_argument("invert_mat: needs a (theta, n, l) surrogate");
    }
    const double lo = model.normalization.target_lo;
    const double hi = model.normalization.target_hi;
    const spectral::PowerSpectrum target_power = spectral::power_spectrum(target.values);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> uniform(lo, hi);

    // 3-step initialization: theta with random (n, l), then n with a fresh
    // random l, then l with the values found so far.
    Eigen::VectorXd params(3);
    params << 0.0, uniform(rng), uniform(rng);
    params[0] = section_search(model, params, 0, target.values, target_power, config);
    params[2] = uniform(rng);
    params[1] = section_search(model, params, 1, target.values, target_power, config);
    params[2] = section_search(model, params, 2, target.values, target_power, config);

    auto reinit = [&](Eigen::VectorXd& p) {
        for (Eigen::Index coord = 0; coord < 3; ++coord) {
            p[coord] = section_search(model, p, coord, target.values, target_power, config);
        }
    };
    return run_descent(model, target, config, params, target_power, reinit);
}

InverseResult invert(const neural::MlpModel& model, const TargetSpectrum& target,
                     const InverseConfig& config) {
    switch (model.input_dim()) {
        case 2: return invert_fd(model, target, config);
        case 3: return invert_mat(model, target, config);
        default:
            throw std::invalid_argument("invert: surrogate arity must be 2 or 3");
    }
}

double BatchReport::first_bin_fraction() const {
    if (rows.empty()) return 0.0;
    std::size_t count = 0;
    for (const auto& row : rows) {
        if (row.delta < 0.01) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(rows.size());
}

BatchReport evaluate_batch(const neural::MlpModel& model,
                           const std::vector<TargetSpectrum>& targets,
                           const InverseConfig& config, std::size_t threads) {
    BatchReport report;
    std::vector<std::optional<BatchRow>> rows(targets.size());
    std::vector<std::optional<std::string>> errors(targets.size());

    auto run_one = [&](std::size_t i) {
        InverseConfig cfg = config;
        cfg.seed = config.seed + i;  // per-target stream, independent of scheduling
        try {
            const InverseResult res = invert(model, targets[i], cfg);
            BatchRow row;
            row.target_id = i;
            row.provenance = targets[i].provenance;
            row.final_mae = res.final_mae;
            row.baseline_mae = res.baseline_mae;
            row.delta = res.baseline_mae ? res.final_mae - *res.baseline_mae : res.final_mae;
            rows[i] = std::move(row);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    if (threads <= 1) {
        for (std::size_t i = 0; i < targets.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (std::size_t t = 0; t < std::min(threads, targets.size()); ++t) {
            pool.emplace_back([&]() {
                for (std::size_t i = next.fetch_add(1); i < targets.size();
                     i = next.fetch_add(1)) {
                    run_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (errors[i]) {
            report.failures.emplace_back(i, *errors[i]);
            continue;
        }
        const BatchRow& row = *rows[i];
        const auto bin = static_cast<std::size_t>(std::max(0.0, std::floor(row.delta / 0.01)));
        if (report.histogram.size() <= bin) report.histogram.resize(bin + 1, 0);
        ++report.histogram[bin];
        report.rows.push_back(row);
    }
    return report;
}

TargetSpectrum load_target(const std::filesystem::path& path, const optics::WavelengthGrid& grid) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_target: cannot open " + path.string());

    std::vector<double> xs, ys;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x = 0.0, y = 0.0;
        if (!(ss >> x >> y)) {
            if (line_no == 1) continue;  // optional header
            throw std::runtime_error("load_target: malformed line " + std::to_string(line_no) +
                                     " in " + path.string());
        }
        xs.push_back(x);
        ys.push_back(y);
    }
    if (xs.size() < 2) {
        throw std::runtime_error("load_target: need at least 2 points in " + path.string());
    }
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] <= xs[i - 1]) {
            throw std::runtime_error("load_target: x values must be strictly increasing in " +
                                     path.string());
        }
    }

    TargetSpectrum target;
    target.provenance = "file:" + path.string();
    target.values.resize(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double x = grid.value(i);
        if (x <= xs.front()) {
            target.values[i] = ys.front();
        } else if (x >= xs.back()) {
            target.values[i] = ys.back();
        } else {
            const auto it = std::upper_bound(xs.begin(), xs.end(), x);
            const auto hi_idx = static_cast<std::size_t>(it - xs.begin());
            const double t = (x - xs[hi_idx - 1]) / (xs[hi_idx] - xs[hi_idx - 1]);
            target.values[i] = ys[hi_idx - 1] + t * (ys[hi_idx] - ys[hi_idx - 1]);
        }
    }
    return target;
}

void write_trajectory_csv(const InverseResult& result, const std::vector<std::string>& param_names,
                          const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_trajectory_csv: cannot open " + path.string());
    os << "iter";
    for (const auto& name : param_names) os << ',' << name;
    os << ",mse\n";
    os.precision(12);
    for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
        os << i;
        for (double p : result.trajectory[i].params) os << ',' << p;
        os << ',' << result.trajectory[i].mse << "\n";
    }
}

void write_batch_csv(const BatchReport& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_batch_csv: cannot open " + path.string());
    os << "target_id,provenance,final_mae,baseline_mae,delta\n";
    os.precision(12);
    for (const auto& row : report.rows) {
        os << row.target_id << ',' << row.provenance << ',' << row.final_mae << ',';
        if (row.baseline_mae) {
            os << *row.baseline_mae;
        } else {
            os << "nan";
        }
        os << ',' << row.delta << "\n";
    }
}

void write_histogram_csv(const BatchReport& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_histogram_csv: cannot open " + path.string());
    os << "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < report.histogram.size(); ++i) {
        os << (static_cast<double>(i) * 0.01) << ',' << (static_cast<double>(i + 1) * 0.01) << ','
           << report.histogram[i] << "\n";
    }
}

}  // namespace fpinv::inverse
