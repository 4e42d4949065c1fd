// Command-line front end: dataset generation, surrogate training/evaluation,
// beta-VAE training and latent analysis, and gradient-based inverse design.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fpinv/dataset.hpp"
#include "fpinv/inverse.hpp"
#include "fpinv/neural.hpp"
#include "fpinv/optics.hpp"
#include "fpinv/spectral.hpp"
#include "fpinv/svg.hpp"
#include "fpinv/vae.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fpinv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    std::ostringstream ss;
    ss << std::hex << h;
    return h;
}

void write_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw DataError("cannot write " + tmp.string());
        os << text;
    }
    fs::rename(tmp, path);
}

/// One manifest per command, written atomically next to the outputs.
struct Manifest {
    std::string command;
    json config = json::object();
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void write(const fs::path& dir) const {
        json j;
        j["command"] = command;
        j["config"] = config;
        j["wall_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& p : inputs) j["inputs"].push_back(p.string());
        j["outputs"] = json::array();
        for (const auto& p : outputs) {
            json o;
            o["path"] = p.string();
            std::ostringstream ss;
            ss << std::hex << fnv1a_file(p);
            o["fnv1a"] = ss.str();
            j["outputs"].push_back(o);
        }
        write_atomic(dir / (command + ".manifest.json"), j.dump(2) + "\n");
    }
};

/// Optional JSON config file; command-line flags win over file values.
void apply_config_file(CLI::App* cmd, const std::string& config_path) {
    if (config_path.empty()) return;
    std::ifstream is(config_path);
    if (!is) throw DataError("cannot read config file " + config_path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw DataError("config file: " + std::string(e.what()));
    }
    for (const auto& [key, value] : j.items()) {
        auto* opt = cmd->get_option_no_throw("--" + key);
        if (!opt) throw DataError("config file: unknown option \"" + key + "\"");
        if (opt->count() > 0) continue;  // flag given explicitly, keep it
        opt->add_result(value.is_string() ? value.get<std::string>() : value.dump());
        opt->run_callback();
    }
}

dataset::Dataset load_dataset_dir(const fs::path& dir, std::string problem) {
    if (problem.empty()) {
        std::vector<fs::path> csvs;
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.path().extension() == ".csv" &&
                fs::exists(e.path().string() + ".meta.json")) {
                csvs.push_back(e.path());
            }
        }
        if (csvs.size() != 1) {
            throw DataError("--problem required: found " + std::to_string(csvs.size()) +
                            " datasets in " + dir.string());
        }
        return dataset::load_csv(csvs.front());
    }
    const fs::path path = dir / (problem + ".csv");
    if (!fs::exists(path)) throw DataError("dataset not found: " + path.string());
    return dataset::load_csv(path);
}

dataset::DataSplit reference_split(const dataset::Dataset& ds, std::uint64_t seed) {
    // The test set is pinned to a fixed seed so it never moves between
    // retrainings; only the train/validation shuffle follows --seed.
    return dataset::split(ds, /*test_seed=*/0, /*shuffle_seed=*/seed);
}

std::vector<std::size_t> parse_layers(const std::string& text) {
    // "200x6" -> 6 hidden layers of width 200
    const auto x = text.find('x');
    if (x == std::string::npos) throw CLI::ValidationError("--layers", "expected WIDTHxCOUNT");
    const int width = std::stoi(text.substr(0, x));
    const int count = std::stoi(text.substr(x + 1));
    if (width <= 0 || count <= 0) throw CLI::ValidationError("--layers", "expected WIDTHxCOUNT");
    return std::vector<std::size_t>(static_cast<std::size_t>(count),
                                    static_cast<std::size_t>(width));
}

neural::GridMeta grid_meta_for(const dataset::Dataset& ds) {
    if (ds.label_grid == optics::GridKind::wavelength) {
        return {"wavelength", 400.0, 2.0, ds.label_length};
    }
    return {"angle", -89.0, 1.0, ds.label_length};
}

std::vector<double> grid_axis(const neural::GridMeta& g) {
    std::vector<double> x(g.count);
    for (std::size_t i = 0; i < g.count; ++i) x[i] = g.start + g.step * static_cast<double>(i);
    return x;
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const std::string& problem, const fs::path& out_dir, std::uint64_t seed) {
    Manifest manifest;
    manifest.command = "gen-data";
    manifest.config = {{"problem", problem}, {"out", out_dir.string()}, {"seed", seed}};

    fs::create_directories(out_dir);
    dataset::Dataset ds;
    if (problem == "lambda") {
        ds = dataset::generate_lambda_dataset(dataset::GridSpec::reference_lambda());
    } else if (problem == "theta") {
        ds = dataset::generate_theta_dataset(dataset::GridSpec::reference_theta());
    } else if (problem == "fd") {
        ds = dataset::derive_simplified_dataset(
            dataset::generate_lambda_dataset(dataset::GridSpec::reference_lambda()));
    } else {
        throw CLI::ValidationError("--problem", "expected lambda, theta or fd");
    }

    const fs::path csv = out_dir / (problem + ".csv");
    dataset::save_csv(ds, csv);
    manifest.outputs = {csv, fs::path(csv.string() + ".meta.json")};

    std::cout << "problem: " << problem << "\nrows: " << ds.records.size() << "\n";
    for (std::size_t k = 0; k < ds.normalization.arity(); ++k) {
        std::cout << "feature " << ds.normalization.feature_names[k] << ": ["
                  << ds.normalization.source_min[k] << ", " << ds.normalization.source_max[k]
                  << "] -> [" << ds.normalization.target_lo << ", " << ds.normalization.target_hi
                  << "]\n";
    }
    manifest.write(out_dir);
    return kExitOk;
}

int cmd_train(const fs::path& data_dir, const std::string& problem, const std::string& layers,
              const std::string& activation, std::size_t patience, std::size_t max_epochs,
              double learning_rate, std::size_t batch_size, std::uint64_t seed,
              const fs::path& out) {
    Manifest manifest;
    manifest.command = "train";
    manifest.config = {{"data", data_dir.string()},   {"problem", problem},
                       {"layers", layers},            {"activation", activation},
                       {"patience", patience},        {"epochs", max_epochs},
                       {"lr", learning_rate},         {"batch", batch_size},
                       {"seed", seed},                {"out", out.string()}};

    const auto ds = load_dataset_dir(data_dir, problem);
    const auto split = reference_split(ds, seed);

    std::vector<std::size_t> dims;
    dims.push_back(ds.normalization.arity());
    for (auto w : parse_layers(layers)) dims.push_back(w);
    dims.push_back(ds.label_length);

    auto model = neural::make_mlp(dims, neural::activation_from_name(activation), seed + 1);
    model.normalization = ds.normalization;
    model.grid = grid_meta_for(ds);
    {
        std::ostringstream fp;
        fp << dataset::problem_name(ds.problem) << " layers=" << layers << " act=" << activation
           << " seed=" << seed;
        model.training_fingerprint = fp.str();
    }

    neural::TrainConfig cfg;
    cfg.learning_rate = learning_rate;
    cfg.batch_size = batch_size;
    cfg.patience = patience;
    cfg.max_epochs = max_epochs;
    cfg.seed = seed + 2;

    neural::TrainReport report;
    try {
        report = neural::train(model, ds, split, cfg);
    } catch (const std::runtime_error& e) {
        throw NumericError(e.what());
    }

    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    neural::save_model(model, out);

    const fs::path report_csv = out.string() + ".train.csv";
    {
        std::ostringstream os;
        os << "epoch,train_loss,validation_loss\n";
        for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
            os << e << ',' << report.train_loss[e] << ',' << report.validation_loss[e] << "\n";
        }
        write_atomic(report_csv, os.str());
    }

    const fs::path loss_svg = out.string() + ".loss.svg";
    {
        svg::Plot plot;
        plot.title = "training and validation loss";
        plot.x_label = "epoch";
        plot.y_label = "MSE";
        plot.log_y = true;
        std::vector<double> epochs(report.train_loss.size());
        for (std::size_t e = 0; e < epochs.size(); ++e) epochs[e] = static_cast<double>(e);
        plot.series.push_back({epochs, report.train_loss, "#1f77b4", "train"});
        plot.series.push_back({epochs, report.validation_loss, "#d62728", "validation"});
        svg::write(plot, loss_svg);
    }

    const double test_mae = neural::evaluate_mae(model, ds, split.test);
    std::cout << "epochs: " << report.train_loss.size() << " (stopped by " << report.stopped_by
              << ", best " << report.best_epoch << ")\n"
              << "test MAE: " << test_mae << "\n"
              << "wall seconds: " << report.wall_seconds << "\n";

    manifest.inputs = {data_dir};
    manifest.outputs = {out, report_csv, loss_svg};
    manifest.write(out.has_parent_path() ? out.parent_path() : fs::path("."));
    return kExitOk;
}

int cmd_eval(const fs::path& model_path, const fs::path& data_dir, const std::string& problem,
             const std::string& split_name, std::size_t samples, const fs::path& out_dir,
             std::uint64_t seed) {
    Manifest manifest;
    manifest.command = "eval";
    manifest.config = {{"model", model_path.string()}, {"data", data_dir.string()},
                       {"problem", problem},           {"split", split_name},
                       {"samples", samples},           {"out", out_dir.string()},
                       {"seed", seed}};

    const auto model = neural::load_model(model_path);
    const auto ds = load_dataset_dir(data_dir, problem);
    const auto meta = grid_meta_for(ds);
    if (model.grid.kind != meta.kind || model.grid.count != meta.count) {
        throw DataError("model grid (" + model.grid.kind + ", " +
                        std::to_string(model.grid.count) + " points) does not match dataset (" +
                        meta.kind + ", " + std::to_string(meta.count) + " points)");
    }
    if (model.input_dim() != ds.normalization.arity()) {
        throw DataError("model arity does not match dataset features");
    }

    const auto split = reference_split(ds, seed);
    const std::vector<std::size_t>* indices = &split.test;
    if (split_name == "train") indices = &split.train;
    else if (split_name == "validation") indices = &split.validation;
    else if (split_name != "test") throw CLI::ValidationError("--split", "expected train, validation or test");

    fs::create_directories(out_dir);
    const fs::path mae_csv = out_dir / "eval_mae.csv";
    double mae_sum = 0.0, mse_sum = 0.0;
    {
        std::ostringstream os;
        os << "record,mae\n";
        for (const auto idx : *indices) {
            const auto& rec = ds.records[idx];
            const auto pred = neural::forward(model, rec.features);
            const double mae = neural::mae_metric(pred, rec.label);
            mae_sum += mae;
            mse_sum += neural::mse_loss(pred, rec.label);
            os << idx << ',' << mae << "\n";
        }
        write_atomic(mae_csv, os.str());
    }
    const double n = static_cast<double>(indices->size());
    std::cout << "split: " << split_name << " (" << indices->size() << " records)\n"
              << "MAE: " << mae_sum / n << "\nMSE: " << mse_sum / n << "\n";

    // prediction-vs-truth panels for the first few records of the split
    const fs::path panel_svg = out_dir / "eval_panels.svg";
    {
        std::vector<svg::Plot> plots;
        const auto x = grid_axis(model.grid);
        for (std::size_t p = 0; p < std::min(samples, indices->size()); ++p) {
            const auto& rec = ds.records[(*indices)[p]];
            svg::Plot plot;
            plot.title = "record " + std::to_string((*indices)[p]);
            plot.x_label = meta.kind == "angle" ? "theta (deg)" : "lambda (nm)";
            plot.y_label = "T";
            plot.series.push_back({x, rec.label, "#1f77b4", "truth"});
            plot.series.push_back({x, neural::forward(model, rec.features), "#d62728", "prediction"});
            plots.push_back(std::move(plot));
        }
        if (!plots.empty()) svg::write_grid(plots, 2, panel_svg);
    }

    manifest.inputs = {model_path, data_dir};
    manifest.outputs = {mae_csv};
    if (fs::exists(panel_svg)) manifest.outputs.push_back(panel_svg);
    manifest.write(out_dir);
    return kExitOk;
}

int cmd_train_vae(const fs::path& data_dir, const std::string& problem, double beta,
                  std::size_t latent, std::size_t epochs, std::size_t batch, std::uint64_t seed,
                  const fs::path& out) {
    Manifest manifest;
    manifest.command = "train-vae";
    manifest.config = {{"data", data_dir.string()}, {"problem", problem}, {"beta", beta},
                       {"latent", latent},          {"epochs", epochs},   {"batch", batch},
                       {"seed", seed},              {"out", out.string()}};

    const auto ds = load_dataset_dir(data_dir, problem);
    const auto split = reference_split(ds, seed);

    auto model = vae::make_vae(ds.label_length, latent, seed + 1);
    vae::VaeConfig cfg;
    cfg.beta = beta;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.seed = seed + 2;

    vae::VaeTrainReport report;
    try {
        report = vae::train_vae(model, ds, split, cfg);
    } catch (const std::runtime_error& e) {
        throw NumericError(e.what());
    }

    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    vae::save_vae(model, out);
    const fs::path report_csv = out.string() + ".train.csv";
    {
        std::ostringstream os;
        os << "epoch,loss,reconstruction,kl\n";
        for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
            os << e << ',' << report.epoch_loss[e] << ',' << report.epoch_recon[e] << ','
               << report.epoch_kl[e] << "\n";
        }
        write_atomic(report_csv, os.str());
    }

    std::cout << "beta: " << beta << "\ntest reconstruction MAE: "
              << report.test_reconstruction_mae << "\nwall seconds: " << report.wall_seconds
              << "\n";
    manifest.inputs = {data_dir};
    manifest.outputs = {out, report_csv};
    manifest.write(out.has_parent_path() ? out.parent_path() : fs::path("."));
    return kExitOk;
}

int cmd_analyze_latent(const fs::path& model_path, const fs::path& data_dir,
                       const std::string& problem, const fs::path& out_dir, std::uint64_t seed) {
    Manifest manifest;
    manifest.command = "analyze-latent";
    manifest.config = {{"model", model_path.string()},
                       {"data", data_dir.string()},
                       {"problem", problem},
                       {"out", out_dir.string()},
                       {"seed", seed}};

    const auto model = vae::load_vae(model_path);
    const auto ds = load_dataset_dir(data_dir, problem.empty() ? "fd" : problem);
    if (ds.problem != dataset::ProblemKind::simplified) {
        throw DataError("latent analysis needs an (F, delta0) dataset");
    }
    const auto split = reference_split(ds, seed);
    const auto stats = vae::latent_analysis(model, ds, split.test);

    fs::create_directories(out_dir);
    const fs::path scatter_csv = out_dir / "latent_scatter.csv";
    vae::write_latent_csv(stats, scatter_csv);

    const fs::path kl_svg = out_dir / "latent_kl.svg";
    {
        std::vector<std::size_t> counts;  // reuse the histogram renderer as a bar chart
        svg::Plot plot;
        plot.title = "mean KL per latent dimension";
        plot.x_label = "dimension";
        plot.y_label = "KL (nats)";
        svg::Series bars;
        bars.color = "#2ca02c";
        for (std::size_t d = 0; d < stats.mean_kl.size(); ++d) {
            const double lo = static_cast<double>(d) + 0.6;
            const double hi = static_cast<double>(d) + 1.4;
            bars.x.insert(bars.x.end(), {lo, lo, hi, hi});
            bars.y.insert(bars.y.end(), {0.0, stats.mean_kl[d], stats.mean_kl[d], 0.0});
        }
        plot.series.push_back(std::move(bars));
        svg::write(plot, kl_svg);
    }

    std::cout << "informative dimensions (KL >= 0.05 nats): " << stats.informative_dims() << "\n";
    std::cout << "dim  mean_kl  r(F)  r(delta0)  r(1/(1+F))\n";
    auto show = [](double r) {
        return std::isnan(r) ? std::string("degenerate") : std::to_string(r);
    };
    for (std::size_t d = 0; d < stats.mean_kl.size(); ++d) {
        std::cout << d + 1 << "  " << stats.mean_kl[d] << "  " << show(stats.corr_f[d]) << "  "
                  << show(stats.corr_delta0[d]) << "  " << show(stats.corr_inv_one_plus_f[d])
                  << "\n";
    }

    manifest.inputs = {model_path, data_dir};
    manifest.outputs = {scatter_csv, kl_svg};
    manifest.write(out_dir);
    return kExitOk;
}

inverse::TargetSpectrum resolve_target(const std::string& spec, const neural::MlpModel& model,
                                       const fs::path& data_dir, const std::string& problem,
                                       std::uint64_t seed, const dataset::Dataset** ds_out,
                                       dataset::Dataset& ds_storage) {
    if (spec.rfind("test:", 0) == 0) {
        if (data_dir.empty()) throw DataError("--data required for test: targets");
        ds_storage = load_dataset_dir(data_dir, problem);
        *ds_out = &ds_storage;
        const auto split = reference_split(ds_storage, seed);
        const std::size_t pos = std::stoul(spec.substr(5));
        if (pos >= split.test.size()) throw DataError("test index out of range");
        const auto& rec = ds_storage.records[split.test[pos]];
        if (rec.label.size() != model.output_dim()) {
            throw DataError("target length does not match the surrogate output");
        }
        inverse::TargetSpectrum t;
        t.values = rec.label;
        t.provenance = spec;
        t.true_params_normalized = rec.features;
        return t;
    }
    if (model.grid.kind != "wavelength" || model.grid.count != 200) {
        throw DataError("file targets require a 200-point wavelength surrogate");
    }
    return inverse::load_target(spec, optics::WavelengthGrid{});
}

int cmd_invert(const fs::path& model_path, const std::string& target_spec,
               const fs::path& data_dir, const std::string& problem,
               const std::string& init_loss, std::size_t reinit, std::size_t iters,
               bool edge_init, std::uint64_t seed, const fs::path& out_dir) {
    Manifest manifest;
    manifest.command = "invert";
    manifest.config = {{"model", model_path.string()}, {"target", target_spec},
                       {"data", data_dir.string()},    {"problem", problem},
                       {"init-loss", init_loss},       {"reinit", reinit},
                       {"iters", iters},               {"edge-init", edge_init},
                       {"seed", seed},                 {"out", out_dir.string()}};

    const auto model = neural::load_model(model_path);
    const dataset::Dataset* ds = nullptr;
    dataset::Dataset ds_storage;
    const auto target =
        resolve_target(target_spec, model, data_dir, problem, seed, &ds, ds_storage);

    inverse::InverseConfig cfg;
    cfg.init_loss = inverse::init_loss_from_name(init_loss);
    cfg.reinit_every = reinit;
    cfg.max_iters = iters;
    cfg.edge_init = edge_init;
    cfg.seed = seed;
    const auto result = inverse::invert(model, target, cfg);

    fs::create_directories(out_dir);
    const fs::path traj_csv = out_dir / "trajectory.csv";
    inverse::write_trajectory_csv(result, model.normalization.feature_names, traj_csv);

    const fs::path fig_svg = out_dir / "inversion.svg";
    {
        std::vector<svg::Plot> plots;
        svg::Plot fit;
        fit.title = "target vs final prediction";
        fit.x_label = model.grid.kind == "angle" ? "theta (deg)" : "lambda (nm)";
        fit.y_label = "T";
        const auto x = grid_axis(model.grid);
        fit.series.push_back({x, target.values, "#1f77b4", "target"});
        fit.series.push_back({x, result.final_spectrum, "#d62728", "final"});
        plots.push_back(std::move(fit));

        svg::Plot traj;
        traj.title = "parameter trajectories";
        traj.x_label = "step";
        traj.y_label = "normalized value";
        const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
        std::vector<double> steps(result.trajectory.size());
        for (std::size_t i = 0; i < steps.size(); ++i) steps[i] = static_cast<double>(i);
        for (std::size_t k = 0; k < result.final_params_normalized.size(); ++k) {
            std::vector<double> vals(result.trajectory.size());
            for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = result.trajectory[i].params[k];
            traj.series.push_back(
                {steps, vals, colors[k % 3], model.normalization.feature_names[k]});
        }
        plots.push_back(std::move(traj));
        svg::write_grid(plots, 2, fig_svg);
    }

    std::cout << "final MSE: " << result.final_mse << "\nfinal MAE: " << result.final_mae << "\n";
    for (std::size_t k = 0; k < result.final_params_physical.size(); ++k) {
        std::cout << model.normalization.feature_names[k] << ": "
                  << result.final_params_physical[k] << "\n";
    }
    if (result.baseline_mae) {
        std::cout << "baseline MAE: " << *result.baseline_mae
                  << "\ndelta MAE: " << result.final_mae - *result.baseline_mae << "\n";
    }

    manifest.inputs = {model_path};
    if (!data_dir.empty()) manifest.inputs.push_back(data_dir);
    manifest.outputs = {traj_csv, fig_svg};
    manifest.write(out_dir);
    return kExitOk;
}

int cmd_invert_batch(const fs::path& model_path, const fs::path& data_dir,
                     const std::string& problem, std::size_t count, const std::string& init_loss,
                     std::size_t reinit, std::size_t iters, std::size_t threads,
                     std::uint64_t seed, const fs::path& out_dir) {
    Manifest manifest;
    manifest.command = "invert-batch";
    manifest.config = {{"model", model_path.string()}, {"data", data_dir.string()},
                       {"problem", problem},           {"count", count},
                       {"init-loss", init_loss},       {"reinit", reinit},
                       {"iters", iters},               {"threads", threads},
                       {"seed", seed},                 {"out", out_dir.string()}};

    const auto model = neural::load_model(model_path);
    const auto ds = load_dataset_dir(data_dir, problem);
    const auto split = reference_split(ds, seed);

    std::vector<inverse::TargetSpectrum> targets;
    for (std::size_t i = 0; i < std::min(count, split.test.size()); ++i) {
        const auto& rec = ds.records[split.test[i]];
        if (rec.label.size() != model.output_dim()) {
            throw DataError("target length does not match the surrogate output");
        }
        inverse::TargetSpectrum t;
        t.values = rec.label;
        t.provenance = "test:" + std::to_string(i);
        t.true_params_normalized = rec.features;
        targets.push_back(std::move(t));
    }

    inverse::InverseConfig cfg;
    cfg.init_loss = inverse::init_loss_from_name(init_loss);
    cfg.reinit_every = reinit;
    cfg.max_iters = iters;
    cfg.seed = seed;
    const auto report = inverse::evaluate_batch(model, targets, cfg, threads);

    fs::create_directories(out_dir);
    const fs::path batch_csv = out_dir / "batch.csv";
    const fs::path hist_csv = out_dir / "histogram.csv";
    const fs::path hist_svg = out_dir / "histogram.svg";
    inverse::write_batch_csv(report, batch_csv);
    inverse::write_histogram_csv(report, hist_csv);
    svg::write(svg::histogram_plot(report.histogram, 0.01, "delta MAE histogram"), hist_svg);

    std::cout << "targets: " << targets.size() << "\nfailures: " << report.failures.size()
              << "\nfirst-bin fraction: " << report.first_bin_fraction() << "\n";

    manifest.inputs = {model_path, data_dir};
    manifest.outputs = {batch_csv, hist_csv, hist_svg};
    manifest.write(out_dir);
    if (!targets.empty() &&
        static_cast<double>(report.rows.size()) < 0.9 * static_cast<double>(targets.size())) {
        std::cerr << "error: more than 10% of inversions failed\n";
        return kExitNumeric;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fabry-Perot transmission surrogates and inverse design"};
    app.require_subcommand(1);

    // gen-data -------------------------------------------------------------
    auto* gen = app.add_subcommand("gen-data", "generate an analytically labeled dataset");
    std::string gen_problem = "lambda", gen_config;
    std::string gen_out = "data";
    std::uint64_t gen_seed = 0;
    gen->add_option("--problem", gen_problem, "lambda | theta | fd");
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--config", gen_config, "JSON config file (flags override)");

    // train ----------------------------------------------------------------
    auto* tr = app.add_subcommand("train", "train a forward surrogate");
    std::string tr_data = "data", tr_problem, tr_layers = "200x6", tr_activation = "swish";
    std::string tr_out = "model.json", tr_config;
    std::size_t tr_patience = 30, tr_epochs = 1000, tr_batch = 200;
    double tr_lr = 0.001;
    std::uint64_t tr_seed = 0;
    tr->add_option("--data", tr_data, "dataset directory");
    tr->add_option("--problem", tr_problem, "dataset to pick when the directory has several");
    tr->add_option("--layers", tr_layers, "hidden layers as WIDTHxCOUNT");
    tr->add_option("--activation", tr_activation, "relu | elu | swish | sigmoid | tanh | sin");
    tr->add_option("--patience", tr_patience, "early-stopping patience (epochs)");
    tr->add_option("--epochs", tr_epochs, "epoch cap");
    tr->add_option("--batch", tr_batch, "mini-batch size");
    tr->add_option("--lr", tr_lr, "Adam learning rate");
    tr->add_option("--seed", tr_seed, "random seed");
    tr->add_option("--out", tr_out, "model output path");
    tr->add_option("--config", tr_config, "JSON config file (flags override)");

    // eval -----------------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "evaluate a surrogate on a dataset split");
    std::string ev_model = "model.json", ev_data = "data", ev_problem, ev_split = "test";
    std::string ev_out = "eval", ev_config;
    std::size_t ev_samples = 4;
    std::uint64_t ev_seed = 0;
    ev->add_option("--model", ev_model, "model file");
    ev->add_option("--data", ev_data, "dataset directory");
    ev->add_option("--problem", ev_problem, "dataset to pick");
    ev->add_option("--split", ev_split, "train | validation | test");
    ev->add_option("--samples", ev_samples, "panels in the prediction figure");
    ev->add_option("--out", ev_out, "output directory");
    ev->add_option("--seed", ev_seed, "split shuffle seed");
    ev->add_option("--config", ev_config, "JSON config file (flags override)");

    // train-vae ------------------------------------------------------------
    auto* tv = app.add_subcommand("train-vae", "train a beta-VAE on transmission spectra");
    std::string tv_data = "data", tv_problem, tv_out = "vae.json", tv_config;
    double tv_beta = 0.001;
    std::size_t tv_latent = 5, tv_epochs = 100, tv_batch = 100;
    std::uint64_t tv_seed = 0;
    tv->add_option("--data", tv_data, "dataset directory");
    tv->add_option("--problem", tv_problem, "dataset to pick");
    tv->add_option("--beta", tv_beta, "KL weight");
    tv->add_option("--latent", tv_latent, "latent dimension");
    tv->add_option("--epochs", tv_epochs, "training epochs (fixed, no early stopping)");
    tv->add_option("--batch", tv_batch, "mini-batch size");
    tv->add_option("--seed", tv_seed, "random seed");
    tv->add_option("--out", tv_out, "model output path");
    tv->add_option("--config", tv_config, "JSON config file (flags override)");

    // analyze-latent -------------------------------------------------------
    auto* al = app.add_subcommand("analyze-latent", "latent structure vs physical parameters");
    std::string al_model = "vae.json", al_data = "data", al_problem = "fd", al_out = "latent";
    std::string al_config;
    std::uint64_t al_seed = 0;
    al->add_option("--model", al_model, "VAE model file");
    al->add_option("--data", al_data, "(F, delta0) dataset directory");
    al->add_option("--problem", al_problem, "dataset to pick");
    al->add_option("--out", al_out, "output directory");
    al->add_option("--seed", al_seed, "split shuffle seed");
    al->add_option("--config", al_config, "JSON config file (flags override)");

    // invert ---------------------------------------------------------------
    auto* iv = app.add_subcommand("invert", "inverse design toward one target");
    std::string iv_model = "model.json", iv_target, iv_data, iv_problem, iv_loss = "combined";
    std::string iv_out = "inverse", iv_config;
    std::size_t iv_reinit = 100, iv_iters = 1000;
    bool iv_edge = false;
    std::uint64_t iv_seed = 0;
    iv->add_option("--model", iv_model, "surrogate model file");
    iv->add_option("--target", iv_target, "test:IDX or a CSV file")->required();
    iv->add_option("--data", iv_data, "dataset directory (for test: targets)");
    iv->add_option("--problem", iv_problem, "dataset to pick");
    iv->add_option("--init-loss", iv_loss, "mse | fourier | combined");
    iv->add_option("--reinit", iv_reinit, "steps between re-initializations, 0 disables");
    iv->add_option("--iters", iv_iters, "gradient steps");
    iv->add_flag("--edge-init", iv_edge, "start delta0 at the range edge (skip grid search)");
    iv->add_option("--seed", iv_seed, "random seed");
    iv->add_option("--out", iv_out, "output directory");
    iv->add_option("--config", iv_config, "JSON config file (flags override)");

    // invert-batch ---------------------------------------------------------
    auto* ib = app.add_subcommand("invert-batch", "inverse design over test-set targets");
    std::string ib_model = "model.json", ib_data = "data", ib_problem, ib_loss = "combined";
    std::string ib_out = "inverse-batch", ib_config;
    std::size_t ib_count = 200, ib_reinit = 100, ib_iters = 1000, ib_threads = 1;
    std::uint64_t ib_seed = 0;
    ib->add_option("--model", ib_model, "surrogate model file");
    ib->add_option("--data", ib_data, "dataset directory");
    ib->add_option("--problem", ib_problem, "dataset to pick");
    ib->add_option("--count", ib_count, "number of test targets");
    ib->add_option("--init-loss", ib_loss, "mse | fourier | combined");
    ib->add_option("--reinit", ib_reinit, "steps between re-initializations, 0 disables");
    ib->add_option("--iters", ib_iters, "gradient steps per target");
    ib->add_option("--threads", ib_threads, "worker threads");
    ib->add_option("--seed", ib_seed, "random seed");
    ib->add_option("--out", ib_out, "output directory");
    ib->add_option("--config", ib_config, "JSON config file (flags override)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            apply_config_file(gen, gen_config);
            return cmd_gen_data(gen_problem, gen_out, gen_seed);
        }
        if (tr->parsed()) {
            apply_config_file(tr, tr_config);
            return cmd_train(tr_data, tr_problem, tr_layers, tr_activation, tr_patience,
                             tr_epochs, tr_lr, tr_batch, tr_seed, tr_out);
        }
        if (ev->parsed()) {
            apply_config_file(ev, ev_config);
            return cmd_eval(ev_model, ev_data, ev_problem, ev_split, ev_samples, ev_out, ev_seed);
        }
        if (tv->parsed()) {
            apply_config_file(tv, tv_config);
            return cmd_train_vae(tv_data, tv_problem, tv_beta, tv_latent, tv_epochs, tv_batch,
                                 tv_seed, tv_out);
        }
        if (al->parsed()) {
            apply_config_file(al, al_config);
            return cmd_analyze_latent(al_model, al_data, al_problem, al_out, al_seed);
        }
        if (iv->parsed()) {
            apply_config_file(iv, iv_config);
            return cmd_invert(iv_model, iv_target, iv_data, iv_problem, iv_loss, iv_reinit,
                              iv_iters, iv_edge, iv_seed, iv_out);
        }
        if (ib->parsed()) {
            apply_config_file(ib, ib_config);
            return cmd_invert_batch(ib_model, ib_data, ib_problem, ib_count, ib_loss, ib_reinit,
                                    ib_iters, ib_threads, ib_seed, ib_out);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
