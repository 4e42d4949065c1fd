#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fpinv/dataset.hpp"
#include "fpinv/inverse.hpp"
#include "fpinv/neural.hpp"
#include "fpinv/optics.hpp"
#include "fpinv/spectral.hpp"
#include "fpinv/vae.hpp"

namespace py = pybind11;
using namespace fpinv;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fabry-Perot transmission surrogates and inverse design";

    // optics ---------------------------------------------------------------
    py::class_<optics::DesignParams>(m, "DesignParams")
        .def(py::init<double, double, double>(), py::arg("theta_deg"), py::arg("n"),
             py::arg("l_nm"))
        .def_readwrite("theta_deg", &optics::DesignParams::theta_deg)
        .def_readwrite("n", &optics::DesignParams::n)
        .def_readwrite("l_nm", &optics::DesignParams::l_nm);
    py::class_<optics::SimplifiedParams>(m, "SimplifiedParams")
        .def(py::init<double, double>(), py::arg("f_coeff"), py::arg("delta0_nm"))
        .def_readwrite("f_coeff", &optics::SimplifiedParams::f_coeff)
        .def_readwrite("delta0_nm", &optics::SimplifiedParams::delta0_nm);

    m.def("snell_angle", &optics::snell_angle, py::arg("theta_deg"), py::arg("n"));
    m.def("reflectance_te", &optics::reflectance_te, py::arg("theta_deg"), py::arg("n"));
    m.def("finesse", &optics::finesse, py::arg("reflectance"));
    m.def("delta0_wavelength", &optics::delta0_wavelength, py::arg("params"));
    m.def("simplified_params", &optics::simplified_params, py::arg("params"));
    m.def("transmission", &optics::transmission, py::arg("f_coeff"), py::arg("half_phase"));
    m.def(
        "spectrum_lambda",
        [](const optics::DesignParams& p) { return optics::spectrum_lambda(p).values; },
        py::arg("params"));
    m.def(
        "spectrum_lambda_simplified",
        [](const optics::SimplifiedParams& sp) {
            return optics::spectrum_lambda_simplified(sp).values;
        },
        py::arg("params"));
    m.def(
        "spectrum_theta",
        [](double lambda_nm, double n, double l_nm) {
            return optics::spectrum_theta(lambda_nm, n, l_nm).values;
        },
        py::arg("lambda_nm"), py::arg("n"), py::arg("l_nm"));
    m.def("partial_wave_oracle", &optics::partial_wave_oracle, py::arg("reflectance"),
          py::arg("delta"), py::arg("terms"));

    // spectral -------------------------------------------------------------
    m.def(
        "power_spectrum",
        [](const std::vector<double>& samples) {
            const auto ps = spectral::power_spectrum(samples);
            return std::vector<double>(ps.powers.begin(), ps.powers.end());
        },
        py::arg("samples"));
    m.def(
        "combined_loss",
        [](const std::vector<double>& pred, const std::vector<double>& target) {
            return spectral::combined_loss(pred, target);
        },
        py::arg("pred"), py::arg("target"));

    // dataset --------------------------------------------------------------
    py::class_<dataset::Dataset>(m, "Dataset")
        .def_property_readonly("problem",
                               [](const dataset::Dataset& ds) {
                                   return dataset::problem_name(ds.problem);
                               })
        .def_property_readonly("size",
                               [](const dataset::Dataset& ds) { return ds.records.size(); })
        .def("features",
             [](const dataset::Dataset& ds, std::size_t i) { return ds.records.at(i).features; })
        .def("label",
             [](const dataset::Dataset& ds, std::size_t i) { return ds.records.at(i).label; })
        .def("raw_params",
             [](const dataset::Dataset& ds, std::size_t i) { return ds.records.at(i).raw_params; });
    m.def("generate_lambda_dataset", [] {
        return dataset::generate_lambda_dataset(dataset::GridSpec::reference_lambda());
    });
    m.def("generate_theta_dataset", [] {
        return dataset::generate_theta_dataset(dataset::GridSpec::reference_theta());
    });
    m.def("derive_simplified_dataset", &dataset::derive_simplified_dataset, py::arg("dataset"));
    m.def("load_dataset", &dataset::load_csv, py::arg("path"));
    m.def("save_dataset", &dataset::save_csv, py::arg("dataset"), py::arg("path"));

    py::class_<dataset::DataSplit>(m, "DataSplit")
        .def_readonly("train", &dataset::DataSplit::train)
        .def_readonly("validation", &dataset::DataSplit::validation)
        .def_readonly("test", &dataset::DataSplit::test);
    m.def(
        "split",
        [](const dataset::Dataset& ds, std::uint64_t test_seed, std::uint64_t shuffle_seed) {
            return dataset::split(ds, test_seed, shuffle_seed);
        },
        py::arg("dataset"), py::arg("test_seed") = 0, py::arg("shuffle_seed") = 0);

    // neural ---------------------------------------------------------------
    py::class_<neural::MlpModel>(m, "MlpModel")
        .def_readonly("layer_dims", &neural::MlpModel::layer_dims)
        .def_property_readonly("activation",
                               [](const neural::MlpModel& mdl) {
                                   return neural::activation_name(mdl.hidden_activation);
                               })
        .def("__call__",
             [](const neural::MlpModel& mdl, const std::vector<double>& features) {
                 return neural::forward(mdl, features);
             })
        .def("denormalize", [](const neural::MlpModel& mdl, const std::vector<double>& norm) {
            return mdl.normalization.denormalize_all(norm);
        });
    m.def(
        "make_mlp",
        [](const std::vector<std::size_t>& dims, const std::string& activation,
           std::uint64_t seed) {
            return neural::make_mlp(dims, neural::activation_from_name(activation), seed);
        },
        py::arg("layer_dims"), py::arg("activation") = "swish", py::arg("seed") = 0);
    m.def("load_model", &neural::load_model, py::arg("path"));
    m.def("save_model", &neural::save_model, py::arg("model"), py::arg("path"));

    py::class_<neural::TrainReport>(m, "TrainReport")
        .def_readonly("train_loss", &neural::TrainReport::train_loss)
        .def_readonly("validation_loss", &neural::TrainReport::validation_loss)
        .def_readonly("best_epoch", &neural::TrainReport::best_epoch)
        .def_readonly("stopped_by", &neural::TrainReport::stopped_by)
        .def_readonly("wall_seconds", &neural::TrainReport::wall_seconds);
    m.def(
        "train",
        [](neural::MlpModel& model, const dataset::Dataset& data,
           const dataset::DataSplit& split, double learning_rate, std::size_t batch_size,
           std::size_t patience, std::size_t max_epochs, std::uint64_t seed) {
            neural::TrainConfig cfg;
            cfg.learning_rate = learning_rate;
            cfg.batch_size = batch_size;
            cfg.patience = patience;
            cfg.max_epochs = max_epochs;
            cfg.seed = seed;
            return neural::train(model, data, split, cfg);
        },
        py::arg("model"), py::arg("data"), py::arg("split"), py::arg("learning_rate") = 0.001,
        py::arg("batch_size") = 200, py::arg("patience") = 30, py::arg("max_epochs") = 1000,
        py::arg("seed") = 0);
    m.def("evaluate_mae", &neural::evaluate_mae, py::arg("model"), py::arg("data"),
          py::arg("indices"));

    // vae ------------------------------------------------------------------
    py::class_<vae::VaeModel>(m, "VaeModel")
        .def_readonly("latent_dim", &vae::VaeModel::latent_dim)
        .def("encode", [](const vae::VaeModel& mdl, const std::vector<double>& spectrum) {
            return vae::encode(mdl, spectrum);
        });
    m.def("make_vae", &vae::make_vae, py::arg("spectrum_dim"),
          py::arg("latent_dim") = vae::kDefaultLatentDim, py::arg("seed") = 0);
    m.def(
        "train_vae",
        [](vae::VaeModel& model, const dataset::Dataset& data, const dataset::DataSplit& split,
           double beta, std::size_t epochs, std::size_t batch_size, std::uint64_t seed) {
            vae::VaeConfig cfg;
            cfg.beta = beta;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.seed = seed;
            const auto report = vae::train_vae(model, data, split, cfg);
            py::dict out;
            out["epoch_loss"] = report.epoch_loss;
            out["test_reconstruction_mae"] = report.test_reconstruction_mae;
            return out;
        },
        py::arg("model"), py::arg("data"), py::arg("split"), py::arg("beta") = 0.001,
        py::arg("epochs") = 100, py::arg("batch_size") = 100, py::arg("seed") = 0);
    m.def("load_vae", &vae::load_vae, py::arg("path"));
    m.def("save_vae", &vae::save_vae, py::arg("model"), py::arg("path"));

    // inverse --------------------------------------------------------------
    py::class_<inverse::InverseResult>(m, "InverseResult")
        .def_readonly("final_params_normalized", &inverse::InverseResult::final_params_normalized)
        .def_readonly("final_params_physical", &inverse::InverseResult::final_params_physical)
        .def_readonly("final_spectrum", &inverse::InverseResult::final_spectrum)
        .def_readonly("final_mse", &inverse::InverseResult::final_mse)
        .def_readonly("final_mae", &inverse::InverseResult::final_mae)
        .def_readonly("baseline_mae", &inverse::InverseResult::baseline_mae)
        .def_property_readonly("trajectory_mse", [](const inverse::InverseResult& r) {
            std::vector<double> out;
            out.reserve(r.trajectory.size());
            for (const auto& p : r.trajectory) out.push_back(p.mse);
            return out;
        });
    m.def(
        "invert",
        [](const neural::MlpModel& model, const std::vector<double>& target,
           const std::string& init_loss, std::size_t reinit_every, std::size_t max_iters,
           bool edge_init, std::uint64_t seed) {
            inverse::TargetSpectrum t;
            t.values = target;
            t.provenance = "python";
            inverse::InverseConfig cfg;
            cfg.init_loss = inverse::init_loss_from_name(init_loss);
            cfg.reinit_every = reinit_every;
            cfg.max_iters = max_iters;
            cfg.edge_init = edge_init;
            cfg.seed = seed;
            return inverse::invert(model, t, cfg);
        },
        py::arg("model"), py::arg("target"), py::arg("init_loss") = "combined",
        py::arg("reinit_every") = 100, py::arg("max_iters") = 1000, py::arg("edge_init") = false,
        py::arg("seed") = 0);
}
