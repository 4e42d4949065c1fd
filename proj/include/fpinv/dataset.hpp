#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fpinv/optics.hpp"

// Dataset generation over design-parameter grids, analytical labeling via the
// optics oracle, normalization, deterministic splits and CSV persistence.

namespace fpinv::dataset {

inline constexpr int kSchemaVersion = 1;

/// Inclusive arithmetic range; values are built by integer index so that the
/// cardinality is exact regardless of step rounding.
struct Range {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    std::size_t count() const;
    double value(std::size_t i) const { return min + static_cast<double>(i) * step; }
};

enum class ProblemKind {
    lambda,      // (theta, n, l) -> T(lambda), 200 points
    theta,       // (lambda, n, l) -> T(theta), 179 points
    simplified,  // (F, delta0)   -> T(lambda), 200 points
};

std::string problem_name(ProblemKind kind);
ProblemKind problem_from_name(const std::string& name);

/// Grid of design parameters to label. theta_values is used by the lambda
/// problem, lambda_range by the theta problem.
struct GridSpec {
    std::vector<double> theta_values;
    Range lambda_range;
    Range n_range{1.05, 3.50, 0.05};
    Range l_range{100.0, 1000.0, 10.0};

    static GridSpec reference_lambda();
    static GridSpec reference_theta();
};

/// Per-feature affine map onto a common target interval.
struct NormalizationSpec {
    std::vector<std::string> feature_names;
    std::vector<double> source_min;
    std::vector<double> source_max;
    double target_lo = 0.0;
    double target_hi = 1.0;

    std::size_t arity() const { return source_min.size(); }
    double normalize(double x, std::size_t feature) const;
    double denormalize(double y, std::size_t feature) const;
    std::vector<double> normalize_all(const std::vector<double>& raw) const;
    std::vector<double> denormalize_all(const std::vector<double>& norm) const;
};

struct SampleRecord {
    std::vector<double> features;    // normalized inputs
    std::vector<double> label;       // transmission samples
    std::vector<double> raw_params;  // un-normalized originals
};

struct Dataset {
    ProblemKind problem = ProblemKind::lambda;
    NormalizationSpec normalization;
    optics::GridKind label_grid = optics::GridKind::wavelength;
    std::size_t label_length = 200;
    std::vector<SampleRecord> records;
};

/// Index-based split; test membership depends only on test_seed.
struct DataSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
    std::uint64_t test_seed = 0;
    std::uint64_t shuffle_seed = 0;
};

Dataset generate_lambda_dataset(const GridSpec& spec);
Dataset generate_theta_dataset(const GridSpec& spec);

/// Relabel a lambda dataset with normalized (F, delta0) features; labels are
/// untouched and the normalization bounds come from the observed data.
Dataset derive_simplified_dataset(const Dataset& lambda_dataset);

DataSplit split(std::size_t record_count, double test_fraction, double val_fraction_of_rest,
                std::uint64_t test_seed, std::uint64_t shuffle_seed);

inline DataSplit split(const Dataset& ds, std::uint64_t test_seed, std::uint64_t shuffle_seed,
                       double test_fraction = 0.10, double val_fraction_of_rest = 0.15) {
    return split(ds.records.size(), test_fraction, val_fraction_of_rest, test_seed, shuffle_seed);
}

/// Recompute the label of a record from its raw parameters (oracle truth).
std::vector<double> recompute_label(ProblemKind problem, const std::vector<double>& raw_params);

/// Writes `path` (CSV, one row per sample) plus a `path.meta.json` sidecar with
/// schema version, problem, grid and normalization metadata.
void save_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset load_csv(const std::filesystem::path& path);

}  // namespace fpinv::dataset
