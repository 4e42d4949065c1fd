#include "fpinv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fpinv::dataset {

using nlohmann::json;

std::size_t Range::count() const {
    if (step <= 0.0 || max < min) {
        throw std::invalid_argument("Range: require step > 0 and max >= min");
    }
    return static_cast<std::size_t>(std::llround((max - min) / step)) + 1;
}

std::string problem_name(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::lambda: return "lambda";
        case ProblemKind::theta: return "theta";
        case ProblemKind::simplified: return "fd";
    }
    throw std::logic_error("problem_name: bad kind");
}

ProblemKind problem_from_name(const std::string& name) {
    if (name == "lambda") return ProblemKind::lambda;
    if (name == "theta") return ProblemKind::theta;
    if (name == "fd" || name == "simplified") return ProblemKind::simplified;
    throw std::invalid_argument("unknown problem kind: " + name);
}

GridSpec GridSpec::reference_lambda() {
    GridSpec spec;
    spec.theta_values = {0.0, 15.0, -15.0, 30.0, -30.0, 40.0, -40.0,
                         50.0, -50.0, 60.0, -60.0, 70.0, -70.0};
    return spec;
}

GridSpec GridSpec::reference_theta() {
    GridSpec spec;
    spec.lambda_range = {400.0, 452.0, 4.0};
    return spec;
}

double NormalizationSpec::normalize(double x, std::size_t feature) const {
    const double lo = source_min.at(feature);
    const double hi = source_max.at(feature);
    return target_lo + (x - lo) / (hi - lo) * (target_hi - target_lo);
}

double NormalizationSpec::denormalize(double y, std::size_t feature) const {
    const double lo = source_min.at(feature);
    const double hi = source_max.at(feature);
    return lo + (y - target_lo) / (target_hi - target_lo) * (hi - lo);
}

std::vector<double> NormalizationSpec::normalize_all(const std::vector<double>& raw) const {
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = normalize(raw[i], i);
    return out;
}

std::vector<double> NormalizationSpec::denormalize_all(const std::vector<double>& norm) const {
    std::vector<double> out(norm.size());
    for (std::size_t i = 0; i < norm.size(); ++i) out[i] = denormalize(norm[i], i);
    return out;
}

namespace {

NormalizationSpec bounds_from_values(std::vector<std::string> names,
                                     const std::vector<std::vector<double>>& values_per_feature,
                                     double lo, double hi) {
    NormalizationSpec spec;
    spec.feature_names = std::move(names);
    spec.target_lo = lo;
    spec.target_hi = hi;
    for (const auto& values : values_per_feature) {
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        spec.source_min.push_back(*mn);
        spec.source_max.push_back(*mx);
    }
    for (std::size_t i = 0; i < spec.source_min.size(); ++i) {
        if (!(spec.source_min[i] < spec.source_max[i])) {
            throw std::invalid_argument("normalization: degenerate feature range for " +
                                        spec.feature_names[i]);
        }
    }
    return spec;
}

std::vector<double> range_values(const Range& r) {
    std::vector<double> out(r.count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.value(i);
    return out;
}

}  // namespace

Dataset generate_lambda_dataset(const GridSpec& spec) {
    if (spec.theta_values.empty()) {
        throw std::invalid_argument("generate_lambda_dataset: empty theta list");
    }
    const auto n_values = range_values(spec.n_range);
    const auto l_values = range_values(spec.l_range);

    Dataset ds;
    ds.problem = ProblemKind::lambda;
    ds.label_grid = optics::GridKind::wavelength;
    ds.label_length = optics::WavelengthGrid{}.count;
    ds.normalization =
        bounds_from_values({"theta_deg", "n", "l_nm"},
                           {spec.theta_values, n_values, l_values}, 0.0, 1.0);

    ds.records.reserve(spec.theta_values.size() * n_values.size() * l_values.size());
    for (double theta : spec.theta_values) {
        for (double n : n_values) {
            for (double l : l_values) {
                SampleRecord rec;
                rec.raw_params = {theta, n, l};
                rec.features = ds.normalization.normalize_all(rec.raw_params);
                rec.label = optics::spectrum_lambda({theta, n, l}).values;
                ds.records.push_back(std::move(rec));
            }
        }
    }
    return ds;
}

Dataset generate_theta_dataset(const GridSpec& spec) {
    const auto lambda_values = range_values(spec.lambda_range);
    const auto n_values = range_values(spec.n_range);
    const auto l_values = range_values(spec.l_range);

    Dataset ds;
    ds.problem = ProblemKind::theta;
    ds.label_grid = optics::GridKind::angle;
    ds.label_length = optics::AngleGrid{}.count;
    ds.normalization =
        bounds_from_values({"lambda_nm", "n", "l_nm"},
                           {lambda_values, n_values, l_values}, -1.0, 1.0);

    ds.records.reserve(lambda_values.size() * n_values.size() * l_values.size());
    for (double lambda : lambda_values) {
        for (double n : n_values) {
            for (double l : l_values) {
                SampleRecord rec;
                rec.raw_params = {lambda, n, l};
                rec.features = ds.normalization.normalize_all(rec.raw_params);
                rec.label = optics::spectrum_theta(lambda, n, l).values;
                ds.records.push_back(std::move(rec));
            }
        }
    }
    return ds;
}

Dataset derive_simplified_dataset(const Dataset& lambda_dataset) {
    if (lambda_dataset.problem != ProblemKind::lambda) {
        throw std::invalid_argument("derive_simplified_dataset: input must be a lambda dataset");
    }
    std::vector<double> f_values(lambda_dataset.records.size());
    std::vector<double> d_values(lambda_dataset.records.size());
    for (std::size_t i = 0; i < lambda_dataset.records.size(); ++i) {
        const auto& raw = lambda_dataset.records[i].raw_params;
        const auto sp = optics::simplified_params({raw[0], raw[1], raw[2]});
        f_values[i] = sp.f_coeff;
        d_values[i] = sp.delta0_nm;
    }

    Dataset ds;
    ds.problem = ProblemKind::simplified;
    ds.label_grid = optics::GridKind::wavelength;
    ds.label_length = lambda_dataset.label_length;
    // Bounds from the observed data, not from any printed range.
    ds.normalization =
        bounds_from_values({"f_coeff", "delta0_nm"}, {f_values, d_values}, -1.0, 1.0);

    ds.records.resize(lambda_dataset.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        ds.records[i].raw_params = {f_values[i], d_values[i]};
        ds.records[i].features = ds.normalization.normalize_all(ds.records[i].raw_params);
        ds.records[i].label = lambda_dataset.records[i].label;
    }
    return ds;
}

DataSplit split(std::size_t record_count, double test_fraction, double val_fraction_of_rest,
                std::uint64_t test_seed, std::uint64_t shuffle_seed) {
    if (test_fraction <= 0.0 || test_fraction >= 1.0 || val_fraction_of_rest <= 0.0 ||
        val_fraction_of_rest >= 1.0) {
        throw std::invalid_argument("split: fractions must lie in (0, 1)");
    }
    std::vector<std::size_t> order(record_count);
    std::iota(order.begin(), order.end(), std::size_t{0});

    // Test membership must survive re-splitting, so it is carved first with its
    // own seed before the train/validation shuffle.
    std::mt19937_64 test_rng(test_seed);
    std::shuffle(order.begin(), order.end(), test_rng);

    const auto test_count = static_cast<std::size_t>(std::llround(test_fraction * record_count));
    DataSplit out;
    out.test_seed = test_seed;
    out.shuffle_seed = shuffle_seed;
    out.test.assign(order.end() - test_count, order.end());
    order.resize(order.size() - test_count);

    std::mt19937_64 shuffle_rng(shuffle_seed);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const auto val_count =
        static_cast<std::size_t>(std::llround(val_fraction_of_rest * order.size()));
    out.validation.assign(order.end() - val_count, order.end());
    out.train.assign(order.begin(), order.end() - val_count);

    if (out.train.empty() || out.validation.empty() || out.test.empty()) {
        throw std::invalid_argument("split: degenerate partition");
    }
    return out;
}

std::vector<double> recompute_label(ProblemKind problem, const std::vector<double>& raw_params) {
    switch (problem) {
        case ProblemKind::lambda:
            return optics::spectrum_lambda({raw_params.at(0), raw_params.at(1), raw_params.at(2)})
                .values;
        case ProblemKind::theta:
            return optics::spectrum_theta(raw_params.at(0), raw_params.at(1), raw_params.at(2))
                .values;
        case ProblemKind::simplified:
            return optics::spectrum_lambda_simplified({raw_params.at(0), raw_params.at(1)}).values;
    }
    throw std::logic_error("recompute_label: bad problem kind");
}

namespace {

void write_value(std::ostream& os, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    os.write(buf, res.ptr - buf);
}

json normalization_to_json(const NormalizationSpec& spec) {
    return json{{"feature_names", spec.feature_names},
                {"source_min", spec.source_min},
                {"source_max", spec.source_max},
                {"target_lo", spec.target_lo},
                {"target_hi", spec.target_hi}};
}

NormalizationSpec normalization_from_json(const json& j) {
    NormalizationSpec spec;
    spec.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    spec.source_min = j.at("source_min").get<std::vector<double>>();
    spec.source_max = j.at("source_max").get<std::vector<double>>();
    spec.target_lo = j.at("target_lo").get<double>();
    spec.target_hi = j.at("target_hi").get<double>();
    return spec;
}

}  // namespace

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream csv(path);
    if (!csv) throw std::runtime_error("save_csv: cannot open " + path.string());

    const auto& names = ds.normalization.feature_names;
    for (std::size_t i = 0; i < names.size(); ++i) csv << "raw_" << names[i] << ",";
    for (std::size_t i = 0; i < names.size(); ++i) csv << names[i] << ",";
    for (std::size_t i = 0; i < ds.label_length; ++i) {
        csv << "label_" << i << (i + 1 < ds.label_length ? "," : "\n");
    }

    for (const auto& rec : ds.records) {
        for (double v : rec.raw_params) {
            write_value(csv, v);
            csv << ',';
        }
        for (double v : rec.features) {
            write_value(csv, v);
            csv << ',';
        }
        for (std::size_t i = 0; i < rec.label.size(); ++i) {
            write_value(csv, rec.label[i]);
            csv << (i + 1 < rec.label.size() ? "," : "\n");
        }
    }
    if (!csv) throw std::runtime_error("save_csv: write failed for " + path.string());

    json meta{{"schema_version", kSchemaVersion},
              {"problem", problem_name(ds.problem)},
              {"label_grid", ds.label_grid == optics::GridKind::wavelength ? "wavelength" : "angle"},
              {"label_length", ds.label_length},
              {"record_count", ds.records.size()},
              {"normalization", normalization_to_json(ds.normalization)}};
    std::ofstream side(path.string() + ".meta.json");
    if (!side) throw std::runtime_error("save_csv: cannot open sidecar for " + path.string());
    side << meta.dump(2) << "\n";
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream side(path.string() + ".meta.json");
    if (!side) throw std::runtime_error("load_csv: missing sidecar " + path.string() + ".meta.json");
    json meta = json::parse(side);
    if (meta.at("schema_version").get<int>() != kSchemaVersion) {
        throw std::runtime_error("load_csv: unsupported schema_version");
    }

    Dataset ds;
    ds.problem = problem_from_name(meta.at("problem").get<std::string>());
    ds.label_grid = meta.at("label_grid").get<std::string>() == "angle" ? optics::GridKind::angle
                                                                        : optics::GridKind::wavelength;
    ds.label_length = meta.at("label_length").get<std::size_t>();
    ds.normalization = normalization_from_json(meta.at("normalization"));
    const std::size_t arity = ds.normalization.arity();
    const std::size_t expected_cols = 2 * arity + ds.label_length;

    std::ifstream csv(path);
    if (!csv) throw std::runtime_error("load_csv: cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::getline(csv, line);  // header
    ++line_no;

    while (std::getline(csv, line)) {
        ++line_no;
        if (line.empty()) continue;
        SampleRecord rec;
        rec.raw_params.reserve(arity);
        rec.features.reserve(arity);
        rec.label.reserve(ds.label_length);
        const char* p = line.data();
        const char* end = line.data() + line.size();
        std::size_t col = 0;
        while (p < end) {
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc{}) {
                throw std::runtime_error("load_csv: malformed value at line " +
                                         std::to_string(line_no));
            }
            if (col < arity) {
                rec.raw_params.push_back(v);
            } else if (col < 2 * arity) {
                rec.features.push_back(v);
            } else {
                rec.label.push_back(v);
            }
            ++col;
            p = res.ptr;
            if (p < end && *p == ',') ++p;
        }
        if (col != expected_cols) {
            throw std::runtime_error("load_csv: line " + std::to_string(line_no) + " has " +
                                     std::to_string(col) + " columns, expected " +
                                     std::to_string(expected_cols));
        }
        ds.records.push_back(std::move(rec));
    }
    if (meta.contains("record_count") &&
        meta.at("record_count").get<std::size_t>() != ds.records.size()) {
        throw std::runtime_error("load_csv: record count differs from sidecar");
    }
    return ds;
}

}  // namespace fpinv::dataset
