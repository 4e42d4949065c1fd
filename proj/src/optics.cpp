#include "fpinv/optics.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace fpinv::optics {

double snell_angle(double theta_deg, double n) {
    if (std::abs(theta_deg) >= 90.0) {
        throw std::domain_error("snell_angle: |theta| must be < 90 degrees");
    }
    if (n < 1.0) {
        throw std::domain_error("snell_angle: refractive index must be >= 1");
    }
    const double s = std::sin(deg_to_rad(theta_deg)) / n;
    if (std::abs(s) > 1.0) {
        throw std::domain_error("snell_angle: total internal reflection regime");
    }
    return std::asin(s);
}

double reflectance_te(double theta_deg, double n) {
    const double theta_mat = snell_angle(theta_deg, n);
    const double a = n * std::cos(theta_mat);
    const double b = std::cos(deg_to_rad(theta_deg));
    const double r = (a - b) / (a + b);
    return r * r;
}

double finesse(double reflectance) {
    if (reflectance < 0.0 || reflectance >= 1.0) {
        throw std::domain_error("finesse: reflectance must lie in [0, 1)");
    }
    const double d = 1.0 - reflectance;
    return 4.0 * reflectance / (d * d);
}

double delta0_wavelength(const DesignParams& p) {
    const double theta_mat = snell_angle(p.theta_deg, p.n);
    return 4.0 * kPi * p.n * p.l_nm * std::cos(theta_mat);
}

SimplifiedParams simplified_params(const DesignParams& p) {
    return {finesse(reflectance_te(p.theta_deg, p.n)), delta0_wavelength(p)};
}

double transmission(double f_coeff, double half_phase) {
    const double s = std::sin(half_phase);
    return 1.0 / (1.0 + f_coeff * s * s);
}

Spectrum spectrum_lambda(const DesignParams& p, const WavelengthGrid& grid) {
    return spectrum_lambda_simplified(simplified_params(p), grid);
}

Spectrum spectrum_lambda_simplified(const SimplifiedParams& sp, const WavelengthGrid& grid) {
    Spectrum out;
    out.grid = GridKind::wavelength;
    out.values.resize(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        out.values[i] = transmission(sp.f_coeff, sp.delta0_nm / (2.0 * grid.value(i)));
    }
    return out;
}

Spectrum spectrum_theta(double lambda_nm, double n, double l_nm, const AngleGrid& grid) {
    Spectrum out;
    out.grid = GridKind::angle;
    out.values.resize(grid.count);
    const double delta0 = 4.0 * kPi * n * l_nm / lambda_nm;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double theta = grid.value(i);
        const double theta_mat = snell_angle(theta, n);
        const double f = finesse(reflectance_te(theta, n));
        out.values[i] = transmission(f, 0.5 * delta0 * std::cos(theta_mat));
    }
    return out;
}

double partial_wave_oracle(double reflectance, double delta, std::size_t terms) {
    if (reflectance < 0.0 || reflectance >= 1.0) {
        throw std::domain_error("partial_wave_oracle: reflectance must lie in [0, 1)");
    }
    if (terms == 0) {
        throw std::invalid_argument("partial_wave_oracle: need at least one term");
    }
    const std::complex<double> phase = std::polar(1.0, delta);
    std::complex<double> wave{1.0, 0.0};  // R^m e^{i m delta}
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t m = 0; m < terms; ++m) {
        sum += wave;
        wave *= reflectance * phase;
    }
    sum *= (1.0 - reflectance);
    return std::norm(sum);
}

}  // namespace fpinv::optics
