#pragma once

#include <cstddef>
#include <vector>

// Analytical Fabry-Perot physics. All functions are pure; angles are taken in
// degrees at the API boundary and converted to radians internally. The outside
// medium is air (n0 = 1) and only TE polarization is handled.

namespace fpinv::optics {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

/// Physical design triple of the resonator.
struct DesignParams {
    double theta_deg = 0.0;  // incidence angle, |theta| < 90
    double n = 1.0;          // refractive index, >= 1
    double l_nm = 0.0;       // resonator width in nm, > 0
};

/// The true degrees of freedom of T(lambda): coefficient of finesse F and the
/// phase prefactor delta0 = 4 pi n l cos(theta_mat), in nanometers.
struct SimplifiedParams {
    double f_coeff = 0.0;
    double delta0_nm = 0.0;
};

struct WavelengthGrid {
    double start_nm = 400.0;
    double step_nm = 2.0;
    std::size_t count = 200;

    double value(std::size_t i) const { return start_nm + static_cast<double>(i) * step_nm; }
};

struct AngleGrid {
    double start_deg = -89.0;
    double step_deg = 1.0;
    std::size_t count = 179;

    double value(std::size_t i) const { return start_deg + static_cast<double>(i) * step_deg; }
};

enum class GridKind { wavelength, angle };

/// Sampled transmission curve together with the grid it was sampled on.
struct Spectrum {
    std::vector<double> values;
    GridKind grid = GridKind::wavelength;
};

/// Refraction angle inside the material (radians), n sin(theta_mat) = sin(theta).
double snell_angle(double theta_deg, double n);

/// TE Fresnel intensity reflectance of one interface.
double reflectance_te(double theta_deg, double n);

/// Coefficient of finesse F = 4R/(1-R)^2.
double finesse(double reflectance);

/// Phase prefactor delta0 = 4 pi n l cos(theta_mat) for the wavelength
/// parameterization, in nm.
double delta0_wavelength(const DesignParams& p);

SimplifiedParams simplified_params(const DesignParams& p);

/// Closed-form transmission T = 1 / (1 + F sin^2(half_phase)).
double transmission(double f_coeff, double half_phase);

/// T(lambda) sampled on the wavelength grid for fixed (theta, n, l).
Spectrum spectrum_lambda(const DesignParams& p, const WavelengthGrid& grid = {});

/// T(lambda) directly from (F, delta0).
Spectrum spectrum_lambda_simplified(const SimplifiedParams& sp, const WavelengthGrid& grid = {});

/// T(theta) sampled on the angle grid for fixed (lambda, n, l).
Spectrum spectrum_theta(double lambda_nm, double n, double l_nm, const AngleGrid& grid = {});

/// Brute-force partial-wave sum |sum_m (1-R) R^m e^{i m delta}|^2. Converges to
/// the closed form as terms grows; used as an independent oracle in tests.
double partial_wave_oracle(double reflectance, double delta, std::size_t terms);

}  // namespace fpinv::optics
