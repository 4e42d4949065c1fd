#pragma once

#include <array>
#include <vector>

// Fourier power spectra of transmission curves and the secondary losses used
// to initialize inverse design. The bins cover 1..10 cycles across the sample
// window; the DC component is excluded by construction.

namespace fpinv::spectral {

inline constexpr std::size_t kNumBins = 10;

/// Normalized power in frequencies 1..10; sums to 1 (uniform for flat inputs).
struct PowerSpectrum {
    std::array<double, kNumBins> powers{};
};

PowerSpectrum power_spectrum(const std::vector<double>& samples);

/// Mean squared difference over the 10 bins.
double fourier_mse(const PowerSpectrum& a, const PowerSpectrum& b);

double mse(const std::vector<double>& a, const std::vector<double>& b);

/// Transmission MSE plus Fourier-power MSE, with optional weights.
double combined_loss(const std::vector<double>& pred, const std::vector<double>& target,
                     double w_transmission = 1.0, double w_fourier = 1.0);

}  // namespace fpinv::spectral
