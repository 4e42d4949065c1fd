#include "fpinv/spectral.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace fpinv::spectral {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kDegenerateTotal = 1e-12;
}  // namespace

PowerSpectrum power_spectrum(const std::vector<double>& samples) {
    if (samples.size() < 2) {
        throw std::invalid_argument("power_spectrum: need at least 2 samples");
    }
    const std::size_t n = samples.size();
    PowerSpectrum ps;
    double total = 0.0;
    // Direct DFT of 10 bins; the loss is never differentiated, so no FFT needed.
    for (std::size_t k = 1; k <= kNumBins; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            const double angle = -kTwoPi * static_cast<double>(j * k) / static_cast<double>(n);
            acc += samples[j] * std::polar(1.0, angle);
        }
        ps.powers[k - 1] = std::norm(acc);
        total += ps.powers[k - 1];
    }
    if (total < kDegenerateTotal) {
        // Near-constant input carries no oscillation; fall back to uniform so
        // fourier_mse stays finite and flat targets rank flat candidates evenly.
        ps.powers.fill(1.0 / static_cast<double>(kNumBins));
    } else {
        for (double& p : ps.powers) p /= total;
    }
    return ps;
}

double fourier_mse(const PowerSpectrum& a, const PowerSpectrum& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < kNumBins; ++i) {
        const double d = a.powers[i] - b.powers[i];
        acc += d * d;
    }
    return acc / static_cast<double>(kNumBins);
}

double mse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("mse: length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double combined_loss(const std::vector<double>& pred, const std::vector<double>& target,
                     double w_transmission, double w_fourier) {
    return w_transmission * mse(pred, target) +
           w_fourier * fourier_mse(power_spectrum(pred), power_spectrum(target));
}

}  // namespace fpinv::spectral
