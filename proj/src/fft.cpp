#include "rfio/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

#include "rfio/smooth.hpp"

namespace rfio {

namespace {
std::mutex g_fftw_mutex; // fftw planning is not thread-safe
}

void fft3(std::vector<complexd>& data, int n, int sign) {
    if (data.size() != static_cast<std::size_t>(n) * n * n)
        throw std::invalid_argument("fft3: size mismatch");
    fftw_complex* ptr = reinterpret_cast<fftw_complex*>(data.data());
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_plan plan = fftw_plan_dft_3d(n, n, n, ptr, ptr,
                                          sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                          FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    if (sign > 0) {
        double scale = 1.0 / (static_cast<double>(n) * n * n);
        for (auto& v : data) v *= scale;
    }
}

VectorSpatialField spectral_gradient(const SpatialField& F, int n, double L) {
    std::vector<complexd> hat = F.values;
    fft3(hat, n, -1);
    VectorSpatialField out(F.size());
    for (int c = 0; c < 3; ++c) {
        std::vector<complexd> comp(hat.size());
        std::size_t idx = 0;
        for (int i = 0; i < n; ++i) {
            double xi = lattice_frequency(i, n, L);
            for (int j = 0; j < n; ++j) {
                double xj = lattice_frequency(j, n, L);
                for (int k = 0; k < n; ++k, ++idx) {
                    double xk = lattice_frequency(k, n, L);
                    double x = c == 0 ? xi : (c == 1 ? xj : xk);
                    comp[idx] = complexd(0.0, x) * hat[idx];
                }
            }
        }
        fft3(comp, n, +1);
        out.comp(c) = std::move(comp);
    }
    return out;
}

SpatialField lowpass(const SpatialField& F, int n, double L, int j) {
    std::vector<complexd> hat = F.values;
    fft3(hat, n, -1);
    double scale = std::exp2(-j);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        double xi = lattice_frequency(i, n, L);
        for (int jj = 0; jj < n; ++jj) {
            double xj = lattice_frequency(jj, n, L);
            for (int k = 0; k < n; ++k, ++idx) {
                double xk = lattice_frequency(k, n, L);
                double r = std::sqrt(xi * xi + xj * xj + xk * xk);
                hat[idx] *= lp_chi(r * scale);
            }
        }
    }
    fft3(hat, n, +1);
    SpatialField out;
    out.values = std::move(hat);
    return out;
}

} // namespace rfio
