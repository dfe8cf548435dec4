#pragma once

// Thin RAII wrapper over FFTW complex transforms on an N-dimensional periodic grid.

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace choquard {

class FftPlan {
public:
    /// `dims` lists the extent of each axis (row-major). Plans are unaligned and in-place,
    /// so one plan can be executed on any buffer of the right length from any thread.
    explicit FftPlan(std::vector<int> dims);
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;

    void forward(std::span<std::complex<double>> data) const;
    /// Inverse transform including the 1/size normalisation.
    void backward(std::span<std::complex<double>> data) const;

    std::size_t size() const { return size_; }
    const std::vector<int>& dims() const { return dims_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::vector<int> dims_;
    std::size_t size_ = 0;
};

/// Angular wavenumber of FFT bin `i` on an axis with `M` points and period `period`.
inline double wavenumber(int i, int M, double period) {
    const int k = (i <= M / 2) ? i : i - M;
    return 2.0 * 3.14159265358979323846 * k / period;
}

}  // namespace choquard
