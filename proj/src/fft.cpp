#include "choquard/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace choquard {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct FftPlan::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
};

FftPlan::FftPlan(std::vector<int> dims) : impl_(std::make_unique<Impl>()), dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("FftPlan needs at least one axis");
    size_ = 1;
    for (int d : dims_) size_ *= static_cast<std::size_t>(d);
    std::vector<std::complex<double>> scratch(size_);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    impl_->fwd = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf, buf, FFTW_FORWARD, flags);
    impl_->bwd = fftw_plan_dft(static_cast<int>(dims_.size()), dims_.data(), buf, buf, FFTW_BACKWARD, flags);
    if (!impl_->fwd || !impl_->bwd) throw std::runtime_error("FFTW planning failed");
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::forward(std::span<std::complex<double>> data) const {
    if (data.size() != size_) throw std::invalid_argument("FFT buffer length mismatch");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(impl_->fwd, buf, buf);
}

void FftPlan::backward(std::span<std::complex<double>> data) const {
    if (data.size() != size_) throw std::invalid_argument("FFT buffer length mismatch");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(impl_->bwd, buf, buf);
    const double scale = 1.0 / static_cast<double>(size_);
    for (auto& z : data) z *= scale;
}

}  // namespace choquard
