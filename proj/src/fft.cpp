// SPDX-License-Identifier: Apache-2.0
//
// skysounder -- correlation channel sounding toolkit for drone radio links
// Copyright (C) 2026 skysounder contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "skysounder/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace skysounder::dsp {

namespace {
// FFTW planning is not thread-safe; execution via fftw_execute_dft is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

struct Fft::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
    fftw_complex* buf_in = nullptr;
    fftw_complex* buf_out = nullptr;
};

Fft::Fft(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
    if (n == 0)
        throw std::invalid_argument("FFT length must be positive");
    std::lock_guard<std::mutex> lock(planner_mutex());
    impl_->buf_in = fftw_alloc_complex(n);
    impl_->buf_out = fftw_alloc_complex(n);
    // FFTW_ESTIMATE keeps planning deterministic and cheap.
    impl_->fwd = fftw_plan_dft_1d(int(n), impl_->buf_in, impl_->buf_out, FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->inv = fftw_plan_dft_1d(int(n), impl_->buf_in, impl_->buf_out, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!impl_->fwd || !impl_->inv)
        throw std::runtime_error("FFTW plan creation failed for length " + std::to_string(n));
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (impl_->fwd)
        fftw_destroy_plan(impl_->fwd);
    if (impl_->inv)
        fftw_destroy_plan(impl_->inv);
    fftw_free(impl_->buf_in);
    fftw_free(impl_->buf_out);
}

void Fft::forward(const cxd* in, cxd* out) const {
    fftw_execute_dft(impl_->fwd, reinterpret_cast<fftw_complex*>(const_cast<cxd*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void Fft::inverse(const cxd* in, cxd* out) const {
    fftw_execute_dft(impl_->inv, reinterpret_cast<fftw_complex*>(const_cast<cxd*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

CircularCorrelator::CircularCorrelator(const std::vector<cxd>& reference)
    : fft_(reference.size()),
      ref_spectrum_conj_(reference.size()),
      work_a_(reference.size()),
      work_b_(reference.size()) {
    fft_.forward(reference.data(), ref_spectrum_conj_.data());
    for (cxd& v : ref_spectrum_conj_)
        v = std::conj(v);
}

std::vector<cxd> CircularCorrelator::correlate(const std::vector<cxd>& block) const {
    const std::size_t n = fft_.size();
    if (block.size() != n)
        throw std::invalid_argument("correlator block length " + std::to_string(block.size()) +
                                    " does not match reference period " + std::to_string(n));
    fft_.forward(block.data(), work_a_.data());
    for (std::size_t k = 0; k < n; ++k)
        work_a_[k] *= ref_spectrum_conj_[k];
    fft_.inverse(work_a_.data(), work_b_.data());

    // One 1/N for the unnormalized inverse transform, one for the
    // correlation normalization itself.
    const double scale = 1.0 / (double(n) * double(n));
    std::vector<cxd> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = work_b_[k] * scale;
    return out;
}

} // namespace skysounder::dsp
