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

#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "skysounder/common.hpp"

namespace skysounder::dsp {

// Complex FFT of a fixed length (mixed radix, so 4095 works natively).
// Plan creation is serialized internally; execution is safe from multiple
// threads as long as each thread uses its own Fft instance.
class Fft {
  public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return n_; }

    // Unnormalized transforms; inverse(forward(x)) = n * x.
    void forward(const cxd* in, cxd* out) const;
    void inverse(const cxd* in, cxd* out) const;

  private:
    struct Impl;
    std::size_t n_;
    std::unique_ptr<Impl> impl_;
};

// Circular cross-correlation against a fixed reference period:
//   corr[l] = (1/N) * sum_n y[n] * conj(ref[(n - l) mod N])
// With a unit-amplitude bipolar reference the peak equals the complex path
// gain, independent of the period length.
class CircularCorrelator {
  public:
    explicit CircularCorrelator(const std::vector<cxd>& reference);

    std::size_t period() const { return fft_.size(); }

    std::vector<cxd> correlate(const std::vector<cxd>& block) const;

  private:
    Fft fft_;
    std::vector<cxd> ref_spectrum_conj_;
    mutable std::vector<cxd> work_a_, work_b_;
};

} // namespace skysounder::dsp
