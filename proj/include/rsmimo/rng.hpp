// SPDX-License-Identifier: Apache-2.0
//
// rsmimo c++ simulation library for rate-splitting transmission in the massive MIMO downlink
// Copyright (C) 2026 rsmimo developers
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

#ifndef rsmimo_rng_H
#define rsmimo_rng_H

#include <armadillo>
#include <cmath>
#include <cstdint>
#include <random>

#include "rsmimo/common.hpp"

namespace rsmimo
{

namespace detail
{
// splitmix64 finalizer; decorrelates nearby counter values
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

// Counter-based substream generator. A stream is addressed by
// (master_seed, stream_a, stream_b); every trial of every SNR point owns an
// independent stream, so draws do not depend on scheduling or worker count.
class substream_rng
{
  public:
    substream_rng(std::uint64_t master_seed, std::uint64_t stream_a, std::uint64_t stream_b)
    {
        std::uint64_t h = detail::mix64(master_seed);
        h = detail::mix64(h ^ detail::mix64(stream_a + 0xA0761D6478BD642FULL));
        h = detail::mix64(h ^ detail::mix64(stream_b + 0xE7037ED1A0B428DBULL));
        gen.seed(h);
    }

    // Uniform on (0,1), 53-bit resolution, never returns 0 or 1
    double uniform01()
    {
        return ((double)(gen() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; the spare value is cached
    double gaussian()
    {
        if (has_spare)
        {
            has_spare = false;
            return spare;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01()));
        const double a = 2.0 * pi * uniform01();
        spare = r * std::sin(a);
        has_spare = true;
        return r * std::cos(a);
    }

    // Circularly-symmetric complex normal CN(0,1): variance 1/2 per component
    std::complex<double> cnormal()
    {
        const double re = gaussian();
        const double im = gaussian();
        return {re * 0.70710678118654752440, im * 0.70710678118654752440};
    }

    arma::cx_vec cnormal_vec(arma::uword n)
    {
        arma::cx_vec v(n);
        for (arma::uword i = 0; i < n; ++i)
            v(i) = cnormal();
        return v;
    }

    arma::cx_mat cnormal_mat(arma::uword rows, arma::uword cols)
    {
        arma::cx_mat m(rows, cols);
        for (arma::uword c = 0; c < cols; ++c) // column-major fill
            for (arma::uword r = 0; r < rows; ++r)
                m(r, c) = cnormal();
        return m;
    }

  private:
    std::mt19937_64 gen;
    double spare = 0.0;
    bool has_spare = false;
};

} // namespace rsmimo

#endif
