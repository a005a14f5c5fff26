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

#ifndef rsmimo_common_H
#define rsmimo_common_H

#include <armadillo>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsmimo
{

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Raised when a fixed-point iteration fails to converge; carries the residual trace for diagnosis.
class fixed_point_error : public std::runtime_error
{
  public:
    std::vector<double> residual_history;
    fixed_point_error(const std::string &msg, std::vector<double> history)
        : std::runtime_error(msg), residual_history(std::move(history)) {}
};

// Raised when a linear system or matrix inverse is singular to working precision.
class ill_conditioned_error : public std::runtime_error
{
  public:
    explicit ill_conditioned_error(const std::string &msg) : std::runtime_error(msg) {}
};

// Spectral efficiency of a link with SINR x, in bps/Hz
inline double rate_bps(double x)
{
    return std::log1p(x) * 1.4426950408889634073599246810018921; // log2(1+x)
}

// ---------- DETERMINISTIC SUMMATION ----------

// Pairwise sum over x[lo..hi). The reduction tree depends only on the index range,
// so results are independent of how the values were produced (worker count, order).
inline double pairwise_sum(const double *x, std::size_t lo, std::size_t hi)
{
    const std::size_t n = hi - lo;
    if (n <= 8)
    {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            s += x[i];
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_sum(x, lo, mid) + pairwise_sum(x, mid, hi);
}

inline double pairwise_sum(const std::vector<double> &x)
{
    return pairwise_sum(x.data(), 0, x.size());
}

inline double pairwise_mean(const std::vector<double> &x)
{
    if (x.empty())
        throw std::invalid_argument("pairwise_mean: empty input");
    return pairwise_sum(x) / (double)x.size();
}

// Standard error of the mean (unbiased sample variance); 0 for fewer than two samples
inline double standard_error(const std::vector<double> &x)
{
    const std::size_t n = x.size();
    if (n < 2)
        return 0.0;
    const double mu = pairwise_mean(x);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i)
        sq[i] = (x[i] - mu) * (x[i] - mu);
    return std::sqrt(pairwise_sum(sq) / (double)(n - 1) / (double)n);
}

// ---------- PHASE CONVENTION ----------

// Rotate each column so its first non-negligible component is real-positive.
// Fixes the arbitrary phase of eigenvectors / singular vectors, making every
// precoder a deterministic function of its inputs.
inline void normalize_column_phases(arma::cx_mat &U)
{
    for (arma::uword c = 0; c < U.n_cols; ++c)
    {
        const double mx = arma::abs(U.col(c)).max();
        if (mx == 0.0)
            continue;
        for (arma::uword r = 0; r < U.n_rows; ++r)
        {
            const std::complex<double> u = U(r, c);
            if (std::abs(u) > 1e-12 * mx)
            {
                U.col(c) *= std::conj(u) / std::abs(u);
                break;
            }
        }
    }
}

// ---------- SMALL HELPERS ----------

// real(trace(A * B)) without forming the product
inline double trace_prod_real(const arma::cx_mat &A, const arma::cx_mat &B)
{
    return std::real(arma::accu(A % B.st()));
}

inline double snr_db_to_power(double snr_db)
{
    return std::pow(10.0, snr_db / 10.0); // noise variance is 1
}

} // namespace rsmimo

#endif
