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

#ifndef rsmimo_channel_H
#define rsmimo_channel_H

#include <armadillo>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rsmimo/common.hpp"
#include "rsmimo/rng.hpp"

namespace rsmimo
{

// ---------- ARRAY GEOMETRY ----------

// Antenna positions in the horizontal plane, in wavelength units (carrier wavelength = 1)
struct ArrayGeometry
{
    arma::mat positions; // 2 x M, column m = (x_m, y_m)
};

// Uniform circular array with adjacent-element spacing of exactly half a wavelength.
// Radius 0.5 / sqrt((1-cos(2*pi/M))^2 + sin^2(2*pi/M)) = 1 / (4 sin(pi/M)).
inline ArrayGeometry uca_positions(arma::uword num_antennas)
{
    if (num_antennas < 2)
        throw std::invalid_argument("uca_positions: at least 2 antennas required");

    const double m = (double)num_antennas;
    const double phi = 2.0 * pi / m;
    const double radius = 0.5 / std::sqrt((1.0 - std::cos(phi)) * (1.0 - std::cos(phi)) +
                                          std::sin(phi) * std::sin(phi));

    ArrayGeometry geo;
    geo.positions.set_size(2, num_antennas);
    for (arma::uword i = 0; i < num_antennas; ++i)
    {
        geo.positions(0, i) = radius * std::cos(phi * (double)i);
        geo.positions(1, i) = radius * std::sin(phi * (double)i);
    }
    return geo;
}

// ---------- GAUSS-LEGENDRE QUADRATURE ----------

namespace detail
{
// Nodes and weights on [-1, 1] via Golub-Welsch: eigendecompose the symmetric
// tridiagonal Jacobi matrix with off-diagonals i / sqrt(4 i^2 - 1).
inline void gauss_legendre(arma::uword n, arma::vec &nodes, arma::vec &weights)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: need at least one node");
    if (n == 1)
    {
        nodes = {0.0};
        weights = {2.0};
        return;
    }
    arma::mat J(n, n, arma::fill::zeros);
    for (arma::uword i = 1; i < n; ++i)
    {
        const double b = (double)i / std::sqrt(4.0 * (double)i * (double)i - 1.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    arma::vec ev;
    arma::mat V;
    if (!arma::eig_sym(ev, V, J))
        throw std::runtime_error("gauss_legendre: eigendecomposition failed");
    nodes = ev; // ascending
    weights.set_size(n);
    for (arma::uword i = 0; i < n; ++i)
        weights(i) = 2.0 * V(0, i) * V(0, i);
}

// Steering vector towards azimuth alpha: a_i = exp(-j 2*pi * [cos a, sin a] . r_i)
inline arma::cx_vec steering(const arma::mat &pos, double alpha)
{
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    arma::cx_vec a(pos.n_cols);
    for (arma::uword i = 0; i < pos.n_cols; ++i)
    {
        const double phase = -2.0 * pi * (ca * pos(0, i) + sa * pos(1, i));
        a(i) = std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return a;
}
} // namespace detail

// ---------- ONE-RING SPATIAL CORRELATION ----------

struct OneRingParams
{
    double azimuth = 0.0;        // theta, radians
    double angular_spread = 0.0; // Delta, radians; scatterers uniform on [theta-Delta, theta+Delta]
};

// [R]_ij = (1 / 2*Delta) * Int_{theta-Delta}^{theta+Delta} exp(-j 2*pi [cos a, sin a] (r_i - r_j)) da.
// Evaluated as R = sum_q w_q a(alpha_q) a(alpha_q)^H with normalized Gauss-Legendre weights,
// which makes R Hermitian PSD with unit diagonal by construction.
inline arma::cx_mat one_ring_matrix(const ArrayGeometry &geometry, const OneRingParams &params,
                                    arma::uword quadrature_points = 200)
{
    const arma::mat &pos = geometry.positions;
    if (pos.n_rows != 2 || pos.n_cols < 1)
        throw std::invalid_argument("one_ring_matrix: geometry must hold 2 x M positions");
    if (!pos.is_finite() || !std::isfinite(params.azimuth) || !std::isfinite(params.angular_spread))
        throw std::invalid_argument("one_ring_matrix: non-finite input");
    if (params.angular_spread < 0.0)
        throw std::invalid_argument("one_ring_matrix: angular spread must be non-negative");

    if (params.angular_spread == 0.0) // single scatterer direction, rank-1 by definition
    {
        const arma::cx_vec a = detail::steering(pos, params.azimuth);
        return a * a.t();
    }

    arma::vec nodes, weights;
    detail::gauss_legendre(quadrature_points, nodes, weights);

    const arma::uword m = pos.n_cols, q = quadrature_points;
    arma::cx_mat A(m, q);
    for (arma::uword k = 0; k < q; ++k)
    {
        const double alpha = params.azimuth + params.angular_spread * nodes(k);
        A.col(k) = detail::steering(pos, alpha) * std::sqrt(weights(k) * 0.5); // weights sum to 2
    }
    arma::cx_mat R = A * A.t();
    return 0.5 * (R + R.t()); // scrub round-off asymmetry
}

// ---------- EIGENSTRUCTURE ----------

// Spatial correlation with its truncated eigendecomposition.
// eigenvalues are descending; basis columns are unit-norm with pinned phases;
// factor = basis * diag(sqrt(eigenvalues)) is the channel shaping matrix.
struct CorrelationModel
{
    arma::cx_mat matrix;   // M x M
    arma::cx_mat basis;    // M x rank
    arma::vec eigenvalues; // rank, descending, all > 0
    arma::cx_mat factor;   // M x rank
    arma::uword rank = 0;
};

// Drop eigenvalues below rel_tol * lambda_max. A negative eigenvalue beyond
// -1e-8 * lambda_max means the input is not PSD and is rejected.
inline CorrelationModel eigen_truncate(const arma::cx_mat &R, double rel_tol = 1e-10)
{
    if (R.n_rows != R.n_cols || R.n_rows == 0)
        throw std::invalid_argument("eigen_truncate: square matrix required");
    if (!R.is_finite())
        throw std::invalid_argument("eigen_truncate: non-finite input");
    if (arma::norm(arma::cx_mat(R - R.t()), "fro") > 1e-10 * (1.0 + arma::norm(R, "fro")))
        throw std::invalid_argument("eigen_truncate: matrix is not Hermitian");

    arma::vec ev;
    arma::cx_mat V;
    if (!arma::eig_sym(ev, V, 0.5 * (R + R.t())))
        throw std::runtime_error("eigen_truncate: eigendecomposition failed");

    CorrelationModel model;
    model.matrix = R;
    const double lmax = ev.max();
    if (lmax <= 0.0) // all-zero (degenerate) correlation: rank 0, draws are zero vectors
    {
        if (ev.min() < -1e-14)
            throw std::invalid_argument("eigen_truncate: matrix is not positive semidefinite");
        model.basis.set_size(R.n_rows, 0);
        model.eigenvalues.set_size(0);
        model.factor.set_size(R.n_rows, 0);
        return model;
    }
    if (ev.min() < -1e-8 * lmax)
        throw std::invalid_argument("eigen_truncate: matrix is not positive semidefinite");

    std::vector<arma::uword> keep; // eig_sym sorts ascending; walk backwards for descending order
    for (arma::uword i = ev.n_elem; i-- > 0;)
        if (ev(i) >= rel_tol * lmax)
            keep.push_back(i);

    model.rank = (arma::uword)keep.size();
    model.basis.set_size(R.n_rows, model.rank);
    model.eigenvalues.set_size(model.rank);
    for (arma::uword c = 0; c < model.rank; ++c)
    {
        model.basis.col(c) = V.col(keep[c]);
        model.eigenvalues(c) = ev(keep[c]);
    }
    normalize_column_phases(model.basis);
    model.factor = model.basis * arma::diagmat(arma::sqrt(model.eigenvalues));
    return model;
}

inline CorrelationModel one_ring_correlation(const ArrayGeometry &geometry, const OneRingParams &params,
                                             arma::uword quadrature_points = 200, double rank_rel_tol = 1e-10)
{
    return eigen_truncate(one_ring_matrix(geometry, params, quadrature_points), rank_rel_tol);
}

// ---------- CHANNEL AND CSIT DRAWS ----------

// One Monte Carlo draw of the downlink: true channels and transmitter-side estimates
struct ChannelSample
{
    arma::cx_mat channels;             // M x K, column k = h_k
    arma::cx_mat estimates;            // M x K, column k = (estimated) h_k
    std::vector<arma::cx_vec> factors; // per-user inner Gaussian g_k (rank-dim)
};

// h_k = U_k Lambda_k^(1/2) g_k with g_k ~ CN(0, I). Draw order: users ascending.
inline void draw_channel(ChannelSample &sample, const std::vector<const CorrelationModel *> &models,
                         substream_rng &rng)
{
    const arma::uword k = (arma::uword)models.size();
    if (k == 0)
        throw std::invalid_argument("draw_channel: no users");
    const arma::uword m = models[0]->matrix.n_rows;

    sample.channels.set_size(m, k);
    sample.factors.resize(k);
    for (arma::uword u = 0; u < k; ++u)
    {
        if (models[u]->matrix.n_rows != m)
            throw std::invalid_argument("draw_channel: inconsistent antenna counts");
        sample.factors[u] = rng.cnormal_vec(models[u]->rank);
        sample.channels.col(u) = models[u]->factor * sample.factors[u];
    }
}

// Estimate of h_k: U_k Lambda_k^(1/2) (sqrt(1-tau_k^2) g_k + tau_k z_k), z_k ~ CN(0, I)
// independent of g_k. tau_k = 0 reproduces h_k bit for bit. Draw order: users ascending,
// after all channel factors of the sample.
inline void draw_csit(ChannelSample &sample, const std::vector<const CorrelationModel *> &models,
                      const arma::vec &tau, substream_rng &rng)
{
    const arma::uword k = (arma::uword)models.size();
    if (tau.n_elem != k || sample.factors.size() != k)
        throw std::invalid_argument("draw_csit: draw_channel must run first with matching users");
    if (tau.min() < 0.0 || tau.max() > 1.0)
        throw std::invalid_argument("draw_csit: tau must lie in [0,1]");

    sample.estimates.set_size(sample.channels.n_rows, k);
    for (arma::uword u = 0; u < k; ++u)
    {
        const arma::cx_vec z = rng.cnormal_vec(models[u]->rank);
        if (tau(u) == 0.0)
        {
            sample.estimates.col(u) = sample.channels.col(u);
            continue;
        }
        const arma::cx_vec ghat = std::sqrt(1.0 - tau(u) * tau(u)) * sample.factors[u] + tau(u) * z;
        sample.estimates.col(u) = models[u]->factor * ghat;
    }
}

inline ChannelSample draw_sample(const std::vector<const CorrelationModel *> &models,
                                 const arma::vec &tau, substream_rng &rng)
{
    ChannelSample sample;
    draw_channel(sample, models, rng);
    draw_csit(sample, models, tau, rng);
    return sample;
}

} // namespace rsmimo

#endif
