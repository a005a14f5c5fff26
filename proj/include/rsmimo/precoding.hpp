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
//
// Transmit precoders: regularized zero forcing and matched beamforming for the
// single-tier system, eigenspace-based outer precoding with inner regularized
// zero forcing for the two-tier system, and the common-message beams of both.

#ifndef rsmimo_precoding_H
#define rsmimo_precoding_H

#include <armadillo>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rsmimo/common.hpp"

namespace rsmimo
{

// ---------- SINGLE-TIER PRECODERS ----------

struct LinearPrecoder
{
    arma::cx_mat matrix; // M x K, trace(W^H W) = K
    double xi_sq = 0.0;  // squared normalization applied to the unnormalized solution
};

// Regularized zero forcing W = xi (HH^H + M eps I)^-1 H, computed in the K x K dual
// form, scaled so trace(W^H W) = K. eps is the per-antenna loading.
inline LinearPrecoder rzf_precoder(const arma::cx_mat &estimates, double epsilon)
{
    const arma::uword m = estimates.n_rows, k = estimates.n_cols;
    if (k == 0 || m == 0)
        throw std::invalid_argument("rzf_precoder: empty channel estimate matrix");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("rzf_precoder: epsilon must be positive");

    arma::cx_mat gram = estimates.t() * estimates;
    gram.diag() += (double)m * epsilon;
    arma::cx_mat inv;
    if (!arma::inv_sympd(inv, gram))
        throw ill_conditioned_error("rzf_precoder: regularized gram matrix is singular");

    LinearPrecoder out;
    out.matrix = estimates * inv;
    const double power = arma::accu(arma::square(arma::abs(out.matrix)));
    if (!(power > 0.0))
        throw ill_conditioned_error("rzf_precoder: precoder has no power");
    out.xi_sq = (double)k / power;
    out.matrix *= std::sqrt(out.xi_sq);
    return out;
}

// Matched beamforming: each column is the user's estimate scaled to unit norm
inline arma::cx_mat mbf_precoder(const arma::cx_mat &estimates)
{
    const arma::uword k = estimates.n_cols;
    if (k == 0 || estimates.n_rows == 0)
        throw std::invalid_argument("mbf_precoder: empty channel estimate matrix");
    arma::cx_mat w = estimates;
    for (arma::uword u = 0; u < k; ++u)
    {
        const double n = arma::norm(w.col(u));
        if (!(n > 0.0))
            throw ill_conditioned_error("mbf_precoder: zero channel estimate");
        w.col(u) /= n;
    }
    return w;
}

// ---------- COMMON-MESSAGE BEAM, SINGLE TIER ----------

// Per-user amplitudes of the common beam that equalize the common-stream SINR.
// pi(k) multiplies user k's common-signal power in the large-system SINR (the
// inverse of the interference-plus-noise seen while decoding the common part),
// so the products pi_k (1 - tau_k^2) a_k^2 come out equal and sum_k a_k^2 = 1/M.
inline arma::vec rs_common_weights(const arma::vec &pi, const arma::vec &tau, arma::uword antennas)
{
    const arma::uword k = pi.n_elem;
    if (k == 0 || tau.n_elem != k || antennas == 0)
        throw std::invalid_argument("rs_common_weights: inconsistent inputs");
    if (pi.min() <= 0.0)
        throw std::invalid_argument("rs_common_weights: pi must be positive");
    if (tau.min() < 0.0 || tau.max() >= 1.0)
        throw std::invalid_argument("rs_common_weights: tau must lie in [0,1); an estimate "
                                    "with no information cannot carry the common stream");

    arma::vec a(k);
    for (arma::uword u = 0; u < k; ++u)
    {
        double s = 0.0;
        for (arma::uword j = 0; j < k; ++j)
            s += (pi(u) * (1.0 - tau(u) * tau(u))) / (pi(j) * (1.0 - tau(j) * tau(j)));
        a(u) = 1.0 / std::sqrt((double)antennas * s);
    }
    return a;
}

// Weighted sum of the user estimates, scaled to unit norm per realization
inline arma::cx_vec rs_common_precoder(const arma::cx_mat &estimates, const arma::vec &weights)
{
    if (estimates.n_cols == 0 || weights.n_elem != estimates.n_cols)
        throw std::invalid_argument("rs_common_precoder: one weight per user required");
    arma::cx_vec w = estimates * arma::cx_vec(weights, arma::vec(weights.n_elem, arma::fill::zeros));
    const double n = arma::norm(w);
    if (!(n > 0.0))
        throw ill_conditioned_error("rs_common_precoder: zero common beam");
    return w / n;
}

// ---------- TWO-TIER OUTER PRECODER ----------

// Outer precoders from group covariances: for each group, an orthonormal basis of
// the space left unoccupied by the dominant eigenspaces of all other groups, rotated
// onto the strongest directions of the group's own covariance projected there.
// dims_b(g) columns are produced for group g; dominant_rank eigenvectors per group
// are protected. Deterministic: eigenvector phases are pinned.
inline std::vector<arma::cx_mat> outer_precoder(const std::vector<const arma::cx_mat *> &covariances,
                                                arma::uword dominant_rank, const arma::uvec &dims_b)
{
    const std::size_t g_count = covariances.size();
    if (g_count < 2)
        throw std::invalid_argument("outer_precoder: at least two groups required");
    if (dims_b.n_elem != g_count)
        throw std::invalid_argument("outer_precoder: one output dimension per group required");
    const arma::uword m = covariances[0]->n_rows;
    if (dominant_rank == 0 || dominant_rank > m)
        throw std::invalid_argument("outer_precoder: dominant rank must lie in [1, M]");
    for (const arma::cx_mat *r : covariances)
        if (r->n_rows != m || r->n_cols != m)
            throw std::invalid_argument("outer_precoder: covariances must be square and equal-sized");

    // dominant eigenvectors of every group, descending eigenvalue order
    std::vector<arma::cx_mat> dominant(g_count);
    for (std::size_t g = 0; g < g_count; ++g)
    {
        arma::vec val;
        arma::cx_mat vec;
        if (!arma::eig_sym(val, vec, 0.5 * (*covariances[g] + covariances[g]->t())))
            throw ill_conditioned_error("outer_precoder: eigendecomposition failed");
        dominant[g] = arma::fliplr(vec.tail_cols(dominant_rank));
    }

    std::vector<arma::cx_mat> outer(g_count);
    for (std::size_t g = 0; g < g_count; ++g)
    {
        arma::cx_mat stack(m, (g_count - 1) * dominant_rank);
        arma::uword at = 0;
        for (std::size_t l = 0; l < g_count; ++l)
            if (l != g)
            {
                stack.cols(at, at + dominant_rank - 1) = dominant[l];
                at += dominant_rank;
            }

        arma::cx_mat u, v;
        arma::vec s;
        if (!arma::svd(u, s, v, stack))
            throw ill_conditioned_error("outer_precoder: singular value decomposition failed");
        const double tol = 1e-10 * (s.n_elem > 0 ? s.max() : 0.0);
        arma::uword rank = 0;
        for (arma::uword i = 0; i < s.n_elem; ++i)
            if (s(i) > tol)
                ++rank;
        if (rank >= m)
            throw std::invalid_argument("outer_precoder: no interference-free directions left");
        const arma::cx_mat null_basis = u.tail_cols(m - rank);

        if (dims_b(g) == 0 || dims_b(g) > m - rank)
            throw std::invalid_argument("outer_precoder: requested dimension exceeds the "
                                        "interference-free subspace");

        arma::cx_mat projected = null_basis.t() * (*covariances[g]) * null_basis;
        projected = 0.5 * (projected + projected.t());
        arma::vec val;
        arma::cx_mat vec;
        if (!arma::eig_sym(val, vec, projected))
            throw ill_conditioned_error("outer_precoder: projected eigendecomposition failed");
        arma::cx_mat top = arma::fliplr(vec.tail_cols(dims_b(g)));
        outer[g] = null_basis * top;
        normalize_column_phases(outer[g]);
    }
    return outer;
}

// ---------- TWO-TIER INNER PRECODER ----------

struct InnerPrecoder
{
    arma::cx_mat effective; // b_g x K_g, scaled: trace over B^H B metric equals K_g
    arma::cx_mat full;      // M x K_g, equals outer * effective
    double xi_sq = 0.0;
};

// Regularized zero forcing on the effective channel estimates seen through the outer
// precoder. The loading is b_g * epsilon; the power normalization measures the
// transmitted power through the outer stage, trace(W^H B^H B W) = K_g.
inline InnerPrecoder inner_rzf_precoder(const arma::cx_mat &outer,
                                        const arma::cx_mat &effective_estimates, double epsilon)
{
    const arma::uword b = outer.n_cols, k = effective_estimates.n_cols;
    if (b == 0 || k == 0 || effective_estimates.n_rows != b)
        throw std::invalid_argument("inner_rzf_precoder: effective estimates must have one row "
                                    "per outer column");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("inner_rzf_precoder: epsilon must be positive");

    arma::cx_mat gram = effective_estimates * effective_estimates.t(); // b x b
    gram.diag() += (double)b * epsilon;
    arma::cx_mat inv;
    if (!arma::inv_sympd(inv, gram))
        throw ill_conditioned_error("inner_rzf_precoder: regularized gram matrix is singular");

    InnerPrecoder out;
    out.effective = inv * effective_estimates; // b x K_g
    const arma::cx_mat through = outer * out.effective;
    const double power = arma::accu(arma::square(arma::abs(through)));
    if (!(power > 0.0))
        throw ill_conditioned_error("inner_rzf_precoder: precoder has no power");
    out.xi_sq = (double)k / power;
    out.effective *= std::sqrt(out.xi_sq);
    out.full = outer * out.effective;
    return out;
}

// ---------- TWO-TIER COMMON BEAMS ----------

struct HrsCommonBeams
{
    arma::cx_vec outer_common;             // M, unit norm: heard by every group
    std::vector<arma::cx_vec> inner_common; // M each, unit transmit power per group
};

// Outer common beam: sum of all projected estimates, unit-normalized. Inner common
// beam of a group: the mean of the group's private beams, scaled to unit transmit
// power through the outer stage.
inline HrsCommonBeams hrs_common_precoders(const std::vector<arma::cx_mat> &outer,
                                           const std::vector<InnerPrecoder> &inner,
                                           const std::vector<arma::cx_mat> &effective_estimates)
{
    const std::size_t g_count = outer.size();
    if (g_count == 0 || inner.size() != g_count || effective_estimates.size() != g_count)
        throw std::invalid_argument("hrs_common_precoders: inconsistent group data");
    const arma::uword m = outer[0].n_rows;

    HrsCommonBeams beams;
    beams.outer_common.zeros(m);
    for (std::size_t g = 0; g < g_count; ++g)
    {
        if (outer[g].n_rows != m || effective_estimates[g].n_rows != outer[g].n_cols)
            throw std::invalid_argument("hrs_common_precoders: inconsistent dimensions");
        beams.outer_common += outer[g] * arma::sum(effective_estimates[g], 1);
    }
    const double n = arma::norm(beams.outer_common);
    if (!(n > 0.0))
        throw ill_conditioned_error("hrs_common_precoders: zero outer common beam");
    beams.outer_common /= n;

    beams.inner_common.resize(g_count);
    for (std::size_t g = 0; g < g_count; ++g)
    {
        const arma::cx_vec q = arma::mean(inner[g].effective, 1);
        const arma::cx_vec through = outer[g] * q;
        const double power = arma::norm(through);
        if (!(power > 0.0))
            throw ill_conditioned_error("hrs_common_precoders: zero inner common beam");
        beams.inner_common[g] = through / power;
    }
    return beams;
}

} // namespace rsmimo

#endif
