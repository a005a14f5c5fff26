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
// Deterministic equivalents (large-system limits) of the regularized
// channel-inversion quantities that drive rate-splitting power allocation:
// the resolvent fixed point, its derivative linear system, and the
// asymptotic SINR expressions for single-tier and two-tier transmission.

#ifndef rsmimo_rmt_H
#define rsmimo_rmt_H

#include <armadillo>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rsmimo/common.hpp"

namespace rsmimo
{

// ---------- RESOLVENT FIXED POINT ----------

// Solution of m_k = (1/d) tr(R_k T), T = (sum_j (w_j/d) R_j / (1+m_j) + eps I + shift)^-1.
// w_j is the multiplicity of covariance j (1 per user in the single-tier system;
// the group size when one covariance is shared by a whole group).
struct FixedPoint
{
    arma::vec m;       // one entry per covariance
    arma::cx_mat T;    // d x d resolvent at the fixed point
    double epsilon = 0.0;
    arma::uword iterations = 0;
    double residual = 0.0; // max_k |m_k - (1/d) tr(R_k T)| / (1 + |m_k|), with final T
};

namespace detail
{
inline arma::cx_mat resolvent(const std::vector<const arma::cx_mat *> &r, const arma::vec &w,
                              const arma::vec &m, double epsilon, const arma::cx_mat *shift)
{
    const arma::uword d = r[0]->n_rows;
    arma::cx_mat x(d, d, arma::fill::zeros);
    for (std::size_t j = 0; j < r.size(); ++j)
        x += (w(j) / (double)d / (1.0 + m(j))) * (*r[j]);
    x.diag() += epsilon;
    if (shift != nullptr)
        x += *shift;
    arma::cx_mat t;
    if (!arma::inv_sympd(t, x) && !arma::inv(t, x))
        throw ill_conditioned_error("resolvent: matrix is singular to working precision");
    return t;
}
} // namespace detail

// Damped Picard iteration from m = init. Damping 0.5 engages automatically once the
// update magnitude grows (oscillation). Non-convergence raises fixed_point_error with
// the residual history attached. `shift` adds a constant Hermitian term inside the
// inverse; it exists so finite-difference probes can perturb the resolvent.
inline FixedPoint solve_fixed_point(const std::vector<const arma::cx_mat *> &covariances,
                                    const arma::vec &weights, double epsilon,
                                    double tol = 1e-10, arma::uword max_iterations = 10000,
                                    double init = 1.0, const arma::cx_mat *shift = nullptr)
{
    const std::size_t n = covariances.size();
    if (n == 0)
        throw std::invalid_argument("solve_fixed_point: no covariances");
    if (weights.n_elem != n)
        throw std::invalid_argument("solve_fixed_point: one weight per covariance required");
    if (weights.min() <= 0.0)
        throw std::invalid_argument("solve_fixed_point: weights must be positive");
    if (!(epsilon > 0.0) || !(tol > 0.0))
        throw std::invalid_argument("solve_fixed_point: epsilon and tol must be positive");
    const arma::uword d = covariances[0]->n_rows;
    for (const arma::cx_mat *r : covariances)
        if (r->n_rows != d || r->n_cols != d)
            throw std::invalid_argument("solve_fixed_point: covariances must share one square dimension");

    FixedPoint fp;
    fp.epsilon = epsilon;
    fp.m.set_size(n);
    fp.m.fill(init);

    std::vector<double> history;
    arma::vec m_new(n);
    double damping = 1.0, prev_delta = arma::datum::inf;
    bool converged = false;

    for (arma::uword it = 1; it <= max_iterations; ++it)
    {
        const arma::cx_mat t = detail::resolvent(covariances, weights, fp.m, epsilon, shift);
        for (std::size_t k = 0; k < n; ++k)
            m_new(k) = trace_prod_real(*covariances[k], t) / (double)d;

        double delta = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            delta = std::max(delta, std::abs(m_new(k) - fp.m(k)) / std::max(std::abs(m_new(k)), 1e-300));
        history.push_back(delta);
        fp.iterations = it;

        if (delta <= tol)
        {
            fp.m = m_new;
            converged = true;
            break;
        }
        if (delta > prev_delta)
            damping = 0.5; // oscillation detected; stay damped from here on
        prev_delta = delta;
        fp.m = damping * m_new + (1.0 - damping) * fp.m;
    }
    if (!converged)
        throw fixed_point_error("solve_fixed_point: no convergence within iteration budget", history);

    fp.T = detail::resolvent(covariances, weights, fp.m, epsilon, shift);
    fp.residual = 0.0;
    for (std::size_t k = 0; k < n; ++k)
    {
        const double mk = trace_prod_real(*covariances[k], fp.T) / (double)d;
        fp.residual = std::max(fp.residual, std::abs(fp.m(k) - mk) / (1.0 + std::abs(fp.m(k))));
    }
    return fp;
}

// ---------- DERIVATIVE LINEAR SYSTEM ----------

// m' and the per-direction derivatives m'_k solve (I - J) x = v with
// [J]_ij = w_j tr(R_i T R_j T) / (d^2 (1+m_j)^2),
// [v]_i = (1/d) tr(R_i T^2),  [v_k]_i = (1/d) tr(R_i T R_k T).
// m' equals -dm/d(eps); column k of m_prime_dir equals dm/dz when the resolvent
// constant term is perturbed by -z R_k.
struct DerivativeSystem
{
    arma::mat jacobian;    // J, n x n, real
    arma::vec v_eps;       // v
    arma::mat v_dir;       // column k = v_k
    arma::vec m_prime;     // (I-J)^-1 v
    arma::mat m_prime_dir; // column k = (I-J)^-1 v_k
    double spectral_radius = 0.0;
};

inline DerivativeSystem solve_derivative_system(const std::vector<const arma::cx_mat *> &covariances,
                                                const arma::vec &weights, const FixedPoint &fp)
{
    const std::size_t n = covariances.size();
    if (n == 0 || weights.n_elem != n || fp.m.n_elem != n)
        throw std::invalid_argument("solve_derivative_system: inconsistent inputs");
    const double d = (double)covariances[0]->n_rows;

    std::vector<arma::cx_mat> s(n); // S_i = R_i T
    for (std::size_t i = 0; i < n; ++i)
        s[i] = (*covariances[i]) * fp.T;

    arma::mat c(n, n); // c(i,j) = tr(R_i T R_j T), real symmetric for Hermitian inputs
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
        {
            c(i, j) = trace_prod_real(s[i], s[j]);
            c(j, i) = c(i, j);
        }

    DerivativeSystem ds;
    ds.jacobian.set_size(n, n);
    ds.v_eps.set_size(n);
    ds.v_dir = c / d;
    for (std::size_t i = 0; i < n; ++i)
    {
        ds.v_eps(i) = trace_prod_real(s[i], fp.T) / d;
        for (std::size_t j = 0; j < n; ++j)
            ds.jacobian(i, j) = weights(j) * c(i, j) / (d * d * (1.0 + fp.m(j)) * (1.0 + fp.m(j)));
    }

    ds.spectral_radius = arma::abs(arma::eig_gen(ds.jacobian)).max();

    const arma::mat lhs = arma::eye(n, n) - ds.jacobian;
    arma::vec mp;
    arma::mat mpd;
    if (!arma::solve(mp, lhs, ds.v_eps, arma::solve_opts::no_approx) ||
        !arma::solve(mpd, lhs, ds.v_dir, arma::solve_opts::no_approx))
        throw ill_conditioned_error("solve_derivative_system: (I - J) is singular to working precision");
    ds.m_prime = mp;
    ds.m_prime_dir = mpd;
    return ds;
}

// ---------- SINGLE-TIER ASYMPTOTIC SINRS ----------

// Large-system SINRs for rate-splitting over regularized channel inversion with
// uniform private power P t / K and common power P (1 - t).
// Inputs must describe one covariance per user (all fixed-point weights equal 1).
struct RsAsymptotics
{
    double power = 0.0, split_t = 1.0;
    double psi = 0.0;    // Psi
    double xi_sq = 0.0;  // (xi)^2 = K / Psi
    arma::vec upsilon;   // per user
    arma::vec phi;       // per user
    arma::vec omega;     // per user
    arma::vec gamma_common;
    arma::vec gamma_private;
    double gamma_common_min = 0.0;
    double rate_common = 0.0;  // log2(1 + min_k gamma_common_k); 0 when t = 1
    double rate_private = 0.0; // sum_k log2(1 + gamma_private_k)
    double rate_sum = 0.0;
};

// common_weights_sq: optional per-user squared weights a_k^2 of the common precoder,
// constrained to sum to 1/M; defaults to the equally weighted 1/(M K).
inline RsAsymptotics rs_asymptotics(const FixedPoint &fp, const DerivativeSystem &ds,
                                    const arma::vec &tau, double power, double split_t,
                                    const arma::vec *common_weights_sq = nullptr)
{
    const arma::uword k = fp.m.n_elem;
    const double m_dim = (double)fp.T.n_rows;
    if (tau.n_elem != k || ds.m_prime.n_elem != k)
        throw std::invalid_argument("rs_asymptotics: per-user inputs required");
    if (tau.min() < 0.0 || tau.max() > 1.0)
        throw std::invalid_argument("rs_asymptotics: tau must lie in [0,1]");
    if (!(power > 0.0) || split_t < 0.0 || split_t > 1.0)
        throw std::invalid_argument("rs_asymptotics: need power > 0 and t in [0,1]");

    arma::vec w_sq(k);
    w_sq.fill(1.0 / (m_dim * (double)k));
    if (common_weights_sq != nullptr)
    {
        if (common_weights_sq->n_elem != k || common_weights_sq->min() < 0.0)
            throw std::invalid_argument("rs_asymptotics: bad common weights");
        if (std::abs(arma::accu(*common_weights_sq) - 1.0 / m_dim) > 1e-6 / m_dim)
            throw std::invalid_argument("rs_asymptotics: common weights must sum to 1/M");
        w_sq = *common_weights_sq;
    }

    RsAsymptotics as;
    as.power = power;
    as.split_t = split_t;
    for (arma::uword j = 0; j < k; ++j)
        as.psi += ds.m_prime(j) / ((1.0 + fp.m(j)) * (1.0 + fp.m(j)));
    as.psi /= m_dim;
    as.xi_sq = (double)k / as.psi;

    as.upsilon.set_size(k);
    as.phi.set_size(k);
    as.omega.set_size(k);
    as.gamma_common.set_size(k);
    as.gamma_private.set_size(k);

    const double p_priv = power * split_t / (double)k; // per-stream private power
    for (arma::uword u = 0; u < k; ++u)
    {
        double ups = 0.0;
        for (arma::uword j = 0; j < k; ++j)
            if (j != u)
                ups += ds.m_prime_dir(j, u) / ((1.0 + fp.m(j)) * (1.0 + fp.m(j)));
        as.upsilon(u) = ups / m_dim;

        const double om = 1.0 + fp.m(u), t2 = tau(u) * tau(u);
        as.phi(u) = (1.0 - t2) * fp.m(u) * fp.m(u) / (om * om);
        as.omega(u) = (1.0 - t2 * (1.0 - om * om)) / (om * om);

        as.gamma_private(u) = p_priv * as.xi_sq * as.phi(u) /
                              (p_priv * as.xi_sq * as.upsilon(u) * as.omega(u) + 1.0);
        as.gamma_common(u) = power * (1.0 - split_t) * (1.0 - t2) * m_dim * m_dim * w_sq(u) /
                             (p_priv * as.xi_sq * (as.upsilon(u) * as.omega(u) + as.phi(u)) + 1.0);
    }
    as.gamma_common_min = as.gamma_common.min();
    as.rate_common = split_t < 1.0 ? rate_bps(as.gamma_common_min) : 0.0;
    for (arma::uword u = 0; u < k; ++u)
        as.rate_private += rate_bps(as.gamma_private(u));
    as.rate_sum = as.rate_common + as.rate_private;
    return as;
}

// ---------- TWO-TIER ASYMPTOTIC SINRS ----------

// Statistics coupling the groups after outer precoding; independent of SNR.
// rbar[g][l] = B_l^H R_g B_l, gram[g] = B_g^H B_g, users(g) = group size.
struct GroupCoupling
{
    std::vector<std::vector<arma::cx_mat>> rbar;
    std::vector<arma::cx_mat> gram;
    arma::uvec users;
};

// Assemble the coupling from full-size group covariances and outer precoders
inline GroupCoupling group_coupling(const std::vector<const arma::cx_mat *> &covariances,
                                    const std::vector<arma::cx_mat> &outer,
                                    const arma::uvec &users)
{
    const std::size_t g_count = covariances.size();
    if (g_count == 0 || outer.size() != g_count || users.n_elem != g_count)
        throw std::invalid_argument("group_coupling: inconsistent group counts");

    GroupCoupling c;
    c.users = users;
    c.rbar.resize(g_count);
    c.gram.resize(g_count);
    for (std::size_t g = 0; g < g_count; ++g)
    {
        if (covariances[g] == nullptr || covariances[g]->n_rows != covariances[g]->n_cols ||
            outer[g].n_rows != covariances[g]->n_rows || outer[g].n_cols == 0 || users(g) == 0)
            throw std::invalid_argument("group_coupling: bad covariance or precoder shapes");
        c.gram[g] = outer[g].t() * outer[g];
        c.rbar[g].resize(g_count);
        for (std::size_t l = 0; l < g_count; ++l)
        {
            arma::cx_mat red = outer[l].t() * (*covariances[g]) * outer[l];
            c.rbar[g][l] = 0.5 * (red + red.t());
        }
    }
    return c;
}

// Large-system SINRs of the layered scheme: an outer common message heard by all,
// one inner common message per group, and per-user private streams. Powers:
// P(1-beta) outer, P beta (1-alpha)/G per inner, P beta alpha / K per private stream.
struct HrsAsymptotics
{
    double power = 0.0, alpha = 1.0, beta = 1.0;
    arma::vec m, m_prime;  // per group
    arma::mat m_prime_cross; // (g,l)
    arma::vec psi, xi_sq, phi, omega, kappa;
    arma::mat upsilon;     // (g,l), includes g = l
    arma::vec gamma_oc, gamma_ic, gamma_private, gamma_ttp; // per group
    double gamma_oc_min = 0.0;
    double rate_oc = 0.0;      // log2(1 + min_g gamma_oc_g); 0 when beta = 1
    double rate_ic = 0.0;      // sum_g log2(1 + gamma_ic_g); 0 when alpha = 1
    double rate_private = 0.0; // sum_g K_g log2(1 + gamma_p_g)
    double rate_sum = 0.0;
    double ttp_rate_sum = 0.0; // sum_g K_g log2(1 + gamma_ttp_g): full-power baseline
};

// kappa_per_group_users switches the outer-common coefficient denominator from the
// literal sum_l K_g tr(Rbar_ll) to sum_l K_l tr(Rbar_ll); identical when group sizes match.
inline HrsAsymptotics hrs_asymptotics(const GroupCoupling &coupling, const arma::vec &tau,
                                      double power, double alpha, double beta, double epsilon,
                                      bool kappa_per_group_users = false)
{
    const std::size_t g_count = coupling.rbar.size();
    if (g_count == 0 || coupling.gram.size() != g_count || coupling.users.n_elem != g_count)
        throw std::invalid_argument("hrs_asymptotics: inconsistent coupling");
    if (tau.n_elem != g_count || tau.min() < 0.0 || tau.max() > 1.0)
        throw std::invalid_argument("hrs_asymptotics: per-group tau in [0,1] required");
    if (!(power > 0.0) || alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0)
        throw std::invalid_argument("hrs_asymptotics: need power > 0 and alpha, beta in [0,1]");

    const double k_total = (double)arma::accu(coupling.users);

    HrsAsymptotics as;
    as.power = power;
    as.alpha = alpha;
    as.beta = beta;
    as.m.set_size(g_count);
    as.m_prime.set_size(g_count);
    as.m_prime_cross.set_size(g_count, g_count);
    as.psi.set_size(g_count);
    as.xi_sq.set_size(g_count);
    as.phi.set_size(g_count);
    as.omega.set_size(g_count);
    as.kappa.set_size(g_count);
    as.upsilon.set_size(g_count, g_count);
    as.gamma_oc.set_size(g_count);
    as.gamma_ic.set_size(g_count);
    as.gamma_private.set_size(g_count);
    as.gamma_ttp.set_size(g_count);

    // per-group fixed points on the effective covariances
    std::vector<arma::cx_mat> t_g(g_count);
    for (std::size_t g = 0; g < g_count; ++g)
    {
        const arma::cx_mat &rgg = coupling.rbar[g][g];
        const double b_g = (double)rgg.n_rows;
        const double k_g = (double)coupling.users(g);
        if (k_g > b_g)
            throw std::invalid_argument("hrs_asymptotics: invalid configuration, group size exceeds effective dimension b_g");

        const FixedPoint fp = solve_fixed_point({&rgg}, arma::vec{k_g}, epsilon);
        as.m(g) = fp.m(0);
        t_g[g] = fp.T;

        const double om = 1.0 + as.m(g);
        const double denom = 1.0 - (k_g / b_g) * trace_prod_real(rgg * fp.T, rgg * fp.T) / (b_g * om * om);
        if (denom <= 0.0)
            throw ill_conditioned_error("hrs_asymptotics: derivative denominator vanished");
        as.m_prime(g) = (trace_prod_real(rgg * fp.T, coupling.gram[g] * fp.T) / b_g) / denom;

        as.psi(g) = (k_g / b_g) * as.m_prime(g) / (om * om);
        as.xi_sq(g) = k_g / as.psi(g);
        const double t2 = tau(g) * tau(g);
        as.phi(g) = (1.0 - t2) * as.m(g) * as.m(g) / (om * om);
        as.omega(g) = ((k_g - 1.0) / k_g) * (1.0 - t2 * (1.0 - om * om)) / (om * om);
    }

    // cross-group derivatives and interference coefficients (scalings of group g kept
    // verbatim even where group l quantities appear; symmetric in shipped configs)
    for (std::size_t g = 0; g < g_count; ++g)
        for (std::size_t l = 0; l < g_count; ++l)
        {
            const arma::cx_mat &rll = coupling.rbar[l][l];
            const arma::cx_mat &rgl = coupling.rbar[g][l];
            const double b_g = (double)coupling.rbar[g][g].n_rows;
            const double k_g = (double)coupling.users(g);
            const double om_l = 1.0 + as.m(l);
            const double denom = 1.0 - (k_g / b_g) * trace_prod_real(rll * t_g[l], rll * t_g[l]) / (b_g * om_l * om_l);
            if (denom <= 0.0)
                throw ill_conditioned_error("hrs_asymptotics: derivative denominator vanished");
            as.m_prime_cross(g, l) = (trace_prod_real(rll * t_g[l], rgl * t_g[l]) / b_g) / denom;
            as.upsilon(g, l) = (power / k_total) * (k_g / b_g) * as.m_prime_cross(g, l) / (om_l * om_l);
        }

    // outer-common coefficient
    for (std::size_t g = 0; g < g_count; ++g)
    {
        const double tr_gg = std::real(arma::trace(coupling.rbar[g][g]));
        double denom_sum = 0.0;
        for (std::size_t l = 0; l < g_count; ++l)
            denom_sum += (kappa_per_group_users ? (double)coupling.users(l) : (double)coupling.users(g)) *
                         std::real(arma::trace(coupling.rbar[l][l]));
        as.kappa(g) = tr_gg * tr_gg / denom_sum;
    }

    // SINR families
    for (std::size_t g = 0; g < g_count; ++g)
    {
        const double t2 = tau(g) * tau(g);
        double inter = 0.0; // sum_{l != g} xi_l^2 Upsilon_gl
        for (std::size_t l = 0; l < g_count; ++l)
            if (l != g)
                inter += as.xi_sq(l) * as.upsilon(g, l);
        const double own_priv = as.xi_sq(g) * as.upsilon(g, g) * as.omega(g);
        const double own_sig = (power / k_total) * as.xi_sq(g) * as.phi(g);

        as.gamma_oc(g) = as.kappa(g) * power * (1.0 - beta) * (1.0 - t2) /
                         (beta * (inter + own_priv + own_sig) + 1.0);
        as.gamma_ic(g) = beta * (1.0 - alpha) * as.xi_sq(g) * (as.upsilon(g, g) * as.omega(g) + (power / k_total) * as.phi(g)) /
                         (beta * inter + beta * alpha * as.xi_sq(g) * (as.upsilon(g, g) * as.omega(g) + (power / k_total) * as.phi(g)) + 1.0);
        as.gamma_private(g) = beta * alpha * own_sig / (beta * inter + beta * alpha * own_priv + 1.0);
        as.gamma_ttp(g) = own_sig / (inter + own_priv + 1.0);
    }

    as.gamma_oc_min = as.gamma_oc.min();
    as.rate_oc = beta < 1.0 ? rate_bps(as.gamma_oc_min) : 0.0;
    for (std::size_t g = 0; g < g_count; ++g)
    {
        if (alpha < 1.0)
            as.rate_ic += rate_bps(as.gamma_ic(g));
        as.rate_private += (double)coupling.users(g) * rate_bps(as.gamma_private(g));
        as.ttp_rate_sum += (double)coupling.users(g) * rate_bps(as.gamma_ttp(g));
    }
    as.rate_sum = as.rate_oc + as.rate_ic + as.rate_private;
    return as;
}

// Sum-rate improvement of the layered scheme over full-power two-tier broadcasting
inline double hrs_gain(const HrsAsymptotics &as, const arma::uvec &users)
{
    double gain = as.rate_oc + as.rate_ic;
    for (arma::uword g = 0; g < users.n_elem; ++g)
        gain += (double)users(g) * (rate_bps(as.gamma_private(g)) - rate_bps(as.gamma_ttp(g)));
    return gain;
}

// ---------- REGULARIZATION DEFAULTS ----------

inline double rzf_epsilon(arma::uword users, arma::uword antennas, double power)
{
    if (users == 0 || antennas == 0 || !(power > 0.0))
        throw std::invalid_argument("rzf_epsilon: bad inputs");
    return (double)users / ((double)antennas * power);
}

inline double two_tier_epsilon(arma::uword users, arma::uword b_total, double power)
{
    if (users == 0 || b_total == 0 || !(power > 0.0))
        throw std::invalid_argument("two_tier_epsilon: bad inputs");
    return (double)users / ((double)b_total * power);
}

} // namespace rsmimo

#endif
