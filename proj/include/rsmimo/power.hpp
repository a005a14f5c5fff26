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
// Closed-form power allocation between common and private messages. The split
// ratios are chosen so that the private streams keep roughly the sum rate of
// full-power broadcasting while the leftover power rides on the common
// message(s), together with the interference-regime classifier and the
// analytic lower bounds on the resulting sum-rate gain.

#ifndef rsmimo_power_H
#define rsmimo_power_H

#include <algorithm>
#include <armadillo>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rsmimo/common.hpp"
#include "rsmimo/rmt.hpp"

namespace rsmimo
{

// ---------- SINGLE-TIER SPLIT ----------

// Fraction t of the total power feeds the K private streams (P t / K each),
// the remaining P (1 - t) feeds the common stream.
struct RsPowerSplit
{
    double split_t = 1.0;
    double gamma_cap = 0.0;      // Gamma = min_k Upsilon_k tau_k^2 / Psi
    double power_common = 0.0;   // P (1 - t)
    double power_private = 0.0;  // P t / K, per stream
};

// t = min{ K / (P Gamma), 1 }. Gamma = 0 (perfect channel knowledge everywhere)
// keeps every private stream interference-free, so all power stays private (t = 1).
// The per-message powers are derived by subtraction so they sum to the budget exactly.
inline RsPowerSplit rs_power_split(const arma::vec &upsilon, double psi, const arma::vec &tau,
                                   double power)
{
    const arma::uword k = upsilon.n_elem;
    if (k == 0)
        throw std::invalid_argument("rs_power_split: empty interference vector");
    if (tau.n_elem != k)
        throw std::invalid_argument("rs_power_split: tau size mismatch");
    if (!(psi > 0.0))
        throw std::invalid_argument("rs_power_split: psi must be positive");
    if (!(power > 0.0))
        throw std::invalid_argument("rs_power_split: power must be positive");
    if (upsilon.min() < 0.0 || tau.min() < 0.0 || tau.max() > 1.0)
        throw std::invalid_argument("rs_power_split: upsilon must be nonnegative and tau in [0,1]");

    RsPowerSplit sp;
    sp.gamma_cap = arma::datum::inf;
    for (arma::uword u = 0; u < k; ++u)
        sp.gamma_cap = std::min(sp.gamma_cap, upsilon(u) * tau(u) * tau(u) / psi);

    sp.split_t = sp.gamma_cap > 0.0 ? std::min((double)k / (power * sp.gamma_cap), 1.0) : 1.0;
    sp.power_private = power * sp.split_t / (double)k;
    sp.power_common = std::max(power - (double)k * sp.power_private, 0.0);
    return sp;
}

// Convenience overload reading the interference profile off computed asymptotics
inline RsPowerSplit rs_power_split(const RsAsymptotics &as, const arma::vec &tau)
{
    return rs_power_split(as.upsilon, as.psi, tau, as.power);
}

// ---------- SINGLE-TIER GAIN BOUND ----------

struct RsGainBound
{
    double bound = 0.0;
    bool active = false; // false when t = 1: all power is private, no gain to bound
};

// High-power lower bound on the sum-rate improvement over full-power broadcasting:
// log2(1 + gamma_common) - log2(e). The log2(e) term caps the private-rate loss
// K log2(1 + 1/K) incurred by diverting power to the common message.
inline RsGainBound rs_gain_bound(const RsAsymptotics &as)
{
    RsGainBound b;
    if (as.split_t >= 1.0)
        return b;
    b.active = true;
    b.bound = rate_bps(as.gamma_common_min) - std::log2(std::exp(1.0));
    return b;
}

// ---------- INTERFERENCE REGIME ----------

enum class InterferenceRegime
{
    weak,   // leakage between groups is negligible next to intra-group interference
    strong, // leakage between groups dominates a group's own interference
    general // anything in between
};

// Classify from asymptotics evaluated at alpha = beta = 1. Weak requires, for every
// group, the largest single cross-group term to stay below weak_threshold times the
// intra-group term xi_g^2 Upsilon_gg Omega_g; strong requires the summed cross-group
// terms to exceed the intra-group term xi_g^2 Upsilon_gg for every group.
// A single group has no cross terms and is weak by definition.
inline InterferenceRegime classify_interference_regime(const HrsAsymptotics &as,
                                                       double weak_threshold = 0.01)
{
    const arma::uword g_count = as.upsilon.n_rows;
    if (g_count == 0)
        throw std::invalid_argument("classify_interference_regime: empty asymptotics");
    if (!(weak_threshold > 0.0))
        throw std::invalid_argument("classify_interference_regime: threshold must be positive");
    if (g_count == 1)
        return InterferenceRegime::weak;

    bool all_weak = true, all_strong = true;
    for (arma::uword g = 0; g < g_count; ++g)
    {
        double cross_max = 0.0, cross_sum = 0.0;
        for (arma::uword l = 0; l < g_count; ++l)
        {
            if (l == g)
                continue;
            const double term = as.xi_sq(l) * as.upsilon(g, l);
            cross_max = std::max(cross_max, term);
            cross_sum += term;
        }
        const double own = as.xi_sq(g) * as.upsilon(g, g);
        if (cross_max > weak_threshold * own * as.omega(g))
            all_weak = false;
        if (!(cross_sum > own))
            all_strong = false;
    }
    if (all_weak)
        return InterferenceRegime::weak;
    if (all_strong)
        return InterferenceRegime::strong;
    return InterferenceRegime::general;
}

// ---------- TWO-TIER SPLIT ----------

// beta divides the budget between the outer common message, P (1 - beta), and the
// groups, P beta; alpha divides each group share between the inner common message
// and the private streams. Per-message powers: P beta (1 - alpha) / G per inner
// common, P beta alpha / K per private stream.
struct HrsPowerSplit
{
    double alpha = 1.0;
    double beta = 1.0;
    double gamma_outer = 0.0;    // Gamma_OG: long-term leakage between groups
    double gamma_inner = 0.0;    // Gamma_IG: long-term interference inside a group
    double mu = 1.0;             // private-to-baseline SINR target of the blended rule
    InterferenceRegime regime = InterferenceRegime::weak;
    double power_outer = 0.0;    // P (1 - beta)
    double power_inner = 0.0;    // P beta (1 - alpha) / G, per group
    double power_private = 0.0;  // P beta alpha / K, per stream
};

namespace detail
{

// Inverse of the reduced covariance a group's inner precoder works against
inline arma::cx_mat reduced_inverse(const arma::cx_mat &rll)
{
    arma::cx_mat sym = 0.5 * (rll + rll.t()), inv;
    if (!arma::inv_sympd(inv, sym) && !arma::inv(inv, sym))
        throw ill_conditioned_error("hrs_power_split: reduced covariance is singular");
    return inv;
}

// Gamma_OG = min_g sum_{l != g} (K_g / K) tr(Rbar_gl Rbar_ll^-1) / tr(Rbar_ll^-1)
inline double gamma_outer_leakage(const GroupCoupling &coupling,
                                  const std::vector<arma::cx_mat> &inv_ll, double k_total)
{
    const arma::uword g_count = coupling.users.n_elem;
    if (g_count == 1)
        return 0.0;
    double gamma = arma::datum::inf;
    for (arma::uword g = 0; g < g_count; ++g)
    {
        double sum = 0.0;
        for (arma::uword l = 0; l < g_count; ++l)
        {
            if (l == g)
                continue;
            const double tr_inv = std::real(arma::trace(inv_ll[l]));
            sum += ((double)coupling.users(g) / k_total) *
                   trace_prod_real(coupling.rbar[g][l], inv_ll[l]) / tr_inv;
        }
        gamma = std::min(gamma, sum);
    }
    return gamma;
}

// Gamma_IG = min_g (tau_g^2 / K) b_g (K_g - 1) / tr(Rbar_gg^-1), the high-power
// closed form of the intra-group interference level
inline double gamma_inner_interference(const GroupCoupling &coupling,
                                       const std::vector<arma::cx_mat> &inv_ll,
                                       const arma::vec &tau, double k_total)
{
    double gamma = arma::datum::inf;
    for (arma::uword g = 0; g < coupling.users.n_elem; ++g)
    {
        const double b_g = (double)coupling.rbar[g][g].n_rows;
        const double k_g = (double)coupling.users(g);
        const double tr_inv = std::real(arma::trace(inv_ll[g]));
        gamma = std::min(gamma, (tau(g) * tau(g) / k_total) * b_g * (k_g - 1.0) / tr_inv);
    }
    return gamma;
}

// Exact-resolvent alternative to the high-power closed form: evaluates the
// intra-group level min_g (K_g / K) tr(Rbar_gg T_g Rbar_gg T_g) / tr(Rbar_gg T_g^2)
// Omega_g at the given loading instead of the limiting inverse
inline double gamma_inner_exact(const GroupCoupling &coupling, const arma::vec &tau,
                                double k_total, double epsilon)
{
    double gamma = arma::datum::inf;
    for (arma::uword g = 0; g < coupling.users.n_elem; ++g)
    {
        const arma::cx_mat &rgg = coupling.rbar[g][g];
        const double k_g = (double)coupling.users(g);
        if (k_g < 2.0)
        {
            gamma = 0.0;
            continue;
        }
        std::vector<const arma::cx_mat *> one{&rgg};
        const FixedPoint fp = solve_fixed_point(one, arma::vec{k_g}, epsilon);
        const arma::cx_mat rt = rgg * fp.T;
        const double num = trace_prod_real(rt, rt);
        const double den = trace_prod_real(rt, fp.T);
        const double om = 1.0 + fp.m(0), t2 = tau(g) * tau(g);
        const double omega = ((k_g - 1.0) / k_g) * (1.0 - t2 * (1.0 - om * om)) / (om * om);
        gamma = std::min(gamma, (k_g / k_total) * (num / den) * omega);
    }
    return gamma;
}

} // namespace detail

// Closed-form split ratios for the given regime. Weak interference keeps the outer
// layer silent (beta = 1) and sets alpha = min{ K_g / (P Gamma_IG), 1 }; strong
// interference keeps the inner layers silent (alpha = 1) and sets
// beta = min{ K / (P Gamma_OG + K_g), 1 }; the general rule blends both levels
// around the target mu, alpha first, then beta = min{ K / (P (Gamma_OG + alpha
// Gamma_IG)), 1 }. Group sizes may differ; the freestanding K_g in the ratio
// formulas then uses the largest group. exact_inner_gamma swaps the high-power
// closed form of Gamma_IG for the exact-resolvent evaluation at loading epsilon
// (negative epsilon picks the two-tier default K / (b P)).
inline HrsPowerSplit hrs_power_split(const GroupCoupling &coupling, const arma::vec &tau,
                                     double power, InterferenceRegime regime, double mu = 0.9,
                                     bool exact_inner_gamma = false, double epsilon = -1.0)
{
    const arma::uword g_count = coupling.users.n_elem;
    if (g_count == 0 || coupling.rbar.size() != g_count)
        throw std::invalid_argument("hrs_power_split: empty or inconsistent coupling");
    if (tau.n_elem != g_count)
        throw std::invalid_argument("hrs_power_split: tau size mismatch");
    if (!(power > 0.0))
        throw std::invalid_argument("hrs_power_split: power must be positive");
    if (!(mu > 0.0) || mu > 1.0)
        throw std::invalid_argument("hrs_power_split: mu must lie in (0,1]");
    if (tau.min() < 0.0 || tau.max() > 1.0)
        throw std::invalid_argument("hrs_power_split: tau must lie in [0,1]");

    const double k_total = (double)arma::accu(coupling.users);
    const double k_ref = (double)coupling.users.max();

    std::vector<arma::cx_mat> inv_ll(g_count);
    arma::uword b_total = 0;
    for (arma::uword l = 0; l < g_count; ++l)
    {
        if (coupling.rbar[l].size() != g_count)
            throw std::invalid_argument("hrs_power_split: empty or inconsistent coupling");
        inv_ll[l] = detail::reduced_inverse(coupling.rbar[l][l]);
        b_total += coupling.rbar[l][l].n_rows;
    }

    HrsPowerSplit sp;
    sp.regime = regime;
    sp.mu = mu;
    sp.gamma_outer = detail::gamma_outer_leakage(coupling, inv_ll, k_total);
    if (exact_inner_gamma)
    {
        const double eps = epsilon > 0.0 ? epsilon
                                         : two_tier_epsilon((arma::uword)k_total, b_total, power);
        sp.gamma_inner = detail::gamma_inner_exact(coupling, tau, k_total, eps);
    }
    else
        sp.gamma_inner = detail::gamma_inner_interference(coupling, inv_ll, tau, k_total);

    switch (regime)
    {
    case InterferenceRegime::weak:
        sp.beta = 1.0;
        sp.alpha = sp.gamma_inner > 0.0
                       ? std::min(k_ref / (power * sp.gamma_inner), 1.0)
                       : 1.0;
        break;
    case InterferenceRegime::strong:
        sp.alpha = 1.0;
        sp.beta = std::min(k_total / (power * sp.gamma_outer + k_ref), 1.0);
        break;
    case InterferenceRegime::general:
    {
        const double level = power * (sp.gamma_outer + (1.0 - mu) * sp.gamma_inner) + 1.0;
        sp.alpha = std::min(mu * (power * sp.gamma_outer + 1.0) / level, 1.0);
        const double denom = power * (sp.gamma_outer + sp.alpha * sp.gamma_inner);
        sp.beta = denom > 0.0 ? std::min(k_total / denom, 1.0) : 1.0;
        break;
    }
    }

    sp.power_private = power * sp.beta * sp.alpha / k_total;
    sp.power_inner = power * sp.beta * (1.0 - sp.alpha) / (double)g_count;
    sp.power_outer = std::max(
        power - k_total * sp.power_private - (double)g_count * sp.power_inner, 0.0);
    return sp;
}

// ---------- TWO-TIER GAIN BOUND ----------

struct HrsGainBound
{
    double bound = 0.0;
    bool active = false; // false when alpha = beta = 1: plain broadcasting, nothing to bound
};

// High-power lower bound on the sum-rate improvement over full-power two-tier
// broadcasting. Weak regime: the inner common messages carry the gain,
// sum_g (log2(1 + gamma_ic_g) - log2(e)). Strong regime: the outer common message
// carries it, log2(1 + gamma_oc) - log2(e). The general regime takes the smaller
// of the two forms as a conservative envelope.
inline HrsGainBound hrs_gain_bound(const HrsAsymptotics &as, InterferenceRegime regime)
{
    HrsGainBound b;
    if (as.alpha >= 1.0 && as.beta >= 1.0)
        return b;
    b.active = true;
    const double log2e = std::log2(std::exp(1.0));
    double weak_form = 0.0;
    for (arma::uword g = 0; g < as.gamma_ic.n_elem; ++g)
        weak_form += rate_bps(as.gamma_ic(g)) - log2e;
    const double strong_form = rate_bps(as.gamma_oc_min) - log2e;
    switch (regime)
    {
    case InterferenceRegime::weak:
        b.bound = weak_form;
        break;
    case InterferenceRegime::strong:
        b.bound = strong_form;
        break;
    case InterferenceRegime::general:
        b.bound = std::min(weak_form, strong_form);
        break;
    }
    return b;
}

} // namespace rsmimo

#endif
