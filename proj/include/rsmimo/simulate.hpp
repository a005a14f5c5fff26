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

#ifndef rsmimo_simulate_H
#define rsmimo_simulate_H

#include <armadillo>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "rsmimo/channel.hpp"
#include "rsmimo/common.hpp"
#include "rsmimo/power.hpp"
#include "rsmimo/precoding.hpp"
#include "rsmimo/rmt.hpp"
#include "rsmimo/rng.hpp"

namespace rsmimo
{

// ---------- SCHEME TAGS ----------

enum class SchemeTag
{
    bc_rzf,    // multiuser broadcasting, regularized zero forcing, full power private
    tdma,      // round-robin single-user transmission at full power
    rs_clf,    // rate splitting, closed-form power split
    rs_exs,    // rate splitting, exhaustive-search power split
    rs_mbf,    // rate splitting with matched-beamforming private precoders
    ttp,       // two-tier precoded broadcasting, full power private
    hrs_clf,   // layered rate splitting, closed-form power split
    hrs_exs,   // layered rate splitting, exhaustive-search power split
    baseline2, // two-tier broadcasting with per-group user scheduling
    baseline3  // two-tier broadcasting with system-level user scheduling
};

inline const char *scheme_name(SchemeTag tag)
{
    switch (tag)
    {
    case SchemeTag::bc_rzf:
        return "BC_RZF";
    case SchemeTag::tdma:
        return "TDMA";
    case SchemeTag::rs_clf:
        return "RS_CLF";
    case SchemeTag::rs_exs:
        return "RS_EXS";
    case SchemeTag::rs_mbf:
        return "RS_MBF";
    case SchemeTag::ttp:
        return "TTP";
    case SchemeTag::hrs_clf:
        return "HRS_CLF";
    case SchemeTag::hrs_exs:
        return "HRS_EXS";
    case SchemeTag::baseline2:
        return "BASELINE2";
    case SchemeTag::baseline3:
        return "BASELINE3";
    }
    throw std::invalid_argument("scheme_name: unknown tag");
}

inline SchemeTag parse_scheme(const std::string &name)
{
    for (SchemeTag tag : {SchemeTag::bc_rzf, SchemeTag::tdma, SchemeTag::rs_clf, SchemeTag::rs_exs,
                          SchemeTag::rs_mbf, SchemeTag::ttp, SchemeTag::hrs_clf, SchemeTag::hrs_exs,
                          SchemeTag::baseline2, SchemeTag::baseline3})
        if (name == scheme_name(tag))
            return tag;
    throw std::invalid_argument("parse_scheme: unknown scheme '" + name + "'");
}

// Schemes that operate on the grouped two-tier structure
inline bool scheme_needs_groups(SchemeTag tag)
{
    return tag == SchemeTag::ttp || tag == SchemeTag::hrs_clf || tag == SchemeTag::hrs_exs ||
           tag == SchemeTag::baseline2 || tag == SchemeTag::baseline3;
}

// A scheme with its knobs. grid_step drives the exhaustive searches; mu blends the
// two-tier split in the mixed regime; exact_power_split switches the closed-form
// two-tier split to the resolvent evaluation of the inner interference level.
struct SchemeSpec
{
    SchemeTag tag = SchemeTag::bc_rzf;
    double grid_step = 0.01;
    double mu = 0.9;
    bool exact_power_split = false;
    bool kappa_per_group_users = false;
};

inline void validate_scheme_spec(const SchemeSpec &spec)
{
    if (!(spec.grid_step > 0.0) || !(spec.grid_step < 1.0))
        throw std::invalid_argument("validate_scheme_spec: grid step must lie in (0,1)");
    if (!(spec.mu > 0.0) || !(spec.mu <= 1.0))
        throw std::invalid_argument("validate_scheme_spec: mu must lie in (0,1]");
}

// ---------- SCENARIO ----------

// Static description of one evaluation setup: geometry, correlation models,
// grouping, outer precoders, and CSIT quality. Built once, shared by all trials.
struct Scenario
{
    arma::uword antennas = 0;
    bool two_tier = false;
    std::vector<CorrelationModel> models;              // distinct correlation models
    std::vector<const CorrelationModel *> user_models; // size K, points into models
    arma::uvec group_of;                               // size K; group index per user (two-tier)
    arma::uvec users;                                  // per-group sizes (two-tier)
    arma::vec tau;                                     // per-user CSIT error level
    arma::vec tau_group;                               // per-group CSIT error level (two-tier)
    std::vector<arma::cx_mat> outer;                   // per-group outer precoders (two-tier)
    GroupCoupling coupling;                            // reduced second-order statistics (two-tier)

    arma::uword total_users() const
    {
        return (arma::uword)user_models.size();
    }
};

// Users spread uniformly around the full circle with a shared angular spread
inline Scenario one_tier_scenario(arma::uword antennas, arma::uword num_users, double spread,
                                  const arma::vec &tau, arma::uword quadrature_points = 200)
{
    if (antennas == 0 || num_users == 0)
        throw std::invalid_argument("one_tier_scenario: antennas and users must be positive");
    if (num_users > antennas)
        throw std::invalid_argument("one_tier_scenario: users exceed antennas");
    if (tau.n_elem != num_users || tau.min() < 0.0 || tau.max() > 1.0)
        throw std::invalid_argument("one_tier_scenario: per-user tau in [0,1] required");
    if (!(spread > 0.0) || spread > pi)
        throw std::invalid_argument("one_tier_scenario: angular spread must lie in (0, pi]");

    Scenario sc;
    sc.antennas = antennas;
    sc.two_tier = false;
    sc.tau = tau;
    const ArrayGeometry geo = uca_positions(antennas);
    sc.models.reserve(num_users);
    for (arma::uword k = 0; k < num_users; ++k)
    {
        const double theta = 2.0 * pi * (double)(k + 1) / (double)num_users;
        sc.models.push_back(one_ring_correlation(geo, {theta, spread}, quadrature_points));
    }
    sc.user_models.resize(num_users);
    for (arma::uword k = 0; k < num_users; ++k)
        sc.user_models[k] = &sc.models[k];
    return sc;
}

// Groups on an arc spanning [-pi/2, pi/2]; users of a group share its correlation.
// dominant_rank protects each group's strongest eigendirections in the outer design.
inline Scenario two_tier_scenario(arma::uword antennas, const arma::uvec &users_per_group,
                                  const arma::uvec &dims_b, arma::uword dominant_rank,
                                  double spread, const arma::vec &tau_group,
                                  arma::uword quadrature_points = 200)
{
    const arma::uword g_count = users_per_group.n_elem;
    if (antennas == 0 || g_count < 2)
        throw std::invalid_argument("two_tier_scenario: antennas and at least two groups required");
    if (dims_b.n_elem != g_count || tau_group.n_elem != g_count)
        throw std::invalid_argument("two_tier_scenario: one b_g and tau_g per group required");
    if (users_per_group.min() == 0)
        throw std::invalid_argument("two_tier_scenario: empty group");
    if (tau_group.min() < 0.0 || tau_group.max() > 1.0)
        throw std::invalid_argument("two_tier_scenario: per-group tau in [0,1] required");
    if (!(spread > 0.0) || spread > pi)
        throw std::invalid_argument("two_tier_scenario: angular spread must lie in (0, pi]");

    for (arma::uword g = 0; g < g_count; ++g)
    {
        if (users_per_group(g) > dims_b(g))
            throw std::invalid_argument("two_tier_scenario: K_g exceeds b_g");
        if (dims_b(g) + (g_count - 1) * dominant_rank > antennas)
            throw std::invalid_argument("two_tier_scenario: b_g exceeds M minus the protected "
                                        "ranks of the other groups");
    }

    Scenario sc;
    sc.antennas = antennas;
    sc.two_tier = true;
    sc.users = users_per_group;
    sc.tau_group = tau_group;
    const ArrayGeometry geo = uca_positions(antennas);
    sc.models.reserve(g_count);
    for (arma::uword g = 0; g < g_count; ++g)
    {
        const double theta =
            g_count == 1 ? 0.0 : -pi / 2.0 + (double)g * pi / (double)(g_count - 1);
        sc.models.push_back(one_ring_correlation(geo, {theta, spread}, quadrature_points));
    }

    std::vector<const arma::cx_mat *> covs(g_count);
    for (arma::uword g = 0; g < g_count; ++g)
        covs[g] = &sc.models[g].matrix;
    sc.outer = outer_precoder(covs, dominant_rank, dims_b);
    sc.coupling = group_coupling(covs, sc.outer, users_per_group);

    const arma::uword k_total = arma::accu(users_per_group);
    sc.user_models.resize(k_total);
    sc.group_of.set_size(k_total);
    sc.tau.set_size(k_total);
    arma::uword u = 0;
    for (arma::uword g = 0; g < g_count; ++g)
        for (arma::uword j = 0; j < users_per_group(g); ++j, ++u)
        {
            sc.user_models[u] = &sc.models[g];
            sc.group_of(u) = g;
            sc.tau(u) = tau_group(g);
        }
    return sc;
}

// ---------- POWER VECTORS ----------

// Uniform per-stream powers with the common part taken by subtraction, so the
// total-power identity holds exactly in floating point.
struct RsPowers
{
    double common = 0.0;
    arma::vec per_stream;
};

inline RsPowers rs_power_allocation(double power, double split_t, arma::uword num_users)
{
    if (!(power > 0.0) || split_t < 0.0 || split_t > 1.0 || num_users == 0)
        throw std::invalid_argument("rs_power_allocation: need power > 0, t in [0,1], users > 0");
    RsPowers out;
    const double per = power * split_t / (double)num_users;
    out.per_stream = arma::vec(num_users, arma::fill::value(per));
    out.common = split_t >= 1.0 ? 0.0 : std::max(power - (double)num_users * per, 0.0);
    return out;
}

struct HrsPowers
{
    double outer_common = 0.0;
    arma::vec inner_common; // per group
    arma::vec per_stream;   // per user
};

inline HrsPowers hrs_power_allocation(double power, double alpha, double beta,
                                      const arma::uvec &users)
{
    const arma::uword g_count = users.n_elem;
    if (!(power > 0.0) || alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0 || g_count == 0)
        throw std::invalid_argument("hrs_power_allocation: need power > 0 and alpha, beta in [0,1]");
    const arma::uword k_total = arma::accu(users);
    HrsPowers out;
    const double per = power * beta * alpha / (double)k_total;
    const double inner = power * beta * (1.0 - alpha) / (double)g_count;
    out.per_stream = arma::vec(k_total, arma::fill::value(per));
    out.inner_common = arma::vec(g_count, arma::fill::value(inner));
    out.outer_common = beta >= 1.0 ? 0.0
                                   : std::max(power - (double)k_total * per -
                                                  (double)g_count * inner,
                                              0.0);
    return out;
}

// ---------- INSTANTANEOUS SINRS, SINGLE TIER ----------

struct RsInstantSinrs
{
    arma::vec common;  // per user, for the shared message
    arma::vec priv;    // per user, own stream
};

// Common message decoded first while all private streams interfere; private stream
// decoded after removing the common part, other private streams as noise.
inline RsInstantSinrs rs_instant_sinrs(const arma::cx_mat &channels, const arma::cx_mat &precoder,
                                       const arma::cx_vec &common_beam, double power_common,
                                       const arma::vec &power_private)
{
    const arma::uword k = channels.n_cols;
    if (k == 0 || precoder.n_rows != channels.n_rows || precoder.n_cols != k ||
        common_beam.n_elem != channels.n_rows || power_private.n_elem != k)
        throw std::invalid_argument("rs_instant_sinrs: inconsistent dimensions");
    if (power_common < 0.0 || power_private.min() < 0.0)
        throw std::invalid_argument("rs_instant_sinrs: negative power");

    const arma::mat gains = arma::square(arma::abs(channels.t() * precoder)); // (k, j)
    const arma::vec cgain = arma::square(arma::abs(channels.t() * common_beam));

    RsInstantSinrs out;
    out.common.set_size(k);
    out.priv.set_size(k);
    for (arma::uword u = 0; u < k; ++u)
    {
        double others = 0.0;
        for (arma::uword j = 0; j < k; ++j)
            if (j != u)
                others += power_private(j) * gains(u, j);
        const double own = power_private(u) * gains(u, u);
        out.common(u) = power_common * cgain(u) / (others + own + 1.0);
        out.priv(u) = own / (others + 1.0);
    }
    return out;
}

// ---------- INSTANTANEOUS SINRS, TWO TIER ----------

// Per-trial transmit side of the layered scheme
struct HrsPrecoderSet
{
    std::vector<InnerPrecoder> inner; // per group
    HrsCommonBeams beams;
};

inline HrsPrecoderSet hrs_precoder_set(const std::vector<arma::cx_mat> &outer,
                                       const std::vector<arma::cx_mat> &effective_estimates,
                                       double epsilon)
{
    const std::size_t g_count = outer.size();
    if (g_count == 0 || effective_estimates.size() != g_count)
        throw std::invalid_argument("hrs_precoder_set: inconsistent group data");
    HrsPrecoderSet set;
    set.inner.resize(g_count);
    for (std::size_t g = 0; g < g_count; ++g)
        set.inner[g] = inner_rzf_precoder(outer[g], effective_estimates[g], epsilon);
    set.beams = hrs_common_precoders(outer, set.inner, effective_estimates);
    return set;
}

struct HrsInstantSinrs
{
    arma::vec outer_common; // per user
    arma::vec inner_common; // per user, own group's message
    arma::vec priv;         // per user, own stream
};

// Layered decoding: the outer common message sees everything, the inner common
// message is decoded after removing it, and the private stream after removing both.
// The successive subtractions remove terms that are part of the interference sum,
// so every denominator stays at least the unit noise floor.
inline HrsInstantSinrs hrs_instant_sinrs(const arma::cx_mat &channels, const arma::uvec &group_of,
                                         const std::vector<arma::cx_mat> &outer,
                                         const HrsPrecoderSet &set, double power_outer,
                                         const arma::vec &power_inner,
                                         const arma::vec &power_private)
{
    const arma::uword k = channels.n_cols;
    const std::size_t g_count = outer.size();
    if (k == 0 || g_count == 0 || group_of.n_elem != k || set.inner.size() != g_count ||
        set.beams.inner_common.size() != g_count || power_inner.n_elem != g_count ||
        power_private.n_elem != k)
        throw std::invalid_argument("hrs_instant_sinrs: inconsistent dimensions");
    if (power_outer < 0.0 || power_inner.min() < 0.0 || power_private.min() < 0.0)
        throw std::invalid_argument("hrs_instant_sinrs: negative power");
    if (group_of.max() >= g_count)
        throw std::invalid_argument("hrs_instant_sinrs: group index out of range");

    // stream gains per receiving user: outer common, inner commons, private streams
    const arma::vec oc_gain = arma::square(arma::abs(channels.t() * set.beams.outer_common));
    arma::mat ic_gain(k, g_count);
    for (std::size_t g = 0; g < g_count; ++g)
        ic_gain.col(g) = arma::square(arma::abs(channels.t() * set.beams.inner_common[g]));
    arma::mat p_gain(k, k);
    {
        arma::uword col = 0;
        for (std::size_t g = 0; g < g_count; ++g)
        {
            const arma::cx_mat block = channels.t() * set.inner[g].full; // k x K_g
            p_gain.cols(col, col + set.inner[g].full.n_cols - 1) = arma::square(arma::abs(block));
            col += set.inner[g].full.n_cols;
        }
        if (col != k)
            throw std::invalid_argument("hrs_instant_sinrs: inner precoders do not cover all users");
    }

    HrsInstantSinrs out;
    out.outer_common.set_size(k);
    out.inner_common.set_size(k);
    out.priv.set_size(k);
    for (arma::uword u = 0; u < k; ++u)
    {
        const arma::uword g = group_of(u);
        double in = 1.0;
        for (std::size_t l = 0; l < g_count; ++l)
            in += power_inner(l) * ic_gain(u, l);
        for (arma::uword j = 0; j < k; ++j)
            in += power_private(j) * p_gain(u, j);

        const double own_ic = power_inner(g) * ic_gain(u, g);
        const double own_p = power_private(u) * p_gain(u, u);
        const double den_ic = in - own_ic;
        const double den_p = den_ic - own_p;
        if (den_ic <= 0.0 || den_p <= 0.0)
            throw std::runtime_error("hrs_instant_sinrs: interference fell below the noise floor "
                                     "after subtraction");

        out.outer_common(u) = power_outer * oc_gain(u) / in;
        out.inner_common(u) = own_ic / den_ic;
        out.priv(u) = own_p / den_p;
    }
    return out;
}

// ---------- PER-TRIAL RESULT ----------

// One Monte Carlo trial of one scheme: per-user SINRs and rates, the min-resolved
// common SINRs, the split in force, and the substream identifier.
struct TrialResult
{
    arma::vec sinr_private;      // per user
    arma::vec rate_private_user; // per user
    double sinr_common_outer = 0.0;
    arma::vec sinr_common_inner;      // per group (empty when no inner layer)
    double rate_common_outer = 0.0;   // log2(1 + min-resolved outer common SINR)
    double rate_common_inner = 0.0;   // sum over groups of min-resolved inner rates
    double rate_private = 0.0;
    double sum_rate = 0.0;
    double split_t = 1.0, split_alpha = 1.0, split_beta = 1.0;
    std::uint64_t seed_id = 0;
};

inline TrialResult rs_trial_result(const RsInstantSinrs &sinrs, double split_t,
                                   std::uint64_t seed_id = 0)
{
    TrialResult r;
    r.sinr_private = sinrs.priv;
    r.rate_private_user.set_size(sinrs.priv.n_elem);
    for (arma::uword u = 0; u < sinrs.priv.n_elem; ++u)
        r.rate_private_user(u) = rate_bps(sinrs.priv(u));
    r.sinr_common_outer = sinrs.common.min();
    r.rate_common_outer = rate_bps(r.sinr_common_outer);
    r.rate_private = pairwise_sum(r.rate_private_user.memptr(), 0, r.rate_private_user.n_elem);
    r.sum_rate = r.rate_common_outer + r.rate_private;
    r.split_t = split_t;
    r.seed_id = seed_id;
    return r;
}

inline TrialResult hrs_trial_result(const HrsInstantSinrs &sinrs, const arma::uvec &group_of,
                                    arma::uword groups, double alpha, double beta,
                                    std::uint64_t seed_id = 0)
{
    if (group_of.n_elem != sinrs.priv.n_elem || groups == 0)
        throw std::invalid_argument("hrs_trial_result: inconsistent grouping");
    TrialResult r;
    r.sinr_private = sinrs.priv;
    r.rate_private_user.set_size(sinrs.priv.n_elem);
    for (arma::uword u = 0; u < sinrs.priv.n_elem; ++u)
        r.rate_private_user(u) = rate_bps(sinrs.priv(u));
    r.sinr_common_outer = sinrs.outer_common.min();
    r.rate_common_outer = rate_bps(r.sinr_common_outer);
    r.sinr_common_inner.set_size(groups);
    r.sinr_common_inner.fill(arma::datum::inf);
    for (arma::uword u = 0; u < group_of.n_elem; ++u)
        r.sinr_common_inner(group_of(u)) =
            std::min(r.sinr_common_inner(group_of(u)), sinrs.inner_common(u));
    for (arma::uword g = 0; g < groups; ++g)
        r.rate_common_inner += rate_bps(r.sinr_common_inner(g));
    r.rate_private = pairwise_sum(r.rate_private_user.memptr(), 0, r.rate_private_user.n_elem);
    r.sum_rate = r.rate_common_outer + r.rate_common_inner + r.rate_private;
    r.split_alpha = alpha;
    r.split_beta = beta;
    r.seed_id = seed_id;
    return r;
}

// ---------- PER-TRIAL GAIN CACHES ----------

// Split-independent squared inner products of one trial. Evaluating a candidate
// split touches only these scalars, which makes the exhaustive searches cheap and
// pins every reduction to fixed per-trial storage.
struct TrialCache
{
    // single-tier block: shared-beam gain, own-stream gain, total row power
    arma::vec c_gain, own, rowsum;
    // two-tier block: outer-common gain, inner-common row sum, private row sum,
    // own inner-common gain, own private gain
    arma::vec oc_gain, icrow, prow, own_ic, own_p;
    // scheduling block: cross gains between scheduled users (row: receiving group)
    arma::mat sched_cross;
    double b3_gain = 0.0;
    // channel norms for round-robin transmission
    arma::vec hnorm_sq;
};

namespace detail
{

// Components of one evaluated trial; the engine reduces these across trials
struct RateParts
{
    double sum = 0.0, oc = 0.0, ic = 0.0, priv = 0.0;
};

inline void fill_one_tier_cache(TrialCache &cache, const arma::cx_mat &channels,
                                const arma::cx_mat &precoder, const arma::cx_vec &common_beam)
{
    const arma::uword k = channels.n_cols;
    const arma::mat gains = arma::square(arma::abs(channels.t() * precoder));
    cache.c_gain = arma::square(arma::abs(channels.t() * common_beam));
    cache.own.set_size(k);
    cache.rowsum = arma::sum(gains, 1);
    for (arma::uword u = 0; u < k; ++u)
        cache.own(u) = gains(u, u);
}

inline void fill_two_tier_cache(TrialCache &cache, const arma::cx_mat &channels,
                                const arma::uvec &group_of, const HrsPrecoderSet &set)
{
    const arma::uword k = channels.n_cols;
    const std::size_t g_count = set.inner.size();
    cache.oc_gain = arma::square(arma::abs(channels.t() * set.beams.outer_common));
    cache.icrow.zeros(k);
    cache.own_ic.set_size(k);
    arma::mat ic_gain(k, g_count);
    for (std::size_t g = 0; g < g_count; ++g)
    {
        ic_gain.col(g) = arma::square(arma::abs(channels.t() * set.beams.inner_common[g]));
        cache.icrow += ic_gain.col(g);
    }
    cache.prow.zeros(k);
    cache.own_p.set_size(k);
    arma::uword col = 0;
    for (std::size_t g = 0; g < g_count; ++g)
    {
        const arma::mat block = arma::square(arma::abs(channels.t() * set.inner[g].full));
        cache.prow += arma::sum(block, 1);
        for (arma::uword j = 0; j < block.n_cols; ++j)
            if (group_of(col + j) != (arma::uword)g)
                throw std::invalid_argument("fill_two_tier_cache: users must be group-major");
        for (arma::uword j = 0; j < block.n_cols; ++j)
            cache.own_p(col + j) = block(col + j, j);
        col += block.n_cols;
    }
    for (arma::uword u = 0; u < k; ++u)
        cache.own_ic(u) = ic_gain(u, group_of(u));
}

// Rate of the single-tier scheme at split t, from cached gains (uniform powers)
inline RateParts one_tier_rates(const TrialCache &cache, double power, double split_t)
{
    const arma::uword k = cache.own.n_elem;
    const double per = power * split_t / (double)k;
    const double p_c = split_t >= 1.0 ? 0.0 : std::max(power - (double)k * per, 0.0);
    RateParts parts;
    double common_min = arma::datum::inf;
    for (arma::uword u = 0; u < k; ++u)
    {
        const double all_priv = per * cache.rowsum(u);
        common_min = std::min(common_min, p_c * cache.c_gain(u) / (all_priv + 1.0));
        parts.priv += rate_bps(per * cache.own(u) / (all_priv - per * cache.own(u) + 1.0));
    }
    parts.oc = rate_bps(common_min);
    parts.sum = parts.oc + parts.priv;
    return parts;
}

// Rate of the layered scheme at split (alpha, beta), from cached gains
inline RateParts two_tier_rates(const TrialCache &cache, const arma::uvec &group_of,
                                arma::uword groups, double power, double alpha, double beta)
{
    const arma::uword k = cache.own_p.n_elem;
    const double per = power * beta * alpha / (double)k;
    const double inner = power * beta * (1.0 - alpha) / (double)groups;
    const double p_oc =
        beta >= 1.0 ? 0.0
                    : std::max(power - (double)k * per - (double)groups * inner, 0.0);

    RateParts parts;
    double oc_min = arma::datum::inf;
    arma::vec ic_min(groups, arma::fill::value(arma::datum::inf));
    for (arma::uword u = 0; u < k; ++u)
    {
        const double in = inner * cache.icrow(u) + per * cache.prow(u) + 1.0;
        const double own_ic = inner * cache.own_ic(u);
        const double own_p = per * cache.own_p(u);
        oc_min = std::min(oc_min, p_oc * cache.oc_gain(u) / in);
        const arma::uword g = group_of(u);
        ic_min(g) = std::min(ic_min(g), own_ic / (in - own_ic));
        parts.priv += rate_bps(own_p / (in - own_ic - own_p));
    }
    parts.oc = rate_bps(oc_min);
    for (arma::uword g = 0; g < groups; ++g)
        parts.ic += rate_bps(ic_min(g));
    parts.sum = parts.oc + parts.ic + parts.priv;
    return parts;
}

// Round-robin single-user transmission at full power
inline RateParts tdma_rates(const TrialCache &cache, double power)
{
    RateParts parts;
    for (arma::uword u = 0; u < cache.hnorm_sq.n_elem; ++u)
        parts.priv += rate_bps(power * cache.hnorm_sq(u));
    parts.priv /= (double)cache.hnorm_sq.n_elem;
    parts.sum = parts.priv;
    return parts;
}

// One scheduled user per group, equal power share, cross gains as interference
inline RateParts baseline2_rates(const TrialCache &cache, double power)
{
    const arma::uword groups = cache.sched_cross.n_rows;
    const double share = power / (double)groups;
    RateParts parts;
    for (arma::uword g = 0; g < groups; ++g)
    {
        double inter = 1.0;
        for (arma::uword l = 0; l < groups; ++l)
            if (l != g)
                inter += share * cache.sched_cross(g, l);
        parts.priv += rate_bps(share * cache.sched_cross(g, g) / inter);
    }
    parts.sum = parts.priv;
    return parts;
}

inline RateParts baseline3_rates(const TrialCache &cache, double power)
{
    RateParts parts;
    parts.priv = rate_bps(power * cache.b3_gain);
    parts.sum = parts.priv;
    return parts;
}

// Fixed-shape parallel loop: items are claimed through an atomic counter and each
// writes only its own slot, so the outcome does not depend on the worker count.
template <typename Fn>
inline void parallel_for(std::size_t items, unsigned workers, Fn &&fn)
{
    if (items == 0)
        return;
    unsigned w = workers;
    if (w == 0)
    {
        w = std::thread::hardware_concurrency();
        if (w == 0)
            w = 1;
    }
    w = (unsigned)std::min<std::size_t>(w, items);
    if (w <= 1)
    {
        for (std::size_t i = 0; i < items; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_lock;
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t)
        pool.emplace_back([&] {
            for (;;)
            {
                const std::size_t i = next.fetch_add(1);
                if (i >= items)
                    return;
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> hold(error_lock);
                    if (!first_error)
                        first_error = std::current_exception();
                    next.store(items);
                    return;
                }
            }
        });
    for (auto &th : pool)
        th.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

} // namespace detail

// ---------- EXHAUSTIVE SPLIT SEARCH ----------

// Candidate splits: multiples of step up to 1, with 1 always included
inline arma::vec split_grid(double step)
{
    if (!(step > 0.0) || !(step < 1.0))
        throw std::invalid_argument("split_grid: step must lie in (0,1)");
    std::vector<double> values;
    for (arma::uword i = 1;; ++i)
    {
        const double v = (double)i * step;
        if (v >= 1.0 - 1e-12)
            break;
        values.push_back(v);
    }
    values.push_back(1.0);
    return arma::vec(values);
}

// Best single-tier split over the trial set: maximizes the Monte Carlo mean sum
// rate; ties resolve toward the larger private fraction.
inline double rs_split_search(const std::vector<TrialCache> &trials, double power, double step)
{
    if (trials.empty())
        throw std::invalid_argument("rs_split_search: no trials");
    const arma::vec grid = split_grid(step);
    double best_t = grid(0), best_rate = -arma::datum::inf;
    std::vector<double> rates(trials.size());
    for (arma::uword i = 0; i < grid.n_elem; ++i)
    {
        for (std::size_t n = 0; n < trials.size(); ++n)
            rates[n] = detail::one_tier_rates(trials[n], power, grid(i)).sum;
        const double mean = pairwise_mean(rates);
        if (mean >= best_rate)
        {
            best_rate = mean;
            best_t = grid(i);
        }
    }
    return best_t;
}

struct HrsSplit
{
    double alpha = 1.0, beta = 1.0;
};

// Best two-tier split over the trial set; ties resolve toward the larger private
// fraction within the group, then the larger group fraction.
inline HrsSplit hrs_split_search(const std::vector<TrialCache> &trials, const arma::uvec &group_of,
                                 arma::uword groups, double power, double step,
                                 unsigned workers = 0)
{
    if (trials.empty())
        throw std::invalid_argument("hrs_split_search: no trials");
    const arma::vec grid = split_grid(step);
    const arma::uword n_a = grid.n_elem;
    arma::mat mean_rate(n_a, n_a); // (alpha index, beta index)
    detail::parallel_for(n_a * n_a, workers, [&](std::size_t idx) {
        const arma::uword ia = (arma::uword)(idx / n_a), ib = (arma::uword)(idx % n_a);
        std::vector<double> rates(trials.size());
        for (std::size_t n = 0; n < trials.size(); ++n)
            rates[n] =
                detail::two_tier_rates(trials[n], group_of, groups, power, grid(ia), grid(ib)).sum;
        mean_rate(ia, ib) = pairwise_mean(rates);
    });

    HrsSplit best;
    double best_rate = -arma::datum::inf;
    for (arma::uword ia = 0; ia < n_a; ++ia)
        for (arma::uword ib = 0; ib < n_a; ++ib)
            if (mean_rate(ia, ib) >= best_rate)
            {
                best_rate = mean_rate(ia, ib);
                best.alpha = grid(ia);
                best.beta = grid(ib);
            }
    return best;
}

// ---------- AGGREGATED REPORTS ----------

// One (SNR, scheme) aggregate; trials = 0 marks a deterministic large-system row
struct RatePoint
{
    double snr_db = 0.0;
    double sum_rate_mean = 0.0, sum_rate_stderr = 0.0;
    double rate_common_outer = 0.0, rate_common_inner = 0.0, rate_private = 0.0;
    double split_t = 1.0, split_alpha = 1.0, split_beta = 1.0;
    arma::uword trials = 0;
};

struct RateReport
{
    SchemeSpec scheme;
    std::uint64_t master_seed = 0;
    std::vector<RatePoint> points;
};

namespace detail
{

// Operating split of the closed-form schemes at one SNR. Both splits come from the
// large-system limits evaluated at the same power as the rates.
inline void closed_form_split(const Scenario &sc, const SchemeSpec &spec, double power,
                              double &split_t, HrsSplit &split_gg)
{
    split_t = 1.0;
    split_gg = HrsSplit{};
    if (spec.tag == SchemeTag::rs_clf)
    {
        std::vector<const arma::cx_mat *> covs(sc.total_users());
        for (arma::uword u = 0; u < sc.total_users(); ++u)
            covs[u] = &sc.user_models[u]->matrix;
        const arma::vec weights(sc.total_users(), arma::fill::ones);
        const double eps = rzf_epsilon(sc.total_users(), sc.antennas, power);
        const FixedPoint fp = solve_fixed_point(covs, weights, eps);
        const DerivativeSystem ds = solve_derivative_system(covs, weights, fp);
        const RsAsymptotics as = rs_asymptotics(fp, ds, sc.tau, power, 1.0);
        split_t = rs_power_split(as, sc.tau).split_t;
    }
    else if (spec.tag == SchemeTag::hrs_clf)
    {
        const arma::uword b_total = [&] {
            arma::uword b = 0;
            for (const auto &o : sc.outer)
                b += o.n_cols;
            return b;
        }();
        const double eps = two_tier_epsilon(sc.total_users(), b_total, power);
        const HrsAsymptotics base = hrs_asymptotics(sc.coupling, sc.tau_group, power, 1.0, 1.0,
                                                    eps, spec.kappa_per_group_users);
        const InterferenceRegime regime = classify_interference_regime(base);
        const HrsPowerSplit sp = hrs_power_split(sc.coupling, sc.tau_group, power, regime,
                                                 spec.mu, spec.exact_power_split, eps);
        split_gg.alpha = sp.alpha;
        split_gg.beta = sp.beta;
    }
}

// Evaluate one trial of one scheme from its cache at the split in force
inline RateParts scheme_rates(const SchemeSpec &spec, const TrialCache &cache,
                              const arma::uvec &group_of, arma::uword groups, double power,
                              double split_t, const HrsSplit &split_gg)
{
    switch (spec.tag)
    {
    case SchemeTag::bc_rzf:
        return one_tier_rates(cache, power, 1.0);
    case SchemeTag::rs_clf:
    case SchemeTag::rs_exs:
    case SchemeTag::rs_mbf:
        return one_tier_rates(cache, power, split_t);
    case SchemeTag::tdma:
        return tdma_rates(cache, power);
    case SchemeTag::ttp:
        return two_tier_rates(cache, group_of, groups, power, 1.0, 1.0);
    case SchemeTag::hrs_clf:
    case SchemeTag::hrs_exs:
        return two_tier_rates(cache, group_of, groups, power, split_gg.alpha, split_gg.beta);
    case SchemeTag::baseline2:
        return baseline2_rates(cache, power);
    case SchemeTag::baseline3:
        return baseline3_rates(cache, power);
    }
    throw std::invalid_argument("scheme_rates: unknown tag");
}

} // namespace detail

// Monte Carlo sweep of one scheme over an SNR grid. Channel draws depend only on
// (master_seed, snr index, trial index), so every scheme sees the same fading and
// reruns are reproducible for any worker count.
inline RateReport run_trials(const Scenario &sc, const SchemeSpec &spec, const arma::vec &snr_db,
                             arma::uword num_trials, std::uint64_t master_seed,
                             unsigned workers = 0)
{
    validate_scheme_spec(spec);
    if (num_trials == 0)
        throw std::invalid_argument("run_trials: at least one trial required");
    if (snr_db.n_elem == 0)
        throw std::invalid_argument("run_trials: empty SNR grid");
    if (scheme_needs_groups(spec.tag) && !sc.two_tier)
        throw std::invalid_argument("run_trials: scheme requires a grouped scenario");
    if (sc.total_users() == 0)
        throw std::invalid_argument("run_trials: scenario has no users");

    const arma::uword k = sc.total_users();
    const arma::uword groups = sc.two_tier ? sc.users.n_elem : 0;
    const arma::uword b_total = [&] {
        arma::uword b = 0;
        for (const auto &o : sc.outer)
            b += o.n_cols;
        return b;
    }();

    RateReport report;
    report.scheme = spec;
    report.master_seed = master_seed;
    report.points.resize(snr_db.n_elem);

    const bool needs_search = spec.tag == SchemeTag::rs_exs || spec.tag == SchemeTag::rs_mbf ||
                              spec.tag == SchemeTag::hrs_exs;

    for (arma::uword s = 0; s < snr_db.n_elem; ++s)
    {
        const double power = snr_db_to_power(snr_db(s));

        double split_t = 1.0;
        HrsSplit split_gg;
        detail::closed_form_split(sc, spec, power, split_t, split_gg);

        // phase 1: independent trials, one cache slot each
        std::vector<TrialCache> caches(num_trials);
        detail::parallel_for(num_trials, workers, [&](std::size_t n) {
            try
            {
                substream_rng rng(master_seed, s, (std::uint64_t)n);
                const ChannelSample sample = draw_sample(sc.user_models, sc.tau, rng);
                TrialCache &cache = caches[n];
                switch (spec.tag)
                {
                case SchemeTag::bc_rzf:
                case SchemeTag::rs_clf:
                case SchemeTag::rs_exs:
                {
                    const double eps = rzf_epsilon(k, sc.antennas, power);
                    const LinearPrecoder w = rzf_precoder(sample.estimates, eps);
                    const arma::cx_vec w_c =
                        rs_common_precoder(sample.estimates, arma::vec(k, arma::fill::ones));
                    detail::fill_one_tier_cache(cache, sample.channels, w.matrix, w_c);
                    break;
                }
                case SchemeTag::rs_mbf:
                {
                    const arma::cx_mat w = mbf_precoder(sample.estimates);
                    const arma::cx_vec w_c =
                        rs_common_precoder(sample.estimates, arma::vec(k, arma::fill::ones));
                    detail::fill_one_tier_cache(cache, sample.channels, w, w_c);
                    break;
                }
                case SchemeTag::tdma:
                {
                    cache.hnorm_sq.set_size(k);
                    for (arma::uword u = 0; u < k; ++u)
                    {
                        const double n2 = arma::norm(sample.channels.col(u));
                        cache.hnorm_sq(u) = n2 * n2;
                    }
                    break;
                }
                case SchemeTag::ttp:
                case SchemeTag::hrs_clf:
                case SchemeTag::hrs_exs:
                {
                    const double eps = two_tier_epsilon(k, b_total, power);
                    std::vector<arma::cx_mat> eff(groups);
                    arma::uword col = 0;
                    for (arma::uword g = 0; g < groups; ++g)
                    {
                        eff[g] = sc.outer[g].t() *
                                 sample.estimates.cols(col, col + sc.users(g) - 1);
                        col += sc.users(g);
                    }
                    const HrsPrecoderSet set = hrs_precoder_set(sc.outer, eff, eps);
                    detail::fill_two_tier_cache(cache, sample.channels, sc.group_of, set);
                    break;
                }
                case SchemeTag::baseline2:
                case SchemeTag::baseline3:
                {
                    // schedule on the transmitter's estimated effective gains
                    arma::vec est_gain(k);
                    std::vector<arma::cx_vec> beam(k);
                    for (arma::uword u = 0; u < k; ++u)
                    {
                        const arma::cx_vec eff = sc.outer[sc.group_of(u)].t() *
                                                 sample.estimates.col(u);
                        est_gain(u) = arma::accu(arma::square(arma::abs(eff)));
                        beam[u] = eff;
                    }
                    arma::uvec pick(groups);
                    arma::uword best_all = 0;
                    for (arma::uword g = 0, u = 0; g < groups; ++g)
                    {
                        arma::uword best = u;
                        for (arma::uword j = 0; j < sc.users(g); ++j, ++u)
                            if (est_gain(u) > est_gain(best))
                                best = u;
                        pick(g) = best;
                        if (est_gain(best) > est_gain(best_all))
                            best_all = best;
                    }
                    cache.sched_cross.set_size(groups, groups);
                    for (arma::uword l = 0; l < groups; ++l)
                    {
                        const double nb = arma::norm(beam[pick(l)]);
                        if (!(nb > 0.0))
                            throw ill_conditioned_error("run_trials: zero scheduled beam");
                        const arma::cx_vec w_l = sc.outer[l] * (beam[pick(l)] / nb);
                        for (arma::uword g = 0; g < groups; ++g)
                        {
                            const std::complex<double> ip =
                                arma::cdot(sample.channels.col(pick(g)), w_l);
                            cache.sched_cross(g, l) = std::norm(ip);
                        }
                        if (pick(l) == best_all)
                        {
                            const std::complex<double> ip =
                                arma::cdot(sample.channels.col(best_all), w_l);
                            cache.b3_gain = std::norm(ip);
                        }
                    }
                    break;
                }
                }
            }
            catch (const std::exception &e)
            {
                throw std::runtime_error("run_trials: snr index " + std::to_string(s) +
                                         ", trial " + std::to_string(n) + ": " + e.what());
            }
        });

        // phase 2: pick the split on the Monte Carlo mean where the scheme searches
        if (needs_search)
        {
            if (spec.tag == SchemeTag::hrs_exs)
                split_gg = hrs_split_search(caches, sc.group_of, groups, power, spec.grid_step,
                                            workers);
            else
                split_t = rs_split_search(caches, power, spec.grid_step);
        }

        // phase 3: evaluate every trial at the operating split and reduce
        std::vector<double> sum(num_trials), oc(num_trials), ic(num_trials), priv(num_trials);
        detail::parallel_for(num_trials, workers, [&](std::size_t n) {
            const detail::RateParts parts = detail::scheme_rates(spec, caches[n], sc.group_of,
                                                                 groups, power, split_t, split_gg);
            sum[n] = parts.sum;
            oc[n] = parts.oc;
            ic[n] = parts.ic;
            priv[n] = parts.priv;
        });

        RatePoint &pt = report.points[s];
        pt.snr_db = snr_db(s);
        pt.sum_rate_mean = pairwise_mean(sum);
        pt.sum_rate_stderr = standard_error(sum);
        pt.rate_common_outer = pairwise_mean(oc);
        pt.rate_common_inner = pairwise_mean(ic);
        pt.rate_private = pairwise_mean(priv);
        pt.split_t = split_t;
        pt.split_alpha = split_gg.alpha;
        pt.split_beta = split_gg.beta;
        pt.trials = num_trials;
    }
    return report;
}

// ---------- LARGE-SYSTEM CURVES ----------

namespace detail
{

// Re-assemble the layered SINR families at another split from the invariants of a
// base evaluation; the coupling statistics do not depend on the split.
inline RateParts hrs_rates_at_split(const HrsAsymptotics &base, const arma::uvec &users,
                                    const arma::vec &tau, double alpha, double beta)
{
    const arma::uword g_count = users.n_elem;
    const double k_total = (double)arma::accu(users);
    RateParts parts;
    double oc_min = arma::datum::inf;
    for (arma::uword g = 0; g < g_count; ++g)
    {
        const double t2 = tau(g) * tau(g);
        double inter = 0.0;
        for (arma::uword l = 0; l < g_count; ++l)
            if (l != g)
                inter += base.xi_sq(l) * base.upsilon(g, l);
        const double own_priv = base.xi_sq(g) * base.upsilon(g, g) * base.omega(g);
        const double own_sig = (base.power / k_total) * base.xi_sq(g) * base.phi(g);

        const double oc = base.kappa(g) * base.power * (1.0 - beta) * (1.0 - t2) /
                          (beta * (inter + own_priv + own_sig) + 1.0);
        const double mix = base.xi_sq(g) * (base.upsilon(g, g) * base.omega(g) +
                                            (base.power / k_total) * base.phi(g));
        const double ic = beta * (1.0 - alpha) * mix / (beta * inter + beta * alpha * mix + 1.0);
        const double pr =
            beta * alpha * own_sig / (beta * inter + beta * alpha * own_priv + 1.0);

        oc_min = std::min(oc_min, oc);
        if (alpha < 1.0)
            parts.ic += rate_bps(ic);
        parts.priv += (double)users(g) * rate_bps(pr);
    }
    parts.oc = beta < 1.0 ? rate_bps(oc_min) : 0.0;
    parts.sum = parts.oc + parts.ic + parts.priv;
    return parts;
}

} // namespace detail

// Deterministic large-system curve of a scheme over the SNR grid. Schemes without
// an implemented limit (TDMA, matched beamforming, the scheduling baselines)
// return an empty set of points.
inline std::vector<RatePoint> asymptotic_points(const Scenario &sc, const SchemeSpec &spec,
                                                const arma::vec &snr_db)
{
    validate_scheme_spec(spec);
    if (scheme_needs_groups(spec.tag) && !sc.two_tier)
        throw std::invalid_argument("asymptotic_points: scheme requires a grouped scenario");

    const bool one_tier = spec.tag == SchemeTag::bc_rzf || spec.tag == SchemeTag::rs_clf ||
                          spec.tag == SchemeTag::rs_exs;
    const bool two_tier = spec.tag == SchemeTag::ttp || spec.tag == SchemeTag::hrs_clf ||
                          spec.tag == SchemeTag::hrs_exs;
    if (!one_tier && !two_tier)
        return {};

    const arma::uword k = sc.total_users();
    std::vector<RatePoint> points(snr_db.n_elem);
    for (arma::uword s = 0; s < snr_db.n_elem; ++s)
    {
        const double power = snr_db_to_power(snr_db(s));
        RatePoint &pt = points[s];
        pt.snr_db = snr_db(s);
        pt.trials = 0;

        if (one_tier)
        {
            std::vector<const arma::cx_mat *> covs(k);
            for (arma::uword u = 0; u < k; ++u)
                covs[u] = &sc.user_models[u]->matrix;
            const arma::vec weights(k, arma::fill::ones);
            const double eps = rzf_epsilon(k, sc.antennas, power);
            const FixedPoint fp = solve_fixed_point(covs, weights, eps);
            const DerivativeSystem ds = solve_derivative_system(covs, weights, fp);

            double split_t = 1.0;
            if (spec.tag == SchemeTag::rs_clf)
                split_t = rs_power_split(rs_asymptotics(fp, ds, sc.tau, power, 1.0), sc.tau)
                              .split_t;
            else if (spec.tag == SchemeTag::rs_exs)
            {
                const arma::vec grid = split_grid(spec.grid_step);
                double best = -arma::datum::inf;
                for (arma::uword i = 0; i < grid.n_elem; ++i)
                {
                    const double r =
                        rs_asymptotics(fp, ds, sc.tau, power, grid(i)).rate_sum;
                    if (r >= best)
                    {
                        best = r;
                        split_t = grid(i);
                    }
                }
            }
            const RsAsymptotics as = rs_asymptotics(fp, ds, sc.tau, power, split_t);
            pt.sum_rate_mean = as.rate_sum;
            pt.rate_common_outer = as.rate_common;
            pt.rate_private = as.rate_private;
            pt.split_t = split_t;
        }
        else
        {
            const arma::uword b_total = [&] {
                arma::uword b = 0;
                for (const auto &o : sc.outer)
                    b += o.n_cols;
                return b;
            }();
            const double eps = two_tier_epsilon(k, b_total, power);
            const HrsAsymptotics base = hrs_asymptotics(sc.coupling, sc.tau_group, power, 1.0,
                                                        1.0, eps, spec.kappa_per_group_users);

            HrsSplit split;
            if (spec.tag == SchemeTag::hrs_clf)
            {
                const InterferenceRegime regime = classify_interference_regime(base);
                const HrsPowerSplit sp = hrs_power_split(sc.coupling, sc.tau_group, power, regime,
                                                         spec.mu, spec.exact_power_split, eps);
                split.alpha = sp.alpha;
                split.beta = sp.beta;
            }
            else if (spec.tag == SchemeTag::hrs_exs)
            {
                const arma::vec grid = split_grid(spec.grid_step);
                double best = -arma::datum::inf;
                for (arma::uword ia = 0; ia < grid.n_elem; ++ia)
                    for (arma::uword ib = 0; ib < grid.n_elem; ++ib)
                    {
                        const double r = detail::hrs_rates_at_split(base, sc.users, sc.tau_group,
                                                                    grid(ia), grid(ib))
                                             .sum;
                        if (r >= best)
                        {
                            best = r;
                            split.alpha = grid(ia);
                            split.beta = grid(ib);
                        }
                    }
            }
            const detail::RateParts parts =
                detail::hrs_rates_at_split(base, sc.users, sc.tau_group, split.alpha, split.beta);
            pt.sum_rate_mean = parts.sum;
            pt.rate_common_outer = parts.oc;
            pt.rate_common_inner = parts.ic;
            pt.rate_private = parts.priv;
            pt.split_alpha = split.alpha;
            pt.split_beta = split.beta;
        }
    }
    return points;
}

} // namespace rsmimo

#endif
