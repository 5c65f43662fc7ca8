// SPDX-License-Identifier: Apache-2.0
//
// mimo-ofdm-sim: link-level simulator for CFO/SFO sensitivity of MIMO-OFDM space-time schemes
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


#ifndef MIMO_OFDM_RECEIVER_HPP
#define MIMO_OFDM_RECEIVER_HPP

#include "coding.hpp"
#include "config.hpp"
#include "error.hpp"
#include "link.hpp"
#include "mapping.hpp"
#include "stbc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <vector>

namespace mimo_ofdm
{

// Per-real-dimension power of a unit-energy complex symbol.
inline constexpr double kAxisPower = 0.5;

// Smallest residual variance handed to the demapper. Only reached on
// noiseless, perfectly resolved dimensions; LLRs saturate at the clip level.
inline constexpr double kVarianceFloor = 1e-12;

// Real linear model of one subcarrier, V = G_eq S + noise, as the receiver sees it.
struct DetectionContext
{
    RMatrix g;    // G_eq, (2 M_R T) x (2 Q)
    RMatrix gram; // G_eq^T G_eq
    RVector v;    // stacked received block
    double noise_var = 0.0;
    CsiMode csi_mode = CsiMode::EquivalentChannel;
};

// Builds G_eq from the channel the receiver believes in: phi(n,n) H[n] / sqrt(M_T)
// in EquivalentChannel mode, H[n] / sqrt(M_T) in ChannelOnly mode. ICI is never modelled.
inline DetectionContext build_detection_context(const CMatrix &h, const DispersionMatrix &d, std::complex<double> phi_nn,
                                                CsiMode csi_mode, double noise_var)
{
    const std::complex<double> gain =
        (csi_mode == CsiMode::EquivalentChannel ? phi_nn : std::complex<double>(1.0)) / std::sqrt(static_cast<double>(d.m_t));
    DetectionContext ctx;
    ctx.g = stack_channel(gain * h, d);
    ctx.gram = ctx.g.transpose() * ctx.g;
    ctx.noise_var = noise_var;
    ctx.csi_mode = csi_mode;
    return ctx;
}

inline DetectionContext build_detection_context(const CMatrix &h, const DispersionMatrix &d, std::complex<double> phi_nn,
                                                CsiMode csi_mode, double noise_var, const CMatrix &y)
{
    DetectionContext ctx = build_detection_context(h, d, phi_nn, csi_mode, noise_var);
    ctx.v = stack(y);
    return ctx;
}

// Per real dimension u: estimate = bias_u * s_u + noise of variance residual_u.
struct Detection
{
    RVector estimate;
    RVector bias;
    RVector residual;
};

// Linear MMSE estimate of the stacked symbols,
//   W = s2 G^T (s2 G G^T + sigma^2 I)^-1 = (G^T G + (sigma^2 / s2) I)^-1 G^T,
// evaluated in the (2Q x 2Q) form, which also covers sigma^2 = 0 when G_eq has
// full column rank. bias_u = (W G)_uu, residual_u = s2 bias_u (1 - bias_u).
inline Detection mmse_detect(const DetectionContext &ctx)
{
    const Eigen::Index dims = ctx.g.cols();
    const RMatrix a = ctx.gram + (ctx.noise_var / kAxisPower) * RMatrix::Identity(dims, dims);
    const Eigen::LDLT<RMatrix> ldlt(a);
    // LDLT silently zeroes null pivots, so inspect them directly rather than trusting rcond().
    const RVector pivots = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-12 * std::max(1.0, pivots.cwiseAbs().maxCoeff())))
        throw Error(ErrorKind::SingularMatrix, "mmse_detect: G_eq^T G_eq + sigma^2 I is singular (noise variance " +
                                                   std::to_string(ctx.noise_var) + ")");
    const RMatrix wg = ldlt.solve(ctx.gram);
    Detection out;
    out.estimate = ldlt.solve(ctx.g.transpose() * ctx.v);
    out.bias = wg.diagonal();
    out.residual.resize(dims);
    for (Eigen::Index u = 0; u < dims; ++u)
        out.residual[u] = std::max(kVarianceFloor, kAxisPower * out.bias[u] * (1.0 - out.bias[u]));
    return out;
}

// Parallel interference cancellation with soft feedback followed by a
// per-dimension matched filter:
//   est_u = g_u^T (V - sum_{v != u} g_v s~_v) / (g_u^T g_u)
// The residual adds the filtered noise to the leakage of the feedback
// uncertainty: sigma^2 / |g_u|^2 + sum_{v != u} (g_u^T g_v)^2 var_v / |g_u|^4.
inline Detection pic_detect(const DetectionContext &ctx, const RVector &soft_mean, const RVector &soft_var)
{
    const Eigen::Index dims = ctx.g.cols();
    if (soft_mean.size() != dims || soft_var.size() != dims)
        throw Error(ErrorKind::LengthMismatch, "pic_detect: feedback length does not match G_eq columns");
    const RVector matched = ctx.g.transpose() * ctx.v;
    Detection out;
    out.estimate.resize(dims);
    out.bias = RVector::Ones(dims);
    out.residual.resize(dims);
    for (Eigen::Index u = 0; u < dims; ++u)
    {
        const double norm2 = ctx.gram(u, u);
        if (!(norm2 > 0.0))
            throw Error(ErrorKind::ZeroColumn, "pic_detect: column " + std::to_string(u) + " of G_eq is zero");
        double cancelled = matched[u];
        double leak = 0.0;
        for (Eigen::Index v = 0; v < dims; ++v)
        {
            if (v == u)
                continue;
            cancelled -= ctx.gram(u, v) * soft_mean[v];
            leak += ctx.gram(u, v) * ctx.gram(u, v) * soft_var[v];
        }
        out.estimate[u] = cancelled / norm2;
        out.residual[u] = std::max(kVarianceFloor, ctx.noise_var / norm2 + leak / (norm2 * norm2));
    }
    return out;
}

struct IterationTrace
{
    int iteration = 0;
    std::vector<double> estimates;     // stacked detector outputs, subcarrier-major
    std::vector<double> extrinsic;     // decoder extrinsic LLRs, coded-bit order
    double ber = std::numeric_limits<double>::quiet_NaN(); // against the true bits when supplied
};

struct ReceiveResult
{
    std::vector<Bits> decisions; // info-bit decisions after each iteration
    std::vector<IterationTrace> trace;
};

// Detector-decoder loop over one frame. Iteration 1 runs MMSE; later
// iterations run PIC. Interference is rebuilt from the decoder's a posteriori
// coded-bit LLRs, while the demapper takes the decoder's extrinsic LLRs as
// priors and returns extrinsic LLRs, so the decoder never sees its own output.
// Exactly config.n_iterations passes are made.
inline ReceiveResult iterate_receive(const LinkSetup &link, const std::vector<CMatrix> &y_all,
                                     const std::vector<CMatrix> &h_all, const std::vector<std::complex<double>> &phi_nn_all,
                                     double noise_var, const Bits *true_bits = nullptr)
{
    const SystemConfig &cfg = link.config;
    const int n_sc = cfg.n_subcarriers;
    const int q = cfg.q;
    const int dims = 2 * q;
    const int b = cfg.bits_per_symbol;
    const int half = b / 2;
    if (static_cast<int>(y_all.size()) != n_sc || static_cast<int>(h_all.size()) != n_sc ||
        static_cast<int>(phi_nn_all.size()) != n_sc)
        throw Error(ErrorKind::LengthMismatch, "iterate_receive: expected one entry per subcarrier");

    std::vector<DetectionContext> contexts;
    contexts.reserve(n_sc);
    for (int n = 0; n < n_sc; ++n)
        contexts.push_back(build_detection_context(h_all[n], link.dispersion, phi_nn_all[n], cfg.csi_mode, noise_var, y_all[n]));

    const std::size_t n_coded = static_cast<std::size_t>(cfg.frame_coded_bits());
    Llrs priors(n_coded, 0.0);   // decoder extrinsic, constellation order
    Llrs feedback(n_coded, 0.0); // decoder a posteriori, constellation order
    Llrs channel_llrs(n_coded);
    ReceiveResult result;

    for (int iter = 1; iter <= cfg.n_iterations; ++iter)
    {
        IterationTrace trace;
        trace.iteration = iter;
        trace.estimates.reserve(static_cast<std::size_t>(n_sc) * dims);

        std::optional<SoftSymbols> soft;
        if (iter > 1)
            soft = soft_map(link.constellation, feedback);

        for (int n = 0; n < n_sc; ++n)
        {
            Detection det;
            if (iter == 1)
                det = mmse_detect(contexts[n]);
            else
            {
                RVector mean(dims), var(dims);
                for (int k = 0; k < q; ++k)
                {
                    const std::size_t sym = static_cast<std::size_t>(n) * q + k;
                    mean[2 * k] = soft->mean[sym].real();
                    mean[2 * k + 1] = soft->mean[sym].imag();
                    var[2 * k] = soft->var_re[sym];
                    var[2 * k + 1] = soft->var_im[sym];
                }
                det = pic_detect(contexts[n], mean, var);
            }
            for (int u = 0; u < dims; ++u)
            {
                const std::size_t sym = static_cast<std::size_t>(n) * q + u / 2;
                const std::size_t offset = sym * b + (u % 2) * half;
                const std::span<const double> axis_priors =
                    iter > 1 ? std::span<const double>(priors).subspan(offset, half) : std::span<const double>();
                const auto llr = demap_axis(link.constellation, det.estimate[u], det.bias[u], det.residual[u], axis_priors);
                std::copy(llr.begin(), llr.end(), channel_llrs.begin() + static_cast<std::ptrdiff_t>(offset));
                trace.estimates.push_back(det.estimate[u]);
            }
        }

        const Llrs coded_llrs = link.interleaver.deinterleave<double>(channel_llrs);
        SisoOutput dec = link.outer.decode(coded_llrs, static_cast<std::size_t>(link.info_bits));
        for (auto &l : dec.extrinsic)
            l = clip_llr(l);
        for (auto &l : dec.app_coded)
            l = clip_llr(l);
        priors = link.interleaver.interleave<double>(dec.extrinsic);
        feedback = link.interleaver.interleave<double>(dec.app_coded);

        if (true_bits)
        {
            std::size_t errors = 0;
            for (std::size_t i = 0; i < true_bits->size(); ++i)
                errors += (*true_bits)[i] != dec.info_decisions[i];
            trace.ber = static_cast<double>(errors) / static_cast<double>(true_bits->size());
        }
        trace.extrinsic = std::move(dec.extrinsic);
        result.decisions.push_back(std::move(dec.info_decisions));
        result.trace.push_back(std::move(trace));
    }
    return result;
}

} // namespace mimo_ofdm

#endif // MIMO_OFDM_RECEIVER_HPP
