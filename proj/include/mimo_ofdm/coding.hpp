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


#ifndef MIMO_OFDM_CODING_HPP
#define MIMO_OFDM_CODING_HPP

#include "config.hpp"
#include "error.hpp"
#include "rng.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace mimo_ofdm
{

using Bits = std::vector<std::uint8_t>;
using Llrs = std::vector<double>; // LLR > 0 means bit 0 is more likely

// Feed-forward convolutional code. Generators are written MSB-first, the MSB
// tapping the current input, e.g. {0171, 0133} for the K=7 DVB mother code.
class ConvCode
{
public:
    ConvCode(int constraint_length, std::vector<unsigned> generators)
        : k_(constraint_length), gens_(std::move(generators)), n_states_(1 << (constraint_length - 1))
    {
        next_.resize(2 * n_states_);
        out_.resize(2 * n_states_);
        for (int s = 0; s < n_states_; ++s)
        {
            for (int u = 0; u < 2; ++u)
            {
                const unsigned reg = (static_cast<unsigned>(u) << (k_ - 1)) | static_cast<unsigned>(s);
                unsigned word = 0;
                for (std::size_t g = 0; g < gens_.size(); ++g)
                    word |= (std::popcount(reg & gens_[g]) & 1u) << g;
                next_[2 * s + u] = static_cast<int>(reg >> 1);
                out_[2 * s + u] = word;
            }
        }
    }

    static ConvCode dvb() { return ConvCode(7, {0171, 0133}); }

    int constraint_length() const { return k_; }
    int n_outputs() const { return static_cast<int>(gens_.size()); }
    int n_states() const { return n_states_; }
    int tail_length() const { return k_ - 1; }
    int next_state(int s, int u) const { return next_[2 * s + u]; }
    // Bit g of the result is the output of generator g.
    unsigned output(int s, int u) const { return out_[2 * s + u]; }

    // Encodes info bits followed by a zero tail; output is unpunctured,
    // n_outputs() bits per trellis step.
    Bits encode(std::span<const std::uint8_t> info) const
    {
        Bits coded;
        coded.reserve((info.size() + tail_length()) * gens_.size());
        int s = 0;
        auto step = [&](int u) {
            const unsigned w = output(s, u);
            for (std::size_t g = 0; g < gens_.size(); ++g)
                coded.push_back(static_cast<std::uint8_t>((w >> g) & 1u));
            s = next_state(s, u);
        };
        for (auto b : info)
            step(b & 1);
        for (int i = 0; i < tail_length(); ++i)
            step(0);
        return coded;
    }

private:
    int k_;
    std::vector<unsigned> gens_;
    int n_states_;
    std::vector<int> next_;
    std::vector<unsigned> out_;
};

// Periodic puncturing of a rate-1/n mother code.
class Puncturer
{
public:
    // pattern[g][i]: keep output g at step i (mod period).
    explicit Puncturer(std::vector<std::vector<std::uint8_t>> pattern) : pattern_(std::move(pattern))
    {
        period_ = static_cast<int>(pattern_.front().size());
        kept_per_period_ = 0;
        for (const auto &row : pattern_)
            kept_per_period_ += static_cast<int>(std::count(row.begin(), row.end(), 1));
    }

    // DVB-T puncturing of the (171,133) code.
    static Puncturer dvb(CodeRate r)
    {
        if (r == CodeRate{1, 2}) return Puncturer({{1}, {1}});
        if (r == CodeRate{2, 3}) return Puncturer({{1, 0}, {1, 1}});
        if (r == CodeRate{3, 4}) return Puncturer({{1, 0, 1}, {1, 1, 0}});
        throw Error(ErrorKind::BadDimension, "code_rate: no puncturing pattern for " + to_string(r));
    }

    int period() const { return period_; }
    int kept_per_period() const { return kept_per_period_; }
    int n_outputs() const { return static_cast<int>(pattern_.size()); }

    std::size_t punctured_length(std::size_t steps) const
    {
        std::size_t n = steps / period_ * kept_per_period_;
        for (std::size_t i = 0; i < steps % period_; ++i)
            for (const auto &row : pattern_)
                n += row[i];
        return n;
    }

    template <typename T>
    std::vector<T> puncture(std::span<const T> mother) const
    {
        const std::size_t n_out = pattern_.size();
        const std::size_t steps = mother.size() / n_out;
        std::vector<T> out;
        out.reserve(punctured_length(steps));
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t g = 0; g < n_out; ++g)
                if (pattern_[g][t % period_])
                    out.push_back(mother[t * n_out + g]);
        return out;
    }

    // Inserts zero LLRs at punctured positions.
    Llrs depuncture(std::span<const double> llrs, std::size_t steps) const
    {
        if (llrs.size() != punctured_length(steps))
            throw Error(ErrorKind::LengthMismatch, "depuncture: expected " + std::to_string(punctured_length(steps)) +
                                                       " LLRs, got " + std::to_string(llrs.size()));
        const std::size_t n_out = pattern_.size();
        Llrs mother(steps * n_out, 0.0);
        std::size_t k = 0;
        for (std::size_t t = 0; t < steps; ++t)
            for (std::size_t g = 0; g < n_out; ++g)
                if (pattern_[g][t % period_])
                    mother[t * n_out + g] = llrs[k++];
        return mother;
    }

private:
    std::vector<std::vector<std::uint8_t>> pattern_;
    int period_ = 1;
    int kept_per_period_ = 0;
};

struct SisoOutput
{
    Llrs extrinsic;     // per mother-code position: a posteriori minus intrinsic
    Llrs app_coded;     // per mother-code position: a posteriori
    Llrs app_info;      // a posteriori LLRs of the info bits (tail excluded)
    Bits info_decisions;
};

// Max-log BCJR over a zero-tailed trellis. `mother_llrs` holds n_outputs()
// LLRs per step, zero where punctured.
inline SisoOutput siso_decode(const ConvCode &code, std::span<const double> mother_llrs)
{
    const int n_out = code.n_outputs();
    const int n_states = code.n_states();
    if (mother_llrs.size() % n_out != 0)
        throw Error(ErrorKind::LengthMismatch, "siso_decode: LLR count is not a multiple of the code outputs");
    const std::size_t steps = mother_llrs.size() / n_out;
    const std::size_t tail = static_cast<std::size_t>(code.tail_length());
    if (steps <= tail)
        throw Error(ErrorKind::LengthMismatch, "siso_decode: frame shorter than the code tail");
    const std::size_t n_info = steps - tail;
    // Finite stand-in for log(0); sums of a few of these stay far below any real metric.
    constexpr double kNeg = -1e200;
    constexpr double kUnreachable = -1e199;

    // Branch metric per step and output word: +L/2 for each 0 bit, -L/2 for each 1 bit.
    const unsigned n_words = 1u << n_out;
    std::vector<double> gammas(steps * n_words);
    for (std::size_t t = 0; t < steps; ++t)
        for (unsigned w = 0; w < n_words; ++w)
        {
            double g = 0.0;
            for (int o = 0; o < n_out; ++o)
            {
                const double l = 0.5 * mother_llrs[t * n_out + o];
                g += ((w >> o) & 1u) ? -l : l;
            }
            gammas[t * n_words + w] = g;
        }

    // Every state of a feed-forward code is entered from exactly two states,
    // both with the same input bit.
    struct Incoming
    {
        int from[2];
        unsigned word[2];
        int input;
    };
    std::vector<Incoming> incoming(n_states);
    std::vector<int> filled(n_states, 0);
    for (int s = 0; s < n_states; ++s)
        for (int u = 0; u < 2; ++u)
        {
            const int sn = code.next_state(s, u);
            auto &in = incoming[sn];
            in.from[filled[sn]] = s;
            in.word[filled[sn]] = code.output(s, u);
            in.input = u;
            ++filled[sn];
        }

    std::vector<double> alpha((steps + 1) * n_states, kNeg);
    std::vector<double> beta((steps + 1) * n_states, kNeg);
    alpha[0] = 0.0;
    beta[steps * n_states] = 0.0;
    for (std::size_t t = 0; t < steps; ++t)
    {
        const bool tail_step = t >= n_info;
        const double *a = &alpha[t * n_states];
        const double *g = &gammas[t * n_words];
        double *an = &alpha[(t + 1) * n_states];
        double m = kNeg;
        for (int sn = 0; sn < n_states; ++sn)
        {
            const Incoming &in = incoming[sn];
            const double v = (tail_step && in.input) ? kNeg
                                                     : std::max(a[in.from[0]] + g[in.word[0]], a[in.from[1]] + g[in.word[1]]);
            an[sn] = v;
            m = std::max(m, v);
        }
        for (int s = 0; s < n_states; ++s)
            an[s] = std::max(kNeg, an[s] - m);
    }
    for (std::size_t t = steps; t-- > 0;)
    {
        const bool tail_step = t >= n_info;
        const double *bn = &beta[(t + 1) * n_states];
        const double *g = &gammas[t * n_words];
        double *b = &beta[t * n_states];
        for (int s = 0; s < n_states; ++s)
        {
            double v = bn[code.next_state(s, 0)] + g[code.output(s, 0)];
            if (!tail_step)
                v = std::max(v, bn[code.next_state(s, 1)] + g[code.output(s, 1)]);
            b[s] = v;
        }
        const double m = *std::max_element(b, b + n_states);
        for (int s = 0; s < n_states; ++s)
            b[s] = std::max(kNeg, b[s] - m);
    }

    SisoOutput out;
    out.extrinsic.assign(mother_llrs.size(), 0.0);
    out.app_coded.assign(mother_llrs.size(), 0.0);
    out.app_info.assign(n_info, 0.0);
    out.info_decisions.assign(n_info, 0);
    std::vector<double> best(2 * n_out);
    for (std::size_t t = 0; t < steps; ++t)
    {
        const bool tail_step = t >= n_info;
        std::fill(best.begin(), best.end(), kNeg);
        double info[2] = {kNeg, kNeg};
        const double *a = &alpha[t * n_states];
        const double *bn = &beta[(t + 1) * n_states];
        const double *g = &gammas[t * n_words];
        for (int s = 0; s < n_states; ++s)
            for (int u = 0; u < (tail_step ? 1 : 2); ++u)
            {
                const unsigned word = code.output(s, u);
                const double metric = a[s] + g[word] + bn[code.next_state(s, u)];
                for (int o = 0; o < n_out; ++o)
                {
                    double &slot = best[2 * o + ((word >> o) & 1u)];
                    slot = std::max(slot, metric);
                }
                info[u] = std::max(info[u], metric);
            }
        for (int o = 0; o < n_out; ++o)
        {
            const std::size_t i = t * n_out + o;
            // A position whose value the trellis forces carries no extrinsic information.
            if (best[2 * o] < kUnreachable || best[2 * o + 1] < kUnreachable)
            {
                out.extrinsic[i] = 0.0;
                out.app_coded[i] = mother_llrs[i];
            }
            else
            {
                out.app_coded[i] = best[2 * o] - best[2 * o + 1];
                out.extrinsic[i] = out.app_coded[i] - mother_llrs[i];
            }
        }
        if (t < n_info)
        {
            out.app_info[t] = info[0] - info[1];
            out.info_decisions[t] = out.app_info[t] < 0.0 ? 1 : 0;
        }
    }
    return out;
}

// Hard-output Viterbi on the same zero-tailed trellis, soft (LLR) branch metrics.
inline Bits viterbi_decode(const ConvCode &code, std::span<const double> mother_llrs)
{
    const int n_out = code.n_outputs();
    const int n_states = code.n_states();
    const std::size_t steps = mother_llrs.size() / n_out;
    const std::size_t n_info = steps - code.tail_length();
    constexpr double kNeg = -1e300;
    std::vector<double> metric(n_states, kNeg), next(n_states);
    metric[0] = 0.0;
    std::vector<int> from((steps)*n_states, -1);
    std::vector<std::uint8_t> input(steps * n_states, 0);
    for (std::size_t t = 0; t < steps; ++t)
    {
        std::fill(next.begin(), next.end(), kNeg);
        const int u_max = t < n_info ? 2 : 1;
        for (int s = 0; s < n_states; ++s)
        {
            if (metric[s] <= kNeg)
                continue;
            for (int u = 0; u < u_max; ++u)
            {
                const unsigned word = code.output(s, u);
                double g = 0.0;
                for (int o = 0; o < n_out; ++o)
                {
                    const double l = 0.5 * mother_llrs[t * n_out + o];
                    g += ((word >> o) & 1u) ? -l : l;
                }
                const int sn = code.next_state(s, u);
                if (metric[s] + g > next[sn])
                {
                    next[sn] = metric[s] + g;
                    from[t * n_states + sn] = s;
                    input[t * n_states + sn] = static_cast<std::uint8_t>(u);
                }
            }
        }
        metric.swap(next);
    }
    Bits info(n_info);
    int s = 0;
    for (std::size_t t = steps; t-- > 0;)
    {
        if (t < n_info)
            info[t] = input[t * n_states + s];
        s = from[t * n_states + s];
    }
    return info;
}

// Frame-wide bit permutation: out[i] = in[perm[i]].
class Interleaver
{
public:
    static Interleaver identity(std::size_t n)
    {
        Interleaver il;
        il.perm_.resize(n);
        std::iota(il.perm_.begin(), il.perm_.end(), 0u);
        return il;
    }

    // Uniform random permutation (Fisher-Yates) from a seeded stream.
    static Interleaver random(std::size_t n, std::uint64_t seed)
    {
        Interleaver il = identity(n);
        Rng rng(seed);
        for (std::size_t i = n; i > 1; --i)
            std::swap(il.perm_[i - 1], il.perm_[rng.below(i)]);
        return il;
    }

    std::size_t size() const { return perm_.size(); }
    const std::vector<std::uint32_t> &permutation() const { return perm_; }

    template <typename T>
    std::vector<T> interleave(std::span<const T> in) const
    {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i)
            out[i] = in[perm_[i]];
        return out;
    }

    template <typename T>
    std::vector<T> deinterleave(std::span<const T> in) const
    {
        check(in.size());
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i)
            out[perm_[i]] = in[i];
        return out;
    }

private:
    void check(std::size_t n) const
    {
        if (n != perm_.size())
            throw Error(ErrorKind::LengthMismatch, "interleaver: frame of " + std::to_string(n) +
                                                       " does not match permutation of " + std::to_string(perm_.size()));
    }

    std::vector<std::uint32_t> perm_;
};

// The outer code of one frame: DVB mother code, puncturing, zero tail.
class OuterCode
{
public:
    explicit OuterCode(CodeRate rate) : code_(ConvCode::dvb()), punct_(Puncturer::dvb(rate)) {}

    const ConvCode &code() const { return code_; }
    const Puncturer &puncturer() const { return punct_; }

    std::size_t steps_for(std::size_t n_info) const { return n_info + code_.tail_length(); }

    Bits encode(std::span<const std::uint8_t> info) const
    {
        const Bits mother = code_.encode(info);
        return punct_.puncture<std::uint8_t>(mother);
    }

    // Punctured channel LLRs in, punctured extrinsic and a posteriori LLRs out.
    SisoOutput decode(std::span<const double> llrs, std::size_t n_info) const
    {
        const std::size_t steps = steps_for(n_info);
        const Llrs mother = punct_.depuncture(llrs, steps);
        SisoOutput out = siso_decode(code_, mother);
        out.extrinsic = punct_.puncture<double>(out.extrinsic);
        out.app_coded = punct_.puncture<double>(out.app_coded);
        return out;
    }

private:
    ConvCode code_;
    Puncturer punct_;
};

} // namespace mimo_ofdm

#endif // MIMO_OFDM_CODING_HPP
