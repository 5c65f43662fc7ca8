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


#ifndef MIMO_OFDM_MAPPING_HPP
#define MIMO_OFDM_MAPPING_HPP

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace mimo_ofdm
{

inline constexpr double kLlrClip = 50.0;

inline double clip_llr(double l) { return std::clamp(l, -kLlrClip, kLlrClip); }

// Square Gray QAM with unit average energy. Each axis is a Gray-labelled PAM
// carrying B/2 bits, most significant first; label 0...0 sits on the most
// positive level so that LLR > 0 pulls toward positive amplitudes.
class Constellation
{
public:
    explicit Constellation(int bits_per_symbol) : bits_(bits_per_symbol)
    {
        if (bits_per_symbol < 2 || bits_per_symbol % 2 != 0 || bits_per_symbol > 16)
            throw Error(ErrorKind::BadDimension, "bits_per_symbol: must be even and >= 2");
        const int m = 1 << axis_bits();
        const double order = static_cast<double>(m) * m;
        const double scale = std::sqrt(3.0 / (2.0 * (order - 1.0)));
        levels_.resize(m);
        for (int label = 0; label < m; ++label)
        {
            int index = label; // Gray decode
            for (int shift = label >> 1; shift; shift >>= 1)
                index ^= shift;
            levels_[label] = (m - 1 - 2 * index) * scale;
        }
    }

    int bits_per_symbol() const { return bits_; }
    int axis_bits() const { return bits_ / 2; }
    int axis_levels() const { return static_cast<int>(levels_.size()); }
    std::size_t size() const { return levels_.size() * levels_.size(); }

    // PAM amplitude of an axis label.
    double level(int label) const { return levels_[label]; }

    std::complex<double> point(int i_label, int q_label) const { return {levels_[i_label], levels_[q_label]}; }

    std::vector<std::complex<double>> map(std::span<const std::uint8_t> bits) const
    {
        if (bits.size() % bits_ != 0)
            throw Error(ErrorKind::LengthMismatch, "map: " + std::to_string(bits.size()) +
                                                       " bits is not a multiple of B = " + std::to_string(bits_));
        std::vector<std::complex<double>> symbols(bits.size() / bits_);
        for (std::size_t k = 0; k < symbols.size(); ++k)
        {
            const auto group = bits.subspan(k * bits_, bits_);
            symbols[k] = point(label_of(group.first(axis_bits())), label_of(group.last(axis_bits())));
        }
        return symbols;
    }

    int label_of(std::span<const std::uint8_t> axis_bits) const
    {
        int label = 0;
        for (auto b : axis_bits)
            label = (label << 1) | (b & 1);
        return label;
    }

    int label_bit(int label, int k) const { return (label >> (axis_bits() - 1 - k)) & 1; }

private:
    int bits_;
    std::vector<double> levels_;
};

// Mean and variance of one PAM axis under bitwise-independent priors.
struct AxisMoments
{
    double mean = 0.0;
    double variance = 0.0;
};

inline AxisMoments soft_map_axis(const Constellation &c, std::span<const double> llrs)
{
    const int nb = c.axis_bits();
    std::vector<double> p0(nb);
    for (int k = 0; k < nb; ++k)
        p0[k] = 1.0 / (1.0 + std::exp(-clip_llr(llrs[k])));
    double mean = 0.0, energy = 0.0;
    for (int label = 0; label < c.axis_levels(); ++label)
    {
        double p = 1.0;
        for (int k = 0; k < nb; ++k)
            p *= c.label_bit(label, k) ? 1.0 - p0[k] : p0[k];
        mean += p * c.level(label);
        energy += p * c.level(label) * c.level(label);
    }
    return {mean, std::max(0.0, energy - mean * mean)};
}

struct SoftSymbols
{
    std::vector<std::complex<double>> mean;
    std::vector<double> var_re; // per real axis
    std::vector<double> var_im;

    double variance(std::size_t k) const { return var_re[k] + var_im[k]; }
};

// Soft symbol estimates from coded-bit LLRs in mapping order.
inline SoftSymbols soft_map(const Constellation &c, std::span<const double> llrs)
{
    const int b = c.bits_per_symbol();
    if (llrs.size() % b != 0)
        throw Error(ErrorKind::LengthMismatch, "soft_map: LLR count is not a multiple of B");
    const std::size_t n = llrs.size() / b;
    SoftSymbols out;
    out.mean.resize(n);
    out.var_re.resize(n);
    out.var_im.resize(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        const auto group = llrs.subspan(k * b, b);
        const AxisMoments re = soft_map_axis(c, group.first(c.axis_bits()));
        const AxisMoments im = soft_map_axis(c, group.last(c.axis_bits()));
        out.mean[k] = {re.mean, im.mean};
        out.var_re[k] = re.variance;
        out.var_im[k] = im.variance;
    }
    return out;
}

// Max-log extrinsic LLRs for the bits of one real axis, modelling the
// detector output as estimate = bias * s + Gaussian noise of the given variance.
inline std::vector<double> demap_axis(const Constellation &c, double estimate, double bias, double variance,
                                      std::span<const double> priors)
{
    if (!(variance > 0.0))
        throw Error(ErrorKind::NonPositiveVariance, "demap: residual variance must be > 0, got " + std::to_string(variance));
    const int nb = c.axis_bits();
    const bool have_priors = !priors.empty();
    if (have_priors && static_cast<int>(priors.size()) != nb)
        throw Error(ErrorKind::LengthMismatch, "demap: expected " + std::to_string(nb) + " priors");

    constexpr double kNeg = -1e300;
    std::vector<double> best0(nb, kNeg), best1(nb, kNeg);
    for (int label = 0; label < c.axis_levels(); ++label)
    {
        const double d = estimate - bias * c.level(label);
        double metric = -d * d / (2.0 * variance);
        if (have_priors)
            for (int k = 0; k < nb; ++k)
                metric += c.label_bit(label, k) ? -0.5 * priors[k] : 0.5 * priors[k];
        for (int k = 0; k < nb; ++k)
        {
            auto &best = c.label_bit(label, k) ? best1[k] : best0[k];
            best = std::max(best, metric);
        }
    }
    std::vector<double> llr(nb);
    for (int k = 0; k < nb; ++k)
        llr[k] = clip_llr(best0[k] - best1[k] - (have_priors ? priors[k] : 0.0));
    return llr;
}

} // namespace mimo_ofdm

#endif // MIMO_OFDM_MAPPING_HPP
