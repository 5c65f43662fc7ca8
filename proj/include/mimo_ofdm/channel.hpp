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


#ifndef MIMO_OFDM_CHANNEL_HPP
#define MIMO_OFDM_CHANNEL_HPP

#include "config.hpp"
#include "error.hpp"
#include "rng.hpp"
#include "stbc.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace mimo_ofdm
{

// Signed subcarrier index: n for n <= N/2, n - N above.
inline long fold_index(long n, long n_subcarriers)
{
    return n <= n_subcarriers / 2 ? n : n - n_subcarriers;
}

// Total normalized offset seen by destination n from source p.
inline double kernel_argument(long n, long p, double cfo_rel, double sfo_rel, long n_subcarriers)
{
    const long diff = ((n - p) % n_subcarriers + n_subcarriers) % n_subcarriers;
    return cfo_rel + sfo_rel / static_cast<double>(n_subcarriers) * static_cast<double>(fold_index(n, n_subcarriers)) +
           static_cast<double>(fold_index(diff, n_subcarriers));
}

// Leakage coefficient phi(n, p) from source subcarrier p into destination n
// under relative CFO (fraction of the subcarrier spacing) and relative SFO
// (sample drift per OFDM symbol):
//
//   x   = cfo + (sfo / N) e(n) + e((n - p) mod N)
//   phi = exp(j pi (N-1) x / N) * sin(pi x) / (N sin(pi x / N))
//
// The Dirichlet ratio has removable singularities at x = m N, where it tends to (-1)^(m (N-1)).
inline std::complex<double> phi(long n, long p, double cfo_rel, double sfo_rel, long n_subcarriers)
{
    const double nn = static_cast<double>(n_subcarriers);
    const double x = kernel_argument(n, p, cfo_rel, sfo_rel, n_subcarriers);
    const double ratio = x / nn;
    const double m = std::round(ratio);
    double magnitude;
    if (std::abs(ratio - m) < 1e-9)
    {
        const long parity = (static_cast<long>(m) * (n_subcarriers - 1)) & 1L;
        magnitude = parity ? -1.0 : 1.0;
    }
    else
    {
        magnitude = std::sin(std::numbers::pi * x) / (nn * std::sin(std::numbers::pi * ratio));
    }
    return std::polar(magnitude, std::numbers::pi * (nn - 1.0) / nn * x);
}

// The kernel restricted to an ICI window, precomputed once per (N, offsets, window).
class IciKernel
{
public:
    struct Tap
    {
        int source;
        std::complex<double> coeff;
    };

    IciKernel(int n_subcarriers, double cfo_rel, double sfo_rel, IciWindow window)
        : n_(n_subcarriers), window_(window)
    {
        if (!window.is_full() && 2 * *window.half_width + 1 > n_subcarriers)
            throw Error(ErrorKind::WindowTooLarge, "ici_window: 2K+1 exceeds n_subcarriers");
        const int span = window.is_full() ? n_ : 2 * *window.half_width + 1;
        taps_.reserve(static_cast<std::size_t>(n_) * span);
        diag_.resize(n_);
        captured_ = 1.0;
        for (int n = 0; n < n_; ++n)
        {
            double off_all = 0.0, off_kept = 0.0;
            for (int p = 0; p < n_; ++p)
            {
                const auto c = phi(n, p, cfo_rel, sfo_rel, n_);
                const long dist = std::abs(fold_index(((n - p) % n_ + n_) % n_, n_));
                const bool kept = window.is_full() || dist <= *window.half_width;
                if (p == n)
                    diag_[n] = c;
                else
                {
                    off_all += std::norm(c);
                    if (kept)
                        off_kept += std::norm(c);
                }
                if (kept)
                    taps_.push_back({p, c});
            }
            row_begin_.push_back(n == 0 ? 0 : row_begin_.back() + row_size_.back());
            row_size_.push_back(static_cast<int>(taps_.size()) - row_begin_.back());
            if (off_all > 0.0)
                captured_ = std::min(captured_, off_kept / off_all);
        }
    }

    int n_subcarriers() const { return n_; }
    const IciWindow &window() const { return window_; }
    std::complex<double> diag(int n) const { return diag_[n]; }
    const std::vector<std::complex<double>> &diagonal() const { return diag_; }

    std::span<const Tap> row(int n) const
    {
        return std::span<const Tap>(taps_).subspan(row_begin_[n], row_size_[n]);
    }

    // Worst-case (over destinations) share of the off-diagonal kernel energy inside the window.
    double captured_energy() const { return captured_; }

private:
    int n_;
    IciWindow window_;
    std::vector<Tap> taps_;
    std::vector<int> row_begin_, row_size_;
    std::vector<std::complex<double>> diag_;
    double captured_ = 1.0;
};

// One H[n] (M_R x M_T) per subcarrier, held over the T slots of a block.
struct ChannelRealization
{
    std::vector<CMatrix> h;
};

// I.i.d. CN(0, 1) coefficients, independent across subcarriers and antenna pairs.
inline ChannelRealization draw_channel(Rng &rng, int n_subcarriers, int m_r, int m_t)
{
    ChannelRealization ch;
    ch.h.reserve(n_subcarriers);
    for (int n = 0; n < n_subcarriers; ++n)
    {
        CMatrix h(m_r, m_t);
        for (int j = 0; j < m_r; ++j)
            for (int i = 0; i < m_t; ++i)
                h(j, i) = rng.complex_normal(1.0);
        ch.h.push_back(std::move(h));
    }
    return ch;
}

// Received block per subcarrier:
//   Y[n] = sum_{p in window(n)} phi(n,p) H[p] X[p] / sqrt(M_T) + W[n]
// with the p = n term being the useful signal and the rest ICI. W has
// variance `noise_var` per real dimension; no noise is drawn when it is 0.
inline std::vector<CMatrix> apply_channel(const std::vector<CMatrix> &x_all, const ChannelRealization &ch,
                                          const IciKernel &kernel, double noise_var, Rng &rng)
{
    const int n_sc = kernel.n_subcarriers();
    if (static_cast<int>(x_all.size()) != n_sc || static_cast<int>(ch.h.size()) != n_sc)
        throw Error(ErrorKind::LengthMismatch, "apply_channel: expected one block and one channel matrix per subcarrier");
    const double scale = 1.0 / std::sqrt(static_cast<double>(x_all.front().rows()));

    std::vector<CMatrix> hx(n_sc);
    for (int p = 0; p < n_sc; ++p)
        hx[p] = scale * (ch.h[p] * x_all[p]);

    std::vector<CMatrix> y(n_sc);
    for (int n = 0; n < n_sc; ++n)
    {
        CMatrix acc = CMatrix::Zero(hx[n].rows(), hx[n].cols());
        for (const auto &tap : kernel.row(n))
            acc += tap.coeff * hx[tap.source];
        if (noise_var > 0.0)
            for (Eigen::Index r = 0; r < acc.rows(); ++r)
                for (Eigen::Index c = 0; c < acc.cols(); ++c)
                    acc(r, c) += rng.complex_normal(2.0 * noise_var);
        y[n] = std::move(acc);
    }
    return y;
}

inline std::vector<CMatrix> apply_channel(const std::vector<CMatrix> &x_all, const ChannelRealization &ch, double cfo_rel,
                                          double sfo_rel, double noise_var, IciWindow window, Rng &rng)
{
    const IciKernel kernel(static_cast<int>(x_all.size()), cfo_rel, sfo_rel, window);
    return apply_channel(x_all, ch, kernel, noise_var, rng);
}

} // namespace mimo_ofdm

#endif // MIMO_OFDM_CHANNEL_HPP
