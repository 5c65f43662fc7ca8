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


#ifndef MIMO_OFDM_LINK_HPP
#define MIMO_OFDM_LINK_HPP

#include "channel.hpp"
#include "coding.hpp"
#include "config.hpp"
#include "mapping.hpp"
#include "rng.hpp"
#include "stbc.hpp"

#include <vector>

namespace mimo_ofdm
{

// Everything derived once from a validated config and shared read-only by
// the transmitter, channel and receiver of every frame.
struct LinkSetup
{
    SystemConfig config;
    DispersionMatrix dispersion;
    Constellation constellation;
    OuterCode outer;
    Interleaver interleaver;
    IciKernel kernel;
    int info_bits;

    explicit LinkSetup(const SystemConfig &validated)
        : config(validated),
          dispersion(dispersion_matrix(validated.scheme, validated.m_t)),
          constellation(validated.bits_per_symbol),
          outer(validated.code_rate),
          interleaver(Interleaver::random(validated.frame_coded_bits(), derive_seed(validated.seed, "interleaver"))),
          kernel(validated.n_subcarriers, validated.cfo_rel, validated.sfo_rel, validated.ici_window),
          info_bits(frame_info_bits(validated))
    {
    }
};

// Transmit side of one frame. Symbol k = n*Q + q is the q-th input of the
// space-time encoder on subcarrier n.
struct TxFrame
{
    Bits info;
    Bits mapped_bits; // interleaved coded bits, in constellation order
    std::vector<CVector> symbols; // per subcarrier, Q entries
    std::vector<CMatrix> blocks;  // per subcarrier, M_T x T
};

inline TxFrame transmit_frame(const LinkSetup &link, Bits info)
{
    TxFrame f;
    f.info = std::move(info);
    const Bits coded = link.outer.encode(f.info);
    f.mapped_bits = link.interleaver.interleave<std::uint8_t>(coded);
    const auto points = link.constellation.map(f.mapped_bits);
    const int q = link.config.q;
    const int n_sc = link.config.n_subcarriers;
    f.symbols.reserve(n_sc);
    f.blocks.reserve(n_sc);
    for (int n = 0; n < n_sc; ++n)
    {
        CVector s(q);
        for (int k = 0; k < q; ++k)
            s[k] = points[static_cast<std::size_t>(n) * q + k];
        f.blocks.push_back(st_encode(s, link.dispersion));
        f.symbols.push_back(std::move(s));
    }
    return f;
}

inline Bits random_bits(Rng &rng, std::size_t n)
{
    Bits b(n);
    for (auto &x : b)
        x = static_cast<std::uint8_t>(rng.bit());
    return b;
}

} // namespace mimo_ofdm

#endif // MIMO_OFDM_LINK_HPP
