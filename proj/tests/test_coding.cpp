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


#include <catch_amalgamated.hpp>

#include <mimo_ofdm/coding.hpp>

#include <algorithm>
#include <cmath>
#include <string>

using namespace mimo_ofdm;

namespace
{
// Shift-register convolution over GF(2): c_g[t] = sum_k g_k u[t-k], taps MSB-first.
Bits reference_encode(const Bits &info, int k, const std::vector<unsigned> &gens)
{
    Bits u = info;
    u.insert(u.end(), k - 1, 0);
    Bits out;
    for (std::size_t t = 0; t < u.size(); ++t)
        for (unsigned g : gens)
        {
            int acc = 0;
            for (int d = 0; d < k; ++d)
                if (t >= static_cast<std::size_t>(d) && ((g >> (k - 1 - d)) & 1u))
                    acc ^= u[t - d];
            out.push_back(static_cast<std::uint8_t>(acc));
        }
    return out;
}

Bits from_string(const std::string &s)
{
    Bits b;
    for (char c : s)
        b.push_back(static_cast<std::uint8_t>(c - '0'));
    return b;
}

Llrs noiseless(const Bits &coded, double a)
{
    Llrs l(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i)
        l[i] = coded[i] ? -a : a;
    return l;
}

// Brute force max-log over every zero-tailed codeword of a small code.
struct BruteForce
{
    Llrs app_coded;
    Llrs app_info;
};

BruteForce brute_force(const ConvCode &code, const Llrs &llrs, std::size_t n_info)
{
    const std::size_t n = llrs.size();
    std::vector<double> best0(n, -1e300), best1(n, -1e300), info0(n_info, -1e300), info1(n_info, -1e300);
    for (unsigned word = 0; word < (1u << n_info); ++word)
    {
        Bits info(n_info);
        for (std::size_t i = 0; i < n_info; ++i)
            info[i] = (word >> i) & 1u;
        const Bits c = code.encode(info);
        double metric = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            metric += c[i] ? -0.5 * llrs[i] : 0.5 * llrs[i];
        for (std::size_t i = 0; i < n; ++i)
            (c[i] ? best1[i] : best0[i]) = std::max(c[i] ? best1[i] : best0[i], metric);
        for (std::size_t i = 0; i < n_info; ++i)
            (info[i] ? info1[i] : info0[i]) = std::max(info[i] ? info1[i] : info0[i], metric);
    }
    BruteForce out;
    for (std::size_t i = 0; i < n; ++i)
        out.app_coded.push_back(best0[i] - best1[i]);
    for (std::size_t i = 0; i < n_info; ++i)
        out.app_info.push_back(info0[i] - info1[i]);
    return out;
}
} // namespace

TEST_CASE("DVB mother code matches the reference shift-register encoder", "[coding][oracle]")
{
    const ConvCode code = ConvCode::dvb();
    CHECK(code.n_states() == 64);

    // impulse response reads the generator taps: 171 = 1111001, 133 = 1011011
    Bits impulse{1};
    const Bits r = code.encode(impulse);
    REQUIRE(r.size() == 14);
    std::string g1, g2;
    for (int t = 0; t < 7; ++t)
    {
        g1 += static_cast<char>('0' + r[2 * t]);
        g2 += static_cast<char>('0' + r[2 * t + 1]);
    }
    CHECK(g1 == "1111001");
    CHECK(g2 == "1011011");

    const Bits pattern = from_string("10110000");
    CHECK(code.encode(pattern) == from_string("1110001001010001101100000000"));
    CHECK(code.encode(pattern) == reference_encode(pattern, 7, {0171, 0133}));

    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial)
    {
        Bits info(1 + rng.below(200));
        for (auto &b : info)
            b = static_cast<std::uint8_t>(rng.bit());
        REQUIRE(code.encode(info) == reference_encode(info, 7, {0171, 0133}));
    }
}

TEST_CASE("encoder: zero in, zero out; linear over GF(2)", "[coding][property]")
{
    const OuterCode outer(CodeRate{3, 4});
    const Bits zeros(300, 0);
    const Bits z = outer.encode(zeros);
    CHECK(std::all_of(z.begin(), z.end(), [](auto b) { return b == 0; }));

    Rng rng(9);
    for (CodeRate rate : {CodeRate{1, 2}, CodeRate{2, 3}, CodeRate{3, 4}})
    {
        const OuterCode oc(rate);
        for (int trial = 0; trial < 50; ++trial)
        {
            const std::size_t n = 1 + rng.below(400);
            Bits a(n), b(n), x(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                a[i] = static_cast<std::uint8_t>(rng.bit());
                b[i] = static_cast<std::uint8_t>(rng.bit());
                x[i] = a[i] ^ b[i];
            }
            const Bits ca = oc.encode(a), cb = oc.encode(b), cx = oc.encode(x);
            REQUIRE(ca.size() == cx.size());
            for (std::size_t i = 0; i < cx.size(); ++i)
                REQUIRE(cx[i] == (ca[i] ^ cb[i]));
        }
    }
}

TEST_CASE("puncturing keeps the DVB positions and the right length", "[coding]")
{
    const Puncturer p = Puncturer::dvb(CodeRate{3, 4});
    // mother pairs (X1 Y1)(X2 Y2)(X3 Y3) -> X1 Y1 Y2 X3
    const std::vector<int> mother{10, 11, 20, 21, 30, 31};
    CHECK(p.puncture<int>(mother) == std::vector<int>{10, 11, 21, 30});
    CHECK(Puncturer::dvb(CodeRate{2, 3}).puncture<int>(std::vector<int>{10, 11, 20, 21}) == std::vector<int>{10, 11, 21});

    for (std::size_t info : {10u, 33u, 762u})
    {
        const OuterCode oc(CodeRate{3, 4});
        const std::size_t steps = info + 6;
        CHECK(oc.encode(Bits(info, 1)).size() == p.punctured_length(steps));
    }
    const Llrs d = p.depuncture(std::vector<double>{1, 2, 3, 4}, 3);
    CHECK(d == Llrs{1, 2, 0, 3, 4, 0});
    CHECK_THROWS_AS(p.depuncture(std::vector<double>{1, 2, 3}, 3), Error);
}

TEST_CASE("max-log BCJR equals brute-force max-log on a toy K=3 code", "[coding][oracle]")
{
    const ConvCode toy(3, {07, 05});
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial)
    {
        const std::size_t n_info = 3 + rng.below(6);
        Llrs llrs(2 * (n_info + 2));
        for (auto &l : llrs)
            l = 3.0 * rng.gaussian();
        const SisoOutput dec = siso_decode(toy, llrs);
        const BruteForce bf = brute_force(toy, llrs, n_info);
        for (std::size_t i = 0; i < llrs.size(); ++i)
        {
            REQUIRE(dec.app_coded[i] == Catch::Approx(bf.app_coded[i]).margin(1e-9));
            REQUIRE(dec.extrinsic[i] == Catch::Approx(bf.app_coded[i] - llrs[i]).margin(1e-9));
        }
        for (std::size_t i = 0; i < n_info; ++i)
        {
            REQUIRE(dec.app_info[i] == Catch::Approx(bf.app_info[i]).margin(1e-9));
            if (std::abs(bf.app_info[i]) > 1e-9)
                REQUIRE(dec.info_decisions[i] == (bf.app_info[i] < 0 ? 1 : 0));
        }
    }
}

TEST_CASE("extrinsic output ignores the prior at the same position", "[coding][property]")
{
    const ConvCode toy(3, {07, 05});
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial)
    {
        const std::size_t n_info = 6;
        Llrs llrs(2 * (n_info + 2));
        for (auto &l : llrs)
            l = 2.0 * rng.gaussian();
        const SisoOutput base = siso_decode(toy, llrs);
        const std::size_t i = rng.below(llrs.size());
        Llrs moved = llrs;
        moved[i] += 5.0 * rng.gaussian();
        const SisoOutput shifted = siso_decode(toy, moved);
        REQUIRE(shifted.extrinsic[i] == Catch::Approx(base.extrinsic[i]).margin(1e-9));
    }
}

TEST_CASE("siso_decode on the DVB code", "[coding]")
{
    const ConvCode code = ConvCode::dvb();
    Rng rng(17);
    Bits info(500);
    for (auto &b : info)
        b = static_cast<std::uint8_t>(rng.bit());
    const Bits coded = code.encode(info);

    SECTION("noiseless LLRs decode to the info bits")
    {
        const auto out = siso_decode(code, noiseless(coded, 4.0));
        CHECK(out.info_decisions == info);
    }
    SECTION("no information in gives no information out")
    {
        const auto out = siso_decode(code, Llrs(coded.size(), 0.0));
        CHECK(std::all_of(out.extrinsic.begin(), out.extrinsic.end(), [](double l) { return std::abs(l) < 1e-12; }));
    }
    SECTION("a single confident wrong bit is corrected")
    {
        Llrs l = noiseless(coded, 6.0);
        l[301] = -l[301];
        const auto out = siso_decode(code, l);
        CHECK(out.info_decisions == info);
        CHECK(out.app_coded[301] * (coded[301] ? -1.0 : 1.0) > 0.0);
    }
    SECTION("hard Viterbi agrees with BCJR sign decisions on noiseless input")
    {
        const Llrs l = noiseless(coded, 1.0);
        CHECK(viterbi_decode(code, l) == siso_decode(code, l).info_decisions);
        CHECK(viterbi_decode(code, l) == info);
    }
}

TEST_CASE("Viterbi and BCJR agree on noisy frames", "[coding]")
{
    const ConvCode code = ConvCode::dvb();
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial)
    {
        Bits info(200);
        for (auto &b : info)
            b = static_cast<std::uint8_t>(rng.bit());
        Llrs l = noiseless(code.encode(info), 2.0);
        for (auto &x : l)
            x += 1.5 * rng.gaussian();
        // max-log BCJR info decisions are the ML path when it is unique
        CHECK(viterbi_decode(code, l) == siso_decode(code, l).info_decisions);
    }
}

TEST_CASE("OuterCode round trip for every rate", "[coding]")
{
    Rng rng(2);
    for (CodeRate rate : {CodeRate{1, 2}, CodeRate{2, 3}, CodeRate{3, 4}})
    {
        const OuterCode oc(rate);
        Bits info(762);
        for (auto &b : info)
            b = static_cast<std::uint8_t>(rng.bit());
        const Bits coded = oc.encode(info);
        const auto out = oc.decode(noiseless(coded, 3.0), info.size());
        CHECK(out.info_decisions == info);
        CHECK(out.extrinsic.size() == coded.size());
        CHECK(out.app_coded.size() == coded.size());
    }
}

TEST_CASE("interleaver", "[coding][property]")
{
    const std::size_t n = 1024;
    Rng rng(12);
    Llrs x(n);
    for (auto &v : x)
        v = rng.gaussian();

    const Interleaver id = Interleaver::identity(n);
    CHECK(id.interleave<double>(x) == x);

    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL, 0xdeadbeefULL})
    {
        const Interleaver il = Interleaver::random(n, seed);
        CHECK(il.deinterleave<double>(il.interleave<double>(x)) == x);
        CHECK(il.interleave<double>(il.deinterleave<double>(x)) == x);
        auto sorted = il.permutation();
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == id.permutation());
    }
    CHECK(Interleaver::random(n, 1).permutation() != Interleaver::random(n, 2).permutation());
    CHECK(Interleaver::random(n, 1).permutation() == Interleaver::random(n, 1).permutation());
    CHECK_THROWS_AS(Interleaver::random(n, 1).interleave<double>(Llrs(n - 1)), Error);
    CHECK_THROWS_AS(Interleaver::random(n, 1).deinterleave<double>(Llrs(n + 1)), Error);
}
