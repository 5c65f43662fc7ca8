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

#include <mimo_ofdm/mapping.hpp>
#include <mimo_ofdm/rng.hpp>

#include <bit>
#include <cmath>
#include <set>

using namespace mimo_ofdm;

using Bits = std::vector<std::uint8_t>;

namespace
{
Bits bits_of(unsigned word, int b)
{
    Bits out(b);
    for (int k = 0; k < b; ++k)
        out[k] = (word >> (b - 1 - k)) & 1u;
    return out;
}
} // namespace

TEST_CASE("QPSK mapping", "[mapping]")
{
    const Constellation c(2);
    const double a = 1.0 / std::sqrt(2.0);
    const auto s = c.map(Bits{0, 0, 0, 1, 1, 1, 1, 0});
    REQUIRE(s.size() == 4);
    CHECK(std::abs(s[0] - std::complex<double>(a, a)) < 1e-15);
    CHECK(std::abs(s[1] - std::complex<double>(a, -a)) < 1e-15);
    CHECK(std::abs(s[2] - std::complex<double>(-a, -a)) < 1e-15);
    CHECK(std::abs(s[3] - std::complex<double>(-a, a)) < 1e-15);
    // consecutive labels in the list differ by one bit and by one axis step
    for (int k = 0; k < 4; ++k)
    {
        const auto d = s[(k + 1) % 4] - s[k];
        CHECK(std::min(std::abs(d.real()), std::abs(d.imag())) < 1e-15);
    }
    CHECK_THROWS_AS(c.map(Bits{0, 1, 1}), Error);
}

TEST_CASE("unit energy, distinct points and Gray labelling for every order", "[mapping]")
{
    for (int b : {2, 4, 6, 8})
    {
        const Constellation c(b);
        double energy = 0.0;
        std::set<std::pair<double, double>> points;
        for (unsigned w = 0; w < (1u << b); ++w)
        {
            const auto s = c.map(bits_of(w, b))[0];
            energy += std::norm(s);
            points.insert({s.real(), s.imag()});
        }
        CHECK(energy / (1u << b) == Catch::Approx(1.0).margin(1e-12));
        CHECK(points.size() == (1u << b));

        // adjacent PAM levels on each axis carry labels at Hamming distance 1
        const int m = c.axis_levels();
        std::vector<std::pair<double, int>> axis;
        for (int label = 0; label < m; ++label)
            axis.push_back({c.level(label), label});
        std::sort(axis.begin(), axis.end());
        for (int k = 0; k + 1 < m; ++k)
            CHECK(std::popcount(static_cast<unsigned>(axis[k].second ^ axis[k + 1].second)) == 1);
        CHECK(c.level(0) == axis.back().first); // label 0 on the most positive level
    }
}

TEST_CASE("I axis carries the first B/2 bits", "[mapping]")
{
    const Constellation c(4);
    const auto s = c.map(Bits{0, 0, 1, 0});
    CHECK(s[0].real() == c.level(0));
    CHECK(s[0].imag() == c.level(2));
}

TEST_CASE("soft_map limits", "[mapping]")
{
    for (int b : {2, 4, 8})
    {
        const Constellation c(b);
        const auto flat = soft_map(c, std::vector<double>(3 * b, 0.0));
        for (std::size_t k = 0; k < 3; ++k)
        {
            CHECK(std::abs(flat.mean[k]) < 1e-12);
            CHECK(flat.variance(k) == Catch::Approx(1.0).margin(1e-12));
        }

        Rng rng(b);
        Bits bits(10 * b);
        for (auto &x : bits)
            x = static_cast<std::uint8_t>(rng.bit());
        std::vector<double> hard(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i)
            hard[i] = bits[i] ? -kLlrClip : kLlrClip;
        const auto sure = soft_map(c, hard);
        const auto mapped = c.map(bits);
        for (std::size_t k = 0; k < mapped.size(); ++k)
        {
            CHECK(std::abs(sure.mean[k] - mapped[k]) < 1e-9);
            CHECK(sure.variance(k) < 1e-9);
        }
    }
}

TEST_CASE("soft_map QPSK closed form", "[mapping]")
{
    const Constellation c(2);
    const auto s = soft_map(c, std::vector<double>{2.0, 0.0});
    CHECK(s.mean[0].real() == Catch::Approx(std::tanh(1.0) / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(std::abs(s.mean[0].imag()) < 1e-15);
    CHECK(s.variance(0) == Catch::Approx(1.0 - std::norm(s.mean[0])).epsilon(1e-14));
}

TEST_CASE("demap_axis examples", "[mapping]")
{
    const Constellation c(8);
    SECTION("noiseless estimate on a level reproduces its label, clipped")
    {
        for (int label = 0; label < c.axis_levels(); ++label)
        {
            const auto llr = demap_axis(c, c.level(label), 1.0, 1e-9, {});
            for (int k = 0; k < c.axis_bits(); ++k)
            {
                CHECK((llr[k] > 0) == (c.label_bit(label, k) == 0));
                CHECK(std::abs(llr[k]) == kLlrClip);
            }
        }
    }
    SECTION("zero estimate on the symmetric axis")
    {
        // QPSK: one bit per axis, fully ambiguous at the origin
        const auto qpsk = demap_axis(Constellation(2), 0.0, 1.0, 0.3, {});
        CHECK(std::abs(qpsk[0]) < 1e-12);
        // Gray PAM: mirroring a level flips only the first label bit, so only that
        // bit is balanced at the origin; the others are even in the estimate
        const auto llr = demap_axis(c, 0.0, 1.0, 0.3, {});
        CHECK(std::abs(llr[0]) < 1e-12);
        const auto left = demap_axis(c, -0.37, 1.0, 0.3, {});
        const auto right = demap_axis(c, 0.37, 1.0, 0.3, {});
        CHECK(left[0] == Catch::Approx(-right[0]).margin(1e-12));
        for (int k = 1; k < c.axis_bits(); ++k)
            CHECK(left[k] == Catch::Approx(right[k]).margin(1e-12));
    }
    SECTION("non-positive variance is rejected")
    {
        CHECK_THROWS_AS(demap_axis(c, 0.1, 1.0, 0.0, {}), Error);
        CHECK_THROWS_AS(demap_axis(c, 0.1, 1.0, -1.0, {}), Error);
    }
}

TEST_CASE("4-PAM demapper within the max-log gap of the exact LLR", "[mapping][oracle]")
{
    const Constellation c(4);
    const double est = 0.3, var = 0.5, bias = 1.0;
    const auto llr = demap_axis(c, est, bias, var, {});
    for (int k = 0; k < 2; ++k)
    {
        double num = 0.0, den = 0.0;
        for (int label = 0; label < 4; ++label)
        {
            const double d = est - bias * c.level(label);
            const double w = std::exp(-d * d / (2.0 * var));
            (c.label_bit(label, k) ? den : num) += w;
        }
        const double exact = std::log(num / den);
        // two points per hypothesis: max-log differs by at most log 2
        CHECK(std::abs(llr[k] - exact) <= std::log(2.0) + 1e-12);
        CHECK((llr[k] > 0) == (exact > 0));
    }
}

TEST_CASE("demapper output is extrinsic with respect to its priors", "[mapping][property]")
{
    const Constellation c(4);
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial)
    {
        const double est = rng.gaussian(), var = 0.05 + rng.uniform();
        std::vector<double> priors{3.0 * rng.gaussian(), 3.0 * rng.gaussian()};
        const auto with = demap_axis(c, est, 1.0, var, priors);
        // the full a posteriori LLR is extrinsic + prior; recompute it directly
        for (int k = 0; k < 2; ++k)
        {
            double b0 = -1e300, b1 = -1e300;
            for (int label = 0; label < 4; ++label)
            {
                const double d = est - c.level(label);
                double m = -d * d / (2 * var);
                for (int j = 0; j < 2; ++j)
                    m += c.label_bit(label, j) ? -0.5 * priors[j] : 0.5 * priors[j];
                (c.label_bit(label, k) ? b1 : b0) = std::max(c.label_bit(label, k) ? b1 : b0, m);
            }
            REQUIRE(with[k] == Catch::Approx(clip_llr(b0 - b1 - priors[k])).margin(1e-9));
        }
    }
}

TEST_CASE("clipping never changes a sign", "[mapping][property]")
{
    Rng rng(1);
    for (int i = 0; i < 10000; ++i)
    {
        const double l = 200.0 * rng.gaussian();
        const double c = clip_llr(l);
        REQUIRE(std::abs(c) <= kLlrClip);
        REQUIRE((c > 0) == (l > 0));
        REQUIRE((c < 0) == (l < 0));
    }
}
