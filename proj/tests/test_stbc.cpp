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

#include <mimo_ofdm/rng.hpp>
#include <mimo_ofdm/stbc.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace mimo_ofdm;
using namespace std::complex_literals;

namespace
{
constexpr Scheme kSchemes[] = {Scheme::Alamouti, Scheme::VBlast, Scheme::Golden, Scheme::HassibiLD};

CVector random_symbols(Rng &rng, int q)
{
    CVector s(q);
    for (int k = 0; k < q; ++k)
        s[k] = rng.complex_normal(1.0);
    return s;
}

CMatrix random_channel(Rng &rng, int m_r, int m_t)
{
    CMatrix h(m_r, m_t);
    for (int j = 0; j < m_r; ++j)
        for (int i = 0; i < m_t; ++i)
            h(j, i) = rng.complex_normal(1.0);
    return h;
}

// Complex stacking written out entry by entry, independent of stack().
RVector stack_oracle(const CMatrix &x)
{
    std::vector<double> v;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c)
        {
            v.push_back(std::real(x(r, c)));
            v.push_back(std::imag(x(r, c)));
        }
    return Eigen::Map<RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}
} // namespace

TEST_CASE("stack/unstack round trip and layout", "[stbc]")
{
    CMatrix x(2, 2);
    x << 1.0 + 2i, 3.0 + 4i, 5.0 + 6i, 7.0 + 8i;
    const RVector v = stack(x);
    RVector expected(8);
    expected << 1, 2, 3, 4, 5, 6, 7, 8;
    CHECK(v == expected);
    CHECK(unstack(v, 2, 2) == x);
    CHECK_THROWS_AS(unstack(v, 3, 2), Error);
}

TEST_CASE("dispersion matrices have the scheme shape and the power convention", "[stbc]")
{
    Rng rng(1);
    for (Scheme s : kSchemes)
    {
        const auto d = dispersion_matrix(s, 2);
        const SchemeShape shape = scheme_shape(s, 2);
        CHECK(d.f.rows() == 2 * 2 * shape.t);
        CHECK(d.f.cols() == 2 * shape.q);
        // E||X||^2 = M_T T for unit-energy symbols: (1/2) ||F||_F^2 per unit complex symbol
        CHECK(0.5 * d.f.squaredNorm() == Catch::Approx(2.0 * shape.t).epsilon(1e-12));
        for (int u = 0; u < d.f.cols(); ++u)
            CHECK_FALSE(d.f.col(u).isZero());

        // Monte Carlo check of the same convention with QPSK-like unit symbols
        double energy = 0.0;
        for (int k = 0; k < 20000; ++k)
        {
            CVector sym(shape.q);
            for (int i = 0; i < shape.q; ++i)
                sym[i] = std::polar(1.0, 2.0 * M_PI * rng.uniform());
            energy += st_encode(sym, d).squaredNorm();
        }
        CHECK(energy / 20000 == Catch::Approx(2.0 * shape.t).epsilon(0.02));
    }
}

TEST_CASE("Alamouti encoding", "[stbc]")
{
    const auto d = dispersion_matrix(Scheme::Alamouti);
    CVector s(2);
    s << 1.0, 1i;
    const CMatrix x = st_encode(s, d);
    CMatrix expected(2, 2);
    expected << 1.0, 1i, 1i, 1.0; // column t = 2 is (-s2*, s1*)
    CHECK((x - expected).norm() < 1e-12);

    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial)
    {
        const CVector r = random_symbols(rng, 2);
        CMatrix a(2, 2);
        a << r[0], -std::conj(r[1]), r[1], std::conj(r[0]);
        CHECK((st_encode(r, d) - a).norm() < 1e-12);
    }
}

TEST_CASE("VBLAST routes one symbol per antenna", "[stbc]")
{
    for (int m_t : {1, 2, 4})
    {
        const auto d = dispersion_matrix(Scheme::VBlast, m_t);
        CHECK(d.f.isApprox(RMatrix::Identity(2 * m_t, 2 * m_t), 1e-14));
    }
    CMatrix h = CMatrix::Identity(2, 2);
    CHECK(stack_channel(h, dispersion_matrix(Scheme::VBlast)).isApprox(RMatrix::Identity(4, 4)));
}

TEST_CASE("Golden code generator", "[stbc]")
{
    const double theta = (1.0 + std::sqrt(5.0)) / 2.0;
    const std::complex<double> alpha = 1.0 + 1i * (1.0 - theta);
    const std::complex<double> alpha_bar = 1.0 + 1i * theta; // 1 + j(1 - theta_bar)
    const auto d = dispersion_matrix(Scheme::Golden);
    CVector s = CVector::Zero(4);
    s[0] = 1.0;
    const CMatrix x = st_encode(s, d);
    // the built-in generator is rescaled to E||X||^2 = 4; unscaled it is (1/sqrt5) diag(alpha, alpha_bar)
    CMatrix expected = CMatrix::Zero(2, 2);
    expected(0, 0) = alpha / std::sqrt(5.0);
    expected(1, 1) = alpha_bar / std::sqrt(5.0);
    const double scale = x.norm() / expected.norm();
    CHECK((x - scale * expected).norm() < 1e-12);
    // the 1/sqrt5 Golden code already has unit energy per symbol, so the rescale is sqrt(M_T T / Q) = 1
    CHECK(scale == Catch::Approx(1.0).epsilon(1e-12));

    // full generator against its textbook form
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial)
    {
        const CVector r = random_symbols(rng, 4);
        const double tb = 1.0 - theta;
        CMatrix g(2, 2);
        g << alpha * (r[0] + r[1] * theta), alpha * (r[2] + r[3] * theta), 1i * alpha_bar * (r[2] + r[3] * tb),
            alpha_bar * (r[0] + r[1] * tb);
        g /= std::sqrt(5.0);
        CHECK((st_encode(r, d) - g).norm() < 1e-12);
    }
}

TEST_CASE("st_encode is linear and rejects wrong lengths", "[stbc][property]")
{
    Rng rng(5);
    for (Scheme sc : kSchemes)
    {
        const auto d = dispersion_matrix(sc);
        CHECK(st_encode(CVector::Zero(d.q), d).isZero());
        for (int trial = 0; trial < 50; ++trial)
        {
            const CVector s1 = random_symbols(rng, d.q), s2 = random_symbols(rng, d.q);
            const double a = rng.gaussian(), b = rng.gaussian();
            const CMatrix lhs = st_encode(a * s1 + b * s2, d);
            const CMatrix rhs = a * st_encode(s1, d) + b * st_encode(s2, d);
            REQUIRE((lhs - rhs).norm() < 1e-12);
        }
        CHECK_THROWS_AS(st_encode(CVector::Zero(d.q + 1), d), Error);
    }
}

TEST_CASE("stacking equivalence: complex H X against G_eq stack(S)", "[stbc][oracle]")
{
    Rng rng(6);
    for (Scheme sc : kSchemes)
    {
        const auto d = dispersion_matrix(sc);
        for (int trial = 0; trial < 200; ++trial)
        {
            const CMatrix h = random_channel(rng, 2, 2);
            const CVector s = random_symbols(rng, d.q);
            const RVector direct = stack_oracle(h * st_encode(s, d));
            const RVector real_model = stack_channel(h, d) * stack_symbols(s);
            REQUIRE((direct - real_model).norm() < 1e-12);
        }
    }
}

TEST_CASE("Alamouti G_eq has orthogonal columns of equal norm", "[stbc]")
{
    Rng rng(7);
    const auto d = dispersion_matrix(Scheme::Alamouti);
    for (int trial = 0; trial < 100; ++trial)
    {
        const CMatrix h = random_channel(rng, 2, 2);
        const RMatrix g = stack_channel(h, d);
        const RMatrix gram = g.transpose() * g;
        const double c = h.squaredNorm();
        REQUIRE(gram.isApprox(c * RMatrix::Identity(4, 4), 1e-12));
    }
}

TEST_CASE("generator files round trip and match the built-ins", "[stbc]")
{
    for (Scheme sc : kSchemes)
    {
        const auto d = dispersion_matrix(sc);
        std::stringstream ss;
        write_generator(ss, d, "provenance line one\nline two");
        const auto back = parse_generator(ss);
        CHECK(back.scheme == d.scheme);
        CHECK(back.q == d.q);
        CHECK(back.t == d.t);
        CHECK((back.f - d.f).norm() < 1e-14);
    }

    const std::filesystem::path dir = std::filesystem::path(MIMO_SOURCE_DIR) / "data" / "generators";
    for (auto [sc, file] : {std::pair{Scheme::Alamouti, "alamouti.txt"}, std::pair{Scheme::VBlast, "vblast.txt"},
                            std::pair{Scheme::Golden, "golden.txt"}, std::pair{Scheme::HassibiLD, "hassibi_ld.txt"}})
    {
        INFO(file);
        const auto loaded = load_generator((dir / file).string());
        CHECK((loaded.f - dispersion_matrix(sc).f).norm() < 1e-12);
    }
}

TEST_CASE("generator parse errors", "[stbc]")
{
    auto parse = [](const std::string &text) {
        std::istringstream in(text);
        return parse_generator(in);
    };
    CHECK_THROWS_AS(parse("scheme golden\nm_t 2\nt 2\n"), Error);
    CHECK_THROWS_AS(parse("scheme alamouti\nm_t 2\nt 1\nq 2\ndim 1\n1 0\n0 0\n"), Error);
    CHECK_THROWS_AS(parse("scheme vblast\nm_t 1\nt 1\nq 1\ndim 1\n1 0\ndim 2\n0 1\nextra"), Error);
    CHECK_THROWS_AS(parse("scheme vblast\nm_t 1\nt 1\nq 1\ndim 1\n0 0\ndim 2\n0 0\n"), Error);
    CHECK_NOTHROW(parse("# comment\nscheme vblast # trailing\nm_t 1\nt 1\nq 1\ndim 1\n1 0\ndim 2\n0 1\n"));
    CHECK_THROWS_AS(load_generator("/nonexistent/gen.txt"), Error);
}
