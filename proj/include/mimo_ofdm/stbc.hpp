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


#ifndef MIMO_OFDM_STBC_HPP
#define MIMO_OFDM_STBC_HPP

#include "config.hpp"
#include "error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace mimo_ofdm
{

using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Real stacking of a complex matrix: row by row, each entry as (re, im).
// For X (M_T x T) this walks antennas, then time slots.
inline RVector stack(const CMatrix &x)
{
    RVector v(2 * x.size());
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c)
        {
            v[k++] = x(r, c).real();
            v[k++] = x(r, c).imag();
        }
    return v;
}

inline CMatrix unstack(const RVector &v, Eigen::Index rows, Eigen::Index cols)
{
    if (v.size() != 2 * rows * cols)
        throw Error(ErrorKind::LengthMismatch, "unstack: vector length does not match the matrix shape");
    CMatrix x(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c, k += 2)
            x(r, c) = {v[k], v[k + 1]};
    return x;
}

// (Re s1, Im s1, Re s2, Im s2, ...)
inline RVector stack_symbols(const CVector &s) { return stack(CMatrix(s)); }

inline CVector unstack_symbols(const RVector &v) { return unstack(v, v.size() / 2, 1).col(0); }

// Real map F from stacked symbols to stacked transmit block: stack(X) = F * stack(S).
struct DispersionMatrix
{
    Scheme scheme = Scheme::Golden;
    int m_t = 2;
    int t = 2;
    int q = 4;
    RMatrix f; // (2 M_T T) x (2 Q)
};

namespace detail
{
using BlockEncoder = std::function<CMatrix(const CVector &)>;

inline BlockEncoder scheme_encoder(Scheme scheme, int m_t)
{
    using namespace std::complex_literals;
    switch (scheme)
    {
    case Scheme::Alamouti:
        return [](const CVector &s) {
            CMatrix x(2, 2);
            x << s[0], -std::conj(s[1]), s[1], std::conj(s[0]);
            return x;
        };
    case Scheme::VBlast:
        return [m_t](const CVector &s) { return CMatrix(s.head(m_t)); };
    case Scheme::Golden:
        return [](const CVector &s) {
            const double theta = (1.0 + std::sqrt(5.0)) / 2.0;
            const double theta_bar = 1.0 - theta;
            const std::complex<double> alpha = 1.0 + 1i * (1.0 - theta);
            const std::complex<double> alpha_bar = 1.0 + 1i * (1.0 - theta_bar);
            CMatrix x(2, 2);
            x << alpha * (s[0] + s[1] * theta), alpha * (s[2] + s[3] * theta),
                1i * alpha_bar * (s[2] + s[3] * theta_bar), alpha_bar * (s[0] + s[1] * theta_bar);
            return CMatrix(x / std::sqrt(5.0));
        };
    case Scheme::HassibiLD:
        return [](const CVector &s) {
            CMatrix x(2, 2);
            x << s[0] + s[1], s[2] + s[3], s[2] - s[3], s[0] - s[1];
            return CMatrix(x / std::sqrt(2.0));
        };
    }
    throw Error(ErrorKind::UnsupportedScheme, "scheme");
}

// Scales F so that unit-energy symbols give E||X||_F^2 = M_T * T.
inline void normalize(DispersionMatrix &d)
{
    const double energy = 0.5 * d.f.squaredNorm();
    if (!(energy > 0.0))
        throw Error(ErrorKind::BadDimension, "dispersion matrix: all-zero generator");
    d.f *= std::sqrt(static_cast<double>(d.m_t * d.t) / energy);
}
} // namespace detail

// Builds F column by column from the scheme's encoding rule evaluated on unit inputs.
inline DispersionMatrix dispersion_matrix(Scheme scheme, int m_t = 2)
{
    const SchemeShape shape = scheme_shape(scheme, m_t);
    if (scheme != Scheme::VBlast && m_t != 2)
        throw Error(ErrorKind::UnsupportedScheme, to_string(scheme) + " is defined for m_t = 2 only");
    const auto encode = detail::scheme_encoder(scheme, m_t);
    DispersionMatrix d{scheme, m_t, shape.t, shape.q, RMatrix(2 * m_t * shape.t, 2 * shape.q)};
    for (int u = 0; u < 2 * shape.q; ++u)
    {
        CVector s = CVector::Zero(shape.q);
        s[u / 2] = (u % 2 == 0) ? std::complex<double>(1, 0) : std::complex<double>(0, 1);
        d.f.col(u) = stack(encode(s));
    }
    for (int u = 0; u < d.f.cols(); ++u)
        if (d.f.col(u).isZero())
            throw Error(ErrorKind::BadDimension, "dispersion matrix: zero column " + std::to_string(u));
    detail::normalize(d);
    return d;
}

// X = unstack(F * stack(S)).
inline CMatrix st_encode(const CVector &s, const DispersionMatrix &d)
{
    if (s.size() != d.q)
        throw Error(ErrorKind::LengthMismatch, "st_encode: expected " + std::to_string(d.q) + " symbols, got " +
                                                   std::to_string(s.size()));
    return unstack(d.f * stack_symbols(s), d.m_t, d.t);
}

// Real representation G of Y = H X over T slots, built from (2T x 2T) blocks
// G_{j,i} = I_T (x) [[Re h, -Im h], [Im h, Re h]].
inline RMatrix channel_real(const CMatrix &h, int t)
{
    const Eigen::Index m_r = h.rows(), m_t = h.cols();
    RMatrix g = RMatrix::Zero(2 * m_r * t, 2 * m_t * t);
    for (Eigen::Index j = 0; j < m_r; ++j)
        for (Eigen::Index i = 0; i < m_t; ++i)
        {
            const double re = h(j, i).real(), im = h(j, i).imag();
            for (int s = 0; s < t; ++s)
            {
                const Eigen::Index r = 2 * (j * t + s), c = 2 * (i * t + s);
                g(r, c) = re;
                g(r, c + 1) = -im;
                g(r + 1, c) = im;
                g(r + 1, c + 1) = re;
            }
        }
    return g;
}

// G_eq = G * F, so that stack(H X) = G_eq * stack(S).
inline RMatrix stack_channel(const CMatrix &h, const DispersionMatrix &d)
{
    if (h.cols() != d.m_t)
        throw Error(ErrorKind::LengthMismatch, "stack_channel: H has " + std::to_string(h.cols()) + " columns, F expects " +
                                                   std::to_string(d.m_t));
    return channel_real(h, d.t) * d.f;
}

// ---- Generator files ---------------------------------------------------------
//
// Plain text, '#' starts a comment. Header lines `scheme`, `m_t`, `t`, `q`, then
// for every real input dimension u = 1..2Q a line `dim u` followed by M_T rows,
// each holding T (re im) pairs: the block X produced by a unit value on that
// dimension (u odd: real part of s_(u+1)/2, u even: imaginary part).

inline void write_generator(std::ostream &os, const DispersionMatrix &d, const std::string &comment = {})
{
    std::istringstream lines(comment);
    for (std::string line; std::getline(lines, line);)
        os << "# " << line << '\n';
    os << "scheme " << to_string(d.scheme) << "\nm_t " << d.m_t << "\nt " << d.t << "\nq " << d.q << '\n';
    os << std::setprecision(17);
    for (int u = 0; u < 2 * d.q; ++u)
    {
        os << "dim " << u + 1 << '\n';
        const CMatrix x = unstack(d.f.col(u), d.m_t, d.t);
        for (int r = 0; r < d.m_t; ++r)
        {
            for (int c = 0; c < d.t; ++c)
                os << (c ? " " : "") << x(r, c).real() << ' ' << x(r, c).imag();
            os << '\n';
        }
    }
}

inline DispersionMatrix parse_generator(std::istream &is)
{
    std::stringstream clean;
    for (std::string line; std::getline(is, line);)
    {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        clean << line << '\n';
    }
    auto fail = [](const std::string &what) { return Error(ErrorKind::ParseError, "generator file: " + what); };

    DispersionMatrix d;
    std::string key, value;
    for (const char *expected : {"scheme", "m_t", "t", "q"})
    {
        if (!(clean >> key >> value) || key != expected)
            throw fail(std::string("expected '") + expected + "'");
        if (key == "scheme")
            d.scheme = parse_scheme(value);
        else
        {
            const int n = std::stoi(value);
            if (n < 1)
                throw fail(key + " must be >= 1");
            (key == "m_t" ? d.m_t : key == "t" ? d.t : d.q) = n;
        }
    }
    d.f = RMatrix(2 * d.m_t * d.t, 2 * d.q);
    for (int u = 0; u < 2 * d.q; ++u)
    {
        int index = 0;
        if (!(clean >> key >> index) || key != "dim" || index != u + 1)
            throw fail("expected 'dim " + std::to_string(u + 1) + "'");
        CMatrix x(d.m_t, d.t);
        for (int r = 0; r < d.m_t; ++r)
            for (int c = 0; c < d.t; ++c)
            {
                double re = 0, im = 0;
                if (!(clean >> re >> im))
                    throw fail("truncated matrix for dim " + std::to_string(u + 1));
                x(r, c) = {re, im};
            }
        d.f.col(u) = stack(x);
    }
    if (clean >> key)
        throw fail("trailing content '" + key + "'");
    const SchemeShape shape = scheme_shape(d.scheme, d.m_t);
    if (shape.q != d.q || shape.t != d.t)
        throw fail("shape does not match scheme " + to_string(d.scheme));
    detail::normalize(d);
    return d;
}

inline DispersionMatrix load_generator(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open generator file " + path);
    return parse_generator(in);
}

} // namespace mimo_ofdm

#endif // MIMO_OFDM_STBC_HPP
