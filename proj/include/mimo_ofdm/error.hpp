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


#ifndef MIMO_OFDM_ERROR_HPP
#define MIMO_OFDM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace mimo_ofdm
{

enum class ErrorKind
{
    EtaMismatch,
    UnsupportedScheme,
    BadDimension,
    LengthMismatch,
    NonPositiveVariance,
    SingularMatrix,
    ZeroColumn,
    WindowTooLarge,
    InsufficientData,
    ParseError,
    IoError
};

constexpr std::string_view to_string(ErrorKind k)
{
    switch (k)
    {
    case ErrorKind::EtaMismatch: return "EtaMismatch";
    case ErrorKind::UnsupportedScheme: return "UnsupportedScheme";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::ZeroColumn: return "ZeroColumn";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

// All library failures are reported through this one exception type; `kind()` tells them apart.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Configuration problems map to CLI exit code 2.
    bool is_config_error() const noexcept
    {
        return kind_ == ErrorKind::EtaMismatch || kind_ == ErrorKind::UnsupportedScheme ||
               kind_ == ErrorKind::BadDimension || kind_ == ErrorKind::ParseError ||
               kind_ == ErrorKind::WindowTooLarge;
    }

private:
    ErrorKind kind_;
};

} // namespace mimo_ofdm

#endif // MIMO_OFDM_ERROR_HPP
