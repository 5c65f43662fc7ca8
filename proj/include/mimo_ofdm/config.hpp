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


#ifndef MIMO_OFDM_CONFIG_HPP
#define MIMO_OFDM_CONFIG_HPP

#include "error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mimo_ofdm
{

enum class Scheme
{
    Alamouti,
    VBlast,
    Golden,
    HassibiLD
};

enum class CsiMode
{
    EquivalentChannel, // receiver knows phi(n,n) * H[n]
    ChannelOnly        // receiver knows H[n] only
};

inline std::string to_string(Scheme s)
{
    switch (s)
    {
    case Scheme::Alamouti: return "alamouti";
    case Scheme::VBlast: return "vblast";
    case Scheme::Golden: return "golden";
    case Scheme::HassibiLD: return "hassibi_ld";
    }
    return "unknown";
}

inline Scheme parse_scheme(const std::string &name)
{
    if (name == "alamouti") return Scheme::Alamouti;
    if (name == "vblast") return Scheme::VBlast;
    if (name == "golden") return Scheme::Golden;
    if (name == "hassibi_ld" || name == "ld") return Scheme::HassibiLD;
    throw Error(ErrorKind::UnsupportedScheme, "scheme: '" + name + "' (expected alamouti, vblast, golden, hassibi_ld)");
}

inline std::string to_string(CsiMode m)
{
    return m == CsiMode::EquivalentChannel ? "equivalent_channel" : "channel_only";
}

inline CsiMode parse_csi_mode(const std::string &name)
{
    if (name == "equivalent_channel") return CsiMode::EquivalentChannel;
    if (name == "channel_only") return CsiMode::ChannelOnly;
    throw Error(ErrorKind::ParseError, "csi_mode: '" + name + "' (expected equivalent_channel or channel_only)");
}

struct CodeRate
{
    int num = 1;
    int den = 2;

    double value() const { return static_cast<double>(num) / den; }
    bool operator==(const CodeRate &) const = default;
};

inline std::string to_string(CodeRate r) { return std::to_string(r.num) + "/" + std::to_string(r.den); }

inline CodeRate parse_code_rate(const std::string &text)
{
    const auto slash = text.find('/');
    try
    {
        if (slash != std::string::npos)
            return {std::stoi(text.substr(0, slash)), std::stoi(text.substr(slash + 1))};
    }
    catch (const std::exception &)
    {
    }
    throw Error(ErrorKind::ParseError, "code_rate: '" + text + "' (expected e.g. \"3/4\")");
}

// Span of the ICI sum: every source subcarrier, or the 2K+1 nearest (circularly).
struct IciWindow
{
    std::optional<int> half_width;

    static IciWindow full() { return {}; }
    static IciWindow truncated(int k) { return {k}; }
    bool is_full() const { return !half_width.has_value(); }
    bool operator==(const IciWindow &) const = default;
};

inline std::string to_string(const IciWindow &w)
{
    return w.is_full() ? "full" : "truncated:" + std::to_string(*w.half_width);
}

inline IciWindow parse_ici_window(const std::string &text)
{
    if (text == "full")
        return IciWindow::full();
    const std::string prefix = "truncated:";
    if (text.rfind(prefix, 0) == 0)
    {
        try
        {
            return IciWindow::truncated(std::stoi(text.substr(prefix.size())));
        }
        catch (const std::exception &)
        {
        }
    }
    throw Error(ErrorKind::ParseError, "ici_window: '" + text + "' (expected \"full\" or \"truncated:K\")");
}

// Block shape fixed by a space-time scheme: Q symbols spread over T channel uses.
struct SchemeShape
{
    int q = 0;
    int t = 0;
    double rate() const { return static_cast<double>(q) / t; }
};

inline SchemeShape scheme_shape(Scheme s, int m_t)
{
    switch (s)
    {
    case Scheme::Alamouti: return {2, 2};
    case Scheme::VBlast: return {m_t, 1};
    case Scheme::Golden: return {4, 2};
    case Scheme::HassibiLD: return {4, 2};
    }
    throw Error(ErrorKind::UnsupportedScheme, "scheme");
}

// One entry of a scheme sweep. Each scheme needs its own modulation to hit the target efficiency.
struct SchemeVariant
{
    Scheme scheme = Scheme::Golden;
    int bits_per_symbol = 4;
    CodeRate code_rate{3, 4};
    bool operator==(const SchemeVariant &) const = default;
};

struct Impairment
{
    double cfo_rel = 0.0;
    double sfo_rel = 0.0;
    bool operator==(const Impairment &) const = default;
};

struct SystemConfig
{
    int m_t = 2;
    int m_r = 2;
    int n_subcarriers = 64;
    Scheme scheme = Scheme::Golden;
    int bits_per_symbol = 4;
    CodeRate code_rate{3, 4};
    double eta_target = 6.0;
    double cfo_rel = 0.0; // N * dF * Ts
    double sfo_rel = 0.0; // N * dT / Ts
    IciWindow ici_window = IciWindow::full();
    CsiMode csi_mode = CsiMode::EquivalentChannel;
    int n_iterations = 3;
    std::vector<double> ebn0_grid_db{0, 4, 8, 12, 16, 20, 24};
    std::vector<double> target_bers{1e-3};
    std::uint64_t seed = 1;
    long min_error_events = 200;
    long max_frames = 50000;

    // Optional sweep axes; empty means "use the single values above".
    std::vector<SchemeVariant> schemes;
    std::vector<Impairment> impairments;

    // Filled by validate().
    int q = 0;
    int t = 0;
    double st_rate = 0.0;
    double eta = 0.0;

    bool operator==(const SystemConfig &) const = default;

    int frame_coded_bits() const { return n_subcarriers * q * bits_per_symbol; }
    int frame_symbols() const { return n_subcarriers * q; }
};

namespace detail
{
inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int puncture_outputs_per_period(CodeRate r)
{
    if (r == CodeRate{1, 2}) return 2;
    if (r == CodeRate{2, 3}) return 3;
    if (r == CodeRate{3, 4}) return 4;
    return 0;
}
} // namespace detail

inline constexpr int kConstraintLength = 7;

// Checks every invariant and fills in the scheme-derived fields.
inline SystemConfig validate(SystemConfig c)
{
    if (c.m_t < 1)
        throw Error(ErrorKind::BadDimension, "m_t: must be >= 1, got " + std::to_string(c.m_t));
    if (c.m_r < 1)
        throw Error(ErrorKind::BadDimension, "m_r: must be >= 1, got " + std::to_string(c.m_r));
    if (c.scheme != Scheme::VBlast && c.m_t != 2)
        throw Error(ErrorKind::BadDimension, "m_t: scheme " + to_string(c.scheme) + " needs m_t = 2, got " + std::to_string(c.m_t));
    if (c.n_subcarriers < 2 || !detail::is_power_of_two(c.n_subcarriers))
        throw Error(ErrorKind::BadDimension, "n_subcarriers: must be a power of two >= 2, got " + std::to_string(c.n_subcarriers));
    if (c.bits_per_symbol < 2 || c.bits_per_symbol > 8 || c.bits_per_symbol % 2 != 0)
        throw Error(ErrorKind::BadDimension, "bits_per_symbol: must be 2, 4, 6 or 8, got " + std::to_string(c.bits_per_symbol));
    const int period_out = detail::puncture_outputs_per_period(c.code_rate);
    if (period_out == 0)
        throw Error(ErrorKind::BadDimension, "code_rate: must be 1/2, 2/3 or 3/4, got " + to_string(c.code_rate));
    if (!std::isfinite(c.cfo_rel))
        throw Error(ErrorKind::BadDimension, "cfo_rel: must be finite");
    if (!std::isfinite(c.sfo_rel) || std::abs(c.sfo_rel) > 1.0)
        throw Error(ErrorKind::BadDimension, "sfo_rel: |sfo_rel| must be <= 1, got " + std::to_string(c.sfo_rel));
    if (!c.ici_window.is_full())
    {
        const int k = *c.ici_window.half_width;
        if (k < 0)
            throw Error(ErrorKind::BadDimension, "ici_window: half width must be >= 0");
        if (2 * k + 1 > c.n_subcarriers)
            throw Error(ErrorKind::WindowTooLarge, "ici_window: 2K+1 = " + std::to_string(2 * k + 1) +
                                                      " exceeds n_subcarriers = " + std::to_string(c.n_subcarriers));
    }
    if (c.n_iterations < 1)
        throw Error(ErrorKind::BadDimension, "n_iterations: must be >= 1");
    if (c.min_error_events < 1)
        throw Error(ErrorKind::BadDimension, "min_error_events: must be >= 1");
    if (c.max_frames < 1)
        throw Error(ErrorKind::BadDimension, "max_frames: must be >= 1");
    for (double b : c.target_bers)
        if (!(b > 0.0 && b < 1.0))
            throw Error(ErrorKind::BadDimension, "target_bers: values must lie in (0, 1)");

    const SchemeShape shape = scheme_shape(c.scheme, c.m_t);
    c.q = shape.q;
    c.t = shape.t;
    c.st_rate = shape.rate();
    c.eta = c.bits_per_symbol * c.code_rate.value() * c.st_rate;
    if (std::abs(c.eta - c.eta_target) > 1e-9)
        throw Error(ErrorKind::EtaMismatch, "eta = B*R*L = " + std::to_string(c.bits_per_symbol) + "*" + to_string(c.code_rate) +
                                                "*" + std::to_string(c.st_rate) + " = " + std::to_string(c.eta) +
                                                ", eta_target = " + std::to_string(c.eta_target));

    // The punctured, zero-tailed trellis must fill the frame exactly.
    const long coded = static_cast<long>(c.frame_coded_bits());
    if (coded % period_out != 0)
        throw Error(ErrorKind::BadDimension, "code_rate: frame of " + std::to_string(coded) +
                                                 " coded bits is not a whole number of puncturing periods");
    const long steps = coded / period_out * c.code_rate.num;
    if (steps <= kConstraintLength - 1)
        throw Error(ErrorKind::BadDimension, "n_subcarriers: frame too short for the code tail");

    for (const auto &v : c.schemes)
    {
        SystemConfig sub = c;
        sub.schemes.clear();
        sub.impairments.clear();
        sub.scheme = v.scheme;
        sub.bits_per_symbol = v.bits_per_symbol;
        sub.code_rate = v.code_rate;
        validate(sub);
    }
    for (const auto &imp : c.impairments)
    {
        SystemConfig sub = c;
        sub.schemes.clear();
        sub.impairments.clear();
        sub.cfo_rel = imp.cfo_rel;
        sub.sfo_rel = imp.sfo_rel;
        validate(sub);
    }
    return c;
}

// Information bits carried by one frame (zero tail excluded).
inline int frame_info_bits(const SystemConfig &c)
{
    const int period_out = detail::puncture_outputs_per_period(c.code_rate);
    return c.frame_coded_bits() / period_out * c.code_rate.num - (kConstraintLength - 1);
}

// Noise variance per real dimension. With unit-energy constellations and
// unit mean received power per antenna per channel use, L*B*R information
// bits share Es = 1, so N0 = 1 / (L*B*R * Eb/N0) and sigma^2 = N0 / 2.
inline double derived_noise_variance(const SystemConfig &c, double ebn0_db)
{
    if (std::isinf(ebn0_db) && ebn0_db > 0)
        return 0.0;
    const double bits = c.st_rate * c.bits_per_symbol * c.code_rate.value();
    return 1.0 / (2.0 * bits * std::pow(10.0, ebn0_db / 10.0));
}

// ---- JSON ------------------------------------------------------------------

inline nlohmann::json render_config(const SystemConfig &c)
{
    nlohmann::json j;
    j["m_t"] = c.m_t;
    j["m_r"] = c.m_r;
    j["n_subcarriers"] = c.n_subcarriers;
    j["scheme"] = to_string(c.scheme);
    j["bits_per_symbol"] = c.bits_per_symbol;
    j["code_rate"] = to_string(c.code_rate);
    j["eta_target"] = c.eta_target;
    j["cfo_rel"] = c.cfo_rel;
    j["sfo_rel"] = c.sfo_rel;
    j["ici_window"] = to_string(c.ici_window);
    j["csi_mode"] = to_string(c.csi_mode);
    j["n_iterations"] = c.n_iterations;
    j["ebn0_grid_db"] = c.ebn0_grid_db;
    j["target_bers"] = c.target_bers;
    j["seed"] = c.seed;
    j["min_error_events"] = c.min_error_events;
    j["max_frames"] = c.max_frames;
    if (!c.schemes.empty())
    {
        auto &arr = j["schemes"] = nlohmann::json::array();
        for (const auto &v : c.schemes)
            arr.push_back({{"scheme", to_string(v.scheme)}, {"bits_per_symbol", v.bits_per_symbol}, {"code_rate", to_string(v.code_rate)}});
    }
    if (!c.impairments.empty())
    {
        auto &arr = j["impairments"] = nlohmann::json::array();
        for (const auto &imp : c.impairments)
            arr.push_back({{"cfo_rel", imp.cfo_rel}, {"sfo_rel", imp.sfo_rel}});
    }
    return j;
}

namespace detail
{
template <typename T>
void read_field(const nlohmann::json &j, const char *key, T &out)
{
    if (!j.contains(key))
        return;
    try
    {
        out = j.at(key).get<T>();
    }
    catch (const nlohmann::json::exception &e)
    {
        throw Error(ErrorKind::ParseError, std::string(key) + ": " + e.what());
    }
}

inline CodeRate read_code_rate(const nlohmann::json &v)
{
    if (v.is_string())
        return parse_code_rate(v.get<std::string>());
    throw Error(ErrorKind::ParseError, "code_rate: expected a string such as \"3/4\"");
}
} // namespace detail

// Missing keys keep their defaults; unknown keys are rejected.
inline SystemConfig parse_config(const nlohmann::json &j)
{
    static const char *known[] = {"m_t", "m_r", "n_subcarriers", "scheme", "bits_per_symbol", "code_rate", "eta_target",
                                  "cfo_rel", "sfo_rel", "ici_window", "csi_mode", "n_iterations", "ebn0_grid_db",
                                  "target_bers", "seed", "min_error_events", "max_frames", "schemes", "impairments"};
    if (!j.is_object())
        throw Error(ErrorKind::ParseError, "config: top level must be a JSON object");
    for (const auto &[key, _] : j.items())
    {
        bool ok = false;
        for (const char *k : known)
            ok = ok || key == k;
        if (!ok)
            throw Error(ErrorKind::ParseError, "config: unknown key '" + key + "'");
    }

    SystemConfig c;
    detail::read_field(j, "m_t", c.m_t);
    detail::read_field(j, "m_r", c.m_r);
    detail::read_field(j, "n_subcarriers", c.n_subcarriers);
    detail::read_field(j, "bits_per_symbol", c.bits_per_symbol);
    detail::read_field(j, "eta_target", c.eta_target);
    detail::read_field(j, "cfo_rel", c.cfo_rel);
    detail::read_field(j, "sfo_rel", c.sfo_rel);
    detail::read_field(j, "n_iterations", c.n_iterations);
    detail::read_field(j, "ebn0_grid_db", c.ebn0_grid_db);
    detail::read_field(j, "target_bers", c.target_bers);
    detail::read_field(j, "seed", c.seed);
    detail::read_field(j, "min_error_events", c.min_error_events);
    detail::read_field(j, "max_frames", c.max_frames);

    std::string text;
    if (j.contains("scheme"))
    {
        detail::read_field(j, "scheme", text);
        c.scheme = parse_scheme(text);
    }
    if (j.contains("code_rate"))
        c.code_rate = detail::read_code_rate(j.at("code_rate"));
    if (j.contains("ici_window"))
    {
        detail::read_field(j, "ici_window", text);
        c.ici_window = parse_ici_window(text);
    }
    if (j.contains("csi_mode"))
    {
        detail::read_field(j, "csi_mode", text);
        c.csi_mode = parse_csi_mode(text);
    }
    if (j.contains("schemes"))
    {
        for (const auto &item : j.at("schemes"))
        {
            SchemeVariant v;
            v.scheme = parse_scheme(item.at("scheme").get<std::string>());
            detail::read_field(item, "bits_per_symbol", v.bits_per_symbol);
            if (item.contains("code_rate"))
                v.code_rate = detail::read_code_rate(item.at("code_rate"));
            c.schemes.push_back(v);
        }
    }
    if (j.contains("impairments"))
    {
        for (const auto &item : j.at("impairments"))
        {
            Impairment imp;
            detail::read_field(item, "cfo_rel", imp.cfo_rel);
            detail::read_field(item, "sfo_rel", imp.sfo_rel);
            c.impairments.push_back(imp);
        }
    }
    return c;
}

// Applies one `key=value` override to a JSON config document. The value is
// read as JSON when it parses as JSON, otherwise taken as a plain string.
inline void apply_override(nlohmann::json &doc, const std::string &assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw Error(ErrorKind::ParseError, "--set: expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    auto parsed = nlohmann::json::parse(value, nullptr, false);
    doc[key] = parsed.is_discarded() ? nlohmann::json(value) : parsed;
}

// MIMO_SIM_SEED, when set, replaces the seed.
inline void apply_env_overrides(nlohmann::json &doc)
{
    if (const char *s = std::getenv("MIMO_SIM_SEED"))
    {
        try
        {
            doc["seed"] = std::stoull(s);
        }
        catch (const std::exception &)
        {
            throw Error(ErrorKind::ParseError, std::string("MIMO_SIM_SEED: not an unsigned integer: '") + s + "'");
        }
    }
}

// Named starting points; file contents and --set overrides are applied on top.
inline nlohmann::json preset(const std::string &name)
{
    if (name == "desk")
        return {{"n_subcarriers", 64}, {"ici_window", "full"}, {"max_frames", 20000}};
    if (name == "paper")
        return {{"n_subcarriers", 2048}, {"ici_window", "truncated:64"}, {"max_frames", 50000}};
    throw Error(ErrorKind::ParseError, "preset: '" + name + "' (expected desk or paper)");
}

} // namespace mimo_ofdm

#endif // MIMO_OFDM_CONFIG_HPP
