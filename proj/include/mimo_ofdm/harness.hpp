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


#ifndef MIMO_OFDM_HARNESS_HPP
#define MIMO_OFDM_HARNESS_HPP

#include "channel.hpp"
#include "config.hpp"
#include "error.hpp"
#include "link.hpp"
#include "receiver.hpp"
#include "rng.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace mimo_ofdm
{

inline constexpr const char *kBerSchema = "mimo-ofdm-ber/1";
inline constexpr const char *kRequiredSchema = "mimo-ofdm-required-ebn0/1";

struct BerRecord
{
    std::string scheme;
    double cfo_rel = 0.0;
    double sfo_rel = 0.0;
    double ebn0_db = 0.0;
    int iteration = 0;
    long bits_simulated = 0;
    long bit_errors = 0;
    long frames = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;

    double ber() const { return bits_simulated ? static_cast<double>(bit_errors) / static_cast<double>(bits_simulated) : 0.0; }

    // Everything except the wall-clock time.
    bool same_result(const BerRecord &o) const
    {
        return std::tie(scheme, cfo_rel, sfo_rel, ebn0_db, iteration, bits_simulated, bit_errors, frames, seed) ==
               std::tie(o.scheme, o.cfo_rel, o.sfo_rel, o.ebn0_db, o.iteration, o.bits_simulated, o.bit_errors, o.frames, o.seed);
    }
};

// ---- Formatting --------------------------------------------------------------

namespace detail
{
inline std::string format_double(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string &s)
{
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorKind::ParseError, "csv: not a number: '" + s + "'");
    return v;
}

inline std::vector<std::string> split_csv(const std::string &line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

// Stable identity of a simulation point, used for seeding and for resume.
inline std::string point_key(const std::string &scheme, double cfo_rel, double sfo_rel, double ebn0_db)
{
    return scheme + "|" + format_double(cfo_rel) + "|" + format_double(sfo_rel) + "|" + format_double(ebn0_db);
}
} // namespace detail

inline const char *ber_csv_header()
{
    return "scheme,cfo_rel,sfo_rel,ebn0_db,iteration,bits_simulated,bit_errors,frames,seed,wall_time_s";
}

inline std::string to_csv_row(const BerRecord &r)
{
    using detail::format_double;
    return r.scheme + "," + format_double(r.cfo_rel) + "," + format_double(r.sfo_rel) + "," + format_double(r.ebn0_db) + "," +
           std::to_string(r.iteration) + "," + std::to_string(r.bits_simulated) + "," + std::to_string(r.bit_errors) + "," +
           std::to_string(r.frames) + "," + std::to_string(r.seed) + "," + format_double(r.wall_time_s);
}

inline void write_ber_csv(std::ostream &os, const std::vector<BerRecord> &records)
{
    os << "# schema: " << kBerSchema << '\n' << ber_csv_header() << '\n';
    for (const auto &r : records)
        os << to_csv_row(r) << '\n';
}

inline std::vector<BerRecord> read_ber_csv(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line) || line != std::string("# schema: ") + kBerSchema)
        throw Error(ErrorKind::ParseError, std::string("csv: expected schema line '# schema: ") + kBerSchema + "'");
    if (!std::getline(is, line) || line != ber_csv_header())
        throw Error(ErrorKind::ParseError, "csv: unexpected column header");
    std::vector<BerRecord> out;
    while (std::getline(is, line))
    {
        if (line.empty())
            continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 10)
            throw Error(ErrorKind::ParseError, "csv: expected 10 columns in '" + line + "'");
        BerRecord r;
        try
        {
            r.scheme = cells[0];
            r.cfo_rel = detail::parse_double(cells[1]);
            r.sfo_rel = detail::parse_double(cells[2]);
            r.ebn0_db = detail::parse_double(cells[3]);
            r.iteration = std::stoi(cells[4]);
            r.bits_simulated = std::stol(cells[5]);
            r.bit_errors = std::stol(cells[6]);
            r.frames = std::stol(cells[7]);
            r.seed = std::stoull(cells[8]);
            r.wall_time_s = detail::parse_double(cells[9]);
        }
        catch (const std::logic_error &)
        {
            throw Error(ErrorKind::ParseError, "csv: malformed row '" + line + "'");
        }
        if (r.bit_errors > r.bits_simulated)
            throw Error(ErrorKind::ParseError, "csv: bit_errors exceeds bits_simulated in '" + line + "'");
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<BerRecord> read_ber_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path);
    return read_ber_csv(in);
}

// ---- Simulation --------------------------------------------------------------

// Seed of the stream that drives one (scheme, impairment, Eb/N0) point.
inline std::uint64_t point_seed(const SystemConfig &c, double ebn0_db)
{
    return derive_seed(c.seed, detail::point_key(to_string(c.scheme), c.cfo_rel, c.sfo_rel, ebn0_db));
}

// Info-bit errors of one frame after each receiver iteration.
inline std::vector<long> simulate_frame(const LinkSetup &link, double noise_var, Rng &rng)
{
    const SystemConfig &cfg = link.config;
    const TxFrame tx = transmit_frame(link, random_bits(rng, static_cast<std::size_t>(link.info_bits)));
    const ChannelRealization ch = draw_channel(rng, cfg.n_subcarriers, cfg.m_r, cfg.m_t);
    const auto y = apply_channel(tx.blocks, ch, link.kernel, noise_var, rng);
    const ReceiveResult rx = iterate_receive(link, y, ch.h, link.kernel.diagonal(), noise_var);
    std::vector<long> errors(rx.decisions.size(), 0);
    for (std::size_t l = 0; l < rx.decisions.size(); ++l)
        for (std::size_t i = 0; i < tx.info.size(); ++i)
            errors[l] += rx.decisions[l][i] != tx.info[i];
    return errors;
}

// Simulates frames until the final iteration has collected min_error_events
// errors or max_frames frames were run. One record per iteration.
inline std::vector<BerRecord> run_point(const LinkSetup &link, double ebn0_db, std::uint64_t seed)
{
    const SystemConfig &cfg = link.config;
    const auto start = std::chrono::steady_clock::now();
    const double noise_var = derived_noise_variance(cfg, ebn0_db);
    Rng rng(seed);
    std::vector<long> errors(cfg.n_iterations, 0);
    long frames = 0;
    while (frames < cfg.max_frames && errors.back() < cfg.min_error_events)
    {
        const auto e = simulate_frame(link, noise_var, rng);
        for (std::size_t l = 0; l < e.size(); ++l)
            errors[l] += e[l];
        ++frames;
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<BerRecord> out;
    for (int l = 0; l < cfg.n_iterations; ++l)
        out.push_back({to_string(cfg.scheme), cfg.cfo_rel, cfg.sfo_rel, ebn0_db, l + 1, frames * link.info_bits, errors[l],
                       frames, seed, elapsed});
    return out;
}

inline std::vector<BerRecord> run_point(const SystemConfig &config, double ebn0_db)
{
    const SystemConfig cfg = validate(config);
    const LinkSetup link(cfg);
    return run_point(link, ebn0_db, point_seed(cfg, ebn0_db));
}

struct SweepPoint
{
    SystemConfig config; // single scheme and impairment, validated
    double ebn0_db = 0.0;
    std::string key() const
    {
        return detail::point_key(to_string(config.scheme), config.cfo_rel, config.sfo_rel, ebn0_db);
    }
};

// Grid order: scheme variant, then impairment, then Eb/N0.
inline std::vector<SweepPoint> expand_sweep(const SystemConfig &config)
{
    const SystemConfig base = validate(config);
    std::vector<SchemeVariant> variants = base.schemes;
    if (variants.empty())
        variants.push_back({base.scheme, base.bits_per_symbol, base.code_rate});
    std::vector<Impairment> impairments = base.impairments;
    if (impairments.empty())
        impairments.push_back({base.cfo_rel, base.sfo_rel});

    std::vector<SweepPoint> points;
    for (const auto &v : variants)
        for (const auto &imp : impairments)
        {
            SystemConfig c = base;
            c.schemes.clear();
            c.impairments.clear();
            c.scheme = v.scheme;
            c.bits_per_symbol = v.bits_per_symbol;
            c.code_rate = v.code_rate;
            c.cfo_rel = imp.cfo_rel;
            c.sfo_rel = imp.sfo_rel;
            c = validate(c);
            for (double e : base.ebn0_grid_db)
                points.push_back({c, e});
        }
    return points;
}

struct SweepOptions
{
    unsigned threads = 0; // 0: hardware concurrency
    bool resume = true;
    std::function<void(const SweepPoint &, const std::vector<BerRecord> &)> on_point;
};

// Runs every grid point not already complete in `out_path`, then rewrites the
// file in grid order. Points are independent, each with its own derived stream.
inline std::vector<BerRecord> run_sweep(const SystemConfig &config, const std::string &out_path, const SweepOptions &opts = {})
{
    const auto points = expand_sweep(config);
    const int n_iter = validate(config).n_iterations;

    std::map<std::string, std::vector<BerRecord>> done;
    if (opts.resume && std::filesystem::exists(out_path))
    {
        for (auto &r : read_ber_csv(out_path))
            done[detail::point_key(r.scheme, r.cfo_rel, r.sfo_rel, r.ebn0_db)].push_back(std::move(r));
        for (auto it = done.begin(); it != done.end();)
        {
            auto &rows = it->second;
            std::sort(rows.begin(), rows.end(), [](const auto &a, const auto &b) { return a.iteration < b.iteration; });
            bool complete = static_cast<int>(rows.size()) == n_iter;
            for (int l = 0; complete && l < n_iter; ++l)
                complete = rows[l].iteration == l + 1;
            it = complete ? std::next(it) : done.erase(it);
        }
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!done.count(points[i].key()))
            todo.push_back(i);

    std::mutex mu;
    {
        // Keep only complete points on disk while new ones are appended.
        std::vector<BerRecord> kept;
        for (const auto &p : points)
            if (auto it = done.find(p.key()); it != done.end())
                kept.insert(kept.end(), it->second.begin(), it->second.end());
        std::ofstream out(out_path, std::ios::trunc);
        if (!out)
            throw Error(ErrorKind::IoError, "cannot write " + out_path);
        write_ber_csv(out, kept);
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto worker = [&] {
        for (std::size_t k = next++; k < todo.size(); k = next++)
        {
            try
            {
                const SweepPoint &p = points[todo[k]];
                const LinkSetup link(p.config);
                auto rows = run_point(link, p.ebn0_db, point_seed(p.config, p.ebn0_db));
                std::lock_guard lock(mu);
                std::ofstream out(out_path, std::ios::app);
                for (const auto &r : rows)
                    out << to_csv_row(r) << '\n';
                if (!out)
                    throw Error(ErrorKind::IoError, "cannot append to " + out_path);
                if (opts.on_point)
                    opts.on_point(p, rows);
                done[p.key()] = std::move(rows);
            }
            catch (...)
            {
                std::lock_guard lock(mu);
                if (!failure)
                    failure = std::current_exception();
                next = todo.size();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(opts.threads ? opts.threads : std::thread::hardware_concurrency(),
                                                               static_cast<unsigned>(std::max<std::size_t>(1, todo.size()))));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n_threads; ++t)
            pool.emplace_back(worker);
        worker();
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<BerRecord> all;
    for (const auto &p : points)
    {
        const auto &rows = done.at(p.key());
        all.insert(all.end(), rows.begin(), rows.end());
    }
    std::ofstream out(out_path, std::ios::trunc);
    write_ber_csv(out, all);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + out_path);
    return all;
}

// ---- Required Eb/N0 ----------------------------------------------------------

enum class RequiredStatus
{
    Value,
    Floor,    // no grid point reaches the target
    BelowGrid // the first grid point already beats the target
};

struct RequiredEbn0Record
{
    std::string scheme;
    double cfo_rel = 0.0;
    double sfo_rel = 0.0;
    double target_ber = 0.0;
    RequiredStatus status = RequiredStatus::Floor;
    double required_ebn0_db = std::numeric_limits<double>::quiet_NaN();
};

// Eb/N0 at which one BER curve first crosses `target_ber`, interpolating
// log10(BER) linearly in dB between the bracketing grid points. A point with
// no errors counts as half an error so that its logarithm stays finite.
inline RequiredEbn0Record required_ebn0(std::vector<BerRecord> curve, double target_ber)
{
    if (curve.size() < 2)
        throw Error(ErrorKind::InsufficientData, "required_ebn0: need at least 2 grid points, got " + std::to_string(curve.size()));
    std::sort(curve.begin(), curve.end(), [](const auto &a, const auto &b) { return a.ebn0_db < b.ebn0_db; });
    RequiredEbn0Record out{curve.front().scheme, curve.front().cfo_rel, curve.front().sfo_rel, target_ber};
    auto log_ber = [](const BerRecord &r) {
        const double errors = r.bit_errors > 0 ? static_cast<double>(r.bit_errors) : 0.5;
        return std::log10(errors / static_cast<double>(r.bits_simulated));
    };
    if (curve.front().ber() <= target_ber)
    {
        out.status = RequiredStatus::BelowGrid;
        return out;
    }
    const double target = std::log10(target_ber);
    for (std::size_t i = 0; i + 1 < curve.size(); ++i)
    {
        if (curve[i].ber() > target_ber && curve[i + 1].ber() <= target_ber)
        {
            const double y0 = log_ber(curve[i]), y1 = log_ber(curve[i + 1]);
            const double x0 = curve[i].ebn0_db, x1 = curve[i + 1].ebn0_db;
            out.status = RequiredStatus::Value;
            out.required_ebn0_db = y1 == y0 ? x1 : x0 + (target - y0) * (x1 - x0) / (y1 - y0);
            return out;
        }
    }
    out.status = RequiredStatus::Floor;
    return out;
}

// One record per (scheme, impairment, target) using each curve's final iteration.
inline std::vector<RequiredEbn0Record> required_ebn0_table(const std::vector<BerRecord> &records,
                                                           const std::vector<double> &targets)
{
    std::vector<std::tuple<std::string, double, double>> order;
    std::map<std::tuple<std::string, double, double>, std::vector<BerRecord>> curves;
    for (const auto &r : records)
    {
        const auto key = std::make_tuple(r.scheme, r.cfo_rel, r.sfo_rel);
        if (!curves.count(key))
            order.push_back(key);
        curves[key].push_back(r);
    }
    std::vector<RequiredEbn0Record> out;
    for (const auto &key : order)
    {
        const auto &rows = curves[key];
        int last = 0;
        for (const auto &r : rows)
            last = std::max(last, r.iteration);
        std::vector<BerRecord> final_rows;
        for (const auto &r : rows)
            if (r.iteration == last)
                final_rows.push_back(r);
        for (double t : targets)
            out.push_back(required_ebn0(final_rows, t));
    }
    return out;
}

inline void write_required_csv(std::ostream &os, const std::vector<RequiredEbn0Record> &records)
{
    os << "# schema: " << kRequiredSchema << '\n' << "scheme,cfo_rel,sfo_rel,target_ber,required_ebn0_db\n";
    for (const auto &r : records)
    {
        os << r.scheme << ',' << detail::format_double(r.cfo_rel) << ',' << detail::format_double(r.sfo_rel) << ','
           << detail::format_double(r.target_ber) << ',';
        switch (r.status)
        {
        case RequiredStatus::Value: os << detail::format_double(r.required_ebn0_db); break;
        case RequiredStatus::Floor: os << "FLOOR"; break;
        case RequiredStatus::BelowGrid: os << "BELOW_GRID"; break;
        }
        os << '\n';
    }
}

} // namespace mimo_ofdm

#endif // MIMO_OFDM_HARNESS_HPP
