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


// Command-line front end: BER sweeps, required-Eb/N0 extraction, generator export.

#include <mimo_ofdm.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace
{

using namespace mimo_ofdm;

nlohmann::json load_document(const std::string &config_path, const std::string &preset_name, const std::vector<std::string> &sets)
{
    nlohmann::json doc = preset_name.empty() ? nlohmann::json::object() : preset(preset_name);
    if (!config_path.empty())
    {
        std::ifstream in(config_path);
        if (!in)
            throw Error(ErrorKind::ParseError, "cannot open config file " + config_path);
        nlohmann::json file;
        try
        {
            file = nlohmann::json::parse(in);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw Error(ErrorKind::ParseError, config_path + ": " + e.what());
        }
        doc.merge_patch(file);
    }
    for (const auto &s : sets)
        apply_override(doc, s);
    apply_env_overrides(doc);
    return doc;
}

int cmd_run(const std::string &config_path, const std::string &preset_name, const std::vector<std::string> &sets,
            const std::string &out_path, unsigned threads, bool no_resume, bool quiet)
{
    const SystemConfig config = validate(parse_config(load_document(config_path, preset_name, sets)));
    if (!config.ici_window.is_full())
    {
        for (const auto &p : expand_sweep(config))
        {
            const IciKernel k(p.config.n_subcarriers, p.config.cfo_rel, p.config.sfo_rel, p.config.ici_window);
            if (k.captured_energy() < 0.99)
                std::fprintf(stderr, "warning: ici_window %s keeps %.2f%% of the ICI energy at cfo_rel=%g sfo_rel=%g\n",
                             to_string(p.config.ici_window).c_str(), 100.0 * k.captured_energy(), p.config.cfo_rel,
                             p.config.sfo_rel);
        }
    }
    SweepOptions opts;
    opts.threads = threads;
    opts.resume = !no_resume;
    if (!quiet)
        opts.on_point = [](const SweepPoint &p, const std::vector<BerRecord> &rows) {
            const auto &last = rows.back();
            std::fprintf(stderr, "%-10s cfo=%-6g sfo=%-6g Eb/N0=%5.1f dB  BER=%.3e (%ld errors, %ld frames, %.1f s)\n",
                         last.scheme.c_str(), p.config.cfo_rel, p.config.sfo_rel, p.ebn0_db, last.ber(), last.bit_errors,
                         last.frames, last.wall_time_s);
        };
    run_sweep(config, out_path, opts);
    return 0;
}

int cmd_required(const std::string &in_path, const std::vector<double> &targets, const std::string &out_path)
{
    const auto records = read_ber_csv(in_path);
    const auto table = required_ebn0_table(records, targets);
    std::ofstream out(out_path);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + out_path);
    write_required_csv(out, table);
    return 0;
}

int cmd_generators(const std::string &dir)
{
    const struct
    {
        Scheme scheme;
        const char *file;
        const char *provenance;
    } entries[] = {
        {Scheme::Alamouti, "alamouti.txt", "Alamouti orthogonal code, X = [[s1, -conj(s2)], [s2, conj(s1)]]."},
        {Scheme::VBlast, "vblast.txt", "Spatial multiplexing (V-BLAST layering), X = [s1; s2], T = 1."},
        {Scheme::Golden, "golden.txt",
         "Golden code (Belfiore, Rekaya, Viterbo, IEEE Trans. IT 51(4), 2005):\n"
         "X = 1/sqrt(5) [[a (s1 + s2 th), a (s3 + s4 th)], [j ab (s3 + s4 thb), ab (s1 + s2 thb)]]\n"
         "th = (1 + sqrt 5) / 2, thb = 1 - th, a = 1 + j (1 - th), ab = 1 + j (1 - thb)."},
        {Scheme::HassibiLD, "hassibi_ld.txt",
         "Linear dispersion code for M = N = T = 2, Q = 4 (Hassibi, Hochwald, IEEE Trans. IT 48(7), 2002)\n"
         "with A_q = B_q = {I, diag(1, -1), [[0, 1], [1, 0]], [[0, 1], [-1, 0]]} / sqrt(2):\n"
         "X = 1/sqrt(2) [[s1 + s2, s3 + s4], [s3 - s4, s1 - s2]]."},
    };
    std::filesystem::create_directories(dir);
    for (const auto &e : entries)
    {
        const std::string path = (std::filesystem::path(dir) / e.file).string();
        std::ofstream out(path);
        if (!out)
            throw Error(ErrorKind::IoError, "cannot write " + path);
        write_generator(out, dispersion_matrix(e.scheme),
                        std::string(e.provenance) + "\nNormalized so that unit-energy symbols give E||X||_F^2 = M_T * T.");
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"MIMO-OFDM CFO/SFO link-level simulator"};
    app.require_subcommand(1);

    std::string config_path, preset_name, out_path, in_path, dir;
    std::vector<std::string> sets;
    std::vector<double> targets;
    unsigned threads = 0;
    bool no_resume = false, quiet = false;

    auto *run = app.add_subcommand("run", "Run a BER sweep and write the results CSV");
    run->add_option("--config", config_path, "JSON config file");
    run->add_option("--preset", preset_name, "Starting preset")->check(CLI::IsMember({"desk", "paper"}));
    run->add_option("--set", sets, "Override a config field, key=value (repeatable)");
    run->add_option("--out", out_path, "Results CSV")->required();
    run->add_option("--threads", threads, "Worker threads (default: all cores)");
    run->add_flag("--no-resume", no_resume, "Recompute every point even if present in --out");
    run->add_flag("--quiet", quiet, "No per-point progress on stderr");

    auto *req = app.add_subcommand("required-ebn0", "Extract the Eb/N0 needed to reach target BERs");
    req->add_option("--in", in_path, "Results CSV from `run`")->required();
    req->add_option("--target", targets, "Target BER (repeatable)")->required();
    req->add_option("--out", out_path, "Output CSV")->required();

    auto *gen = app.add_subcommand("generators", "Write the built-in dispersion generators as text files");
    gen->add_option("--out-dir", dir, "Destination directory")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try
    {
        if (*run)
            return cmd_run(config_path, preset_name, sets, out_path, threads, no_resume, quiet);
        if (*req)
            return cmd_required(in_path, targets, out_path);
        if (*gen)
            return cmd_generators(dir);
    }
    catch (const Error &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_config_error() ? 2 : 1;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
