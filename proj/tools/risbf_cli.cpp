// SPDX-License-Identifier: Apache-2.0
//
// risbf: RIS channel estimation and multi-user passive beamforming
// Copyright (C) 2026 The risbf authors
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

#include "risbf/beamforming.hpp"
#include "risbf/channel.hpp"
#include "risbf/geometry.hpp"
#include "risbf/harness.hpp"
#include "risbf/metrics.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

using namespace risbf;

namespace
{
    OutputFormat format_from(const std::string &s)
    {
        return s == "json" ? OutputFormat::json : OutputFormat::csv;
    }

    // Writes to the file when a path is given, else to stdout
    struct Sink
    {
        explicit Sink(const std::string &path)
        {
            if (!path.empty())
            {
                file = std::make_unique<std::ofstream>(path, std::ios::binary);
                if (!*file)
                    throw std::runtime_error("Cannot open '" + path + "' for writing.");
            }
        }
        std::ostream &stream() { return file ? *file : std::cout; }
        std::unique_ptr<std::ofstream> file;
    };

    std::string num(double x)
    {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", x);
        return buf;
    }

    struct SweepArgs
    {
        std::string config, out, format;
        std::optional<std::uint64_t> seed;
        unsigned threads = 1;
        bool timing = false;
    };

    int run_sweep_command(const SweepArgs &a)
    {
        ExperimentConfig cfg = load_config(a.config);
        if (a.seed)
            cfg.seed = *a.seed;
        if (!a.format.empty())
            cfg.format = format_from(a.format);
        const std::string path = a.out.empty() ? cfg.output_path : a.out;

        const auto records = run_sweep(cfg, a.threads);
        EmitOptions opts;
        opts.format = cfg.format;
        opts.include_timing = a.timing;
        if (path == "-")
            emit_results(records, std::cout, opts);
        else
        {
            write_results(records, path, opts);
            std::cerr << records.size() << " records written to " << path << '\n';
        }
        return 0;
    }

    struct PatternArgs
    {
        std::string config, codeword, out, format, save_codeword;
        std::optional<std::uint64_t> seed;
        double first = -90.0, last = 90.0, step = 0.1;
        unsigned starts = 4;
    };

    int run_pattern_command(const PatternArgs &a)
    {
        const ExperimentConfig cfg = load_config(a.config);
        const RisGeometry &geom = cfg.scenario.geometry;
        const PhaseAlphabet alphabet(int(geom.tau));

        arma::cx_vec theta;
        if (!a.codeword.empty())
        {
            const arma::uvec idx = read_codeword(a.codeword);
            if (idx.n_elem != geom.elements())
                throw std::invalid_argument("Codeword has " + std::to_string(idx.n_elem) + " entries, the RIS has " +
                                            std::to_string(geom.elements()) + ".");
            theta = codeword_from_indices(idx, alphabet);
        }
        else
        {
            // Beamform towards the configured users with perfect channel knowledge
            ScenarioConfig sc = cfg.scenario;
            sc.seed = a.seed.value_or(cfg.seed);
            Rng rng(sc.seed);
            const ChannelRealization ch = draw_scenario(sc, rng);
            BeamformingProblem problem;
            problem.h_d = ch.h_d;
            problem.h = ch.h;
            problem.sigma2 = sc.noise_power;
            problem.alphabet = alphabet;
            problem.t_max = cfg.t_max;
            problem.eig_zero_tol = cfg.eig_zero_tol;
            theta = qtlm(problem, a.starts, rng).theta_best;
            if (!a.save_codeword.empty())
                write_codeword(alphabet_indices(theta, alphabet), a.save_codeword);
        }

        const auto pattern = radiation_pattern(geom, theta, cfg.scenario.bs.azimuth, cfg.scenario.bs.elevation,
                                               azimuth_grid(a.first, a.last, a.step));
        Sink sink(a.out);
        std::ostream &os = sink.stream();
        if (format_from(a.format) == OutputFormat::json)
        {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto &s : pattern)
                arr.push_back({{"azimuth_deg", std::stod(num(s.azimuth_deg))}, {"gain_db", std::stod(num(s.gain_db))}});
            os << arr.dump(2) << '\n';
        }
        else
        {
            os << "azimuth_deg,gain_db\n";
            for (const auto &s : pattern)
                os << num(s.azimuth_deg) << ',' << num(s.gain_db) << '\n';
        }
        for (const auto &lobe : find_lobes(pattern, 6.0))
            std::cerr << "lobe at " << num(lobe.azimuth_deg) << " deg, " << num(lobe.gain_db) << " dB\n";
        return 0;
    }

    struct OracleArgs
    {
        std::string out, format;
        std::uint64_t seed = 1;
        arma::uword n_y = 5, n_z = 2, users = 2, instances = 100, starts = 1;
        int tau = 1;
        double sigma2 = 1.0, direct_power = 1.0;
    };

    int run_oracle_command(const OracleArgs &a)
    {
        if (a.n_y * a.n_z * arma::uword(a.tau) > max_oracle_bits)
            throw std::invalid_argument("Exhaustive search is limited to N * tau <= " + std::to_string(max_oracle_bits) + ".");
        Rng rng(a.seed);
        const arma::uword n = a.n_y * a.n_z;

        nlohmann::json rows = nlohmann::json::array();
        arma::uword within = 0;
        for (arma::uword i = 0; i < a.instances; ++i)
        {
            BeamformingProblem problem;
            problem.sigma2 = a.sigma2;
            problem.alphabet = PhaseAlphabet(a.tau);
            for (arma::uword k = 0; k < a.users; ++k)
            {
                problem.h_d.push_back(complex_normal(rng, a.direct_power));
                problem.h.push_back(complex_normal_vec(rng, n, 1.0));
            }
            const OracleResult best = exhaustive_oracle(problem);
            const QtlmState st = qtlm(problem, a.starts, rng);
            const double se = objective_f1(st.theta_best, problem);
            const double ratio = best.spectral_efficiency > 0.0 ? se / best.spectral_efficiency : 1.0;
            within += ratio >= 0.85;
            rows.push_back({{"instance", i}, {"se_qtlm", se}, {"se_oracle", best.spectral_efficiency}, {"ratio", ratio}});
        }

        Sink sink(a.out);
        std::ostream &os = sink.stream();
        if (format_from(a.format) == OutputFormat::json)
            os << rows.dump(2) << '\n';
        else
        {
            os << "instance,se_qtlm,se_oracle,ratio\n";
            for (const auto &r : rows)
                os << r["instance"].get<arma::uword>() << ',' << num(r["se_qtlm"]) << ',' << num(r["se_oracle"]) << ','
                   << num(r["ratio"]) << '\n';
        }
        std::cerr << within << " of " << a.instances << " instances reach 85% of the optimum\n";
        return 0;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"RIS channel estimation and multi-user passive beamforming"};
    app.require_subcommand(1);

    SweepArgs sw;
    auto *sweep = app.add_subcommand("sweep", "Run a configured sweep and write one record per point and trial");
    sweep->add_option("--config", sw.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seed", sw.seed, "Override the master seed");
    sweep->add_option("--out", sw.out, "Output path, '-' for stdout (default: output.path from the config)");
    sweep->add_option("--format", sw.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sweep->add_option("--threads", sw.threads, "Worker threads")->check(CLI::PositiveNumber);
    sweep->add_flag("--timing", sw.timing, "Add per-record wall-clock seconds (breaks byte-identical output)");

    PatternArgs pa;
    auto *pattern = app.add_subcommand("pattern", "Azimuth radiation pattern of a codeword");
    pattern->add_option("--config", pa.config, "Experiment config supplying geometry and incidence")->required()->check(CLI::ExistingFile);
    pattern->add_option("--codeword", pa.codeword, "Alphabet indices; QTLM on the configured users when omitted")->check(CLI::ExistingFile);
    pattern->add_option("--save-codeword", pa.save_codeword, "Write the computed codeword as a JSON array");
    pattern->add_option("--seed", pa.seed, "Scenario seed for the computed codeword");
    pattern->add_option("--starts", pa.starts, "QTLM random starts for the computed codeword")->check(CLI::PositiveNumber);
    pattern->add_option("--from", pa.first, "First azimuth, degrees");
    pattern->add_option("--to", pa.last, "Last azimuth, degrees");
    pattern->add_option("--step", pa.step, "Azimuth step, degrees")->check(CLI::PositiveNumber);
    pattern->add_option("--out", pa.out, "Output path (default: stdout)");
    pattern->add_option("--format", pa.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    OracleArgs oa;
    auto *oracle = app.add_subcommand("oracle", "Compare QTLM against exhaustive search on small random instances");
    oracle->add_option("--seed", oa.seed, "Instance seed");
    oracle->add_option("--n-y", oa.n_y, "Elements along y")->check(CLI::PositiveNumber);
    oracle->add_option("--n-z", oa.n_z, "Elements along z")->check(CLI::PositiveNumber);
    oracle->add_option("--tau", oa.tau, "Phase bits")->check(CLI::Range(1, 16));
    oracle->add_option("--users", oa.users, "Users per instance")->check(CLI::PositiveNumber);
    oracle->add_option("--instances", oa.instances, "Random instances")->check(CLI::PositiveNumber);
    oracle->add_option("--starts", oa.starts, "QTLM random starts")->check(CLI::PositiveNumber);
    oracle->add_option("--noise", oa.sigma2, "Noise power")->check(CLI::PositiveNumber);
    oracle->add_option("--direct-power", oa.direct_power, "Direct-link variance")->check(CLI::NonNegativeNumber);
    oracle->add_option("--out", oa.out, "Output path (default: stdout)");
    oracle->add_option("--format", oa.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*sweep)
            return run_sweep_command(sw);
        if (*pattern)
            return run_pattern_command(pa);
        if (*oracle)
            return run_oracle_command(oa);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
