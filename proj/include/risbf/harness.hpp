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

#ifndef risbf_harness_H
#define risbf_harness_H

#include "risbf/beamforming.hpp"
#include "risbf/channel.hpp"
#include "risbf/estimation.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace risbf
{
    enum class OutputFormat
    {
        csv,
        json
    };

    struct SweepAxes
    {
        std::vector<arma::uword> pilots;   // Slot counts P
        std::vector<double> tx_power_db;   // Transmit power relative to the link budget
        arma::uword trials = 1;
    };

    struct ExperimentConfig
    {
        ScenarioConfig scenario;
        SweepAxes sweep;
        std::uint64_t seed = 1;
        GampOptions gamp;
        arma::uword direct_slots = 64; // RIS-off frame length for the LS direct-link estimate
        arma::uword t_max = 50;
        arma::uword multi_start = 1;
        double eig_zero_tol = 1e-10;
        std::string output_path = "results.csv";
        OutputFormat format = OutputFormat::csv;

        void validate() const;
    };

    ExperimentConfig parse_config(const nlohmann::json &j);
    ExperimentConfig load_config(const std::string &path);

    struct SweepPoint
    {
        arma::uword pilots = 0;
        double tx_power_db = 0.0;
        arma::uword trial = 0;
    };

    struct ResultRecord
    {
        arma::uword pilots = 0;
        double tx_power_db = 0.0;
        arma::uword trial = 0;
        std::uint64_t seed = 0;
        std::vector<double> p_off_w; // Per-user received power, RIS off
        std::vector<double> p_on_w;  // Per-user received power, RIS configured
        std::vector<double> gain_db;
        double se_off = 0.0;
        double se_on = 0.0;
        double nmse = 0.0;             // NaN when a true cascaded channel is all zeros
        double noise_estimate_w = 0.0; // RxMER-corrected noise fed to the estimator and beamformer
        std::vector<arma::uword> gamp_iterations;
        arma::uword gamp_failures = 0; // Users whose estimate diverged and fell back to a zero channel
        arma::uword qtlm_iterations = 0;
        double wall_clock_s = 0.0;     // Not part of the deterministic output unless requested
    };

    // hash(master seed, sweep coordinates, trial)
    std::uint64_t record_seed(std::uint64_t master, const SweepPoint &point);

    // Cartesian product pilots x tx power x trials, in that nesting order
    std::vector<SweepPoint> sweep_points(const ExperimentConfig &config);

    ResultRecord run_pipeline(const ExperimentConfig &config, const SweepPoint &point, std::uint64_t seed);

    // Records come back in sweep_points order whatever the thread count
    std::vector<ResultRecord> run_sweep(const ExperimentConfig &config, unsigned threads = 1);

    struct EmitOptions
    {
        OutputFormat format = OutputFormat::csv;
        bool include_timing = false;
    };

    std::vector<std::string> csv_columns(bool include_timing = false);

    void emit_results(const std::vector<ResultRecord> &records, std::ostream &out, const EmitOptions &opts = {});
    void write_results(const std::vector<ResultRecord> &records, const std::string &path, const EmitOptions &opts = {});

    nlohmann::json records_to_json(const std::vector<ResultRecord> &records, bool include_timing = false);
    std::vector<ResultRecord> records_from_json(const nlohmann::json &j);

    // Codeword files hold alphabet indices, either one integer per line or a JSON array
    arma::uvec read_codeword(const std::string &path);
    void write_codeword(const arma::uvec &indices, const std::string &path, OutputFormat format = OutputFormat::json);
}

#endif
