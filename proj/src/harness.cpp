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

#include "risbf/harness.hpp"
#include "risbf/metrics.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace risbf
{
    using nlohmann::json;

    namespace
    {
        const double deg = arma::datum::pi / 180.0;

        void check_keys(const json &j, const std::set<std::string> &allowed, const std::string &where)
        {
            if (!j.is_object())
                throw std::invalid_argument("Config section '" + where + "' must be an object.");
            for (const auto &item : j.items())
                if (!allowed.count(item.key()))
                    throw std::invalid_argument("Unknown config key '" + where + "." + item.key() + "'.");
        }

        template <typename T>
        void read(const json &j, const char *key, T &target)
        {
            if (j.contains(key))
                target = j.at(key).get<T>();
        }

        Terminal parse_terminal(const json &j, const std::string &where)
        {
            Terminal t;
            double az = 0.0, el = 90.0;
            read(j, "azimuth_deg", az);
            read(j, "elevation_deg", el);
            read(j, "distance_m", t.distance);
            t.azimuth = az * deg;
            t.elevation = el * deg;
            (void)where;
            return t;
        }

        ScenarioConfig parse_scenario(const json &j)
        {
            check_keys(j, {"geometry", "bs", "users", "bs_paths", "user_paths", "model", "rician_k_db", "wavefront",
                           "bs_link_scale", "user_link_scale", "noise_power_w", "seed"},
                       "scenario");
            ScenarioConfig sc;
            if (j.contains("geometry"))
            {
                const json &g = j.at("geometry");
                check_keys(g, {"n_y", "n_z", "d_y_m", "d_z_m", "wavelength_m", "frequency_hz", "tau"}, "scenario.geometry");
                read(g, "n_y", sc.geometry.n_y);
                read(g, "n_z", sc.geometry.n_z);
                read(g, "d_y_m", sc.geometry.d_y);
                read(g, "d_z_m", sc.geometry.d_z);
                read(g, "tau", sc.geometry.tau);
                if (g.contains("wavelength_m") && g.contains("frequency_hz"))
                    throw std::invalid_argument("Give either wavelength_m or frequency_hz, not both.");
                read(g, "wavelength_m", sc.geometry.wavelength);
                if (g.contains("frequency_hz"))
                    sc.geometry.wavelength = speed_of_light / g.at("frequency_hz").get<double>();
            }
            if (j.contains("bs"))
            {
                check_keys(j.at("bs"), {"azimuth_deg", "elevation_deg", "distance_m"}, "scenario.bs");
                sc.bs = parse_terminal(j.at("bs"), "scenario.bs");
            }
            if (j.contains("users"))
                for (const auto &u : j.at("users"))
                {
                    check_keys(u, {"azimuth_deg", "elevation_deg", "distance_m", "direct_power_w"}, "scenario.users[]");
                    UserConfig uc;
                    uc.position = parse_terminal(u, "scenario.users[]");
                    read(u, "direct_power_w", uc.direct_power);
                    sc.users.push_back(uc);
                }
            read(j, "bs_paths", sc.bs_paths);
            read(j, "user_paths", sc.user_paths);
            read(j, "rician_k_db", sc.rician_k_db);
            read(j, "bs_link_scale", sc.bs_link_scale);
            read(j, "user_link_scale", sc.user_link_scale);
            read(j, "noise_power_w", sc.noise_power);
            read(j, "seed", sc.seed);
            if (j.contains("model"))
            {
                const auto m = j.at("model").get<std::string>();
                if (m == "los")
                    sc.model = PathModel::los;
                else if (m == "rayleigh")
                    sc.model = PathModel::rayleigh;
                else
                    throw std::invalid_argument("scenario.model must be 'los' or 'rayleigh'.");
            }
            if (j.contains("wavefront"))
            {
                const auto w = j.at("wavefront").get<std::string>();
                if (w == "planar")
                    sc.wavefront = Wavefront::planar;
                else if (w == "spherical")
                    sc.wavefront = Wavefront::spherical;
                else
                    throw std::invalid_argument("scenario.wavefront must be 'planar' or 'spherical'.");
            }
            return sc;
        }

        OutputFormat parse_format(const std::string &s)
        {
            if (s == "csv")
                return OutputFormat::csv;
            if (s == "json")
                return OutputFormat::json;
            throw std::invalid_argument("Output format must be 'csv' or 'json'.");
        }

        std::string number(double x)
        {
            if (std::isnan(x))
                return "nan";
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.12g", x);
            return buf;
        }

        // Value as it appears after 12-digit serialization
        double rounded(double x)
        {
            if (!std::isfinite(x))
                return x;
            return std::stod(number(x));
        }

        template <typename T, typename F>
        std::string joined(const std::vector<T> &values, F &&fmt)
        {
            std::string out;
            for (std::size_t i = 0; i < values.size(); ++i)
            {
                if (i)
                    out += ';';
                out += fmt(values[i]);
            }
            return out;
        }

        json rounded_array(const std::vector<double> &values)
        {
            json arr = json::array();
            for (double v : values)
                arr.push_back(rounded(v));
            return arr;
        }

        json json_number(double x)
        {
            if (std::isnan(x))
                return nullptr;
            return rounded(x);
        }

        double number_from_json(const json &j)
        {
            return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
        }

        struct NoiseEstimate
        {
            cx h_d;
            double noise;
        };

        // LS direct link from RIS-off frames plus the RxMER noise correction p_r / RxMER
        NoiseEstimate estimate_off_state(const arma::cx_vec &pilots, cx h_d, double sigma2, Rng &rng)
        {
            const arma::cx_vec off(1, arma::fill::zeros), dummy(1, arma::fill::zeros);
            arma::cx_vec y_off(pilots.n_elem);
            for (arma::uword p = 0; p < pilots.n_elem; ++p)
                y_off(p) = received_signal(off, h_d, dummy, pilots(p), sigma2, rng);

            NoiseEstimate out;
            out.h_d = estimate_direct_ls(pilots, y_off);
            const arma::cx_vec reference = out.h_d * pilots;
            const auto mer = rxmer(y_off, reference);
            if (mer && *mer > 0.0)
                out.noise = corrected_noise(received_power(y_off), *mer);
            else
                out.noise = arma::mean(arma::square(arma::abs(y_off - reference)));
            // A vanishing reference and error leave nothing to measure; keep the estimate positive
            out.noise = std::max(out.noise, sigma2 * 1e-12);
            return out;
        }
    }

    void ExperimentConfig::validate() const
    {
        scenario.validate();
        gamp.validate();
        if (sweep.pilots.empty() || sweep.tx_power_db.empty())
            throw std::invalid_argument("Sweep axes cannot be empty.");
        if (sweep.trials < 1)
            throw std::invalid_argument("Sweep needs at least one trial.");
        for (auto p : sweep.pilots)
            if (p < 1)
                throw std::invalid_argument("Pilot counts must be at least 1.");
        if (direct_slots < 1)
            throw std::invalid_argument("Direct-link estimation needs at least one slot.");
        if (multi_start < 1)
            throw std::invalid_argument("Beamforming needs at least one start.");
    }

    ExperimentConfig parse_config(const json &j)
    {
        check_keys(j, {"seed", "scenario", "sweep", "estimation", "beamforming", "output"}, "root");
        ExperimentConfig cfg;
        read(j, "seed", cfg.seed);
        if (j.contains("scenario"))
            cfg.scenario = parse_scenario(j.at("scenario"));
        if (j.contains("sweep"))
        {
            const json &s = j.at("sweep");
            check_keys(s, {"pilots", "tx_power_db", "trials"}, "sweep");
            read(s, "pilots", cfg.sweep.pilots);
            read(s, "tx_power_db", cfg.sweep.tx_power_db);
            read(s, "trials", cfg.sweep.trials);
        }
        if (j.contains("estimation"))
        {
            const json &e = j.at("estimation");
            check_keys(e, {"direct_slots", "max_iterations", "damping", "tolerance", "initial_sparsity"}, "estimation");
            read(e, "direct_slots", cfg.direct_slots);
            read(e, "max_iterations", cfg.gamp.max_iterations);
            read(e, "damping", cfg.gamp.damping);
            read(e, "tolerance", cfg.gamp.tolerance);
            read(e, "initial_sparsity", cfg.gamp.initial_sparsity);
        }
        if (j.contains("beamforming"))
        {
            const json &b = j.at("beamforming");
            check_keys(b, {"t_max", "multi_start", "eig_zero_tol"}, "beamforming");
            read(b, "t_max", cfg.t_max);
            read(b, "multi_start", cfg.multi_start);
            read(b, "eig_zero_tol", cfg.eig_zero_tol);
        }
        if (j.contains("output"))
        {
            const json &o = j.at("output");
            check_keys(o, {"path", "format"}, "output");
            read(o, "path", cfg.output_path);
            if (o.contains("format"))
                cfg.format = parse_format(o.at("format").get<std::string>());
        }
        cfg.validate();
        return cfg;
    }

    ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("Cannot open config file '" + path + "'.");
        json j;
        try
        {
            in >> j;
        }
        catch (const json::parse_error &e)
        {
            throw std::invalid_argument("Config file '" + path + "' is not valid JSON: " + e.what());
        }
        return parse_config(j);
    }

    std::uint64_t record_seed(std::uint64_t master, const SweepPoint &point)
    {
        return derive_seed(master, {std::uint64_t(point.pilots), std::bit_cast<std::uint64_t>(point.tx_power_db),
                                    std::uint64_t(point.trial)});
    }

    std::vector<SweepPoint> sweep_points(const ExperimentConfig &config)
    {
        std::vector<SweepPoint> points;
        for (auto p : config.sweep.pilots)
            for (double tx : config.sweep.tx_power_db)
                for (arma::uword t = 0; t < config.sweep.trials; ++t)
                    points.push_back({p, tx, t});
        return points;
    }

    ResultRecord run_pipeline(const ExperimentConfig &config, const SweepPoint &point, std::uint64_t seed)
    {
        config.validate();
        const auto start = std::chrono::steady_clock::now();
        const RisGeometry &geom = config.scenario.geometry;
        const double sigma2 = config.scenario.noise_power;
        Rng rng(seed);

        ResultRecord rec;
        rec.pilots = point.pilots;
        rec.tx_power_db = point.tx_power_db;
        rec.trial = point.trial;
        rec.seed = seed;

        // (1) channel draw; transmit power scales every link seen by the receivers
        ChannelRealization truth = draw_scenario(config.scenario, rng);
        const double amplitude = std::sqrt(from_db(point.tx_power_db));
        for (arma::uword k = 0; k < truth.users(); ++k)
        {
            truth.h_d[k] *= amplitude;
            truth.h[k] *= amplitude;
        }
        const arma::uword users = truth.users();

        // (2)-(3) RIS absorbing: LS direct link and corrected noise power per user
        const arma::cx_vec off_pilots(config.direct_slots, arma::fill::ones);
        std::vector<cx> h_d_est(users);
        double noise_sum = 0.0;
        for (arma::uword k = 0; k < users; ++k)
        {
            const NoiseEstimate ne = estimate_off_state(off_pilots, truth.h_d[k], sigma2, rng);
            h_d_est[k] = ne.h_d;
            noise_sum += ne.noise;
        }
        rec.noise_estimate_w = noise_sum / double(users);

        // (4) Rademacher sensing, direct-link removal, EM-GAMP per user
        const SensingPlan plan = generate_sensing_plan(geom, point.pilots, rng);
        const AngularBasis basis(geom);
        std::vector<arma::cx_vec> h_est(users), h_a_true(users), h_a_est(users);
        bool nmse_defined = true;
        for (arma::uword k = 0; k < users; ++k)
        {
            arma::cx_vec y(point.pilots);
            for (arma::uword p = 0; p < point.pilots; ++p)
                y(p) = received_signal(arma::conv_to<arma::cx_vec>::from(plan.reflections.col(p)), truth.h_d[k],
                                       truth.h[k], plan.pilots(p), sigma2, rng);
            const arma::cx_vec measurements = remove_direct(y, h_d_est[k], plan.pilots) % arma::conj(plan.pilots);

            const AngularChannelEstimate est = em_gamp_recover(plan.sensing, measurements, rec.noise_estimate_w, config.gamp);
            rec.gamp_iterations.push_back(est.iterations);
            if (est.status == GampStatus::diverged)
            {
                ++rec.gamp_failures;
                h_a_est[k].zeros(geom.elements());
            }
            else
                h_a_est[k] = est.h_a;
            h_est[k] = basis.inverse(h_a_est[k]);
            h_a_true[k] = basis.forward(truth.h[k]);
            if (arma::norm(h_a_true[k]) == 0.0)
                nmse_defined = false;
        }
        rec.nmse = nmse_defined ? nmse(h_a_true, h_a_est) : std::numeric_limits<double>::quiet_NaN();

        // QTLM on the estimated channels with the corrected noise power
        BeamformingProblem problem;
        problem.h_d = h_d_est;
        problem.h = h_est;
        problem.sigma2 = rec.noise_estimate_w;
        problem.alphabet = PhaseAlphabet(int(geom.tau));
        problem.t_max = config.t_max;
        problem.eig_zero_tol = config.eig_zero_tol;
        const QtlmState st = qtlm(problem, config.multi_start, rng);
        rec.qtlm_iterations = st.iterations;

        // (5) evaluation on the true channels, expected received power incl. noise
        BeamformingProblem actual;
        actual.h_d = truth.h_d;
        actual.h = truth.h;
        actual.sigma2 = sigma2;
        const arma::vec gamma_on = snr_per_user(st.theta_best, actual);
        const arma::vec gamma_off = snr_per_user(arma::cx_vec(geom.elements(), arma::fill::zeros), actual);
        for (arma::uword k = 0; k < users; ++k)
        {
            const double p_off = sigma2 * (1.0 + gamma_off(k));
            const double p_on = sigma2 * (1.0 + gamma_on(k));
            rec.p_off_w.push_back(p_off);
            rec.p_on_w.push_back(p_on);
            rec.gain_db.push_back(power_gain_db(p_on, p_off));
        }
        rec.se_off = spectral_efficiency(gamma_off);
        rec.se_on = spectral_efficiency(gamma_on);
        rec.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return rec;
    }

    std::vector<ResultRecord> run_sweep(const ExperimentConfig &config, unsigned threads)
    {
        config.validate();
        const auto points = sweep_points(config);
        std::vector<ResultRecord> records(points.size());
        threads = std::max(1u, std::min<unsigned>(threads, unsigned(points.size())));

        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&]() {
            for (std::size_t i = next++; i < points.size(); i = next++)
            {
                try
                {
                    records[i] = run_pipeline(config, points[i], record_seed(config.seed, points[i]));
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        };

        if (threads == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t)
                pool.emplace_back(worker);
            for (auto &th : pool)
                th.join();
        }
        if (failure)
            std::rethrow_exception(failure);
        return records;
    }

    std::vector<std::string> csv_columns(bool include_timing)
    {
        std::vector<std::string> cols = {"pilots", "tx_power_db", "trial", "seed", "users", "p_off_w", "p_on_w",
                                         "gain_db", "se_off", "se_on", "nmse", "noise_estimate_w", "gamp_iterations",
                                         "gamp_failures", "qtlm_iterations"};
        if (include_timing)
            cols.push_back("wall_clock_s");
        return cols;
    }

    nlohmann::json records_to_json(const std::vector<ResultRecord> &records, bool include_timing)
    {
        json arr = json::array();
        for (const auto &r : records)
        {
            json o;
            o["pilots"] = r.pilots;
            o["tx_power_db"] = rounded(r.tx_power_db);
            o["trial"] = r.trial;
            o["seed"] = r.seed;
            o["users"] = r.p_on_w.size();
            o["p_off_w"] = rounded_array(r.p_off_w);
            o["p_on_w"] = rounded_array(r.p_on_w);
            o["gain_db"] = rounded_array(r.gain_db);
            o["se_off"] = rounded(r.se_off);
            o["se_on"] = rounded(r.se_on);
            o["nmse"] = json_number(r.nmse);
            o["noise_estimate_w"] = rounded(r.noise_estimate_w);
            o["gamp_iterations"] = r.gamp_iterations;
            o["gamp_failures"] = r.gamp_failures;
            o["qtlm_iterations"] = r.qtlm_iterations;
            if (include_timing)
                o["wall_clock_s"] = rounded(r.wall_clock_s);
            arr.push_back(o);
        }
        return arr;
    }

    std::vector<ResultRecord> records_from_json(const nlohmann::json &j)
    {
        if (!j.is_array())
            throw std::invalid_argument("Result JSON must be an array.");
        std::vector<ResultRecord> out;
        for (const auto &o : j)
        {
            ResultRecord r;
            r.pilots = o.at("pilots").get<arma::uword>();
            r.tx_power_db = o.at("tx_power_db").get<double>();
            r.trial = o.at("trial").get<arma::uword>();
            r.seed = o.at("seed").get<std::uint64_t>();
            r.p_off_w = o.at("p_off_w").get<std::vector<double>>();
            r.p_on_w = o.at("p_on_w").get<std::vector<double>>();
            r.gain_db = o.at("gain_db").get<std::vector<double>>();
            r.se_off = o.at("se_off").get<double>();
            r.se_on = o.at("se_on").get<double>();
            r.nmse = number_from_json(o.at("nmse"));
            r.noise_estimate_w = o.at("noise_estimate_w").get<double>();
            r.gamp_iterations = o.at("gamp_iterations").get<std::vector<arma::uword>>();
            r.gamp_failures = o.at("gamp_failures").get<arma::uword>();
            r.qtlm_iterations = o.at("qtlm_iterations").get<arma::uword>();
            if (o.contains("wall_clock_s"))
                r.wall_clock_s = o.at("wall_clock_s").get<double>();
            out.push_back(std::move(r));
        }
        return out;
    }

    void emit_results(const std::vector<ResultRecord> &records, std::ostream &out, const EmitOptions &opts)
    {
        if (records.empty())
            throw std::invalid_argument("No records to emit.");
        if (opts.format == OutputFormat::json)
        {
            out << records_to_json(records, opts.include_timing).dump(2) << '\n';
        }
        else
        {
            const auto cols = csv_columns(opts.include_timing);
            for (std::size_t i = 0; i < cols.size(); ++i)
                out << (i ? "," : "") << cols[i];
            out << '\n';
            auto num = [](double x) { return number(x); };
            auto integer = [](arma::uword x) { return std::to_string(x); };
            for (const auto &r : records)
            {
                out << r.pilots << ',' << number(r.tx_power_db) << ',' << r.trial << ',' << r.seed << ','
                    << r.p_on_w.size() << ',' << joined(r.p_off_w, num) << ',' << joined(r.p_on_w, num) << ','
                    << joined(r.gain_db, num) << ',' << number(r.se_off) << ',' << number(r.se_on) << ','
                    << number(r.nmse) << ',' << number(r.noise_estimate_w) << ',' << joined(r.gamp_iterations, integer)
                    << ',' << r.gamp_failures << ',' << r.qtlm_iterations;
                if (opts.include_timing)
                    out << ',' << number(r.wall_clock_s);
                out << '\n';
            }
        }
        if (!out)
            throw std::runtime_error("Writing results failed.");
    }

    void write_results(const std::vector<ResultRecord> &records, const std::string &path, const EmitOptions &opts)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw std::runtime_error("Cannot open '" + path + "' for writing.");
        emit_results(records, out, opts);
        out.flush();
        if (!out)
            throw std::runtime_error("Writing '" + path + "' failed.");
    }

    arma::uvec read_codeword(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("Cannot open codeword file '" + path + "'.");
        std::stringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first == std::string::npos)
            throw std::invalid_argument("Codeword file '" + path + "' is empty.");

        std::vector<arma::uword> values;
        if (text[first] == '[')
        {
            const json j = json::parse(text);
            for (const auto &v : j)
            {
                if (!v.is_number_integer() || v.get<long long>() < 0)
                    throw std::invalid_argument("Codeword entries must be nonnegative integers.");
                values.push_back(v.get<arma::uword>());
            }
        }
        else
        {
            std::istringstream lines(text);
            std::string line;
            while (std::getline(lines, line))
            {
                const auto b = line.find_first_not_of(" \t\r");
                if (b == std::string::npos)
                    continue;
                std::size_t used = 0;
                long long v = 0;
                try
                {
                    v = std::stoll(line.substr(b), &used);
                }
                catch (const std::exception &)
                {
                    throw std::invalid_argument("Codeword line '" + line + "' is not an integer.");
                }
                if (v < 0 || line.find_first_not_of(" \t\r", b + used) != std::string::npos)
                    throw std::invalid_argument("Codeword line '" + line + "' is not a nonnegative integer.");
                values.push_back(arma::uword(v));
            }
        }
        if (values.empty())
            throw std::invalid_argument("Codeword file '" + path + "' holds no entries.");
        return arma::uvec(values);
    }

    void write_codeword(const arma::uvec &indices, const std::string &path, OutputFormat format)
    {
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("Cannot open '" + path + "' for writing.");
        if (format == OutputFormat::json)
            out << json(arma::conv_to<std::vector<arma::uword>>::from(indices)).dump() << '\n';
        else
            for (auto v : indices)
                out << v << '\n';
        if (!out)
            throw std::runtime_error("Writing '" + path + "' failed.");
    }
}
