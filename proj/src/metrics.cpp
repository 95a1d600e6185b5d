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

#include "risbf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace risbf
{
    double spectral_efficiency(const arma::vec &gamma)
    {
        if (arma::any(gamma < 0.0))
            throw std::invalid_argument("SNR values cannot be negative.");
        return arma::accu(arma::log2(1.0 + gamma));
    }

    double received_power(const arma::cx_vec &samples)
    {
        if (samples.is_empty())
            throw std::invalid_argument("Received power of an empty frame is undefined.");
        return arma::mean(arma::square(arma::abs(samples)));
    }

    double power_gain_db(double p_on, double p_off)
    {
        if (!(p_on > 0.0) || !(p_off > 0.0))
            throw std::invalid_argument("Power gain needs positive powers.");
        return 10.0 * std::log10(p_on / p_off);
    }

    std::optional<double> rxmer(const arma::cx_vec &measured, const arma::cx_vec &reference)
    {
        if (measured.n_elem != reference.n_elem || measured.is_empty())
            throw std::invalid_argument("RxMER needs equal, nonzero frame lengths.");
        const double error = arma::accu(arma::square(arma::abs(measured - reference)));
        if (error == 0.0)
            return std::nullopt;
        return arma::accu(arma::square(arma::abs(reference))) / error;
    }

    double corrected_noise(double p_r, double rxmer)
    {
        if (!(rxmer > 0.0))
            throw std::invalid_argument("RxMER must be positive.");
        if (p_r < 0.0)
            throw std::invalid_argument("Received power cannot be negative.");
        return p_r / rxmer;
    }

    std::vector<PatternSample> radiation_pattern(const RisGeometry &geom, const arma::cx_vec &theta,
                                                 double incident_azimuth, double incident_elevation,
                                                 const std::vector<double> &grid_deg)
    {
        geom.validate();
        if (grid_deg.empty())
            throw std::invalid_argument("Pattern grid cannot be empty.");
        if (theta.n_elem != geom.elements())
            throw std::invalid_argument("Codeword length does not match the RIS element count.");

        const arma::cx_vec illuminated = theta % steering_vector(geom, incident_azimuth, incident_elevation);
        const double deg = arma::datum::pi / 180.0;

        std::vector<double> power(grid_deg.size());
        for (std::size_t i = 0; i < grid_deg.size(); ++i)
            power[i] = std::norm(arma::accu(illuminated % steering_vector(geom, grid_deg[i] * deg, 0.5 * arma::datum::pi)));

        const double peak = *std::max_element(power.begin(), power.end());
        std::vector<PatternSample> out(grid_deg.size());
        for (std::size_t i = 0; i < grid_deg.size(); ++i)
        {
            out[i].azimuth_deg = grid_deg[i];
            // A dark codeword has no maximum to normalize by; report it flat
            out[i].gain_db = peak > 0.0 ? 10.0 * std::log10(std::max(power[i] / peak, 1e-30)) : 0.0;
        }
        return out;
    }

    std::vector<double> azimuth_grid(double first_deg, double last_deg, double step_deg)
    {
        if (!(step_deg > 0.0) || last_deg < first_deg)
            throw std::invalid_argument("Invalid azimuth grid.");
        const auto count = std::size_t(std::floor((last_deg - first_deg) / step_deg + 1e-9)) + 1;
        std::vector<double> grid(count);
        for (std::size_t i = 0; i < count; ++i)
            grid[i] = first_deg + double(i) * step_deg;
        return grid;
    }

    std::optional<double> half_power_beamwidth(const std::vector<PatternSample> &pattern, double peak_azimuth_deg)
    {
        if (pattern.empty())
            throw std::invalid_argument("Pattern is empty.");
        std::size_t peak = 0;
        for (std::size_t i = 1; i < pattern.size(); ++i)
            if (std::abs(pattern[i].azimuth_deg - peak_azimuth_deg) < std::abs(pattern[peak].azimuth_deg - peak_azimuth_deg))
                peak = i;

        const double level = pattern[peak].gain_db - 3.0;
        auto crossing = [&](std::size_t inside, std::size_t outside) {
            const double g0 = pattern[inside].gain_db, g1 = pattern[outside].gain_db;
            const double t = (g0 - level) / (g0 - g1);
            return pattern[inside].azimuth_deg + t * (pattern[outside].azimuth_deg - pattern[inside].azimuth_deg);
        };

        std::optional<double> left, right;
        for (std::size_t i = peak; i > 0; --i)
            if (pattern[i - 1].gain_db <= level)
            {
                left = crossing(i, i - 1);
                break;
            }
        for (std::size_t i = peak; i + 1 < pattern.size(); ++i)
            if (pattern[i + 1].gain_db <= level)
            {
                right = crossing(i, i + 1);
                break;
            }
        if (!left || !right)
            return std::nullopt;
        return *right - *left;
    }

    std::vector<PatternSample> find_lobes(const std::vector<PatternSample> &pattern, double within_db)
    {
        std::vector<PatternSample> lobes;
        if (pattern.empty())
            return lobes;
        double top = pattern.front().gain_db;
        for (const auto &s : pattern)
            top = std::max(top, s.gain_db);

        for (std::size_t i = 0; i < pattern.size(); ++i)
        {
            const double g = pattern[i].gain_db;
            const bool left_ok = i == 0 || g > pattern[i - 1].gain_db;
            const bool right_ok = i + 1 == pattern.size() || g >= pattern[i + 1].gain_db;
            if (left_ok && right_ok && g >= top - within_db)
                lobes.push_back(pattern[i]);
        }
        return lobes;
    }
}
