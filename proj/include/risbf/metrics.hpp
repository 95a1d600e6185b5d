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

#ifndef risbf_metrics_H
#define risbf_metrics_H

#include "risbf/geometry.hpp"

#include <armadillo>
#include <cmath>
#include <optional>
#include <vector>

namespace risbf
{
    // sum_k log2(1 + gamma_k), bits/s/Hz
    double spectral_efficiency(const arma::vec &gamma);

    // Mean |x_i|^2 over a frame, watts
    double received_power(const arma::cx_vec &samples);

    // 10 log10(p_on / p_off)
    double power_gain_db(double p_on, double p_off);

    inline double to_db(double linear) { return 10.0 * std::log10(linear); }
    inline double from_db(double db) { return std::pow(10.0, 0.1 * db); }

    // sum |R_i|^2 / sum |S_i - R_i|^2 as a linear ratio; std::nullopt when the error energy is zero
    std::optional<double> rxmer(const arma::cx_vec &measured, const arma::cx_vec &reference);

    // p_r / RxMER
    double corrected_noise(double p_r, double rxmer);

    struct PatternSample
    {
        double azimuth_deg;
        double gain_db; // Relative to the pattern maximum
    };

    // Array-factor cut at elevation pi/2: |sum_n theta_n a_n(incident) a_n(psi)|^2 normalized to 0 dB
    std::vector<PatternSample> radiation_pattern(const RisGeometry &geom, const arma::cx_vec &theta,
                                                 double incident_azimuth, double incident_elevation,
                                                 const std::vector<double> &grid_deg);

    // Inclusive grid from `first` to `last` with the given step
    std::vector<double> azimuth_grid(double first_deg, double last_deg, double step_deg);

    // Width between the -3 dB crossings around the sample nearest `peak_azimuth_deg`, linearly
    // interpolated; std::nullopt when a crossing is missing on either side
    std::optional<double> half_power_beamwidth(const std::vector<PatternSample> &pattern, double peak_azimuth_deg);

    // Local maxima within `within_db` of the pattern maximum, ordered by azimuth
    std::vector<PatternSample> find_lobes(const std::vector<PatternSample> &pattern, double within_db);
}

#endif
