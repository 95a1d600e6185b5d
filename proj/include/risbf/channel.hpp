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

#ifndef risbf_channel_H
#define risbf_channel_H

#include "risbf/geometry.hpp"
#include "risbf/random.hpp"

#include <armadillo>
#include <cstdint>
#include <vector>

namespace risbf
{
    struct Path
    {
        cx gain;          // Complex path gain beta
        double azimuth;   // Radians
        double elevation; // Radians
    };

    struct PathSet
    {
        std::vector<Path> paths;

        void validate() const;
    };

    struct ChannelRealization
    {
        arma::cx_vec g;               // BS -> RIS
        std::vector<arma::cx_vec> h_r; // RIS -> user k
        std::vector<cx> h_d;          // BS -> user k (direct link)
        std::vector<arma::cx_vec> h;  // Cascaded diag(h_r,k) g

        arma::uword users() const { return h.size(); }
    };

    // Position of a terminal seen from the RIS centre. Distance is only used by the spherical
    // wavefront mode; in the planar mode it is scenario metadata.
    struct Terminal
    {
        double azimuth = 0.0;                      // Radians
        double elevation = 0.5 * arma::datum::pi;  // Radians, pi/2 is the horizontal plane
        double distance = 0.0;                     // Meters
    };

    struct UserConfig
    {
        Terminal position;
        double direct_power = 0.0; // sigma_k^2 of h_d,k ~ CN(0, sigma_k^2), watts
    };

    enum class PathModel
    {
        rayleigh, // L paths, beta_l ~ CN(0, rho / L); path 0 at the nominal angle, others random
        los       // One dominant nominal path with Rician factor, L - 1 weak scatterers
    };

    enum class Wavefront
    {
        planar,   // Far-field steering vectors for every path
        spherical // Exact per-element path phase for the nominal path of each link
    };

    struct ScenarioConfig
    {
        RisGeometry geometry = RisGeometry::table1();
        Terminal bs;
        std::vector<UserConfig> users;
        arma::uword bs_paths = 1;     // L_g
        arma::uword user_paths = 1;   // L_k
        double noise_power = 1.0;     // sigma^2, watts
        double bs_link_scale = 1.0;   // rho of the BS-RIS link
        double user_link_scale = 1.0; // rho of each RIS-user link
        PathModel model = PathModel::los;
        double rician_k_db = 10.0; // Power ratio of the nominal path to the scatterers (los model)
        Wavefront wavefront = Wavefront::planar;
        std::uint64_t seed = 0;

        arma::uword users_count() const { return users.size(); }
        void validate() const;
    };

    // g = sum_l beta_l alpha(az_l, el_l)
    arma::cx_vec generate_bs_ris_channel(const RisGeometry &geom, const PathSet &paths);

    // h_r = sum_l beta_l alpha(az_l, el_l), stored as a column
    arma::cx_vec generate_ris_user_channel(const RisGeometry &geom, const PathSet &paths);

    // Elementwise h_r .* g
    arma::cx_vec cascade(const arma::cx_vec &h_r, const arma::cx_vec &g);

    // y = (h_d + theta^T h) s + n, n ~ CN(0, sigma2). A zero theta models the absorbing (RIS-off) state.
    cx received_signal(const arma::cx_vec &theta, cx h_d, const arma::cx_vec &h, cx s, double sigma2, Rng &rng);

    // Phase-only response of a point source at the given position; reduces to steering_vector in the far field
    arma::cx_vec spherical_response(const RisGeometry &geom, const Terminal &source);

    ChannelRealization draw_scenario(const ScenarioConfig &config, Rng &rng);

    // Seeds a private generator from config.seed
    ChannelRealization draw_scenario(const ScenarioConfig &config);
}

#endif
