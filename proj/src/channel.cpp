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

#include "risbf/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace risbf
{
    namespace
    {
        // Angular support of the random scatterers: front half-space, +-30 deg around the horizon
        const double scatter_azimuth_span = 0.5 * arma::datum::pi;
        const double scatter_elevation_span = arma::datum::pi / 6.0;

        arma::cx_vec sum_paths(const RisGeometry &geom, const PathSet &paths)
        {
            geom.validate();
            paths.validate();
            arma::cx_vec out(geom.elements(), arma::fill::zeros);
            for (const auto &p : paths.paths)
                out += p.gain * steering_vector(geom, p.azimuth, p.elevation);
            return out;
        }

        // Draws one link: nominal path toward `nominal`, remaining paths at random angles
        arma::cx_vec draw_link(const ScenarioConfig &cfg, const Terminal &nominal, arma::uword n_paths,
                               double scale, Rng &rng)
        {
            const RisGeometry &geom = cfg.geometry;
            std::uniform_real_distribution<double> uni(0.0, 1.0);

            double nominal_power = 0.0, scatter_power = 0.0;
            if (cfg.model == PathModel::los)
            {
                const double k = std::pow(10.0, 0.1 * cfg.rician_k_db);
                nominal_power = n_paths > 1 ? scale * k / (k + 1.0) : scale;
                scatter_power = n_paths > 1 ? scale / (k + 1.0) / double(n_paths - 1) : 0.0;
            }
            else
            {
                nominal_power = scale / double(n_paths);
                scatter_power = scale / double(n_paths);
            }

            cx nominal_gain;
            if (cfg.model == PathModel::los)
                nominal_gain = std::polar(std::sqrt(nominal_power), 2.0 * arma::datum::pi * uni(rng));
            else
                nominal_gain = complex_normal(rng, nominal_power);

            arma::cx_vec out = cfg.wavefront == Wavefront::spherical
                                   ? arma::cx_vec(nominal_gain * spherical_response(geom, nominal))
                                   : arma::cx_vec(nominal_gain * steering_vector(geom, nominal.azimuth, nominal.elevation));

            for (arma::uword l = 1; l < n_paths; ++l)
            {
                const double az = scatter_azimuth_span * (2.0 * uni(rng) - 1.0);
                const double el = 0.5 * arma::datum::pi + scatter_elevation_span * (2.0 * uni(rng) - 1.0);
                const cx beta = complex_normal(rng, scatter_power);
                out += beta * steering_vector(geom, az, el);
            }
            return out;
        }
    }

    void PathSet::validate() const
    {
        if (paths.empty())
            throw std::invalid_argument("A path set needs at least one path.");
    }

    void ScenarioConfig::validate() const
    {
        geometry.validate();
        if (users.empty())
            throw std::invalid_argument("Scenario needs at least one user.");
        if (!(noise_power > 0.0))
            throw std::invalid_argument("Noise power must be positive.");
        if (bs_paths < 1 || user_paths < 1)
            throw std::invalid_argument("Path counts must be at least 1.");
        if (bs_link_scale < 0.0 || user_link_scale < 0.0)
            throw std::invalid_argument("Link scales cannot be negative.");
        for (const auto &u : users)
        {
            if (u.direct_power < 0.0)
                throw std::invalid_argument("Direct-link power cannot be negative.");
            if (wavefront == Wavefront::spherical && !(u.position.distance > 0.0))
                throw std::invalid_argument("Spherical wavefront needs positive user distances.");
        }
        if (wavefront == Wavefront::spherical && !(bs.distance > 0.0))
            throw std::invalid_argument("Spherical wavefront needs a positive BS distance.");
    }

    arma::cx_vec generate_bs_ris_channel(const RisGeometry &geom, const PathSet &paths)
    {
        return sum_paths(geom, paths);
    }

    arma::cx_vec generate_ris_user_channel(const RisGeometry &geom, const PathSet &paths)
    {
        return sum_paths(geom, paths);
    }

    arma::cx_vec cascade(const arma::cx_vec &h_r, const arma::cx_vec &g)
    {
        if (h_r.n_elem != g.n_elem)
            throw std::invalid_argument("Cascade needs vectors of equal length.");
        return h_r % g;
    }

    cx received_signal(const arma::cx_vec &theta, cx h_d, const arma::cx_vec &h, cx s, double sigma2, Rng &rng)
    {
        if (theta.n_elem != h.n_elem)
            throw std::invalid_argument("Reflection vector and channel lengths differ.");
        if (sigma2 < 0.0)
            throw std::invalid_argument("Noise power cannot be negative.");
        const cx effective = h_d + arma::accu(theta % h);
        return effective * s + complex_normal(rng, sigma2);
    }

    arma::cx_vec spherical_response(const RisGeometry &geom, const Terminal &source)
    {
        geom.validate();
        const double k = 2.0 * arma::datum::pi / geom.wavelength;
        const double sy = source.distance * std::sin(source.elevation) * std::sin(source.azimuth);
        const double sz = source.distance * std::cos(source.elevation);
        const double sx = source.distance * std::sin(source.elevation) * std::cos(source.azimuth);
        const double cy = 0.5 * double(geom.n_y - 1) * geom.d_y;
        const double cz = 0.5 * double(geom.n_z - 1) * geom.d_z;

        arma::cx_vec out(geom.elements());
        double r0 = 0.0;
        for (arma::uword iy = 0; iy < geom.n_y; ++iy)
            for (arma::uword iz = 0; iz < geom.n_z; ++iz)
            {
                const double dy = sy - (double(iy) * geom.d_y - cy);
                const double dz = sz - (double(iz) * geom.d_z - cz);
                const double r = std::sqrt(sx * sx + dy * dy + dz * dz);
                if (iy == 0 && iz == 0)
                    r0 = r;
                // +jk(r - r0) matches the sign of the far-field steering vector
                out(iy * geom.n_z + iz) = std::polar(1.0, k * (r - r0));
            }
        return out;
    }

    ChannelRealization draw_scenario(const ScenarioConfig &config, Rng &rng)
    {
        config.validate();
        ChannelRealization out;
        out.g = draw_link(config, config.bs, config.bs_paths, config.bs_link_scale, rng);
        for (const auto &u : config.users)
        {
            out.h_d.push_back(complex_normal(rng, u.direct_power));
            out.h_r.push_back(draw_link(config, u.position, config.user_paths, config.user_link_scale, rng));
            out.h.push_back(cascade(out.h_r.back(), out.g));
        }
        return out;
    }

    ChannelRealization draw_scenario(const ScenarioConfig &config)
    {
        Rng rng(config.seed);
        return draw_scenario(config, rng);
    }
}
