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

#include "risbf/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace risbf
{
    void RisGeometry::validate() const
    {
        if (n_y < 1 || n_z < 1)
            throw std::invalid_argument("RIS must have at least one element along each axis.");
        if (!(d_y > 0.0) || !(d_z > 0.0))
            throw std::invalid_argument("Element spacing must be positive.");
        if (!(wavelength > 0.0))
            throw std::invalid_argument("Wavelength must be positive.");
        if (tau < 1 || tau > 16)
            throw std::invalid_argument("Quantization must use 1 to 16 bits.");
    }

    RisGeometry RisGeometry::table1()
    {
        RisGeometry g;
        g.n_y = 32;
        g.n_z = 16;
        g.d_y = 14.3e-3;
        g.d_z = 10.27e-3;
        g.wavelength = speed_of_light / 5.8e9;
        g.tau = 1;
        return g;
    }

    PhaseAlphabet::PhaseAlphabet(int tau)
    {
        if (tau <= 0)
            throw std::invalid_argument("Phase alphabet needs tau >= 1, got " + std::to_string(tau) + ".");
        if (tau > 16)
            throw std::invalid_argument("Phase alphabet limited to 16 bits.");
        tau_ = unsigned(tau);
        const arma::uword levels = arma::uword(1) << tau_;
        values_.set_size(levels);
        const double step = 2.0 * arma::datum::pi / double(levels);
        for (arma::uword m = 0; m < levels; ++m)
            values_(m) = std::polar(1.0, step * double(m));
        // Exact values at the quarter points keep tau = 1, 2 free of rounding residue
        for (arma::uword m = 0; m < levels; ++m)
        {
            if ((4 * m) % levels == 0)
            {
                switch ((4 * m) / levels)
                {
                case 0: values_(m) = cx(1.0, 0.0); break;
                case 1: values_(m) = cx(0.0, 1.0); break;
                case 2: values_(m) = cx(-1.0, 0.0); break;
                case 3: values_(m) = cx(0.0, -1.0); break;
                }
            }
        }
    }

    arma::uword PhaseAlphabet::nearest_index(cx z) const
    {
        arma::uword best = 0;
        double best_dist = std::norm(values_(0) - z);
        for (arma::uword m = 1; m < values_.n_elem; ++m)
        {
            double dist = std::norm(values_(m) - z);
            if (dist < best_dist)
            {
                best = m;
                best_dist = dist;
            }
        }
        return best;
    }

    PhaseAlphabet phase_alphabet(int tau) { return PhaseAlphabet(tau); }

    arma::cx_vec steering_vector(const RisGeometry &geom, double azimuth, double elevation)
    {
        const double two_pi = 2.0 * arma::datum::pi;
        const double phase_y = -two_pi * geom.d_y / geom.wavelength * std::sin(azimuth) * std::sin(elevation);
        const double phase_z = -two_pi * geom.d_z / geom.wavelength * std::cos(elevation);

        arma::cx_vec a_y(geom.n_y), a_z(geom.n_z);
        for (arma::uword i = 0; i < geom.n_y; ++i)
            a_y(i) = std::polar(1.0, phase_y * double(i));
        for (arma::uword i = 0; i < geom.n_z; ++i)
            a_z(i) = std::polar(1.0, phase_z * double(i));
        return arma::kron(a_y, a_z);
    }

    arma::cx_mat dft_matrix(arma::uword n)
    {
        arma::cx_mat d(n, n);
        const double scale = 1.0 / std::sqrt(double(n));
        for (arma::uword q = 0; q < n; ++q)
            for (arma::uword p = 0; p < n; ++p)
            {
                // Reduce p*q modulo n before the trig call to keep large grids accurate
                const double frac = double((p * q) % n) / double(n);
                d(p, q) = std::polar(scale, -2.0 * arma::datum::pi * frac);
            }
        return d;
    }

    arma::cx_mat angular_transform(const RisGeometry &geom)
    {
        geom.validate();
        return arma::kron(dft_matrix(geom.n_y), dft_matrix(geom.n_z));
    }

    AngularBasis::AngularBasis(const RisGeometry &geom)
        : n_y_(geom.n_y), n_z_(geom.n_z), dy_(dft_matrix(geom.n_y)), dz_(dft_matrix(geom.n_z))
    {
    }

    // (A kron B) vec(X) = vec(B X A^T) with X of size n_z x n_y holding the y-major vector
    arma::cx_vec AngularBasis::forward(const arma::cx_vec &h) const
    {
        if (h.n_elem != elements())
            throw std::invalid_argument("Vector length does not match the RIS element count.");
        const arma::cx_mat x = arma::reshape(h, n_z_, n_y_);
        return arma::vectorise(dz_ * x * dy_.st());
    }

    arma::cx_vec AngularBasis::inverse(const arma::cx_vec &h_a) const
    {
        if (h_a.n_elem != elements())
            throw std::invalid_argument("Vector length does not match the RIS element count.");
        const arma::cx_mat x = arma::reshape(h_a, n_z_, n_y_);
        return arma::vectorise(dz_.t() * x * arma::conj(dy_));
    }

    arma::cx_mat AngularBasis::conj_forward_columns(const arma::cx_mat &x) const
    {
        if (x.n_rows != elements())
            throw std::invalid_argument("Row count does not match the RIS element count.");
        const arma::cx_mat cz = arma::conj(dz_);
        const arma::cx_mat cy_t = dy_.t();
        arma::cx_mat out(x.n_rows, x.n_cols);
        for (arma::uword c = 0; c < x.n_cols; ++c)
        {
            const arma::cx_mat xc = arma::reshape(x.col(c), n_z_, n_y_);
            out.col(c) = arma::vectorise(cz * xc * cy_t);
        }
        return out;
    }

    double near_field_boundary(const RisGeometry &geom)
    {
        geom.validate();
        return 2.0 * double(geom.n_y) * double(geom.n_z) * geom.d_y * geom.d_z / geom.wavelength;
    }
}
