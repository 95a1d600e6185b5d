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

#ifndef risbf_geometry_H
#define risbf_geometry_H

#include <armadillo>
#include <complex>
#include <vector>

namespace risbf
{
    using cx = std::complex<double>;

    inline constexpr double speed_of_light = 299792458.0;

    // Uniform planar array in the y-z plane. Element (iy, iz) is stored at index iy * n_z + iz
    // (y-major), which is the ordering of kron(alpha_y, alpha_z).
    struct RisGeometry
    {
        arma::uword n_y = 1;     // Elements along the y-axis
        arma::uword n_z = 1;     // Elements along the z-axis
        double d_y = 0.0;        // Element spacing along y in meters
        double d_z = 0.0;        // Element spacing along z in meters
        double wavelength = 0.0; // Carrier wavelength in meters
        unsigned tau = 1;        // Phase quantization bits

        arma::uword elements() const { return n_y * n_z; }

        // Throws std::invalid_argument if any invariant is violated
        void validate() const;

        // 32 x 16 elements, 14.3 mm x 10.27 mm spacing, 5.8 GHz, 1 bit
        static RisGeometry table1();
    };

    // Ordered 2^tau point phase alphabet exp(j 2 pi m / 2^tau), m = 0 .. 2^tau - 1
    class PhaseAlphabet
    {
    public:
        explicit PhaseAlphabet(int tau);

        unsigned tau() const { return tau_; }
        arma::uword size() const { return values_.n_elem; }
        const arma::cx_vec &values() const { return values_; }
        cx operator[](arma::uword m) const { return values_(m); }

        // Index of the closest alphabet value; ties go to the lowest index
        arma::uword nearest_index(cx z) const;

    private:
        unsigned tau_;
        arma::cx_vec values_;
    };

    PhaseAlphabet phase_alphabet(int tau);

    // Far-field response kron(alpha_y, alpha_z). Azimuth in (-pi, pi], elevation in [0, pi] measured
    // from the z-axis, so the y phase progression is sin(az) sin(el) and the z progression is cos(el).
    arma::cx_vec steering_vector(const RisGeometry &geom, double azimuth, double elevation);

    // Unitary n-point DFT matrix, entry (p, q) = exp(-j 2 pi p q / n) / sqrt(n)
    arma::cx_mat dft_matrix(arma::uword n);

    // Dense D_N = D_{n_y} kron D_{n_z}
    arma::cx_mat angular_transform(const RisGeometry &geom);

    // Applies D_N and its inverse through the Kronecker factors without forming the N x N matrix.
    class AngularBasis
    {
    public:
        explicit AngularBasis(const RisGeometry &geom);

        arma::cx_vec forward(const arma::cx_vec &h) const;   // D_N h
        arma::cx_vec inverse(const arma::cx_vec &h_a) const; // D_N^H h_a

        // conj(D_N) x for every column of x; row p of Theta^T D_N^H equals (conj(D_N) theta_p)^T
        arma::cx_mat conj_forward_columns(const arma::cx_mat &x) const;

        arma::uword elements() const { return n_y_ * n_z_; }

    private:
        arma::uword n_y_, n_z_;
        arma::cx_mat dy_, dz_;
    };

    // Near/far-field boundary 2 n_y n_z d_y d_z / lambda in meters
    double near_field_boundary(const RisGeometry &geom);
}

#endif
