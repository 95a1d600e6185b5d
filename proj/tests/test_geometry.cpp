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
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace risbf;

TEST(Geometry, Table1Values)
{
    const RisGeometry g = RisGeometry::table1();
    EXPECT_EQ(g.elements(), 512u);
    EXPECT_NEAR(near_field_boundary(g), 2.91, 0.02);
}

TEST(Geometry, ValidateRejectsBadFields)
{
    RisGeometry g = test::small_geometry(2, 2);
    EXPECT_NO_THROW(g.validate());
    auto bad = g;
    bad.n_y = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = g;
    bad.d_z = 0.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = g;
    bad.wavelength = -1.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = g;
    bad.tau = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Geometry, SteeringBoresightIsAllOnes)
{
    const RisGeometry g = test::small_geometry(4, 3);
    const arma::cx_vec a = steering_vector(g, 0.0, 0.5 * arma::datum::pi);
    for (const cx v : a)
    {
        EXPECT_NEAR(v.real(), 1.0, 1e-15);
        EXPECT_NEAR(v.imag(), 0.0, 1e-15);
    }
}

TEST(Geometry, SteeringHalfWavelengthEndfire)
{
    const RisGeometry g = test::small_geometry(2, 1);
    const arma::cx_vec a = steering_vector(g, 0.5 * arma::datum::pi, 0.5 * arma::datum::pi);
    EXPECT_NEAR(std::abs(a(0) - cx(1.0, 0.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(a(1) - cx(-1.0, 0.0)), 0.0, 1e-12);
}

TEST(Geometry, SteeringUnitModulusAndOrdering)
{
    const RisGeometry g = RisGeometry::table1();
    Rng rng(3);
    std::uniform_real_distribution<double> az(-arma::datum::pi, arma::datum::pi), el(0.0, arma::datum::pi);
    for (int t = 0; t < 20; ++t)
    {
        const double a0 = az(rng), e0 = el(rng);
        const arma::cx_vec a = steering_vector(g, a0, e0);
        EXPECT_NEAR(arma::norm(a) * arma::norm(a), double(g.elements()), 1e-8);
        EXPECT_EQ(a(0), cx(1.0, 0.0));
        EXPECT_LT(arma::abs(arma::abs(a) - 1.0).max(), 1e-12);

        // Element (iy, iz) sits at iy * n_z + iz
        const double ky = -2.0 * arma::datum::pi * g.d_y / g.wavelength * std::sin(a0) * std::sin(e0);
        const double kz = -2.0 * arma::datum::pi * g.d_z / g.wavelength * std::cos(e0);
        for (arma::uword iy : {arma::uword(0), arma::uword(5), arma::uword(31)})
            for (arma::uword iz : {arma::uword(0), arma::uword(7), arma::uword(15)})
                EXPECT_LT(std::abs(a(iy * g.n_z + iz) - std::polar(1.0, ky * double(iy) + kz * double(iz))), 1e-9);
    }
}

TEST(Geometry, DftDegenerateIsIdentity)
{
    const arma::cx_mat d = angular_transform(test::small_geometry(1, 1));
    ASSERT_EQ(d.n_rows, 1u);
    EXPECT_NEAR(std::abs(d(0, 0) - cx(1.0, 0.0)), 0.0, 1e-15);
}

TEST(Geometry, DftTwoByTwoMatchesExplicitKron)
{
    const double s = 1.0 / std::sqrt(2.0);
    arma::cx_mat d2 = {{cx(s, 0), cx(s, 0)}, {cx(s, 0), cx(-s, 0)}};
    arma::cx_mat expected(4, 4);
    for (arma::uword r = 0; r < 4; ++r)
        for (arma::uword c = 0; c < 4; ++c)
            expected(r, c) = d2(r / 2, c / 2) * d2(r % 2, c % 2);
    EXPECT_LT(test::max_abs(angular_transform(test::small_geometry(2, 2)) - expected), 1e-15);
}

TEST(Geometry, DftEntriesMatchDefinition)
{
    const arma::uword n = 7;
    const arma::cx_mat d = dft_matrix(n);
    for (arma::uword p = 0; p < n; ++p)
        for (arma::uword q = 0; q < n; ++q)
            EXPECT_LT(std::abs(d(p, q) - std::polar(1.0 / std::sqrt(7.0), -2.0 * arma::datum::pi * double(p * q) / 7.0)), 1e-14);
}

TEST(Geometry, AngularTransformUnitary)
{
    for (auto [ny, nz] : {std::pair<arma::uword, arma::uword>{3, 5}, {8, 4}, {16, 32}})
    {
        const arma::cx_mat d = angular_transform(test::small_geometry(ny, nz));
        const arma::cx_mat eye = arma::eye<arma::cx_mat>(d.n_rows, d.n_rows);
        EXPECT_LT(test::max_abs(d * d.t() - eye), 1e-10);
    }
}

TEST(Geometry, FastBasisMatchesDense)
{
    const RisGeometry g = test::small_geometry(6, 4);
    const arma::cx_mat d = angular_transform(g);
    const AngularBasis basis(g);
    Rng rng(11);
    const arma::cx_vec h = complex_normal_vec(rng, g.elements(), 1.0);
    EXPECT_LT(arma::norm(basis.forward(h) - d * h), 1e-12);
    EXPECT_LT(arma::norm(basis.inverse(h) - d.t() * h), 1e-12);
    EXPECT_LT(arma::norm(basis.inverse(basis.forward(h)) - h), 1e-12 * arma::norm(h));

    arma::cx_mat x(g.elements(), 3);
    for (arma::uword c = 0; c < 3; ++c)
        x.col(c) = complex_normal_vec(rng, g.elements(), 1.0);
    EXPECT_LT(test::max_abs(basis.conj_forward_columns(x) - arma::conj(d) * x), 1e-12);
    EXPECT_THROW(basis.forward(arma::cx_vec(5)), std::invalid_argument);
}

TEST(Geometry, SteeringOnGridIsOneBin)
{
    // sin(az) = 2 / n_y with half-wavelength spacing lands exactly on DFT bin 2 along y
    const RisGeometry g = test::small_geometry(8, 4);
    const arma::cx_vec a = steering_vector(g, std::asin(2.0 / 8.0), 0.5 * arma::datum::pi);
    const arma::cx_vec ha = AngularBasis(g).forward(a);
    const arma::uword peak = arma::abs(ha).index_max();
    EXPECT_NEAR(std::abs(ha(peak)), std::sqrt(double(g.elements())), 1e-9);
    EXPECT_NEAR(arma::norm(ha), std::sqrt(double(g.elements())), 1e-9);
}

TEST(Geometry, NearFieldBoundaryFormulaAndMonotonicity)
{
    RisGeometry g = test::small_geometry(1, 1);
    EXPECT_DOUBLE_EQ(near_field_boundary(g), 2.0 * g.d_y * g.d_z / g.wavelength);

    g = RisGeometry::table1();
    const double b = near_field_boundary(g);
    auto larger = g;
    larger.n_y *= 2;
    EXPECT_NEAR(near_field_boundary(larger), 2.0 * b, 1e-12);
    larger = g;
    larger.n_z += 1;
    EXPECT_GT(near_field_boundary(larger), b);
    larger = g;
    larger.d_y *= 1.1;
    EXPECT_GT(near_field_boundary(larger), b);
    larger = g;
    larger.d_z *= 1.1;
    EXPECT_GT(near_field_boundary(larger), b);
    larger = g;
    larger.wavelength *= 1.1;
    EXPECT_LT(near_field_boundary(larger), b);
}

TEST(PhaseAlphabet, OneAndTwoBits)
{
    const PhaseAlphabet a1(1);
    ASSERT_EQ(a1.size(), 2u);
    EXPECT_EQ(a1[0], cx(1.0, 0.0));
    EXPECT_EQ(a1[1], cx(-1.0, 0.0));

    const PhaseAlphabet a2(2);
    ASSERT_EQ(a2.size(), 4u);
    EXPECT_EQ(a2[0], cx(1.0, 0.0));
    EXPECT_EQ(a2[1], cx(0.0, 1.0));
    EXPECT_EQ(a2[2], cx(-1.0, 0.0));
    EXPECT_EQ(a2[3], cx(0.0, -1.0));
}

TEST(PhaseAlphabet, Invariants)
{
    for (int tau = 1; tau <= 8; ++tau)
    {
        const PhaseAlphabet a = phase_alphabet(tau);
        ASSERT_EQ(a.size(), arma::uword(1) << tau);
        double previous = -1.0;
        for (arma::uword m = 0; m < a.size(); ++m)
        {
            EXPECT_NEAR(std::abs(a[m]), 1.0, 1e-12);
            double phase = std::arg(a[m]);
            if (phase < 0.0)
                phase += 2.0 * arma::datum::pi;
            if (m > 0)
                EXPECT_GT(phase, previous);
            previous = phase;
            // Closed under negation
            const arma::uword neg = a.nearest_index(-a[m]);
            EXPECT_LT(std::abs(a[neg] + a[m]), 1e-12);
        }
    }
}

TEST(PhaseAlphabet, RejectsBadTau)
{
    EXPECT_THROW(PhaseAlphabet(0), std::invalid_argument);
    EXPECT_THROW(PhaseAlphabet(-3), std::invalid_argument);
    EXPECT_THROW(PhaseAlphabet(17), std::invalid_argument);
}

TEST(PhaseAlphabet, NearestIndexTieGoesLow)
{
    const PhaseAlphabet a(1);
    EXPECT_EQ(a.nearest_index(cx(0.0, 1.0)), 0u);
    EXPECT_EQ(a.nearest_index(cx(0.3, 0.95)), 0u);
    EXPECT_EQ(a.nearest_index(cx(-0.01, 0.95)), 1u);
}
