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
#include "risbf/estimation.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace risbf;

namespace
{
    // Generic i.i.d. Gaussian sensing with unit-power entries and a k-sparse unit-magnitude signal
    struct SparseInstance
    {
        arma::cx_mat a;
        arma::cx_vec x;
    };

    SparseInstance sparse_instance(arma::uword m, arma::uword n, arma::uword k, Rng &rng)
    {
        SparseInstance s;
        s.a.set_size(m, n);
        for (auto &v : s.a)
            v = complex_normal(rng, 1.0);
        s.x.zeros(n);
        std::vector<arma::uword> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        std::uniform_real_distribution<double> ph(0.0, 2.0 * arma::datum::pi);
        for (arma::uword i = 0; i < k; ++i)
            s.x(idx[i]) = std::polar(1.0, ph(rng));
        return s;
    }

    double db(double x) { return 10.0 * std::log10(x); }
}

TEST(SensingPlan, EntriesAndConsistency)
{
    const RisGeometry g = test::small_geometry(4, 4);
    Rng rng(1);
    const SensingPlan plan = generate_sensing_plan(g, 12, rng);
    ASSERT_EQ(plan.slots(), 12u);
    ASSERT_EQ(plan.sensing.n_rows, 12u);
    ASSERT_EQ(plan.sensing.n_cols, 16u);
    EXPECT_TRUE(arma::all(arma::vectorise(arma::abs(plan.reflections) == 1.0)));

    // M = Theta^T D^H against the dense transform
    const arma::cx_mat d = angular_transform(g);
    const arma::cx_mat dense = arma::conv_to<arma::cx_mat>::from(plan.reflections).st() * d.t();
    EXPECT_LT(test::max_abs(plan.sensing - dense), 1e-12);

    // Two routes to the slot measurements: M (D h) = Theta^T h
    const arma::cx_vec h = complex_normal_vec(rng, g.elements(), 1.0);
    const arma::cx_vec direct = arma::conv_to<arma::cx_mat>::from(plan.reflections).st() * h;
    EXPECT_LT(arma::abs(plan.sensing * (d * h) - direct).max(), 1e-10);
}

TEST(SensingPlan, Deterministic)
{
    const RisGeometry g = test::small_geometry(3, 3);
    Rng a(77), b(77);
    const SensingPlan p1 = generate_sensing_plan(g, 5, a), p2 = generate_sensing_plan(g, 5, b);
    EXPECT_TRUE(arma::approx_equal(p1.reflections, p2.reflections, "absdiff", 0.0));
    EXPECT_TRUE(arma::approx_equal(p1.sensing, p2.sensing, "absdiff", 0.0));
}

TEST(SensingPlan, RademacherMean)
{
    const RisGeometry g = test::small_geometry(32, 32);
    Rng rng(5);
    const SensingPlan plan = generate_sensing_plan(g, 1000, rng); // 1,024,000 entries
    EXPECT_NEAR(arma::mean(arma::vectorise(plan.reflections)), 0.0, 0.005);
}

TEST(SensingPlan, RejectsBadPilots)
{
    const RisGeometry g = test::small_geometry(2, 2);
    Rng rng(1);
    EXPECT_THROW(generate_sensing_plan(g, arma::uword(0), rng), std::invalid_argument);
    EXPECT_THROW(generate_sensing_plan(g, arma::cx_vec{cx(0.5, 0.0)}, rng), std::invalid_argument);
    const arma::cx_vec pilots = {cx(0, 1), cx(-1, 0)};
    EXPECT_EQ(generate_sensing_plan(g, pilots, rng).slots(), 2u);
}

TEST(DirectLink, LeastSquares)
{
    EXPECT_EQ(estimate_direct_ls(arma::cx_vec(4, arma::fill::ones), arma::cx_vec(4, arma::fill::value(cx(2, 0)))), cx(2, 0));

    const arma::cx_vec s = {cx(1, 0), cx(0, 1), cx(-1, 0), cx(0, -1)};
    const cx h(0.3, -1.7);
    EXPECT_LT(std::abs(estimate_direct_ls(s, h * s) - h), 1e-15);
    EXPECT_THROW(estimate_direct_ls(arma::cx_vec(3, arma::fill::zeros), arma::cx_vec(3, arma::fill::ones)), std::invalid_argument);
    EXPECT_THROW(estimate_direct_ls(s, arma::cx_vec(3)), std::invalid_argument);
}

TEST(DirectLink, ErrorVarianceMonteCarlo)
{
    const arma::uword p = 16;
    const double sigma2 = 0.2;
    const cx h(0.7, 0.1);
    Rng rng(31);
    const arma::cx_vec s(p, arma::fill::ones);
    double err = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t)
        err += std::norm(estimate_direct_ls(s, h * s + complex_normal_vec(rng, p, sigma2)) - h);
    EXPECT_NEAR(err / trials / (sigma2 / double(p)), 1.0, 0.05);
}

TEST(DirectLink, Removal)
{
    const arma::cx_vec s = {cx(1, 0), cx(-1, 0), cx(0, 1)};
    const arma::cx_vec ris = {cx(0.2, 0.1), cx(-0.5, 0.0), cx(1.0, -1.0)};
    const cx h(2.0, -1.0), h_est(1.9, -0.8);
    const arma::cx_vec y = h * s + ris;
    EXPECT_LT(arma::norm(remove_direct(y, cx(0, 0), s) - y), 1e-15);
    EXPECT_LT(arma::norm(remove_direct(y, h, s) - ris), 1e-15);
    EXPECT_LT(arma::norm(remove_direct(y, h_est, s) - ris - (h - h_est) * s), 1e-14);
    EXPECT_THROW(remove_direct(y, h, arma::cx_vec(2)), std::invalid_argument);
}

TEST(Gamp, ZeroMeasurementsGiveZeroEstimate)
{
    Rng rng(2);
    const auto inst = sparse_instance(20, 64, 3, rng);
    const auto est = em_gamp_recover(inst.a, arma::cx_vec(20, arma::fill::zeros), 1e-3);
    EXPECT_LT(arma::abs(est.h_a).max(), 1e-8);
    EXPECT_EQ(est.status, GampStatus::converged);
}

TEST(Gamp, RejectsBadInputs)
{
    const arma::cx_mat a(4, 8, arma::fill::ones);
    EXPECT_THROW(em_gamp_recover(a, arma::cx_vec(3, arma::fill::ones), 1.0), std::invalid_argument);
    EXPECT_THROW(em_gamp_recover(a, arma::cx_vec(4, arma::fill::ones), 0.0), std::invalid_argument);
    GampOptions o;
    o.damping = 0.0;
    EXPECT_THROW(em_gamp_recover(a, arma::cx_vec(4, arma::fill::ones), 1.0, o), std::invalid_argument);
    EXPECT_THROW(em_gamp_recover(arma::cx_mat(4, 8, arma::fill::zeros), arma::cx_vec(4, arma::fill::ones), 1.0),
                 std::invalid_argument);
}

TEST(Gamp, NoiselessRademacherRecovery)
{
    const RisGeometry g = test::small_geometry(16, 16);
    Rng rng(8);
    std::vector<double> nmse_db;
    for (int t = 0; t < 5; ++t)
    {
        const SensingPlan plan = generate_sensing_plan(g, 100, rng);
        const auto inst = sparse_instance(1, g.elements(), 4, rng);
        const arma::cx_vec y = plan.sensing * inst.x;
        const auto est = em_gamp_recover(plan.sensing, y, 1e-6 * arma::accu(arma::square(arma::abs(y))) / 100.0);
        EXPECT_NE(est.status, GampStatus::diverged);
        EXPECT_TRUE(arma::all(est.variances >= 0.0));
        EXPECT_GT(est.sparsity_rate, 0.0);
        EXPECT_LT(est.sparsity_rate, 1.0);
        nmse_db.push_back(db(nmse({inst.x}, {est.h_a})));
    }
    std::sort(nmse_db.begin(), nmse_db.end());
    EXPECT_LT(nmse_db[2], -40.0);
}

TEST(Gamp, NoiseVarianceLearned)
{
    // P = 25 x sparsity, generic Gaussian sensing: learned noise within a factor 3 of the truth
    Rng rng(13);
    const double sigma2 = 0.01;
    for (int t = 0; t < 5; ++t)
    {
        const auto inst = sparse_instance(100, 256, 4, rng);
        const arma::cx_vec y = inst.a * inst.x + complex_normal_vec(rng, 100, sigma2);
        const auto est = em_gamp_recover(inst.a, y, 1.0);
        EXPECT_GT(est.noise_variance, sigma2 / 3.0);
        EXPECT_LT(est.noise_variance, sigma2 * 3.0);
        EXPECT_NEAR(est.residual, arma::norm(y - inst.a * est.h_a), 1e-9);
    }
}

TEST(Gamp, NmseImprovesWithSnr)
{
    Rng rng(21);
    std::vector<double> low, high;
    for (int t = 0; t < 15; ++t)
    {
        const auto inst = sparse_instance(80, 256, 4, rng);
        const arma::cx_vec clean = inst.a * inst.x;
        const double p = arma::accu(arma::square(arma::abs(clean))) / 80.0;
        const arma::cx_vec noise = complex_normal_vec(rng, 80, 1.0);
        const arma::cx_vec y0 = clean + std::sqrt(p) * noise;          // 0 dB
        const arma::cx_vec y30 = clean + std::sqrt(p * 1e-3) * noise;  // 30 dB
        low.push_back(nmse({inst.x}, {em_gamp_recover(inst.a, y0, p).h_a}));
        high.push_back(nmse({inst.x}, {em_gamp_recover(inst.a, y30, p * 1e-3).h_a}));
    }
    std::nth_element(low.begin(), low.begin() + 7, low.end());
    std::nth_element(high.begin(), high.begin() + 7, high.end());
    EXPECT_LT(high[7], low[7]);
}

TEST(ElementDomain, RoundTrip)
{
    const RisGeometry g = test::small_geometry(5, 3);
    Rng rng(4);
    const arma::cx_vec h = complex_normal_vec(rng, g.elements(), 1.0);
    const arma::cx_vec ha = AngularBasis(g).forward(h);
    EXPECT_LT(arma::norm(to_element_domain(ha, g) - h), 1e-12 * arma::norm(h));
    EXPECT_NEAR(arma::norm(ha), arma::norm(h), 1e-12);
    EXPECT_EQ(arma::norm(to_element_domain(arma::cx_vec(g.elements(), arma::fill::zeros), g)), 0.0);
}

TEST(Nmse, Examples)
{
    const arma::cx_vec a = {cx(1, 0), cx(0, 1)};
    EXPECT_EQ(nmse({a}, {a}), 0.0);
    EXPECT_DOUBLE_EQ(nmse({a}, {arma::cx_vec(2, arma::fill::zeros)}), 1.0);

    const arma::cx_vec b = {cx(1, 0)};
    const arma::cx_vec e1 = {cx(1.0 + std::sqrt(0.1), 0)}, e2 = {cx(1.0, std::sqrt(0.3))};
    EXPECT_NEAR(nmse({b, b}, {e1, e2}), 0.2, 1e-15);
    EXPECT_THROW(nmse({arma::cx_vec(2, arma::fill::zeros)}, {a}), std::invalid_argument);
    EXPECT_THROW(nmse({a}, {b}), std::invalid_argument);
}

TEST(Gamp, StatusNames)
{
    EXPECT_EQ(to_string(GampStatus::converged), "converged");
    EXPECT_EQ(to_string(GampStatus::max_iterations), "max_iterations");
    EXPECT_EQ(to_string(GampStatus::diverged), "diverged");
}
