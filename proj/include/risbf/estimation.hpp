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

#ifndef risbf_estimation_H
#define risbf_estimation_H

#include "risbf/geometry.hpp"
#include "risbf/random.hpp"

#include <armadillo>
#include <string_view>
#include <vector>

namespace risbf
{
    struct SensingPlan
    {
        arma::mat reflections; // Theta, N x P, entries +-1
        arma::cx_vec pilots;   // s, length P, unit modulus
        arma::cx_mat sensing;  // M = Theta^T D_N^H, P x N

        arma::uword slots() const { return reflections.n_cols; }
    };

    // Rademacher reflection patterns with unit pilots
    SensingPlan generate_sensing_plan(const RisGeometry &geom, arma::uword slots, Rng &rng);

    // Same, with caller-provided unit-modulus pilots (length sets the slot count)
    SensingPlan generate_sensing_plan(const RisGeometry &geom, const arma::cx_vec &pilots, Rng &rng);

    // Least-squares direct link from RIS-off frames: sum conj(s) y / sum |s|^2
    cx estimate_direct_ls(const arma::cx_vec &pilots, const arma::cx_vec &y_off);

    // y_p - h_d s_p
    arma::cx_vec remove_direct(const arma::cx_vec &y, cx h_d, const arma::cx_vec &pilots);

    struct GampOptions
    {
        arma::uword max_iterations = 200;
        double damping = 0.7;          // Weight of the new iterate
        double tolerance = 1e-6;       // Relative change of the estimate
        double initial_sparsity = 0.1; // Bernoulli rate at start
        arma::uword divergence_window = 10;
        double divergence_factor = 10.0;

        void validate() const;
    };

    enum class GampStatus
    {
        converged,
        max_iterations,
        diverged
    };

    std::string_view to_string(GampStatus status);

    struct AngularChannelEstimate
    {
        arma::cx_vec h_a;        // Posterior mean
        arma::vec variances;     // Posterior variances
        double sparsity_rate = 0.0;
        double active_variance = 0.0;
        double noise_variance = 0.0;
        arma::uword iterations = 0;
        double residual = 0.0;   // ||y - M h_a||_2
        GampStatus status = GampStatus::max_iterations;
    };

    // Sum-product GAMP with a Bernoulli / zero-mean circular Gaussian prior and scalar variances.
    // Sparsity rate, active variance and noise variance are re-estimated by EM after every sweep.
    AngularChannelEstimate em_gamp_recover(const arma::cx_mat &sensing, const arma::cx_vec &y, double init_noise,
                                           const GampOptions &opts = {});

    // h = D_N^H h_a
    arma::cx_vec to_element_domain(const arma::cx_vec &h_a, const RisGeometry &geom);

    // (1/K) sum_k ||h_k - est_k||^2 / ||h_k||^2
    double nmse(const std::vector<arma::cx_vec> &truth, const std::vector<arma::cx_vec> &estimates);
}

#endif
