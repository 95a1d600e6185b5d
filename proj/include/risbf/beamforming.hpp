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

#ifndef risbf_beamforming_H
#define risbf_beamforming_H

#include "risbf/geometry.hpp"
#include "risbf/random.hpp"

#include <armadillo>
#include <vector>

namespace risbf
{
    struct BeamformingProblem
    {
        std::vector<cx> h_d;          // Direct link per user
        std::vector<arma::cx_vec> h;  // Cascaded channel per user, length N
        double sigma2 = 1.0;          // Noise power
        PhaseAlphabet alphabet{1};
        arma::uword t_max = 50;
        double eig_zero_tol = 1e-10;  // Eigenvalues d_i <= tol * d_max count as zero

        arma::uword users() const { return h.size(); }
        arma::uword elements() const { return h.empty() ? 0 : h.front().n_elem; }
        void validate() const;
    };

    // U = A A^H is never formed; A holds |eps_k| h_k in column k
    struct QuadraticForm
    {
        arma::cx_mat factor; // A, N x K
        arma::cx_vec v;
        double c = 0.0;

        arma::cx_mat dense_u() const { return factor * factor.t(); }
    };

    // Nonzero spectrum of U from the K x K Gram of the factor. Columns of `vectors` are orthonormal
    // eigenvectors of U for the eigenvalues in `values` (descending, only those above the threshold).
    struct LowRankEigen
    {
        arma::vec values;
        arma::cx_mat vectors;
        arma::uword rank() const { return values.n_elem; }
    };

    LowRankEigen lowrank_eigen(const QuadraticForm &qf, double zero_tol);

    struct LowRankOptions
    {
        bool refine = true;          // Coordinate ascent on the theta-polydisc after the closed form
        arma::uword max_sweeps = 2000;
        double tolerance = 1e-14;    // Relative objective gain per sweep that ends the refinement
    };

    struct QtlmState
    {
        arma::cx_vec theta_best;       // Accepted codeword
        arma::cx_vec theta_current;    // Last projected iterate
        arma::cx_vec theta_continuous; // Last unprojected solution
        arma::vec alpha;
        arma::cx_vec epsilon;
        std::vector<double> objective_history; // f_1 at theta0 and at every accepted iterate
        std::vector<double> f2b_history;       // f_2b of each candidate under its own quadratic form
        std::vector<arma::uword> ranks;        // Numerical rank of U per iteration
        arma::uword iterations = 0;
    };

    // gamma_k = |h_d,k + theta^T h_k|^2 / sigma^2
    arma::vec snr_per_user(const arma::cx_vec &theta, const BeamformingProblem &problem);

    arma::vec update_alpha(const arma::vec &gamma);

    // eps_k = sqrt(1 + alpha_k) c_k / (sigma^2 + |c_k|^2), c_k = h_d,k + theta^T h_k
    arma::cx_vec update_epsilon(const arma::cx_vec &theta, const arma::vec &alpha, const BeamformingProblem &problem);

    QuadraticForm assemble_quadratic(const arma::vec &alpha, const arma::cx_vec &epsilon, const BeamformingProblem &problem);

    // Continuous maximizer of f_2b with every |theta_n| <= 1
    arma::cx_vec solve_lowrank(const QuadraticForm &qf, const BeamformingProblem &problem, const LowRankOptions &opts = {});

    arma::cx_vec project_alphabet(const arma::cx_vec &theta, const PhaseAlphabet &alphabet);
    arma::uvec alphabet_indices(const arma::cx_vec &theta, const PhaseAlphabet &alphabet);
    arma::cx_vec codeword_from_indices(const arma::uvec &indices, const PhaseAlphabet &alphabet);

    // Uniformly random codeword over the alphabet
    arma::cx_vec random_codeword(arma::uword n, const PhaseAlphabet &alphabet, Rng &rng);

    QtlmState qtlm(const BeamformingProblem &problem, const arma::cx_vec &theta0, const LowRankOptions &opts = {});

    // Best of `starts` runs from random codewords
    QtlmState qtlm(const BeamformingProblem &problem, arma::uword starts, Rng &rng, const LowRankOptions &opts = {});

    // (h_d / |h_d|) conj(h_r) / ||h_r||, with the leading factor 1 when h_d = 0
    arma::cx_vec single_user_mrt(cx h_d, const arma::cx_vec &h_r);

    struct OracleResult
    {
        arma::cx_vec theta;
        double spectral_efficiency = 0.0;
    };

    inline constexpr unsigned max_oracle_bits = 20;

    // Global optimum of f_1 over all alphabet codewords; N tau <= 20
    OracleResult exhaustive_oracle(const BeamformingProblem &problem);

    double objective_f1(const arma::cx_vec &theta, const BeamformingProblem &problem);
    double objective_f1a(const arma::cx_vec &theta, const arma::vec &alpha, const BeamformingProblem &problem);
    double objective_f2a(const arma::cx_vec &theta, const arma::vec &alpha, const arma::cx_vec &epsilon,
                         const BeamformingProblem &problem);
    double objective_f2b(const arma::cx_vec &theta, const QuadraticForm &qf);
}

#endif
