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

#include "risbf/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace risbf
{
    namespace
    {
        // Lower bounds that keep the EM updates away from degenerate priors
        constexpr double min_sparsity = 1e-6;
        constexpr double max_sparsity = 1.0 - 1e-6;
        constexpr double relative_noise_floor = 1e-12;

        struct Denoised
        {
            arma::cx_vec mean;
            arma::vec variance;
            arma::vec active_prob; // pi_j
            arma::cx_vec active_mean;
            double active_var; // common to all entries since v_r is a scalar
        };

        // Posterior of x ~ (1 - lambda) delta_0 + lambda CN(0, phi) observed as r = x + CN(0, v_r)
        Denoised bernoulli_gauss(const arma::cx_vec &r, double v_r, double lambda, double phi)
        {
            Denoised d;
            const arma::uword n = r.n_elem;
            d.mean.set_size(n);
            d.variance.set_size(n);
            d.active_prob.set_size(n);
            d.active_mean.set_size(n);

            const double shrink = phi / (phi + v_r);
            d.active_var = phi * v_r / (phi + v_r);
            const double log_prior = std::log((1.0 - lambda) / lambda) + std::log1p(phi / v_r);

            for (arma::uword j = 0; j < n; ++j)
            {
                const double r2 = std::norm(r(j));
                // log of p(r | inactive) / p(r | active)
                const double llr = log_prior - r2 * shrink / v_r;
                const double pi = llr > 0.0 ? std::exp(-llr) / (1.0 + std::exp(-llr)) : 1.0 / (1.0 + std::exp(llr));
                const cx gamma = shrink * r(j);
                d.active_prob(j) = pi;
                d.active_mean(j) = gamma;
                d.mean(j) = pi * gamma;
                d.variance(j) = pi * d.active_var + pi * (1.0 - pi) * std::norm(gamma);
            }
            return d;
        }
    }

    SensingPlan generate_sensing_plan(const RisGeometry &geom, arma::uword slots, Rng &rng)
    {
        return generate_sensing_plan(geom, arma::cx_vec(slots, arma::fill::ones), rng);
    }

    SensingPlan generate_sensing_plan(const RisGeometry &geom, const arma::cx_vec &pilots, Rng &rng)
    {
        geom.validate();
        if (pilots.n_elem < 1)
            throw std::invalid_argument("Sensing plan needs at least one slot.");
        for (const auto &s : pilots)
            if (std::abs(std::abs(s) - 1.0) > 1e-9)
                throw std::invalid_argument("Pilot symbols must have unit modulus.");

        const arma::uword n = geom.elements();
        const arma::uword slots = pilots.n_elem;
        SensingPlan plan;
        plan.pilots = pilots;
        plan.reflections.set_size(n, slots);

        // Column-major fill: slot by slot, element by element
        std::bernoulli_distribution coin(0.5);
        for (arma::uword p = 0; p < slots; ++p)
            for (arma::uword i = 0; i < n; ++i)
                plan.reflections(i, p) = coin(rng) ? 1.0 : -1.0;

        const AngularBasis basis(geom);
        const arma::cx_mat theta = arma::conv_to<arma::cx_mat>::from(plan.reflections);
        plan.sensing = arma::strans(basis.conj_forward_columns(theta));
        return plan;
    }

    cx estimate_direct_ls(const arma::cx_vec &pilots, const arma::cx_vec &y_off)
    {
        if (pilots.n_elem != y_off.n_elem || pilots.n_elem == 0)
            throw std::invalid_argument("Pilots and RIS-off samples must have equal, nonzero length.");
        const double energy = arma::accu(arma::square(arma::abs(pilots)));
        if (energy == 0.0)
            throw std::invalid_argument("Direct-link LS needs nonzero pilots.");
        return arma::cdot(pilots, y_off) / energy;
    }

    arma::cx_vec remove_direct(const arma::cx_vec &y, cx h_d, const arma::cx_vec &pilots)
    {
        if (y.n_elem != pilots.n_elem)
            throw std::invalid_argument("Samples and pilots must have equal length.");
        return y - h_d * pilots;
    }

    void GampOptions::validate() const
    {
        if (max_iterations < 1)
            throw std::invalid_argument("GAMP needs at least one iteration.");
        if (!(damping > 0.0 && damping <= 1.0))
            throw std::invalid_argument("GAMP damping must lie in (0, 1].");
        if (!(tolerance > 0.0))
            throw std::invalid_argument("GAMP tolerance must be positive.");
        if (!(initial_sparsity > 0.0 && initial_sparsity < 1.0))
            throw std::invalid_argument("Initial sparsity rate must lie in (0, 1).");
        if (divergence_window < 1 || !(divergence_factor > 1.0))
            throw std::invalid_argument("Invalid divergence guard.");
    }

    std::string_view to_string(GampStatus status)
    {
        switch (status)
        {
        case GampStatus::converged: return "converged";
        case GampStatus::max_iterations: return "max_iterations";
        case GampStatus::diverged: return "diverged";
        }
        return "unknown";
    }

    AngularChannelEstimate em_gamp_recover(const arma::cx_mat &sensing, const arma::cx_vec &y, double init_noise,
                                           const GampOptions &opts)
    {
        opts.validate();
        if (sensing.n_rows != y.n_elem)
            throw std::invalid_argument("Sensing matrix rows must match the measurement length.");
        if (!(init_noise > 0.0))
            throw std::invalid_argument("Initial noise variance must be positive.");

        const arma::uword m = sensing.n_rows, n = sensing.n_cols;
        const double frob2 = arma::accu(arma::square(arma::abs(sensing)));
        const double y2 = arma::accu(arma::square(arma::abs(y)));

        AngularChannelEstimate est;
        est.sparsity_rate = opts.initial_sparsity;
        est.noise_variance = init_noise;
        est.h_a.zeros(n);

        if (frob2 == 0.0)
            throw std::invalid_argument("Sensing matrix is all zeros.");
        if (y2 == 0.0)
        {
            est.variances.zeros(n);
            est.active_variance = std::numeric_limits<double>::min();
            est.status = GampStatus::converged;
            return est;
        }

        const double row_scale = frob2 / double(m);
        const double col_scale = frob2 / double(n);
        const double noise_floor = relative_noise_floor * y2 / double(m);
        const double beta = opts.damping;

        double lambda = opts.initial_sparsity;
        double phi = y2 / (frob2 * lambda);
        double psi = init_noise;

        arma::cx_vec xhat(n, arma::fill::zeros);
        arma::vec vx(n, arma::fill::value(lambda * phi));
        arma::cx_vec shat(m, arma::fill::zeros);
        arma::cx_vec ax(m, arma::fill::zeros);
        double vs = 0.0;

        const double initial_residual = std::sqrt(y2);
        arma::uword growth_run = 0;
        est.status = GampStatus::max_iterations;

        arma::uword it = 0;
        for (it = 1; it <= opts.max_iterations; ++it)
        {
            // Output channel
            const double vp = row_scale * arma::mean(vx);
            const arma::cx_vec phat = ax - vp * shat;
            const double vs_new = 1.0 / (vp + psi);
            const arma::cx_vec shat_new = (y - phat) * vs_new;

            // z posterior for the noise update
            const arma::cx_vec zhat = (psi * phat + vp * y) / (vp + psi);
            const double vz = vp * psi / (vp + psi);

            if (it == 1)
            {
                shat = shat_new;
                vs = vs_new;
            }
            else
            {
                shat = beta * shat_new + (1.0 - beta) * shat;
                vs = beta * vs_new + (1.0 - beta) * vs;
            }

            // Input channel
            const double vr = 1.0 / (col_scale * vs);
            const arma::cx_vec rhat = xhat + vr * (sensing.t() * shat);
            const Denoised d = bernoulli_gauss(rhat, vr, lambda, phi);

            const arma::cx_vec xhat_old = xhat;
            xhat = beta * d.mean + (1.0 - beta) * xhat;
            vx = beta * d.variance + (1.0 - beta) * vx;

            // EM hyperparameter updates
            const double pi_sum = arma::accu(d.active_prob);
            lambda = std::clamp(pi_sum / double(n), min_sparsity, max_sparsity);
            if (pi_sum > 0.0)
            {
                const double second = arma::accu(d.active_prob % (arma::square(arma::abs(d.active_mean)) + d.active_var));
                phi = std::max(second / pi_sum, std::numeric_limits<double>::min());
            }
            psi = std::max(arma::mean(arma::square(arma::abs(y - zhat))) + vz, noise_floor);

            if (!xhat.is_finite() || !std::isfinite(psi))
            {
                est.status = GampStatus::diverged;
                break;
            }

            ax = sensing * xhat;
            const double residual = arma::norm(y - ax);
            growth_run = residual > opts.divergence_factor * initial_residual ? growth_run + 1 : 0;
            if (growth_run >= opts.divergence_window)
            {
                est.status = GampStatus::diverged;
                break;
            }

            const double xnorm = arma::norm(xhat);
            const double change = arma::norm(xhat - xhat_old);
            if (xnorm > 0.0 && change <= opts.tolerance * xnorm)
            {
                est.status = GampStatus::converged;
                break;
            }
        }

        est.iterations = std::min(it, opts.max_iterations);
        est.h_a = xhat;
        est.variances = vx;
        est.sparsity_rate = lambda;
        est.active_variance = phi;
        est.noise_variance = psi;
        est.residual = xhat.is_finite() ? arma::norm(y - sensing * xhat) : std::numeric_limits<double>::infinity();
        return est;
    }

    arma::cx_vec to_element_domain(const arma::cx_vec &h_a, const RisGeometry &geom)
    {
        geom.validate();
        return AngularBasis(geom).inverse(h_a);
    }

    double nmse(const std::vector<arma::cx_vec> &truth, const std::vector<arma::cx_vec> &estimates)
    {
        if (truth.empty() || truth.size() != estimates.size())
            throw std::invalid_argument("NMSE needs matching, nonempty lists.");
        double acc = 0.0;
        for (std::size_t k = 0; k < truth.size(); ++k)
        {
            if (truth[k].n_elem != estimates[k].n_elem)
                throw std::invalid_argument("NMSE vectors must have equal length.");
            const double ref = arma::accu(arma::square(arma::abs(truth[k])));
            if (ref == 0.0)
                throw std::invalid_argument("NMSE is undefined for an all-zero true channel.");
            acc += arma::accu(arma::square(arma::abs(truth[k] - estimates[k]))) / ref;
        }
        return acc / double(truth.size());
    }
}
