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

#include "risbf/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace risbf
{
    namespace
    {
        // Effective channels c_k = h_d,k + theta^T h_k
        arma::cx_vec effective_channels(const arma::cx_vec &theta, const BeamformingProblem &problem)
        {
            if (theta.n_elem != problem.elements())
                throw std::invalid_argument("Reflection vector length does not match the channel length.");
            arma::cx_vec c(problem.users());
            for (arma::uword k = 0; k < problem.users(); ++k)
                c(k) = problem.h_d[k] + arma::accu(theta % problem.h[k]);
            return c;
        }

        // Householder reflectors that map the r orthonormal columns of V onto the first r unit vectors.
        // The product H = H_0 H_1 ... H_{r-1} is unitary; columns r .. N-1 of H span the orthogonal
        // complement of V, giving a deterministic completion of the basis.
        class Reflectors
        {
        public:
            explicit Reflectors(const arma::cx_mat &v) : n_(v.n_rows)
            {
                arma::cx_mat w = v;
                for (arma::uword j = 0; j < v.n_cols; ++j)
                {
                    arma::cx_vec u(n_, arma::fill::zeros);
                    const arma::cx_vec x = w.col(j).rows(j, n_ - 1);
                    const double xn = arma::norm(x);
                    const cx phase = std::abs(x(0)) > 0.0 ? x(0) / std::abs(x(0)) : cx(1.0, 0.0);
                    u.rows(j, n_ - 1) = x;
                    u(j) += phase * xn;
                    const double un = arma::norm(u);
                    if (un > 0.0)
                        u /= un;
                    us_.push_back(u);
                    // Apply H_j = I - 2 u u^H to the remaining columns
                    for (arma::uword c = j; c < v.n_cols; ++c)
                        w.col(c) -= 2.0 * u * arma::cdot(u, w.col(c));
                }
            }

            // H^H x
            arma::cx_vec apply_adjoint(arma::cx_vec x) const
            {
                for (const auto &u : us_)
                    x -= 2.0 * u * arma::cdot(u, x);
                return x;
            }

            // H x
            arma::cx_vec apply(arma::cx_vec x) const
            {
                for (auto it = us_.rbegin(); it != us_.rend(); ++it)
                    x -= 2.0 * (*it) * arma::cdot(*it, x);
                return x;
            }

        private:
            arma::uword n_;
            std::vector<arma::cx_vec> us_;
        };

        // Cyclic coordinate ascent of -||A^T theta||^2 + 2 Re(theta^T v) over |theta_n| <= 1
        void refine_polydisc(arma::cx_vec &theta, const QuadraticForm &qf, const LowRankOptions &opts)
        {
            const arma::cx_mat &a = qf.factor;
            const arma::uword n = theta.n_elem, k = a.n_cols;
            const arma::vec row_energy = arma::sum(arma::square(arma::abs(a)), 1);
            arma::cx_vec z = arma::strans(a) * theta; // z_k = sum_n A_nk theta_n

            for (arma::uword sweep = 0; sweep < opts.max_sweeps; ++sweep)
            {
                double gain = 0.0;
                for (arma::uword i = 0; i < n; ++i)
                {
                    const cx old = theta(i);
                    // c = v_i - sum_k A_ik conj(z_k without element i)
                    cx c = qf.v(i);
                    for (arma::uword m = 0; m < k; ++m)
                        c -= a(i, m) * std::conj(z(m) - a(i, m) * old);

                    const double aii = row_energy(i);
                    const double cm = std::abs(c);
                    cx x;
                    if (cm == 0.0)
                        x = aii > 0.0 ? cx(0.0, 0.0) : old;
                    else if (aii > 0.0 && cm <= aii)
                        x = std::conj(c) / aii;
                    else
                        x = std::conj(c) / cm;

                    const double before = -aii * std::norm(old) + 2.0 * std::real(old * c);
                    const double after = -aii * std::norm(x) + 2.0 * std::real(x * c);
                    if (after <= before)
                        continue;
                    gain += after - before;
                    for (arma::uword m = 0; m < k; ++m)
                        z(m) += a(i, m) * (x - old);
                    theta(i) = x;
                }
                const double level = std::abs(objective_f2b(theta, qf)) + std::numeric_limits<double>::min();
                if (gain <= opts.tolerance * level)
                    break;
            }
        }
    }

    void BeamformingProblem::validate() const
    {
        if (h.empty())
            throw std::invalid_argument("Beamforming problem needs at least one user.");
        if (h_d.size() != h.size())
            throw std::invalid_argument("Direct and cascaded channel counts differ.");
        if (!(sigma2 > 0.0))
            throw std::invalid_argument("Noise power must be positive.");
        const arma::uword n = h.front().n_elem;
        if (n == 0)
            throw std::invalid_argument("Cascaded channels cannot be empty.");
        for (const auto &hk : h)
            if (hk.n_elem != n)
                throw std::invalid_argument("All cascaded channels must have the same length.");
        if (!(eig_zero_tol >= 0.0))
            throw std::invalid_argument("Eigenvalue threshold cannot be negative.");
    }

    arma::vec snr_per_user(const arma::cx_vec &theta, const BeamformingProblem &problem)
    {
        return arma::square(arma::abs(effective_channels(theta, problem))) / problem.sigma2;
    }

    arma::vec update_alpha(const arma::vec &gamma)
    {
        if (arma::any(gamma < 0.0))
            throw std::invalid_argument("SNR values cannot be negative.");
        return gamma;
    }

    arma::cx_vec update_epsilon(const arma::cx_vec &theta, const arma::vec &alpha, const BeamformingProblem &problem)
    {
        if (alpha.n_elem != problem.users())
            throw std::invalid_argument("Alpha length must equal the user count.");
        const arma::cx_vec c = effective_channels(theta, problem);
        arma::cx_vec eps(problem.users());
        for (arma::uword k = 0; k < problem.users(); ++k)
            eps(k) = std::sqrt(1.0 + alpha(k)) * c(k) / (problem.sigma2 + std::norm(c(k)));
        return eps;
    }

    QuadraticForm assemble_quadratic(const arma::vec &alpha, const arma::cx_vec &epsilon, const BeamformingProblem &problem)
    {
        const arma::uword k_users = problem.users(), n = problem.elements();
        if (alpha.n_elem != k_users || epsilon.n_elem != k_users)
            throw std::invalid_argument("Alpha and epsilon lengths must equal the user count.");

        QuadraticForm qf;
        qf.factor.set_size(n, k_users);
        qf.v.zeros(n);
        qf.c = 0.0;
        for (arma::uword k = 0; k < k_users; ++k)
        {
            const double e2 = std::norm(epsilon(k));
            const double root = std::sqrt(1.0 + alpha(k));
            const cx hd = problem.h_d[k];
            qf.factor.col(k) = std::abs(epsilon(k)) * problem.h[k];
            qf.v += (root * std::conj(epsilon(k)) - e2 * std::conj(hd)) * problem.h[k];
            qf.c += 2.0 * root * std::real(std::conj(epsilon(k)) * hd) - e2 * problem.sigma2 - e2 * std::norm(hd);
        }
        return qf;
    }

    LowRankEigen lowrank_eigen(const QuadraticForm &qf, double zero_tol)
    {
        LowRankEigen out;
        const arma::cx_mat gram = qf.factor.t() * qf.factor;
        arma::vec d;
        arma::cx_mat w;
        if (!arma::eig_sym(d, w, gram))
            throw std::runtime_error("Eigendecomposition of the Gram matrix failed.");

        const double d_max = d.is_empty() ? 0.0 : d.max();
        if (!(d_max > 0.0))
        {
            out.vectors.set_size(qf.factor.n_rows, 0);
            return out;
        }

        // eig_sym sorts ascending; keep the significant ones in descending order
        std::vector<arma::uword> keep;
        for (arma::uword i = d.n_elem; i-- > 0;)
            if (d(i) > zero_tol * d_max)
                keep.push_back(i);

        out.values.set_size(keep.size());
        out.vectors.set_size(qf.factor.n_rows, keep.size());
        for (arma::uword j = 0; j < keep.size(); ++j)
        {
            out.values(j) = d(keep[j]);
            out.vectors.col(j) = qf.factor * w.col(keep[j]) / std::sqrt(d(keep[j]));
        }
        return out;
    }

    arma::cx_vec solve_lowrank(const QuadraticForm &qf, const BeamformingProblem &problem, const LowRankOptions &opts)
    {
        const arma::uword n = qf.v.n_elem;
        if (qf.factor.n_rows != n)
            throw std::invalid_argument("Quadratic form factor and v have different lengths.");

        const LowRankEigen eig = lowrank_eigen(qf, problem.eig_zero_tol);
        const arma::uword r = eig.rank();
        const double b_zero = 1e-12 * std::max(arma::norm(qf.v), std::numeric_limits<double>::min());

        // Range coordinates: omega_i = min(|b_i| / d_i, 1) e^{j angle b_i}
        arma::cx_vec theta_conj(n, arma::fill::zeros);
        for (arma::uword i = 0; i < r; ++i)
        {
            const cx b = arma::cdot(eig.vectors.col(i), qf.v);
            const double mag = std::min(std::abs(b) / eig.values(i), 1.0);
            const cx omega = std::abs(b) > 0.0 ? mag * b / std::abs(b) : cx(0.0, 0.0);
            theta_conj += omega * eig.vectors.col(i);
        }

        // Null-space coordinates: omega_i = e^{j angle b_i}, or 1 when b_i vanishes
        const Reflectors householder(eig.vectors);
        arma::cx_vec b_all = householder.apply_adjoint(qf.v);
        arma::cx_vec omega_null(n, arma::fill::zeros);
        for (arma::uword i = r; i < n; ++i)
            omega_null(i) = std::abs(b_all(i)) > b_zero ? b_all(i) / std::abs(b_all(i)) : cx(1.0, 0.0);
        theta_conj += householder.apply(omega_null);

        arma::cx_vec theta = arma::conj(theta_conj);
        for (auto &t : theta)
            if (std::abs(t) > 1.0)
                t /= std::abs(t);

        if (opts.refine)
            refine_polydisc(theta, qf, opts);
        return theta;
    }

    arma::uvec alphabet_indices(const arma::cx_vec &theta, const PhaseAlphabet &alphabet)
    {
        arma::uvec idx(theta.n_elem);
        for (arma::uword i = 0; i < theta.n_elem; ++i)
            idx(i) = alphabet.nearest_index(theta(i));
        return idx;
    }

    arma::cx_vec codeword_from_indices(const arma::uvec &indices, const PhaseAlphabet &alphabet)
    {
        arma::cx_vec out(indices.n_elem);
        for (arma::uword i = 0; i < indices.n_elem; ++i)
        {
            if (indices(i) >= alphabet.size())
                throw std::invalid_argument("Codeword index outside the phase alphabet.");
            out(i) = alphabet[indices(i)];
        }
        return out;
    }

    arma::cx_vec project_alphabet(const arma::cx_vec &theta, const PhaseAlphabet &alphabet)
    {
        return codeword_from_indices(alphabet_indices(theta, alphabet), alphabet);
    }

    arma::cx_vec random_codeword(arma::uword n, const PhaseAlphabet &alphabet, Rng &rng)
    {
        std::uniform_int_distribution<arma::uword> pick(0, alphabet.size() - 1);
        arma::cx_vec out(n);
        for (auto &t : out)
            t = alphabet[pick(rng)];
        return out;
    }

    QtlmState qtlm(const BeamformingProblem &problem, const arma::cx_vec &theta0, const LowRankOptions &opts)
    {
        problem.validate();
        if (theta0.n_elem != problem.elements())
            throw std::invalid_argument("Initial codeword length does not match the channel length.");
        for (const auto &t : theta0)
            if (std::abs(problem.alphabet[problem.alphabet.nearest_index(t)] - t) > 1e-9)
                throw std::invalid_argument("Initial codeword must lie in the phase alphabet.");

        QtlmState st;
        st.theta_best = theta0;
        st.theta_current = theta0;
        st.theta_continuous = theta0;
        st.objective_history.push_back(objective_f1(theta0, problem));

        for (arma::uword t = 0; t < problem.t_max; ++t)
        {
            st.alpha = update_alpha(snr_per_user(st.theta_best, problem));
            st.epsilon = update_epsilon(st.theta_best, st.alpha, problem);
            const QuadraticForm qf = assemble_quadratic(st.alpha, st.epsilon, problem);
            st.ranks.push_back(lowrank_eigen(qf, problem.eig_zero_tol).rank());

            st.theta_continuous = solve_lowrank(qf, problem, opts);
            st.theta_current = project_alphabet(st.theta_continuous, problem.alphabet);
            ++st.iterations;

            const double candidate = objective_f2b(st.theta_current, qf);
            const double incumbent = objective_f2b(st.theta_best, qf);
            st.f2b_history.push_back(candidate);

            // Strict increase, with a rounding margin so that equal codewords are never re-accepted
            const double margin = 1e-12 * std::max(1.0, std::abs(incumbent));
            if (candidate > incumbent + margin)
            {
                st.theta_best = st.theta_current;
                st.objective_history.push_back(objective_f1(st.theta_best, problem));
            }
            else
                break;
        }
        return st;
    }

    QtlmState qtlm(const BeamformingProblem &problem, arma::uword starts, Rng &rng, const LowRankOptions &opts)
    {
        problem.validate();
        if (starts < 1)
            throw std::invalid_argument("QTLM needs at least one start.");
        QtlmState best;
        double best_value = -std::numeric_limits<double>::infinity();
        for (arma::uword s = 0; s < starts; ++s)
        {
            const arma::cx_vec theta0 = random_codeword(problem.elements(), problem.alphabet, rng);
            QtlmState st = qtlm(problem, theta0, opts);
            const double value = st.objective_history.back();
            if (value > best_value)
            {
                best_value = value;
                best = std::move(st);
            }
        }
        return best;
    }

    arma::cx_vec single_user_mrt(cx h_d, const arma::cx_vec &h_r)
    {
        const double norm = arma::norm(h_r);
        if (h_r.is_empty() || norm == 0.0)
            throw std::invalid_argument("MRT needs a nonzero RIS-user channel.");
        const cx lead = std::abs(h_d) > 0.0 ? h_d / std::abs(h_d) : cx(1.0, 0.0);
        return lead * arma::conj(h_r) / norm;
    }

    OracleResult exhaustive_oracle(const BeamformingProblem &problem)
    {
        problem.validate();
        const arma::uword n = problem.elements(), k_users = problem.users();
        const unsigned tau = problem.alphabet.tau();
        if (n * tau > max_oracle_bits)
            throw std::invalid_argument("Exhaustive search limited to N * tau <= 20 bits.");

        const arma::uword levels = problem.alphabet.size();
        const std::uint64_t count = std::uint64_t(1) << (n * tau);

        // contrib(m, n, k) = alphabet[m] * h_k[n]
        arma::cx_cube contrib(levels, n, k_users);
        for (arma::uword k = 0; k < k_users; ++k)
            for (arma::uword i = 0; i < n; ++i)
                for (arma::uword m = 0; m < levels; ++m)
                    contrib(m, i, k) = problem.alphabet[m] * problem.h[k](i);

        OracleResult best;
        best.spectral_efficiency = -1.0;
        std::uint64_t best_code = 0;
        for (std::uint64_t code = 0; code < count; ++code)
        {
            double se = 0.0;
            for (arma::uword k = 0; k < k_users; ++k)
            {
                cx acc = problem.h_d[k];
                for (arma::uword i = 0; i < n; ++i)
                    acc += contrib((code >> (tau * i)) & (levels - 1), i, k);
                se += std::log2(1.0 + std::norm(acc) / problem.sigma2);
            }
            if (se > best.spectral_efficiency)
            {
                best.spectral_efficiency = se;
                best_code = code;
            }
        }

        arma::uvec idx(n);
        for (arma::uword i = 0; i < n; ++i)
            idx(i) = (best_code >> (tau * i)) & (levels - 1);
        best.theta = codeword_from_indices(idx, problem.alphabet);
        return best;
    }

    double objective_f1(const arma::cx_vec &theta, const BeamformingProblem &problem)
    {
        return arma::accu(arma::log2(1.0 + snr_per_user(theta, problem)));
    }

    double objective_f1a(const arma::cx_vec &theta, const arma::vec &alpha, const BeamformingProblem &problem)
    {
        const arma::vec gamma = snr_per_user(theta, problem);
        if (alpha.n_elem != gamma.n_elem)
            throw std::invalid_argument("Alpha length must equal the user count.");
        return arma::accu(arma::log2(1.0 + alpha)) - arma::accu(alpha) + arma::accu((1.0 + alpha) % gamma / (1.0 + gamma));
    }

    double objective_f2a(const arma::cx_vec &theta, const arma::vec &alpha, const arma::cx_vec &epsilon,
                         const BeamformingProblem &problem)
    {
        const arma::cx_vec c = effective_channels(theta, problem);
        if (alpha.n_elem != c.n_elem || epsilon.n_elem != c.n_elem)
            throw std::invalid_argument("Alpha and epsilon lengths must equal the user count.");
        double f = 0.0;
        for (arma::uword k = 0; k < c.n_elem; ++k)
            f += 2.0 * std::sqrt(1.0 + alpha(k)) * std::real(std::conj(epsilon(k)) * c(k)) -
                 std::norm(epsilon(k)) * (problem.sigma2 + std::norm(c(k)));
        return f;
    }

    double objective_f2b(const arma::cx_vec &theta, const QuadraticForm &qf)
    {
        if (theta.n_elem != qf.v.n_elem)
            throw std::invalid_argument("Reflection vector length does not match the quadratic form.");
        const arma::cx_vec z = arma::strans(qf.factor) * theta;
        return -arma::accu(arma::square(arma::abs(z))) + 2.0 * std::real(arma::accu(theta % qf.v)) + qf.c;
    }
}
