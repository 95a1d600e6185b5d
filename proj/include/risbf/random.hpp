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

#ifndef risbf_random_H
#define risbf_random_H

#include <armadillo>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace risbf
{
    using Rng = std::mt19937_64;

    // Circularly symmetric complex Gaussian sample with E|x|^2 = variance
    inline std::complex<double> complex_normal(Rng &rng, double variance)
    {
        if (variance <= 0.0)
            return {0.0, 0.0};
        std::normal_distribution<double> dist(0.0, std::sqrt(0.5 * variance));
        const double re = dist(rng);
        const double im = dist(rng);
        return {re, im};
    }

    inline arma::cx_vec complex_normal_vec(Rng &rng, arma::uword n, double variance)
    {
        arma::cx_vec out(n);
        for (auto &v : out)
            v = complex_normal(rng, variance);
        return out;
    }

    // splitmix64 finalizer
    inline std::uint64_t mix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // Order-sensitive combination of a seed with a list of coordinates
    inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts)
    {
        std::uint64_t h = mix64(seed);
        for (auto p : parts)
            h = mix64(h ^ mix64(p));
        return h;
    }
}

#endif
