// SPDX-License-Identifier: Apache-2.0
//
// fdmimo: 3D spatial correlation and elevation beamforming toolkit
// Copyright (C) 2026 The fdmimo authors
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

#include <benchmark/benchmark.h>

#include <vector>

#include "fdmimo/correlation.hpp"
#include "fdmimo/maxmin_sdp.hpp"
#include "fdmimo/specfun.hpp"

using namespace fdmimo;

namespace {

AngularSpectrum spectrum()
{
    AngularSpectrum s;
    s.elevation.mean = deg2rad(100.0);
    s.azimuth.mean = kPi / 3;
    return s;
}

void BM_TrigExpansion(benchmark::State &st)
{
    for (auto _ : st)
        benchmark::DoNotOptimize(specfun::build_trig_expansion(static_cast<int>(st.range(0))));
}
BENCHMARK(BM_TrigExpansion)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_ScfLag(benchmark::State &st)
{
    const auto ev = scf_evaluator(spectrum(), static_cast<int>(st.range(0)));
    ArrayGeometry g;
    int i = 0;
    for (auto _ : st)
        benchmark::DoNotOptimize(ev->at_lag(1 + i++ % 7, 3, g));
}
BENCHMARK(BM_ScfLag)->Arg(30)->Arg(60);

void BM_ElementCorrelation(benchmark::State &st)
{
    ArrayGeometry g;
    g.n_e = 10;
    g.n_bs = static_cast<int>(st.range(0));
    for (auto _ : st) {
        clear_scf_caches();
        benchmark::DoNotOptimize(build_element_correlation(spectrum(), g, 30));
    }
}
BENCHMARK(BM_ElementCorrelation)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Dinkelbach(benchmark::State &st)
{
    ArrayGeometry g;
    g.n_e = 10;
    g.n_bs = 12;
    std::vector<ElementCorrelationMatrix> users;
    Rng rng(1);
    for (int k = 0; k < st.range(0); ++k) {
        AngularSpectrum s = spectrum();
        s.elevation.mean = deg2rad(rng.uniform(92.0, 115.0));
        s.azimuth.mean = deg2rad(rng.uniform(-60.0, 60.0));
        users.push_back(build_element_correlation(s, g, 30));
    }
    const SdbProblem p(users);
    for (auto _ : st)
        benchmark::DoNotOptimize(dinkelbach(p, SolverConfig{}));
}
BENCHMARK(BM_Dinkelbach)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
