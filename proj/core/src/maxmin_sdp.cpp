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

#include "fdmimo/maxmin_sdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fdmimo/beamforming.hpp"
#include "fdmimo/linalg.hpp"
#include "fdmimo/parallel.hpp"
#include "fdmimo/rng.hpp"

namespace fdmimo {

void SolverConfig::validate() const
{
    if (!(inner_tol > 0.0) || !(eps > 0.0))
        throw std::invalid_argument("SolverConfig: tolerances must be positive");
    if (inner_max_iter < 1 || inner_plateau < 1 || max_outer < 1 || trials < 1)
        throw std::invalid_argument("SolverConfig: iteration counts must be >= 1");
}

SdbProblem::SdbProblem(const std::vector<ElementCorrelationMatrix> &users, const std::vector<int> &members,
                       int port_begin, int port_count)
{
    if (users.empty())
        throw std::invalid_argument("SdbProblem: no users");
    const ArrayGeometry &geom = users.front().geometry;
    n_e_ = geom.n_e;
    if (port_count < 0)
        port_count = geom.n_bs - port_begin;
    if (port_begin < 0 || port_count < 1 || port_begin + port_count > geom.n_bs)
        throw std::invalid_argument("SdbProblem: port range outside the array");
    n_ports_ = port_count;
    if (members.empty()) {
        members_.resize(users.size());
        std::iota(members_.begin(), members_.end(), 0);
    } else {
        members_ = members;
    }
    for (int m : members_)
        if (m < 0 || static_cast<std::size_t>(m) >= users.size())
            throw std::out_of_range("SdbProblem: member index " + std::to_string(m) + " out of range");

    const int n = n_e_;
    const int p0 = port_begin, np = port_count;
    const std::size_t kk = members_.size();

    // total over members of the port-range submatrix, for S_k = total - R_k
    const Eigen::Index span = static_cast<Eigen::Index>(np) * n;
    CMatrix total = CMatrix::Zero(span, span);
    for (int m : members_) {
        const auto &u = users[m];
        if (u.geometry.n_e != n || u.geometry.n_bs != geom.n_bs)
            throw std::invalid_argument("SdbProblem: users have different array sizes");
        total += u.entries.block(static_cast<Eigen::Index>(p0) * n, static_cast<Eigen::Index>(p0) * n, span, span);
    }

    diag_sum_.resize(kk);
    q_.resize(kk);
    scale_ = 0.0;
    for (std::size_t i = 0; i < kk; ++i) {
        const CMatrix rk = users[members_[i]].entries.block(static_cast<Eigen::Index>(p0) * n,
                                                             static_cast<Eigen::Index>(p0) * n, span, span);
        const CMatrix sk = total - rk;
        CMatrix a = CMatrix::Zero(n, n);
        for (int s = 0; s < np; ++s)
            a += rk.block(s * n, s * n, n, n);
        diag_sum_[i] = hermitize(a);
        scale_ = std::max(scale_, std::abs(a.trace().real()) / n);

        CMatrix q = CMatrix::Zero(n * n, n * n);
        for (int s = 0; s < np; ++s) {
            for (int t = 0; t < np; ++t) {
                const CMatrix r_st = rk.block(s * n, t * n, n, n);
                const CMatrix s_ts = sk.block(t * n, s * n, n, n);
                // (S_ts)^T (x) R_st
                for (int p = 0; p < n; ++p)
                    for (int c = 0; c < n; ++c)
                        q.block(p * n, c * n, n, n) += s_ts(c, p) * r_st;
            }
        }
        q_[i] = hermitize(q);
    }
    if (!(scale_ > 0.0))
        scale_ = 1.0;
}

double SdbProblem::f(int k, const CMatrix &w) const
{
    const CMatrix &a = diag_sum_.at(k);
    if (w.rows() != n_e_ || w.cols() != n_e_)
        throw std::invalid_argument("SdbProblem::f: W has wrong size");
    return (w.array() * a.transpose().array()).sum().real();
}

double SdbProblem::g_squared(int k, const CMatrix &w) const
{
    if (w.rows() != n_e_ || w.cols() != n_e_)
        throw std::invalid_argument("SdbProblem::g: W has wrong size");
    const CVector x = vec(w);
    const double v = x.dot(q_.at(k) * x).real();
    if (v < 0.0) {
        const double tol = 1e-12 * std::max(1.0, scale_ * scale_) * std::max(1.0, x.squaredNorm());
        if (v < -tol)
            throw std::domain_error("SdbProblem: negative interference power " + std::to_string(v) +
                                    "; W or the correlations are not Hermitian");
        return 0.0;
    }
    return v;
}

double SdbProblem::g(int k, const CMatrix &w) const
{
    return std::sqrt(g_squared(k, w));
}

CMatrix SdbProblem::grad_g(int k, const CMatrix &w) const
{
    const double gv = g(k, w);
    if (!(gv > 0.0))
        return CMatrix::Zero(n_e_, n_e_);
    return hermitize(unvec(q_.at(k) * vec(w), n_e_)) / gv;
}

double SdbProblem::ratio(int k, const CMatrix &w) const
{
    const double gv = g(k, w);
    if (!(gv > 0.0))
        return kInterferenceFree;
    return f(k, w) / gv;
}

double SdbProblem::sir(int k, const CMatrix &w) const
{
    const double g2 = g_squared(k, w);
    if (!(g2 > 0.0))
        return kInterferenceFree;
    const double fv = f(k, w);
    return fv * fv / g2;
}

double SdbProblem::min_sir(const CMatrix &w) const
{
    double m = kInterferenceFree;
    for (int k = 0; k < this->k(); ++k)
        m = std::min(m, sir(k, w));
    return m;
}

double SdbProblem::min_sir_vector(const CVector &w) const
{
    return min_sir(w * w.adjoint());
}

double SdbProblem::objective(double lambda, const CMatrix &w, int *argmin) const
{
    double best = 0.0;
    int arg = -1;
    for (int k = 0; k < this->k(); ++k) {
        const double v = f(k, w) - lambda * g(k, w);
        if (arg < 0 || v < best) {
            best = v;
            arg = k;
        }
    }
    if (argmin)
        *argmin = arg;
    return best;
}

RVector project_to_simplex(const RVector &v)
{
    const Eigen::Index n = v.size();
    if (n == 0)
        throw std::invalid_argument("project_to_simplex: empty vector");
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cum += u[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0)
            tau = t;
    }
    return (v.array() - tau).cwiseMax(0.0).matrix();
}

CMatrix project_to_spectrahedron(const CMatrix &a)
{
    if (a.rows() != a.cols() || a.rows() == 0)
        throw std::invalid_argument("project_to_spectrahedron: matrix must be square and non-empty");
    const HermitianEigen e = hermitian_eigen(hermitize(a));
    const RVector lam = project_to_simplex(e.values);
    return hermitize(e.vectors * lam.cast<cplx>().asDiagonal() * e.vectors.adjoint());
}

namespace {

CMatrix initial_point(const SdbProblem &problem, const CMatrix &start)
{
    const int n = problem.n_e();
    if (start.size() == 0)
        return CMatrix::Identity(n, n) / static_cast<double>(n);
    if (start.rows() != n || start.cols() != n)
        throw std::invalid_argument("inner_maxmin: start point has wrong size");
    // a feasible start goes through untouched; re-projecting moves it by an ulp or so, which
    // is enough to make a warm-started ratio step backwards when nothing better is found
    const double tol = 1e-12;
    if ((start - start.adjoint()).norm() <= tol && std::abs(start.trace() - 1.0) <= tol) {
        const Eigen::SelfAdjointEigenSolver<CMatrix> es(start, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() >= -tol)
            return start;
    }
    return project_to_spectrahedron(start);
}

} // namespace

InnerResult inner_maxmin(double lambda, const SdbProblem &problem, const SolverConfig &cfg, const CMatrix &start)
{
    if (!(lambda >= 0.0))
        throw std::invalid_argument("inner_maxmin: lambda must be non-negative");
    if (cfg.inner_method == InnerMethod::supergradient)
        return inner_maxmin_supergradient(lambda, problem, cfg, start);
    return inner_maxmin_smoothed(lambda, problem, cfg, start);
}

InnerResult inner_maxmin_supergradient(double lambda, const SdbProblem &problem, const SolverConfig &cfg,
                                       const CMatrix &start)
{
    CMatrix w = initial_point(problem, start);

    double amax = 0.0;
    for (int k = 0; k < problem.k(); ++k)
        amax = std::max(amax, problem.diag_sum(k).norm());
    const double c = amax > 0.0 ? 1.0 / amax : 1.0;
    const double tol = cfg.inner_tol * problem.scale();

    InnerResult res;
    int arg = 0;
    double val = problem.objective(lambda, w, &arg);
    res.w = w;
    res.objective = val;
    double plateau_ref = val;
    int since = 0;
    for (int t = 1; t <= cfg.inner_max_iter; ++t) {
        CMatrix grad = problem.diag_sum(arg);
        if (lambda > 0.0)
            grad -= lambda * problem.grad_g(arg, w);
        w = project_to_spectrahedron(w + (c / std::sqrt(static_cast<double>(t))) * grad);
        val = problem.objective(lambda, w, &arg);
        res.iterations = t;
        if (val > res.objective) {
            res.objective = val;
            res.w = w;
        }
        if (res.objective > plateau_ref + tol) {
            plateau_ref = res.objective;
            since = 0;
        } else if (++since >= cfg.inner_plateau) {
            res.converged = true;
            break;
        }
    }
    return res;
}

InnerResult inner_maxmin_smoothed(double lambda, const SdbProblem &problem, const SolverConfig &cfg,
                                  const CMatrix &start)
{
    const int kk = problem.k();
    CMatrix w = initial_point(problem, start);
    std::vector<double> h(kk), p(kk);

    // soft-min value and weights at w
    auto smooth = [&](const CMatrix &x, double mu, double *hard) {
        double lo = 0.0;
        for (int k = 0; k < kk; ++k) {
            h[k] = problem.f(k, x) - lambda * problem.g(k, x);
            lo = (k == 0) ? h[k] : std::min(lo, h[k]);
        }
        double z = 0.0;
        for (int k = 0; k < kk; ++k) {
            p[k] = std::exp(-(h[k] - lo) / mu);
            z += p[k];
        }
        for (double &v : p)
            v /= z;
        if (hard)
            *hard = lo;
        return lo - mu * std::log(z);
    };
    auto gradient = [&](const CMatrix &x) {
        CMatrix gsum = CMatrix::Zero(x.rows(), x.cols());
        for (int k = 0; k < kk; ++k) {
            if (p[k] < 1e-300)
                continue;
            gsum += p[k] * problem.diag_sum(k);
            if (lambda > 0.0)
                gsum -= (p[k] * lambda) * problem.grad_g(k, x);
        }
        return gsum;
    };

    InnerResult res;
    res.w = w;
    res.objective = problem.objective(lambda, w);
    const double scale = problem.scale();
    const double tol = cfg.inner_tol * scale;
    double amax = 0.0;
    for (int k = 0; k < kk; ++k)
        amax = std::max(amax, problem.diag_sum(k).norm());
    double step = amax > 0.0 ? 1.0 / amax : 1.0;

    int total = 0;
    bool budget_left = true;
    for (double mu_rel = 1e-2; mu_rel >= 1e-8 * 0.999 && budget_left; mu_rel *= 0.1) {
        const double mu = mu_rel * scale;
        double hard = 0.0;
        double val = smooth(w, mu, &hard);
        int since = 0;
        double stage_ref = val;
        while (true) {
            if (total >= cfg.inner_max_iter) {
                budget_left = false;
                break;
            }
            ++total;
            const CMatrix grad = gradient(w);
            // Armijo backtracking along the projection arc
            CMatrix cand;
            double cand_val = 0.0, cand_hard = 0.0;
            bool accepted = false;
            for (int bt = 0; bt < 60; ++bt) {
                cand = project_to_spectrahedron(w + step * grad);
                cand_val = smooth(cand, mu, &cand_hard);
                const double lin = (grad.adjoint() * (cand - w)).trace().real();
                const double dist2 = (cand - w).squaredNorm();
                if (cand_val >= val + lin - dist2 / (2.0 * step) - 1e-15 * scale) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted)
                break;
            const double gain = cand_val - val;
            const double moved = (cand - w).norm();
            w = cand;
            val = cand_val;
            hard = cand_hard;
            if (hard > res.objective) {
                res.objective = hard;
                res.w = w;
            }
            step *= 2.0;
            if (gain <= 1e-3 * tol || moved < 1e-12) {
                break;
            }
            if (val > stage_ref + tol) {
                stage_ref = val;
                since = 0;
            } else if (++since >= cfg.inner_plateau) {
                break;
            }
            smooth(w, mu, nullptr); // refresh weights for the next gradient
        }
    }
    res.iterations = total;
    res.converged = budget_left;
    return res;
}

namespace {

double min_ratio(const SdbProblem &p, const CMatrix &w)
{
    double m = kInterferenceFree;
    for (int k = 0; k < p.k(); ++k)
        m = std::min(m, p.ratio(k, w));
    return m;
}

} // namespace

DinkelbachState dinkelbach(const SdbProblem &problem, const SolverConfig &cfg)
{
    cfg.validate();
    if (problem.k() < 2)
        throw std::invalid_argument("dinkelbach: at least two users are required, got " +
                                    std::to_string(problem.k()));
    const int n = problem.n_e();
    const CMatrix w0 = CMatrix::Identity(n, n) / static_cast<double>(n);
    bool any = false;
    for (int k = 0; k < problem.k(); ++k)
        any = any || problem.g(k, w0) > 0.0;
    if (!any)
        throw std::invalid_argument("dinkelbach: no user sees interference; the ratio is unbounded");

    DinkelbachState st;
    st.lambda = 0.0;
    CMatrix warm;
    for (int it = 1; it <= cfg.max_outer; ++it) {
        const InnerResult inner = inner_maxmin(st.lambda, problem, cfg, warm);
        DinkelbachStep step;
        step.lambda_in = st.lambda;
        step.f_value = problem.objective(st.lambda, inner.w);
        step.inner_iterations = inner.iterations;
        step.inner_converged = inner.converged;
        st.inner_warning = st.inner_warning || !inner.converged;

        const double next = min_ratio(problem, inner.w);
        if (!std::isfinite(next))
            throw std::runtime_error("dinkelbach: every user became interference free");
        step.lambda_out = next;
        st.history.push_back(step);

        st.iteration = it;
        st.f_value = step.f_value;
        st.w_star = inner.w;
        warm = inner.w;
        st.lambda = next;
        if (step.f_value < cfg.eps) {
            st.converged = true;
            break;
        }
    }
    return st;
}

namespace {

CVector sgn_scaled(const CVector &zeta)
{
    const double inv = 1.0 / std::sqrt(static_cast<double>(zeta.size()));
    CVector w(zeta.size());
    for (Eigen::Index i = 0; i < zeta.size(); ++i) {
        const double m = std::abs(zeta(i));
        w(i) = m > 0.0 ? zeta(i) / m * inv : cplx(inv, 0.0);
    }
    return w;
}

} // namespace

RandomizationResult gaussian_randomization(const CMatrix &w, const SdbProblem &problem, int trials,
                                           std::uint64_t seed, int threads)
{
    if (trials < 1)
        throw std::invalid_argument("gaussian_randomization: need at least one trial");
    const int n = problem.n_e();
    if (w.rows() != n || w.cols() != n)
        throw std::invalid_argument("gaussian_randomization: W has wrong size");
    const CMatrix root = psd_sqrt(hermitize(w));
    const Rng base(seed);

    std::vector<CVector> cand(trials);
    std::vector<double> score(trials);
    parallel_for(trials, threads, [&](std::int64_t l) {
        Rng rng = base.substream(static_cast<std::uint64_t>(l));
        CVector z(n);
        for (int i = 0; i < n; ++i)
            z(i) = rng.complex_normal(1.0);
        cand[l] = sgn_scaled(root * z);
        score[l] = problem.min_sir_vector(cand[l]);
    });

    RandomizationResult res;
    res.trials = trials;
    res.trial_min_sir = score;
    res.l_star = 0;
    for (int l = 1; l < trials; ++l)
        if (score[l] > score[res.l_star])
            res.l_star = l;
    res.w_star = cand[res.l_star];
    res.achieved_min_sir = score[res.l_star];
    return res;
}

RandomizationResult eigenvector_extraction(const CMatrix &w, const SdbProblem &problem)
{
    RandomizationResult res;
    res.trials = 1;
    res.w_star = principal_eigenvector(hermitize(w));
    res.achieved_min_sir = problem.min_sir_vector(res.w_star);
    res.trial_min_sir = {res.achieved_min_sir};
    return res;
}

SdbSolution solve_sdb(const SdbProblem &problem, const SolverConfig &cfg, std::uint64_t seed, int threads)
{
    SdbSolution sol;
    sol.relaxed = dinkelbach(problem, cfg);
    sol.sdr_bound = problem.min_sir(sol.relaxed.w_star);
    sol.extracted = gaussian_randomization(sol.relaxed.w_star, problem, cfg.trials, seed, threads);
    return sol;
}

} // namespace fdmimo
