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

#include "fdmimo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fdmimo {

void fix_phase(CVector &v, double tol)
{
    const double nrm = v.norm();
    if (nrm == 0.0)
        return;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double m = std::abs(v(i));
        if (m > tol * nrm) {
            v *= std::conj(v(i)) / m;
            v(i) = cplx(m, 0.0);
            return;
        }
    }
}

HermitianEigen hermitian_eigen(const CMatrix &a)
{
    if (a.rows() != a.cols())
        throw std::invalid_argument("hermitian_eigen: matrix is not square");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(a));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hermitian_eigen: eigensolver failed");
    const Eigen::Index n = a.rows();
    HermitianEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = es.eigenvalues()(n - 1 - i);
        CVector col = es.eigenvectors().col(n - 1 - i);
        fix_phase(col);
        out.vectors.col(i) = col;
    }
    return out;
}

CVector principal_eigenvector(const CMatrix &a)
{
    const HermitianEigen eg = hermitian_eigen(a);
    const Eigen::Index n = a.rows();
    const double top = eg.values(0);
    const double scale = std::max(std::abs(top), std::abs(eg.values(n - 1)));
    Eigen::Index mult = 1;
    while (mult < n && top - eg.values(mult) <= 1e-10 * std::max(scale, 1e-300))
        ++mult;
    if (mult == 1)
        return eg.vectors.col(0);

    const CMatrix basis = eg.vectors.leftCols(mult);
    for (Eigen::Index j = 0; j < n; ++j) {
        // projection of e_j onto the top eigenspace
        CVector p = basis * basis.row(j).adjoint();
        const double nrm = p.norm();
        if (nrm > 1e-8) {
            p /= nrm;
            fix_phase(p);
            return p;
        }
    }
    return eg.vectors.col(0);
}

CMatrix hermitize(const CMatrix &a)
{
    return 0.5 * (a + a.adjoint());
}

double hermitian_defect(const CMatrix &a)
{
    if (a.size() == 0)
        return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

std::pair<double, double> eigen_range(const CMatrix &a)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(a), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigen_range: eigensolver failed");
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

CMatrix psd_sqrt(const CMatrix &a, double rel_tol)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(a));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("psd_sqrt: eigensolver failed");
    RVector ev = es.eigenvalues();
    const double lmax = std::max(ev.maxCoeff(), 0.0);
    if (ev.minCoeff() < -rel_tol * lmax)
        throw std::domain_error("psd_sqrt: matrix is not positive semi-definite (min eigenvalue " +
                                std::to_string(ev.minCoeff()) + ", max " + std::to_string(lmax) + ")");
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    const CMatrix &v = es.eigenvectors();
    return v * ev.cast<cplx>().asDiagonal() * v.adjoint();
}

CVector vec(const CMatrix &a)
{
    return Eigen::Map<const CVector>(a.data(), a.size());
}

CMatrix unvec(const CVector &v, Eigen::Index n)
{
    if (v.size() != n * n)
        throw std::invalid_argument("unvec: size mismatch");
    return Eigen::Map<const CMatrix>(v.data(), n, n);
}

} // namespace fdmimo
