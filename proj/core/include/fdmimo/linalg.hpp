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

#pragma once

#include <utility>

#include "fdmimo/types.hpp"

namespace fdmimo {

// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
// Each eigenvector is rotated so that its first non-negligible entry is real and positive.
struct HermitianEigen {
    RVector values;
    CMatrix vectors;
};

HermitianEigen hermitian_eigen(const CMatrix &a);

// Multiply v by a unit phase so that its first entry with |v_i| > tol * ||v|| is real positive.
void fix_phase(CVector &v, double tol = 1e-12);

// Unit-norm eigenvector for the largest eigenvalue. When the top eigenvalue is repeated
// (relative gap below 1e-10) the lowest-index basis vector with a non-zero projection onto
// the top eigenspace is projected and normalized, which makes the result deterministic.
CVector principal_eigenvector(const CMatrix &a);

CMatrix hermitize(const CMatrix &a);

// Maximum of |A - A^H| entrywise.
double hermitian_defect(const CMatrix &a);

// Smallest and largest eigenvalue of a Hermitian matrix.
std::pair<double, double> eigen_range(const CMatrix &a);

// Hermitian square root of a PSD matrix. Eigenvalues below -rel_tol * lambda_max throw
// std::domain_error, the remaining negative ones are clamped to zero.
CMatrix psd_sqrt(const CMatrix &a, double rel_tol = 1e-9);

// Column-major vec and its inverse for an n x n matrix.
CVector vec(const CMatrix &a);
CMatrix unvec(const CVector &v, Eigen::Index n);

} // namespace fdmimo
