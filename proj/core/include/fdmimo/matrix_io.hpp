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

#include <iosfwd>
#include <string>

#include "fdmimo/types.hpp"

namespace fdmimo {

// Text format for complex matrices:
//   # complex-matrix rows=R cols=C
//   re,im,re,im,...   (one line per row, row-major, %.17g)
// Lines starting with '#' after the header are ignored on read.
void write_complex_matrix(std::ostream &os, const CMatrix &m);
CMatrix read_complex_matrix(std::istream &is);

void save_complex_matrix(const std::string &path, const CMatrix &m);
CMatrix load_complex_matrix(const std::string &path);

// Shortest round-trip text for a double.
std::string format_double(double v);

} // namespace fdmimo
