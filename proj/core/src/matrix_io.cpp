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

#include "fdmimo/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fdmimo {

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_complex_matrix(std::ostream &os, const CMatrix &m)
{
    os << "# complex-matrix rows=" << m.rows() << " cols=" << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c)
                os << ',';
            os << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag());
        }
        os << '\n';
    }
}

CMatrix read_complex_matrix(std::istream &is)
{
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("complex matrix: empty input");
    long rows = -1, cols = -1;
    if (std::sscanf(line.c_str(), "# complex-matrix rows=%ld cols=%ld", &rows, &cols) != 2 || rows < 0 || cols < 0)
        throw std::runtime_error("complex matrix: bad header '" + line + "'");
    CMatrix m(rows, cols);
    long r = 0;
    while (r < rows && std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            vals.push_back(std::stod(cell));
        if (static_cast<long>(vals.size()) != 2 * cols)
            throw std::runtime_error("complex matrix: row " + std::to_string(r) + " has " +
                                     std::to_string(vals.size()) + " values, expected " + std::to_string(2 * cols));
        for (long c = 0; c < cols; ++c)
            m(r, c) = {vals[2 * c], vals[2 * c + 1]};
        ++r;
    }
    if (r != rows)
        throw std::runtime_error("complex matrix: expected " + std::to_string(rows) + " rows, read " +
                                 std::to_string(r));
    return m;
}

void save_complex_matrix(const std::string &path, const CMatrix &m)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_complex_matrix(os, m);
}

CMatrix load_complex_matrix(const std::string &path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open '" + path + "'");
    return read_complex_matrix(is);
}

} // namespace fdmimo
