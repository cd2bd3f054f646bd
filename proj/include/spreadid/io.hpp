// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include "spreadid/analysis.hpp"
#include "spreadid/solvers.hpp"

namespace spreadid::io {

// Complex matrix container, UTF-8 text with LF line endings:
//
//   spreadid-cmatrix 1
//   <rows> <cols>
//   <re> <im>            one line per entry, row-major
//
// Values use 17 significant digits in scientific notation, so a write/read
// round trip is exact and identical inputs produce identical bytes.

void write_matrix(std::ostream& os, const CMatrix& M);
CMatrix read_matrix(std::istream& is);
void save_matrix(const std::string& path, const CMatrix& M);
CMatrix load_matrix(const std::string& path);

/// 17 significant digits, scientific ("1.0000000000000000e-05"); "inf"/"-inf"/"nan".
std::string format_double(double v);

/// JSON documents (pretty-printed, trailing newline).
std::string result_to_json(const RecoveryResult& result);
std::string witness_to_json(const AmbiguityWitness& witness);

}  // namespace spreadid::io
