#pragma once

#include <span>
#include <string>
#include <vector>

#include "asyrk/csr.hpp"
#include "asyrk/datagen.hpp"
#include "asyrk/trace.hpp"

namespace asyrk {

/// Matrix Market coordinate format, 1-based indices, %.17g values (doubles
/// round-trip exactly).
void write_matrix_market(const std::string& path, const CsrMatrix& A);
CsrMatrix read_matrix_market(const std::string& path);

/// One %.17g value per line.
void write_vector(const std::string& path, std::span<const double> v);
std::vector<double> read_vector(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Instance directory layout: A.mtx, b.txt, xstar.txt (when known),
/// meta.json (GenSpec echo plus structural digest). Reading re-verifies and
/// re-flags row normalization per the metadata.
void write_instance(const std::string& dir, const Instance& inst);
Instance read_instance(const std::string& dir);

} // namespace asyrk
