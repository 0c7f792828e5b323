#pragma once

#include <cstdint>
#include <string>

#include "h2fed/model.hpp"

namespace h2fed {

// Model snapshot file:
//   bytes 0-7   magic "H2FMODL1"
//   3 x u32 LE  input_dim, hidden_dim, output_dim
//   1 x u32 LE  parameter count (redundant, checked on load)
//   count x f32 LE  parameter values in flat layout order
// Values are stored at 32-bit precision; loading widens back to double.
void save_model(const ParamVector& params, const std::string& path);
ParamVector load_model(const std::string& path);

// FNV-1a 64 over a file's bytes, as 16 hex digits. Used for provenance
// checks (e.g. all baseline runs consuming one pretrained model).
std::string file_hash(const std::string& path);
std::string bytes_hash(const void* data, std::size_t n);

}  // namespace h2fed
