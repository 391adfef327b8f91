#pragma once

#include <string>

#include "ctensor/storage.hpp"

namespace ct {

/// Parses a tensor from JSON text. Schema violations throw SchemaError
/// naming the JSON path (e.g. `$.levels[1].left[3]`); storage invariants
/// are then checked by validate_tensor.
ContTensor tensor_from_json(const std::string& text, const std::string& fallback_name = "");

/// Canonical JSON (stable key order, 2-space indent, shortest round-trip
/// numbers). Homogeneous closure flags are written as booleans.
std::string tensor_to_json(const ContTensor& t);

ContTensor load_tensor(const std::string& path, const std::string& fallback_name = "");
void save_tensor(const ContTensor& t, const std::string& path);

std::string read_file(const std::string& path);

}  // namespace ct
