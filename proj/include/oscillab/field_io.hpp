#pragma once

#include <filesystem>
#include <string>

#include "oscillab/field.hpp"

namespace oscillab {

enum class FieldEncoding { binary, csv };

// One file: a JSON header line {"dimension", "resolution", "complex", "encoding"}
// followed by the samples (little-endian float64, re/im interleaved for complex,
// or one CSV row per sample).
void write_field(const std::filesystem::path& path, const RealField& f, FieldEncoding encoding);
void write_field(const std::filesystem::path& path, const ComplexField& f, FieldEncoding encoding);

struct LoadedField {
  ComplexField field;
  bool is_complex = false;
};

LoadedField read_field(const std::filesystem::path& path);
RealField read_real_field(const std::filesystem::path& path);

}  // namespace oscillab
