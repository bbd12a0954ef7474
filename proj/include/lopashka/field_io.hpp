#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lopashka/grid.hpp"

namespace lopashka {

// Binary dump of a complex128 array.  Layout (all integers little-endian):
//   bytes 0..7   magic "LPFIELD\0"
//   u32          format version (1)
//   u32          number of dimensions d
//   u64 x d      dimensions, slowest-varying first
//   8 bytes      dtype tag "c128" padded with zeros
//   data         row-major pairs of IEEE-754 float64 (real, imaginary), little-endian
struct FieldArray {
  std::vector<std::uint64_t> dims;
  std::vector<Complex> data;

  std::size_t size() const;
};

void write_field_array(std::ostream& out, const FieldArray& array);
FieldArray read_field_array(std::istream& in);
void save_field_array(const std::string& path, const FieldArray& array);
FieldArray load_field_array(const std::string& path);

// dims = (tangential points..., normal points, components).
FieldArray to_field_array(const Field& field);
// dims = (times, tangential points..., normal points, components); all snapshots share a grid.
FieldArray to_field_array(const std::vector<Field>& snapshots);

}  // namespace lopashka
