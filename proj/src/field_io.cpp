#include "lopashka/field_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "lopashka/error.hpp"

namespace lopashka {

namespace {

constexpr std::array<char, 8> kMagic{'L', 'P', 'F', 'I', 'E', 'L', 'D', '\0'};
constexpr std::array<char, 8> kDtype{'c', '1', '2', '8', '\0', '\0', '\0', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw Error(ErrorKind::Io, "field file truncated");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_double(std::ostream& out, double x) { put_le(out, std::bit_cast<std::uint64_t>(x)); }
double get_double(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

}  // namespace

std::size_t FieldArray::size() const {
  std::size_t n = 1;
  for (auto d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

void write_field_array(std::ostream& out, const FieldArray& array) {
  if (array.size() != array.data.size()) {
    throw Error(ErrorKind::Dimension, "field array: dims do not match the data length");
  }
  out.write(kMagic.data(), kMagic.size());
  put_le(out, kVersion);
  put_le(out, static_cast<std::uint32_t>(array.dims.size()));
  for (auto d : array.dims) put_le(out, d);
  out.write(kDtype.data(), kDtype.size());
  for (const Complex& z : array.data) {
    put_double(out, z.real());
    put_double(out, z.imag());
  }
  if (!out) throw Error(ErrorKind::Io, "field array: write failed");
}

FieldArray read_field_array(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(ErrorKind::Parse, "field file: bad magic");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw Error(ErrorKind::Parse, "field file: unsupported version " + std::to_string(version));
  const auto ndims = get_le<std::uint32_t>(in);
  if (ndims > 64) throw Error(ErrorKind::Parse, "field file: implausible dimension count");
  FieldArray array;
  for (std::uint32_t i = 0; i < ndims; ++i) array.dims.push_back(get_le<std::uint64_t>(in));
  std::array<char, 8> dtype{};
  in.read(dtype.data(), dtype.size());
  if (!in || dtype != kDtype) throw Error(ErrorKind::Parse, "field file: unsupported dtype");
  array.data.resize(array.size());
  for (auto& z : array.data) {
    const double re = get_double(in);
    const double im = get_double(in);
    z = Complex(re, im);
  }
  return array;
}

void save_field_array(const std::string& path, const FieldArray& array) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  write_field_array(out, array);
}

FieldArray load_field_array(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_field_array(in);
}

FieldArray to_field_array(const Field& field) {
  FieldArray array;
  for (int p : field.grid.tangential.points) array.dims.push_back(static_cast<std::uint64_t>(p));
  array.dims.push_back(static_cast<std::uint64_t>(field.grid.normal.size()));
  array.dims.push_back(static_cast<std::uint64_t>(field.components));
  array.data = field.data;
  return array;
}

FieldArray to_field_array(const std::vector<Field>& snapshots) {
  if (snapshots.empty()) throw Error(ErrorKind::Domain, "field array: no snapshots");
  FieldArray array = to_field_array(snapshots.front());
  array.dims.insert(array.dims.begin(), static_cast<std::uint64_t>(snapshots.size()));
  for (std::size_t s = 1; s < snapshots.size(); ++s) {
    if (snapshots[s].data.size() != snapshots.front().data.size()) {
      throw Error(ErrorKind::Dimension, "field array: snapshots differ in size");
    }
    array.data.insert(array.data.end(), snapshots[s].data.begin(), snapshots[s].data.end());
  }
  return array;
}

}  // namespace lopashka
