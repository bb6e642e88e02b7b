#include "cyf/cli/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace cyf::cli {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), bytes.size())) {
    throw Error(ErrorKind::IoError, path.string() + ": truncated field file");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

constexpr char kMagic[4] = {'C', 'Y', 'F', '1'};

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& u) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(kMagic, 4);
  const Grid& grid = u.grid();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(grid.dims()));
  for (int s : grid.sizes()) put<std::uint32_t>(out, static_cast<std::uint32_t>(s));
  for (double v : u.values()) put<double>(out, v);
  if (!out) throw Error(ErrorKind::IoError, "write failed: " + path.string());
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorKind::IoError, path.string() + ": not a CYF1 field file");
  }
  const auto dims = get<std::uint32_t>(in, path);
  if (dims < 1 || dims > Grid::kMaxDims) {
    throw Error(ErrorKind::IoError, path.string() + ": bad dimension count");
  }
  std::vector<int> sizes;
  for (std::uint32_t a = 0; a < dims; ++a) {
    const auto s = get<std::uint32_t>(in, path);
    if (s > (1u << 20)) throw Error(ErrorKind::IoError, path.string() + ": implausible grid size");
    sizes.push_back(static_cast<int>(s));
  }
  const Grid grid = Grid::make(sizes);
  std::vector<double> values(grid.point_count());
  for (double& v : values) v = get<double>(in, path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorKind::IoError, path.string() + ": trailing bytes after field data");
  }
  return ScalarField(grid, std::move(values));
}

}  // namespace cyf::cli
