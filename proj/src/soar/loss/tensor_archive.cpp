#include "soar/loss/tensor_archive.hpp"

#include <cstring>
#include <fstream>

namespace soar {

namespace {

constexpr char kMagic[8] = {'S', 'O', 'A', 'R', 'T', 'N', 'S', '1'};
constexpr std::int64_t kMaxElements = std::int64_t(1) << 32;

void put_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf, 8);
}

std::uint64_t get_u64(std::istream& is, const std::string& path) {
  char buf[8];
  is.read(buf, 8);
  if (!is) throw IoError(str_cat("truncated tensor archive: ", path));
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(os, bits);
}

double get_f64(std::istream& is, const std::string& path) {
  const std::uint64_t bits = get_u64(is, path);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace

void write_tensor_archive(const std::string& path,
                          const std::vector<NamedTensor>& tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(str_cat("cannot open for write: ", path));
  os.write(kMagic, 8);
  put_u64(os, tensors.size());
  for (const NamedTensor& t : tensors) {
    SOAR_REQUIRE(t.data.size() == t.element_count(), "tensor ", t.name,
                 " data does not match its dims");
    put_u64(os, t.name.size());
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_u64(os, t.dims.size());
    for (const std::int64_t d : t.dims) put_u64(os, static_cast<std::uint64_t>(d));
    for (Eigen::Index i = 0; i < t.data.size(); ++i) put_f64(os, t.data[i]);
  }
  if (!os) throw IoError(str_cat("write failed: ", path));
}

std::vector<NamedTensor> read_tensor_archive(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(str_cat("cannot open: ", path));
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError(str_cat("not a tensor archive: ", path));

  const std::uint64_t count = get_u64(is, path);
  if (count > 1 << 20) throw IoError(str_cat("implausible tensor count in ", path));
  std::vector<NamedTensor> tensors(count);
  for (NamedTensor& t : tensors) {
    const std::uint64_t name_len = get_u64(is, path);
    if (name_len > 4096) throw IoError(str_cat("implausible tensor name in ", path));
    t.name.resize(name_len);
    is.read(t.name.data(), static_cast<std::streamsize>(name_len));
    const std::uint64_t rank = get_u64(is, path);
    if (rank > 8) throw IoError(str_cat("implausible tensor rank in ", path));
    t.dims.resize(rank);
    for (std::uint64_t i = 0; i < rank; ++i)
      t.dims[i] = static_cast<std::int64_t>(get_u64(is, path));
    const std::int64_t n = t.element_count();
    if (n < 0 || n > kMaxElements)
      throw IoError(str_cat("implausible tensor size in ", path));
    t.data.resize(n);
    for (std::int64_t i = 0; i < n; ++i) t.data[i] = get_f64(is, path);
  }
  return tensors;
}

}  // namespace soar
