#pragma once

#include "soar/core/common.hpp"

#include <string>
#include <vector>

namespace soar {

struct NamedTensor {
  std::string name;
  std::vector<std::int64_t> dims;
  VecX data;  // row-major over dims

  std::int64_t element_count() const {
    std::int64_t n = 1;
    for (const std::int64_t d : dims) n *= d;
    return n;
  }
};

// Little-endian binary tensor archive:
//   magic "SOARTNS1" | u64 tensor count | per tensor:
//   u64 name length | name bytes | u64 rank | u64 dims[rank] | f64 data.
void write_tensor_archive(const std::string& path,
                          const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensor_archive(const std::string& path);

}  // namespace soar
