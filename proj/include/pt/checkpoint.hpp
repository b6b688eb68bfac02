#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pt/autodiff.hpp"

namespace pt {
inline namespace PT_REAL_NS {

// Binary checkpoint container, all integers little-endian:
//
//   "PTCK"                    magic
//   u32 version               currently 1
//   u32 scalar_bytes          4 (float32) or 8 (float64) payload width
//   u32 tensor_count
//   per tensor:
//     u32 name_length, name bytes (UTF-8)
//     u32 rank, u64 dims[rank]
//     raw little-endian IEEE-754 payload, prod(dims) * scalar_bytes bytes
//   u64 metadata_length, metadata bytes (UTF-8 JSON)
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct Checkpoint {
  std::vector<NamedTensor> tensors;
  std::string metadata_json;
};

void save_checkpoint(const std::string& path, std::span<const Parameter> params,
                     const std::string& metadata_json);

// Payloads written at either precision are converted to Real on load.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace PT_REAL_NS
}  // namespace pt
