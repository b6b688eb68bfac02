#include "pt/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "pt/errors.hpp"

namespace pt {
inline namespace PT_REAL_NS {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic = {'P', 'T', 'C', 'K'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw SchemaError("checkpoint " + path + ": truncated file");
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, std::span<const Parameter> params,
                     const std::string& metadata_json) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, sizeof(Real));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(Real)));
  }
  put<std::uint64_t>(out, metadata_json.size());
  out.write(metadata_json.data(), static_cast<std::streamsize>(metadata_json.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open checkpoint " + path);
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw SchemaError("checkpoint " + path + ": bad magic bytes");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw SchemaError("checkpoint " + path + ": unsupported version " +
                      std::to_string(version));
  }
  const auto width = get<std::uint32_t>(in, path);
  if (width != 4 && width != 8) {
    throw SchemaError("checkpoint " + path + ": bad scalar width " +
                      std::to_string(width));
  }
  const auto count = get<std::uint32_t>(in, path);
  Checkpoint ckpt;
  ckpt.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw SchemaError("checkpoint " + path + ": truncated tensor name");
    }
    const auto rank = get<std::uint32_t>(in, path);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(in, path));
    const std::size_t n = shape_numel(shape);
    std::vector<Real> data(n);
    std::vector<char> raw(n * width);
    if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size()))) {
      throw SchemaError("checkpoint " + path + ": truncated payload for '" + name + "'");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (width == 4) {
        float f;
        std::memcpy(&f, raw.data() + j * 4, 4);
        data[j] = static_cast<Real>(f);
      } else {
        double d;
        std::memcpy(&d, raw.data() + j * 8, 8);
        data[j] = static_cast<Real>(d);
      }
    }
    ckpt.tensors.push_back({std::move(name), Tensor(std::move(shape), std::move(data))});
  }
  const auto meta_len = get<std::uint64_t>(in, path);
  ckpt.metadata_json.resize(meta_len);
  if (!in.read(ckpt.metadata_json.data(), static_cast<std::streamsize>(meta_len))) {
    throw SchemaError("checkpoint " + path + ": truncated metadata");
  }
  return ckpt;
}

}  // namespace PT_REAL_NS
}  // namespace pt
