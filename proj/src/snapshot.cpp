#include "h2fed/snapshot.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <format>
#include <fstream>
#include <vector>

#include "h2fed/errors.hpp"

namespace h2fed {

namespace {

constexpr char kMagic[8] = {'H', '2', 'F', 'M', 'O', 'D', 'L', '1'};

static_assert(std::endian::native == std::endian::little,
              "snapshot io assumes a little-endian host");

void put_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::ifstream& f, const std::string& path) {
  std::uint32_t v;
  if (!f.read(reinterpret_cast<char*>(&v), 4)) {
    throw DatasetError(std::format("truncated model file: {}", path));
  }
  return v;
}

}  // namespace

void save_model(const ParamVector& params, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError(std::format("cannot write model file: {}", path));
  f.write(kMagic, sizeof(kMagic));
  put_u32(f, static_cast<std::uint32_t>(params.arch.input_dim));
  put_u32(f, static_cast<std::uint32_t>(params.arch.hidden_dim));
  put_u32(f, static_cast<std::uint32_t>(params.arch.output_dim));
  put_u32(f, static_cast<std::uint32_t>(params.size()));
  std::vector<float> vals(params.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<float>(params.values[i]);
  f.write(reinterpret_cast<const char*>(vals.data()),
          static_cast<std::streamsize>(vals.size() * sizeof(float)));
  if (!f) throw ConfigError(std::format("short write to model file: {}", path));
}

ParamVector load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DatasetError(std::format("cannot open model file: {}", path));
  char magic[8];
  if (!f.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw DatasetError(std::format("bad magic in model file: {}", path));
  }
  ModelArchitecture arch;
  arch.input_dim = static_cast<int>(get_u32(f, path));
  arch.hidden_dim = static_cast<int>(get_u32(f, path));
  arch.output_dim = static_cast<int>(get_u32(f, path));
  const std::uint32_t count = get_u32(f, path);
  if (!arch.valid() || count != arch.param_count()) {
    throw DatasetError(std::format("inconsistent model header in {}", path));
  }
  std::vector<float> vals(count);
  if (!f.read(reinterpret_cast<char*>(vals.data()),
              static_cast<std::streamsize>(vals.size() * sizeof(float)))) {
    throw DatasetError(std::format("truncated model file: {}", path));
  }
  ParamVector p(arch);
  for (std::size_t i = 0; i < vals.size(); ++i) p.values[i] = vals[i];
  return p;
}

std::string bytes_hash(const void* data, std::size_t n) {
  const auto* b = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 0x100000001b3ULL;
  }
  return std::format("{:016x}", h);
}

std::string file_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DatasetError(std::format("cannot hash missing file: {}", path));
  std::vector<char> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return bytes_hash(buf.data(), buf.size());
}

}  // namespace h2fed
