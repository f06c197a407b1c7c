#include "hga/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "hga/error.hpp"

namespace hga {
namespace {

constexpr std::array<char, 8> kMagic = {'H', 'G', 'A', 'C', 'K', 'P', 'T', '\0'};

template <typename U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw ParseError("truncated checkpoint: " + path.string());
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void save_params(const std::filesystem::path& path, const ParamStore& params) {
  nlohmann::json manifest;
  manifest["version"] = kCheckpointVersion;
  manifest["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, p] : params.entries()) {
    manifest["tensors"].push_back(
        {{"name", name}, {"shape", p.value.shape()}, {"offset", offset}, {"count", p.value.size()}});
    offset += p.value.size();
  }
  const std::string text = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint: " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [_, p] : params.entries())
    for (double v : p.value.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

ParamStore load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ParseError("not a parameter checkpoint (bad magic): " + path.string());
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version) + ": " + path.string());
  }
  const auto length = get_le<std::uint64_t>(in, path);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw ParseError("truncated checkpoint manifest: " + path.string());

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("bad checkpoint manifest in " + path.string() + ": " + e.what());
  }
  ParamStore params;
  for (const auto& entry : manifest.at("tensors")) {
    Shape shape = entry.at("shape").get<Shape>();
    const auto count = entry.at("count").get<std::size_t>();
    if (count != shape_size(shape)) throw ParseError("checkpoint tensor count/shape mismatch: " + path.string());
    std::vector<double> data(count);
    for (double& v : data) v = std::bit_cast<double>(get_le<std::uint64_t>(in, path));
    params.add(entry.at("name").get<std::string>(), Tensor(std::move(shape), std::move(data)));
  }
  return params;
}

}  // namespace hga
