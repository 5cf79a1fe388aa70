#include "lensrect/map_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "lensrect/error.h"

namespace lensrect {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void PutLE(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T GetLE(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw Error(ErrorCode::kCorruptMap, "corrupt map: file is truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

std::string MapSidecarPath(const std::string& map_path) {
  return map_path + ".json";
}

void WriteMap(std::ostream& out, const RectificationMap& map) {
  out.write(kMapMagic, 4);
  PutLE<std::uint16_t>(out, kMapVersion);
  PutLE<std::uint8_t>(out, static_cast<std::uint8_t>(map.method));
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(map.out.width));
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(map.out.height));
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(map.src.width));
  PutLE<std::uint32_t>(out, static_cast<std::uint32_t>(map.src.height));
  for (const MapEntry& e : map.entries) {
    PutLE<std::uint8_t>(out, e.count);
    for (int k = 0; k < e.count; ++k) {
      PutLE<std::uint32_t>(out, e.source[k]);
      PutLE<float>(out, e.weight[k]);
    }
  }
}

RectificationMap ReadMap(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMapMagic, 4) != 0) {
    throw Error(ErrorCode::kCorruptMap, "corrupt map: bad magic");
  }
  const auto version = GetLE<std::uint16_t>(in);
  if (version != kMapVersion) {
    throw Error(ErrorCode::kCorruptMap,
                "corrupt map: unsupported version " + std::to_string(version));
  }
  const auto tag = GetLE<std::uint8_t>(in);
  if (tag > static_cast<std::uint8_t>(MapMethod::kTriangulationLinear)) {
    throw Error(ErrorCode::kCorruptMap,
                "corrupt map: unknown method tag " + std::to_string(tag));
  }
  RectificationMap map;
  map.method = static_cast<MapMethod>(tag);
  const auto dims = [&in] {
    const auto v = GetLE<std::uint32_t>(in);
    if (v == 0 || v > (1u << 20)) {
      throw Error(ErrorCode::kCorruptMap, "corrupt map: bad dimensions");
    }
    return static_cast<int>(v);
  };
  map.out.width = dims();
  map.out.height = dims();
  map.src.width = dims();
  map.src.height = dims();
  const std::size_t src_pixels = map.src.pixel_count();
  map.entries.resize(map.out.pixel_count());
  for (MapEntry& e : map.entries) {
    e.count = GetLE<std::uint8_t>(in);
    if (e.count > 4) {
      throw Error(ErrorCode::kCorruptMap,
                  "corrupt map: entry has more than 4 contributions");
    }
    for (int k = 0; k < e.count; ++k) {
      e.source[k] = GetLE<std::uint32_t>(in);
      e.weight[k] = GetLE<float>(in);
      if (e.source[k] >= src_pixels || !std::isfinite(e.weight[k])) {
        throw Error(ErrorCode::kCorruptMap,
                    "corrupt map: contribution out of range");
      }
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kCorruptMap, "corrupt map: trailing data");
  }
  return map;
}

void SaveMap(const std::string& path, const RectificationMap& map) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write map '" + path + "'");
    WriteMap(out, map);
    if (!out) throw Error(ErrorCode::kIo, "failed writing map '" + path + "'");
  }
  std::ofstream sidecar(MapSidecarPath(path));
  if (!sidecar) {
    throw Error(ErrorCode::kIo,
                "cannot write '" + MapSidecarPath(path) + "'");
  }
  nlohmann::json doc = map.provenance;
  doc["method"] = std::string(MapMethodName(map.method));
  doc["out_size"] = {map.out.width, map.out.height};
  doc["src_size"] = {map.src.width, map.src.height};
  doc["valid_entries"] = map.CountValid();
  sidecar << doc.dump(2) << "\n";
}

RectificationMap LoadMap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open map '" + path + "'");
  RectificationMap map = ReadMap(in);
  std::ifstream sidecar(MapSidecarPath(path));
  if (sidecar) {
    try {
      map.provenance = nlohmann::json::parse(sidecar);
      map.failed_count = map.provenance.value("failed_count", std::size_t{0});
    } catch (const nlohmann::json::exception&) {
      // A damaged sidecar does not affect the map itself.
      map.provenance = nlohmann::json::object();
    }
  }
  return map;
}

}  // namespace lensrect
