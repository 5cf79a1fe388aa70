#ifndef LENSRECT_MAP_IO_H_
#define LENSRECT_MAP_IO_H_

#include <iosfwd>
#include <string>

#include "lensrect/rectification.h"

namespace lensrect {

// Binary map layout, all integers little-endian:
//
//   "LDRM"                     4 bytes magic
//   version                    u16 (= 1)
//   method tag                 u8  (MapMethod value)
//   out_width, out_height      u32, u32
//   src_width, src_height      u32, u32
//   per output pixel, row-major:
//     count                    u8 (0 = invalid, at most 4)
//     count x (source index u32, weight f32)
//
// The provenance record is stored separately as JSON in "<path>.json".
inline constexpr char kMapMagic[4] = {'L', 'D', 'R', 'M'};
inline constexpr std::uint16_t kMapVersion = 1;

void WriteMap(std::ostream& out, const RectificationMap& map);
// Throws Error(kCorruptMap) on bad magic/version, truncation, trailing data
// or out-of-range contents.
RectificationMap ReadMap(std::istream& in);

// Writes the map and its "<path>.json" sidecar.
void SaveMap(const std::string& path, const RectificationMap& map);
// Loads the map; the sidecar is read into provenance when present.
RectificationMap LoadMap(const std::string& path);

std::string MapSidecarPath(const std::string& map_path);

}  // namespace lensrect

#endif  // LENSRECT_MAP_IO_H_
