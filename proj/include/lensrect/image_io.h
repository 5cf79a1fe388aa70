#ifndef LENSRECT_IMAGE_IO_H_
#define LENSRECT_IMAGE_IO_H_

#include <string>

#include "lensrect/raster_image.h"

namespace lensrect {

// Lossless 8-bit image files: PNG (gray, gray+alpha, RGB, RGBA; alpha is
// dropped) and binary PGM/PPM (P5/P6, maxval 255). The format is chosen by
// content when reading and by extension (.png, .pgm, .ppm, .pnm) when
// writing. Samples are quantized to 8 bits on save.
// Errors: kIo, kUnsupportedFormat.
RasterImage ReadImage(const std::string& path);
void WriteImage(const std::string& path, const RasterImage& image);

// Masks are single-channel PGM files with 255 = valid, 0 = invalid.
void WriteMask(const std::string& path, const ValidityMask& mask);
ValidityMask ReadMask(const std::string& path);

// "<stem>.mask.pgm" next to an image path ("out.png" -> "out.mask.pgm").
std::string MaskPathFor(const std::string& image_path);

}  // namespace lensrect

#endif  // LENSRECT_IMAGE_IO_H_
