#pragma once

// Grayscale Netpbm images. Samples are scaled to [0, 1] on read.

#include <string>
#include <string_view>

#include "fractv/grid_ops.hpp"

namespace fractv {

enum class PgmEncoding { ascii, binary };

/// Parses a P2 or P5 byte stream. Throws ParseError with the offending byte offset.
Image parse_pgm(std::string_view bytes, double spacing = 1.0);
Image read_pgm(const std::string& path, double spacing = 1.0);

/// Clamps to [0, 1] and quantizes to `maxval` with round-half-to-even.
std::string encode_pgm(const Image& image, int maxval = 255,
                       PgmEncoding encoding = PgmEncoding::binary);
void write_pgm(const std::string& path, const Image& image, int maxval = 255,
               PgmEncoding encoding = PgmEncoding::binary);

}  // namespace fractv
