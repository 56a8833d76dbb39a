#pragma once

#include <string>

#include "saiplab/signal.hpp"

namespace saiplab {

/// Binary 8-bit PGM (P5). Values are linearly mapped between [0, 1] and
/// [0, 255] with clamping on write, so a write/read round trip is exact on
/// the 8-bit grid.
void write_pgm(const std::string& path, const Signal& image);
Signal read_pgm(const std::string& path);

}  // namespace saiplab
