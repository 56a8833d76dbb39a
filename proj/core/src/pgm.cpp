#include "saiplab/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

#include "saiplab/errors.hpp"

namespace saiplab {

void write_pgm(const std::string& path, const Signal& image) {
  if (image.height <= 0 || image.width <= 0) throw ContractViolation("write_pgm: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_pgm: cannot open '" + path + "'");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<unsigned char> bytes(image.size());
  for (int i = 0; i < image.size(); ++i) {
    const double v = std::clamp(image.data[i], 0.0, 1.0);
    bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write_pgm: write failed for '" + path + "'");
}

namespace {

int next_pgm_token(std::istream& in) {
  // Skips whitespace and '#' comment lines between header fields.
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string dummy;
      std::getline(in, dummy);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value;
  if (!(in >> value)) throw Error("read_pgm: malformed header");
  return value;
}

}  // namespace

Signal read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_pgm: cannot open '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error("read_pgm: expected binary P5 format");
  const int width = next_pgm_token(in);
  const int height = next_pgm_token(in);
  const int maxval = next_pgm_token(in);
  if (width <= 0 || height <= 0 || maxval != 255) throw Error("read_pgm: unsupported header");
  in.get();  // single whitespace after maxval
  std::vector<unsigned char> bytes(static_cast<size_t>(width) * height);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw Error("read_pgm: truncated pixel data");
  Eigen::VectorXd data(static_cast<int>(bytes.size()));
  for (size_t i = 0; i < bytes.size(); ++i) data[static_cast<int>(i)] = bytes[i] / 255.0;
  return Signal::image(std::move(data), height, width);
}

}  // namespace saiplab
