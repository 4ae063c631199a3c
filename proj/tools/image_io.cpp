#include "image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "noisecollage/error.hpp"

namespace noisecollage::cli {

namespace {
constexpr std::uint32_t kTensorVersion = 1;
}

Raster quantize(const Tensor& image, const DisplayMapping& mapping) {
  if (image.rank() != 3) throw Error(ErrorKind::kShape, "quantize expects C x H x W");
  Raster r{image.extent(0), image.extent(1), image.extent(2), {}};
  const std::size_t plane = r.height * r.width;
  r.pixels.resize(r.channels * plane);
  const double span = mapping.hi - mapping.lo;
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t c = 0; c < r.channels; ++c) {
      const double v = std::round((image[c * plane + p] - mapping.lo) / span * 255.0);
      r.pixels[p * r.channels + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  return r;
}

Tensor dequantize(const Raster& raster, const DisplayMapping& mapping) {
  Tensor out({raster.channels, raster.height, raster.width});
  const std::size_t plane = raster.height * raster.width;
  const double span = mapping.hi - mapping.lo;
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t c = 0; c < raster.channels; ++c)
      out[c * plane + p] = mapping.lo + static_cast<double>(raster.pixels[p * raster.channels + c]) / 255.0 * span;
  return out;
}

Raster mask_raster(const Mask& mask) {
  Raster r{1, mask.height(), mask.width(), std::vector<std::uint8_t>(mask.pixel_count())};
  for (std::size_t i = 0; i < mask.pixel_count(); ++i) r.pixels[i] = mask.at_index(i) ? 255 : 0;
  return r;
}

std::vector<std::uint8_t> encode_pnm(const Raster& r) {
  if (r.channels != 1 && r.channels != 3) {
    throw Error(ErrorKind::kShape, "PNM output needs 1 or 3 channels, got " + std::to_string(r.channels));
  }
  const std::string header = std::string(r.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(r.width) + " " +
                             std::to_string(r.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), r.pixels.begin(), r.pixels.end());
  return out;
}

Raster decode_pnm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_space();
    const std::size_t start = pos;
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (1u << 24)) throw Error(ErrorKind::kFormat, std::string("PNM ") + what + " too large", start);
      ++pos;
    }
    if (pos == start) throw Error(ErrorKind::kFormat, std::string("PNM ") + what + " missing", start);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorKind::kFormat, "not a binary PGM/PPM file", 0);
  }
  Raster r;
  r.channels = bytes[1] == '5' ? 1 : 3;
  pos = 2;
  r.width = read_int("width");
  r.height = read_int("height");
  const std::size_t maxval_at = pos;
  if (read_int("maxval") != 255) throw Error(ErrorKind::kFormat, "only maxval 255 is supported", maxval_at);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw Error(ErrorKind::kFormat, "bad PNM header", pos);
  ++pos;
  const std::size_t n = r.channels * r.width * r.height;
  if (bytes.size() - pos != n) throw Error(ErrorKind::kFormat, "PNM payload has wrong size", pos);
  r.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return r;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  std::vector<std::uint8_t> out = {'N', 'C', 'T', 'S'};
  auto put = [&](std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(kTensorVersion, 4);
  put(t.rank(), 4);
  for (auto e : t.shape()) put(e, 8);
  for (double v : t.values()) put(std::bit_cast<std::uint64_t>(v), 8);
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto get = [&](int n, const char* what) {
    if (bytes.size() - pos < static_cast<std::size_t>(n)) {
      throw Error(ErrorKind::kFormat, std::string("truncated tensor file while reading ") + what, pos);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
    pos += static_cast<std::size_t>(n);
    return v;
  };
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "NCTS", 4) != 0) throw Error(ErrorKind::kFormat, "bad magic, expected NCTS", 0);
  pos = 4;
  if (get(4, "version") != kTensorVersion) throw Error(ErrorKind::kFormat, "unsupported tensor version", 4);
  const std::uint64_t rank = get(4, "rank");
  if (rank == 0 || rank > 8) throw Error(ErrorKind::kFormat, "bad rank", 8);
  Shape shape;
  for (std::uint64_t i = 0; i < rank; ++i) {
    const std::size_t at = pos;
    const std::uint64_t e = get(8, "extent");
    if (e == 0 || e > bytes.size()) throw Error(ErrorKind::kFormat, "bad extent", at);
    shape.push_back(e);
  }
  const std::size_t volume = shape_volume(shape);
  if ((bytes.size() - pos) != volume * 8) throw Error(ErrorKind::kFormat, "tensor payload has wrong size", pos);
  std::vector<double> values(volume);
  for (auto& v : values) v = std::bit_cast<double>(get(8, "values"));
  return Tensor(std::move(shape), std::move(values));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to '" + path + "'");
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace noisecollage::cli
