#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "noisecollage/geometry.hpp"
#include "noisecollage/tensor.hpp"
#include "scene_file.hpp"

namespace noisecollage::cli {

// 8-bit raster as stored in a binary PGM (1 channel) or PPM (3 channels).
struct Raster {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  // interleaved, row-major

  friend bool operator==(const Raster&, const Raster&) = default;
};

// Quantizes [C x H x W] with round((v - lo) / (hi - lo) * 255), clamped.
Raster quantize(const Tensor& image, const DisplayMapping& mapping);

// Inverse affine map of a quantized raster back to [C x H x W] values.
Tensor dequantize(const Raster& raster, const DisplayMapping& mapping);

Raster mask_raster(const Mask& mask);

std::vector<std::uint8_t> encode_pnm(const Raster& raster);
Raster decode_pnm(const std::vector<std::uint8_t>& bytes);

// Raw sample file: "NCTS" | u32 version | u32 rank | u64 extents | f64 values,
// little-endian. Lossless, so evaluation can run on unquantized values.
std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::string& path, const std::string& text);

}  // namespace noisecollage::cli
