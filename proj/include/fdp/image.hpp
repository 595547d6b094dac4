#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fdp/geometry.hpp"

namespace fdp {

/// Grayscale 8-bit page raster, row-major, nominally 600 dpi.
struct PageImage {
  int width = 0;
  int height = 0;
  int dpi = 600;
  std::vector<std::uint8_t> pixels;

  static PageImage blank(int width, int height, std::uint8_t value = 255);

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Reads a PGM file (binary P5 or ASCII P2, maxval <= 255).
PageImage read_pgm(const std::filesystem::path& path);

/// Reads only the header. Returns {width, height}.
std::pair<int, int> read_pgm_size(const std::filesystem::path& path);

/// Writes binary P5.
void write_pgm(const PageImage& img, const std::filesystem::path& path);

void fill_rect(PageImage& img, const Rect& r, std::uint8_t value);

/// Draws an outline of the given thickness just inside the rect's border.
void draw_rect_outline(PageImage& img, const Rect& r, std::uint8_t value, int thickness = 3);

struct LabeledComponent {
  Rect rect;
  std::int64_t pixel_count = 0;
};

/// Tight bounding boxes of 8-connected components of the nonzero pixels of
/// `mask` (row-major, width*height). Components are ordered by their first
/// pixel in row-major scan order.
std::vector<LabeledComponent> connected_components(const std::vector<std::uint8_t>& mask,
                                                   int width, int height);

}  // namespace fdp
