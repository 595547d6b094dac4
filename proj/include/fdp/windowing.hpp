#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fdp/geometry.hpp"
#include "fdp/image.hpp"

namespace fdp {

/// One sliding-window placement on a page. The page crop is window_size
/// square starting at (origin_x, origin_y); the detector consumes it
/// downsampled to input_size square. `clamped` marks windows repositioned
/// flush to an edge (or windows larger than the page, which are padded).
struct WindowSpec {
  int window_id = 0;  // index within the page, row-major over (y, x) origins
  int origin_x = 0;
  int origin_y = 0;
  int window_size = 1200;
  int input_size = 512;
  bool clamped = false;

  Transform to_input() const {
    return Transform::scaling(input_size, window_size, input_size, window_size);
  }
  Rect page_rect() const {
    return Rect(origin_x, origin_y, origin_x + window_size, origin_y + window_size);
  }
};

/// Origins at multiples of `stride` per axis, plus a final origin clamped
/// flush to the edge when the last strided window does not land exactly on
/// it. A page smaller than the window yields a single clamped window at the
/// origin (cropping pads with white). Throws on non-positive stride.
std::vector<WindowSpec> generate_windows(int page_width, int page_height, int window_size = 1200,
                                         int stride = 120, int input_size = 512);

/// The window crop downsampled window_size -> input_size by exact
/// area-average resampling; page pixels outside the image are white.
std::vector<std::uint8_t> crop_window(const PageImage& page, const WindowSpec& w);

/// A formula clipped to one window, in detector-input coordinates.
struct WindowGroundTruth {
  Rect input_rect;
  double coverage = 1.0;  // clipped area / full formula area, in page pixels
  int formula_index = 0;  // index into the caller's formula list
};

/// Clips every formula that intersects the window, maps it into input
/// coordinates, and annotates it with its visible-area fraction. Formulas
/// outside the window are absent.
std::vector<WindowGroundTruth> crop_ground_truth(const WindowSpec& w,
                                                 std::span<const Rect> formulas);

/// Maps a detector-input rect back to page coordinates (inverse of to_input,
/// then the window origin offset).
Rect window_to_page(const WindowSpec& w, const Rect& input_rect);

}  // namespace fdp
