#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fdp/geometry.hpp"
#include "fdp/image.hpp"

namespace fdp {

/// Otsu threshold over the image histogram; ink is dark-on-light. Returns
/// the class split t where ink = value <= t. Constant images fall back to
/// "ink iff darker than mid-gray".
int otsu_threshold(const PageImage& img);

/// Binary ink mask (1 = ink). A blank page yields an empty mask.
std::vector<std::uint8_t> binarize(const PageImage& img);

struct InkComponent {
  Rect rect;
  std::int64_t pixel_count = 0;
};

/// Connected components of page ink with a uniform-grid spatial index for
/// box-intersection queries. Immutable once built; queries are safe from any
/// number of threads.
class InkComponents {
 public:
  static InkComponents build(const PageImage& page);
  static InkComponents from_mask(const std::vector<std::uint8_t>& mask, int width, int height);

  /// Tight union of the rects of every component the box contains or touches
  /// (rect intersection with one pixel of tolerance), expanded until stable
  /// so re-cropping the result is a no-op. Absent when the box touches no
  /// ink at all.
  std::optional<Rect> crop_box(const Rect& box) const;

  /// Components whose rects intersect `area` (same 1 px tolerance).
  std::vector<Rect> components_in(const Rect& area) const;

  std::span<const InkComponent> components() const { return components_; }
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  InkComponents() = default;
  void build_index();
  std::vector<int> candidates(const Rect& box) const;

  int width_ = 0, height_ = 0;
  std::vector<InkComponent> components_;
  int cell_ = 256;
  int cells_x_ = 0, cells_y_ = 0;
  std::vector<std::vector<int>> grid_;
};

/// Same crop rule against an explicit component-rect list (used per window,
/// where components have already been clipped and rescaled).
std::optional<Rect> crop_to_components(const Rect& box, std::span<const Rect> component_rects);

}  // namespace fdp
