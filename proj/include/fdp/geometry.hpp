#pragma once

#include <cstdint>
#include <optional>

namespace fdp {

/// Integer pixel rectangle with half-open extents [left,right) x [top,bottom).
/// Area is (right-left)*(bottom-top) and adjacent tiles share no pixel.
/// Construction rejects degenerate and negative rectangles, so every Rect in
/// the system is a valid region of at least one pixel.
class Rect {
 public:
  Rect(int left, int top, int right, int bottom);

  int left() const { return left_; }
  int top() const { return top_; }
  int right() const { return right_; }
  int bottom() const { return bottom_; }
  int width() const { return right_ - left_; }
  int height() const { return bottom_ - top_; }
  std::int64_t area() const { return static_cast<std::int64_t>(width()) * height(); }

  bool contains(int x, int y) const {
    return x >= left_ && x < right_ && y >= top_ && y < bottom_;
  }

  Rect translated(int dx, int dy) const { return Rect(left_ + dx, top_ + dy, right_ + dx, bottom_ + dy); }

  friend bool operator==(const Rect&, const Rect&) = default;
  friend auto operator<=>(const Rect&, const Rect&) = default;

 private:
  int left_, top_, right_, bottom_;
};

/// A detection region with its confidence in [0,1].
struct ScoredRect {
  ScoredRect(Rect r, double conf);

  Rect rect;
  double confidence;
};

/// area(a intersect b) / area(a union b); 0 when disjoint. Integer area
/// arithmetic throughout, a single division at the end.
double iou(const Rect& a, const Rect& b);

/// width / height.
double aspect_ratio(const Rect& r);

/// Intersection as a Rect, or nullopt when the overlap is empty.
std::optional<Rect> intersect(const Rect& a, const Rect& b);

/// Smallest rect containing both.
Rect bounding_union(const Rect& a, const Rect& b);

/// Axis-aligned scale-then-translate map between pixel coordinate systems.
/// Scales are exact rationals; applying a transform scales each edge exactly
/// and then rounds outward (left/top down, right/bottom up) so a mapped box
/// never loses pixels it covered. Offsets are whole pixels added after
/// scaling.
class Transform {
 public:
  static Transform identity();
  static Transform scaling(std::int64_t num_x, std::int64_t den_x,
                           std::int64_t num_y, std::int64_t den_y);
  static Transform translation(int dx, int dy);

  Transform(std::int64_t num_x, std::int64_t den_x, std::int64_t num_y, std::int64_t den_y,
            std::int64_t offset_x, std::int64_t offset_y);

  Rect apply(const Rect& r) const;

  /// Exact inverse: scale flips to den/num, the offset maps back through the
  /// scale. Throws when the offset does not invert to whole pixels.
  Transform inverse() const;

  bool is_identity() const;

  std::int64_t num_x() const { return num_x_; }
  std::int64_t den_x() const { return den_x_; }
  std::int64_t num_y() const { return num_y_; }
  std::int64_t den_y() const { return den_y_; }
  std::int64_t offset_x() const { return off_x_; }
  std::int64_t offset_y() const { return off_y_; }

 private:
  std::int64_t num_x_, den_x_, num_y_, den_y_;  // reduced, strictly positive
  std::int64_t off_x_, off_y_;
};

Rect apply_transform(const Transform& t, const Rect& r);
Transform inverse_transform(const Transform& t);

}  // namespace fdp
