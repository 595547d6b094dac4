#include "fdp/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fdp {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  // b > 0
  std::int64_t q = a / b;
  if (a % b != 0 && a < 0) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && a > 0) ++q;
  return q;
}

}  // namespace

Rect::Rect(int left, int top, int right, int bottom)
    : left_(left), top_(top), right_(right), bottom_(bottom) {
  if (left < 0 || top < 0) {
    throw std::invalid_argument("Rect: negative coordinate (" + std::to_string(left) + "," +
                                std::to_string(top) + ")");
  }
  if (left >= right || top >= bottom) {
    throw std::invalid_argument("Rect: degenerate extents [" + std::to_string(left) + "," +
                                std::to_string(right) + ")x[" + std::to_string(top) + "," +
                                std::to_string(bottom) + ")");
  }
}

ScoredRect::ScoredRect(Rect r, double conf) : rect(r), confidence(conf) {
  if (!(conf >= 0.0 && conf <= 1.0)) {
    throw std::invalid_argument("ScoredRect: confidence " + std::to_string(conf) +
                                " outside [0,1]");
  }
}

double iou(const Rect& a, const Rect& b) {
  const std::int64_t iw =
      std::int64_t{std::min(a.right(), b.right())} - std::max(a.left(), b.left());
  const std::int64_t ih =
      std::int64_t{std::min(a.bottom(), b.bottom())} - std::max(a.top(), b.top());
  if (iw <= 0 || ih <= 0) return 0.0;
  const std::int64_t inter = iw * ih;
  const std::int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double aspect_ratio(const Rect& r) {
  return static_cast<double>(r.width()) / static_cast<double>(r.height());
}

std::optional<Rect> intersect(const Rect& a, const Rect& b) {
  const int l = std::max(a.left(), b.left());
  const int t = std::max(a.top(), b.top());
  const int r = std::min(a.right(), b.right());
  const int bo = std::min(a.bottom(), b.bottom());
  if (l >= r || t >= bo) return std::nullopt;
  return Rect(l, t, r, bo);
}

Rect bounding_union(const Rect& a, const Rect& b) {
  return Rect(std::min(a.left(), b.left()), std::min(a.top(), b.top()),
              std::max(a.right(), b.right()), std::max(a.bottom(), b.bottom()));
}

Transform::Transform(std::int64_t num_x, std::int64_t den_x, std::int64_t num_y,
                     std::int64_t den_y, std::int64_t offset_x, std::int64_t offset_y)
    : num_x_(num_x), den_x_(den_x), num_y_(num_y), den_y_(den_y), off_x_(offset_x),
      off_y_(offset_y) {
  if (num_x <= 0 || den_x <= 0 || num_y <= 0 || den_y <= 0) {
    throw std::invalid_argument("Transform: scales must be strictly positive");
  }
  const std::int64_t gx = std::gcd(num_x_, den_x_);
  num_x_ /= gx;
  den_x_ /= gx;
  const std::int64_t gy = std::gcd(num_y_, den_y_);
  num_y_ /= gy;
  den_y_ /= gy;
}

Transform Transform::identity() { return Transform(1, 1, 1, 1, 0, 0); }

Transform Transform::scaling(std::int64_t num_x, std::int64_t den_x, std::int64_t num_y,
                             std::int64_t den_y) {
  return Transform(num_x, den_x, num_y, den_y, 0, 0);
}

Transform Transform::translation(int dx, int dy) { return Transform(1, 1, 1, 1, dx, dy); }

bool Transform::is_identity() const {
  return num_x_ == 1 && den_x_ == 1 && num_y_ == 1 && den_y_ == 1 && off_x_ == 0 && off_y_ == 0;
}

Rect Transform::apply(const Rect& r) const {
  const std::int64_t l = floor_div(std::int64_t{r.left()} * num_x_, den_x_) + off_x_;
  const std::int64_t rr = ceil_div(std::int64_t{r.right()} * num_x_, den_x_) + off_x_;
  const std::int64_t t = floor_div(std::int64_t{r.top()} * num_y_, den_y_) + off_y_;
  const std::int64_t b = ceil_div(std::int64_t{r.bottom()} * num_y_, den_y_) + off_y_;
  if (l >= rr || t >= b) {
    throw std::invalid_argument("Transform: result degenerate (sub-pixel box)");
  }
  if (l < 0 || t < 0) {
    throw std::invalid_argument("Transform: result has negative coordinates");
  }
  return Rect(static_cast<int>(l), static_cast<int>(t), static_cast<int>(rr),
              static_cast<int>(b));
}

Transform Transform::inverse() const {
  // x' = x*n/d + o  =>  x = x'*(d/n) - o*d/n
  if ((off_x_ * den_x_) % num_x_ != 0 || (off_y_ * den_y_) % num_y_ != 0) {
    throw std::invalid_argument("Transform: offset not invertible to whole pixels");
  }
  return Transform(den_x_, num_x_, den_y_, num_y_, -(off_x_ * den_x_) / num_x_,
                   -(off_y_ * den_y_) / num_y_);
}

Rect apply_transform(const Transform& t, const Rect& r) { return t.apply(r); }

Transform inverse_transform(const Transform& t) { return t.inverse(); }

}  // namespace fdp
