#include "fdp/postprocess.hpp"

#include <algorithm>
#include <array>

namespace fdp {

int otsu_threshold(const PageImage& img) {
  std::array<std::int64_t, 256> hist{};
  for (std::uint8_t v : img.pixels) ++hist[v];
  const std::int64_t total = static_cast<std::int64_t>(img.pixels.size());
  if (total == 0) return -1;

  std::int64_t sum_all = 0;
  for (int v = 0; v < 256; ++v) sum_all += static_cast<std::int64_t>(v) * hist[v];

  int best_t = -1;
  double best_var = -1.0;
  std::int64_t w0 = 0, sum0 = 0;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += static_cast<std::int64_t>(t) * hist[t];
    const std::int64_t w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    const double mu0 = static_cast<double>(sum0) / static_cast<double>(w0);
    const double mu1 = static_cast<double>(sum_all - sum0) / static_cast<double>(w1);
    const double var = static_cast<double>(w0) * static_cast<double>(w1) * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  if (best_t < 0) {
    // Constant image: every split is equal, decide by absolute darkness.
    const int v = img.pixels.empty() ? 255 : img.pixels[0];
    return v < 128 ? v : -1;
  }
  return best_t;
}

std::vector<std::uint8_t> binarize(const PageImage& img) {
  const int t = otsu_threshold(img);
  std::vector<std::uint8_t> mask(img.pixels.size(), 0);
  if (t < 0) return mask;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) mask[i] = img.pixels[i] <= t ? 1 : 0;
  return mask;
}

InkComponents InkComponents::build(const PageImage& page) {
  return from_mask(binarize(page), page.width, page.height);
}

InkComponents InkComponents::from_mask(const std::vector<std::uint8_t>& mask, int width,
                                       int height) {
  InkComponents ink;
  ink.width_ = width;
  ink.height_ = height;
  for (const auto& c : connected_components(mask, width, height)) {
    ink.components_.push_back({c.rect, c.pixel_count});
  }
  ink.build_index();
  return ink;
}

void InkComponents::build_index() {
  cells_x_ = std::max(1, (width_ + cell_ - 1) / cell_);
  cells_y_ = std::max(1, (height_ + cell_ - 1) / cell_);
  grid_.assign(static_cast<std::size_t>(cells_x_) * cells_y_, {});
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const Rect& r = components_[i].rect;
    const int cx0 = r.left() / cell_;
    const int cx1 = std::min(cells_x_ - 1, (r.right() - 1) / cell_);
    const int cy0 = r.top() / cell_;
    const int cy1 = std::min(cells_y_ - 1, (r.bottom() - 1) / cell_);
    for (int cy = cy0; cy <= cy1; ++cy) {
      for (int cx = cx0; cx <= cx1; ++cx) {
        grid_[static_cast<std::size_t>(cy) * cells_x_ + cx].push_back(static_cast<int>(i));
      }
    }
  }
}

namespace {

// Rect intersection with one pixel of tolerance: shared borders count.
bool touches(const Rect& a, const Rect& b) {
  return a.left() <= b.right() && b.left() <= a.right() && a.top() <= b.bottom() &&
         b.top() <= a.bottom();
}

}  // namespace

std::vector<int> InkComponents::candidates(const Rect& box) const {
  const int cx0 = std::max(0, (box.left() - 1)) / cell_;
  const int cx1 = std::min(cells_x_ - 1, (box.right() + 1) / cell_);
  const int cy0 = std::max(0, (box.top() - 1)) / cell_;
  const int cy1 = std::min(cells_y_ - 1, (box.bottom() + 1) / cell_);
  std::vector<int> ids;
  for (int cy = cy0; cy <= cy1; ++cy) {
    for (int cx = cx0; cx <= cx1; ++cx) {
      const auto& cell = grid_[static_cast<std::size_t>(cy) * cells_x_ + cx];
      ids.insert(ids.end(), cell.begin(), cell.end());
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::optional<Rect> InkComponents::crop_box(const Rect& box) const {
  std::optional<Rect> result;
  Rect query = box;
  // Expand until the touched component set stops growing the union.
  for (;;) {
    std::optional<Rect> next = result;
    for (int id : candidates(query)) {
      const Rect& cr = components_[static_cast<std::size_t>(id)].rect;
      if (touches(query, cr)) next = next ? bounding_union(*next, cr) : cr;
    }
    if (!next) return std::nullopt;
    if (result && *next == *result) return result;
    result = next;
    query = *result;
  }
}

std::vector<Rect> InkComponents::components_in(const Rect& area) const {
  std::vector<Rect> out;
  for (int id : candidates(area)) {
    const Rect& cr = components_[static_cast<std::size_t>(id)].rect;
    if (touches(area, cr)) out.push_back(cr);
  }
  return out;
}

std::optional<Rect> crop_to_components(const Rect& box, std::span<const Rect> component_rects) {
  std::optional<Rect> result;
  Rect query = box;
  for (;;) {
    std::optional<Rect> next = result;
    for (const Rect& cr : component_rects) {
      if (touches(query, cr)) next = next ? bounding_union(*next, cr) : cr;
    }
    if (!next) return std::nullopt;
    if (result && *next == *result) return result;
    result = next;
    query = *result;
  }
}

}  // namespace fdp
