#include "fdp/windowing.hpp"

#include <algorithm>
#include <stdexcept>

namespace fdp {

namespace {

struct AxisOrigin {
  int origin;
  bool clamped;
};

std::vector<AxisOrigin> axis_origins(int dim, int window, int stride) {
  std::vector<AxisOrigin> out;
  if (dim <= window) {
    out.push_back({0, dim < window});
    return out;
  }
  const int last = (dim - window) / stride;  // floor
  for (int k = 0; k <= last; ++k) out.push_back({k * stride, false});
  if (last * stride + window < dim) out.push_back({dim - window, true});
  return out;
}

}  // namespace

std::vector<WindowSpec> generate_windows(int page_width, int page_height, int window_size,
                                         int stride, int input_size) {
  if (stride <= 0) throw std::invalid_argument("generate_windows: stride must be positive");
  if (window_size <= 0 || input_size <= 0) {
    throw std::invalid_argument("generate_windows: sizes must be positive");
  }
  if (page_width <= 0 || page_height <= 0) {
    throw std::invalid_argument("generate_windows: page must be non-empty");
  }

  const auto xs = axis_origins(page_width, window_size, stride);
  const auto ys = axis_origins(page_height, window_size, stride);

  std::vector<WindowSpec> out;
  out.reserve(xs.size() * ys.size());
  int id = 0;
  for (const auto& y : ys) {
    for (const auto& x : xs) {
      WindowSpec w;
      w.window_id = id++;
      w.origin_x = x.origin;
      w.origin_y = y.origin;
      w.window_size = window_size;
      w.input_size = input_size;
      w.clamped = x.clamped || y.clamped;
      out.push_back(w);
    }
  }
  return out;
}

std::vector<std::uint8_t> crop_window(const PageImage& page, const WindowSpec& w) {
  const int in = w.input_size;
  const int win = w.window_size;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(in) * in);

  // Output pixel i covers window span [i*win, (i+1)*win) in units of 1/in
  // window pixels; weights against whole window pixels stay integral in
  // those units, so the average is exact up to the final rounding.
  auto sample = [&](int wx, int wy) -> int {
    const int px = w.origin_x + wx;
    const int py = w.origin_y + wy;
    if (px < 0 || py < 0 || px >= page.width || py >= page.height) return 255;  // white pad
    return page.at(px, py);
  };

  const std::int64_t total_weight = static_cast<std::int64_t>(win) * win;
  for (int oy = 0; oy < in; ++oy) {
    const std::int64_t y0 = static_cast<std::int64_t>(oy) * win;        // in 1/in units
    const std::int64_t y1 = static_cast<std::int64_t>(oy + 1) * win;
    const int sy0 = static_cast<int>(y0 / in);
    const int sy1 = static_cast<int>((y1 + in - 1) / in);
    for (int ox = 0; ox < in; ++ox) {
      const std::int64_t x0 = static_cast<std::int64_t>(ox) * win;
      const std::int64_t x1 = static_cast<std::int64_t>(ox + 1) * win;
      const int sx0 = static_cast<int>(x0 / in);
      const int sx1 = static_cast<int>((x1 + in - 1) / in);

      std::int64_t acc = 0;
      for (int sy = sy0; sy < sy1; ++sy) {
        const std::int64_t wy0 = std::max<std::int64_t>(y0, static_cast<std::int64_t>(sy) * in);
        const std::int64_t wy1 = std::min<std::int64_t>(y1, static_cast<std::int64_t>(sy + 1) * in);
        const std::int64_t wy_len = wy1 - wy0;
        for (int sx = sx0; sx < sx1; ++sx) {
          const std::int64_t wx0 = std::max<std::int64_t>(x0, static_cast<std::int64_t>(sx) * in);
          const std::int64_t wx1 = std::min<std::int64_t>(x1, static_cast<std::int64_t>(sx + 1) * in);
          acc += (wx1 - wx0) * wy_len * sample(sx, sy);
        }
      }
      out[static_cast<std::size_t>(oy) * in + ox] =
          static_cast<std::uint8_t>((acc + total_weight / 2) / total_weight);
    }
  }
  return out;
}

std::vector<WindowGroundTruth> crop_ground_truth(const WindowSpec& w,
                                                 std::span<const Rect> formulas) {
  std::vector<WindowGroundTruth> out;
  const Rect window_rect = w.page_rect();
  const Transform to_input = w.to_input();
  for (std::size_t i = 0; i < formulas.size(); ++i) {
    const auto clipped = intersect(formulas[i], window_rect);
    if (!clipped) continue;
    const Rect local = clipped->translated(-w.origin_x, -w.origin_y);
    WindowGroundTruth gt{to_input.apply(local),
                         static_cast<double>(clipped->area()) /
                             static_cast<double>(formulas[i].area()),
                         static_cast<int>(i)};
    out.push_back(gt);
  }
  return out;
}

Rect window_to_page(const WindowSpec& w, const Rect& input_rect) {
  const Rect local = w.to_input().inverse().apply(input_rect);
  return local.translated(w.origin_x, w.origin_y);
}

}  // namespace fdp
