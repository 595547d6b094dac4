#include "fdp/pooling.hpp"

#include <algorithm>
#include <stdexcept>

#include "fdp/csv.hpp"
#include "fdp/errors.hpp"
#include "fdp/evaluation.hpp"
#include "fdp/image.hpp"

namespace fdp {

const char* to_string(VoteMethod m) {
  switch (m) {
    case VoteMethod::uniform: return "uniform";
    case VoteMethod::max: return "max";
    case VoteMethod::sum: return "sum";
    case VoteMethod::average: return "average";
  }
  return "uniform";
}

VoteMethod parse_vote_method(const std::string& name) {
  if (name == "uniform") return VoteMethod::uniform;
  if (name == "max") return VoteMethod::max;
  if (name == "sum") return VoteMethod::sum;
  if (name == "average") return VoteMethod::average;
  throw std::invalid_argument("unknown vote method '" + name + "'");
}

VoteMap::VoteMap(int width, int height)
    : width_(width), height_(height),
      count_(static_cast<std::size_t>(width) * height, 0),
      weighted_sum_(static_cast<std::size_t>(width) * height, 0.0),
      max_conf_(static_cast<std::size_t>(width) * height, 0.0) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("VoteMap: empty dimensions");
}

void VoteMap::accumulate(const Rect& box, double confidence) {
  const int x0 = std::max(0, box.left());
  const int x1 = std::min(width_, box.right());
  const int y0 = std::max(0, box.top());
  const int y1 = std::min(height_, box.bottom());
  for (int y = y0; y < y1; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width_;
    for (int x = x0; x < x1; ++x) {
      const std::size_t i = row + x;
      count_[i] += 1;
      weighted_sum_[i] += confidence;
      max_conf_[i] = std::max(max_conf_[i], confidence);
    }
  }
}

void VoteMap::merge(const VoteMap& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw std::invalid_argument("VoteMap::merge: dimension mismatch");
  }
  for (std::size_t i = 0; i < count_.size(); ++i) {
    count_[i] += other.count_[i];
    weighted_sum_[i] += other.weighted_sum_[i];
    max_conf_[i] = std::max(max_conf_[i], other.max_conf_[i]);
  }
}

double VoteMap::score_at(int x, int y, VoteMethod m) const {
  const std::size_t i = static_cast<std::size_t>(y) * width_ + x;
  switch (m) {
    case VoteMethod::uniform: return static_cast<double>(count_[i]);
    case VoteMethod::max: return max_conf_[i];
    case VoteMethod::sum: return weighted_sum_[i];
    case VoteMethod::average:
      return count_[i] > 0 ? weighted_sum_[i] / static_cast<double>(count_[i]) : 0.0;
  }
  return 0.0;
}

std::vector<ScoredRect> stitch(std::span<const WindowDetections> window_detections,
                               std::span<const WindowSpec> windows) {
  std::vector<ScoredRect> out;
  for (const auto& wd : window_detections) {
    const WindowSpec* spec = nullptr;
    for (const auto& w : windows) {
      if (w.window_id == wd.window_id) {
        spec = &w;
        break;
      }
    }
    if (!spec) {
      throw DataError("stitch: unresolvable window_id " + std::to_string(wd.window_id));
    }
    for (const auto& d : wd.detections) {
      out.emplace_back(window_to_page(*spec, d.rect), d.confidence);
    }
  }
  return out;
}

namespace {

Rect to_map_coords(const Rect& box, int downscale) {
  if (downscale == 1) return box;
  // Outward rounding keeps every covered page pixel covered on the map.
  return Transform::scaling(1, downscale, 1, downscale).apply(box);
}

}  // namespace

VoteMap accumulate_votes(std::span<const ScoredRect> detections, int page_width, int page_height,
                         int downscale) {
  if (downscale < 1) throw std::invalid_argument("accumulate_votes: downscale must be >= 1");
  const int mw = (page_width + downscale - 1) / downscale;
  const int mh = (page_height + downscale - 1) / downscale;
  VoteMap map(std::max(1, mw), std::max(1, mh));
  for (const auto& d : detections) {
    map.accumulate(to_map_coords(d.rect, downscale), d.confidence);
  }
  return map;
}

ScoreMap extract_scores(const VoteMap& map, VoteMethod method) {
  ScoreMap s;
  s.width = map.width();
  s.height = map.height();
  s.values.resize(static_cast<std::size_t>(s.width) * s.height);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      s.values[static_cast<std::size_t>(y) * s.width + x] = map.score_at(x, y, method);
    }
  }
  return s;
}

ScoreMap vote(std::span<const ScoredRect> detections, int page_width, int page_height,
              VoteMethod method, int downscale) {
  return extract_scores(accumulate_votes(detections, page_width, page_height, downscale), method);
}

std::vector<std::uint8_t> threshold_mask(const ScoreMap& scores, double t) {
  if (t < 0) throw std::invalid_argument("threshold_mask: t must be >= 0");
  std::vector<std::uint8_t> mask(scores.values.size(), 0);
  for (std::size_t i = 0; i < scores.values.size(); ++i) {
    mask[i] = (scores.values[i] >= t && scores.values[i] > 0) ? 1 : 0;
  }
  return mask;
}

std::vector<Rect> mask_components(const std::vector<std::uint8_t>& mask, int width, int height) {
  std::vector<Rect> out;
  for (const auto& c : connected_components(mask, width, height)) out.push_back(c.rect);
  return out;
}

std::vector<Rect> upscale_boxes(std::span<const Rect> boxes, int downscale, int page_width,
                                int page_height) {
  std::vector<Rect> out;
  out.reserve(boxes.size());
  for (const Rect& b : boxes) {
    const int l = std::min(b.left() * downscale, page_width - 1);
    const int t = std::min(b.top() * downscale, page_height - 1);
    const int r = std::min(b.right() * downscale, page_width);
    const int bo = std::min(b.bottom() * downscale, page_height);
    out.emplace_back(l, t, std::max(r, l + 1), std::max(bo, t + 1));
  }
  return out;
}

std::vector<double> default_threshold_grid(VoteMethod method) {
  std::vector<double> grid;
  switch (method) {
    case VoteMethod::uniform:
    case VoteMethod::sum:
      for (int t = 0; t <= 55; ++t) grid.push_back(t);
      break;
    case VoteMethod::max:
      for (int t = 0; t <= 100; ++t) grid.push_back(t);
      break;
    case VoteMethod::average:
      for (int t = 0; t <= 100; ++t) grid.push_back(t / 100.0);
      break;
  }
  return grid;
}

double tune_threshold(std::span<const TunePage> pages, VoteMethod method,
                      std::span<const double> grid, double iou_threshold, int downscale) {
  if (grid.empty()) throw std::invalid_argument("tune_threshold: empty grid");
  std::vector<double> candidates(grid.begin(), grid.end());
  std::sort(candidates.begin(), candidates.end());  // ties resolve to the lowest threshold

  // Vote once per page, sweep thresholds over the maps.
  std::vector<ScoreMap> maps;
  maps.reserve(pages.size());
  for (const auto& p : pages) {
    maps.push_back(vote(p.detections, p.width, p.height, method, downscale));
  }

  double best_t = candidates.front();
  double best_f = -1.0;
  for (const double t : candidates) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pages.size(); ++i) {
      const auto mask = threshold_mask(maps[i], t);
      const auto comps = mask_components(mask, maps[i].width, maps[i].height);
      const auto boxes = upscale_boxes(comps, downscale, pages[i].width, pages[i].height);
      const PageMatch pm = match_page(pages[i].ground_truth, boxes, iou_threshold);
      tp += pm.tp;
      fp += pm.fp;
      fn += pm.fn;
    }
    const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double r = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    if (f > best_f) {  // strict: ties keep the lowest threshold
      best_f = f;
      best_t = t;
    }
  }
  return best_t;
}

void write_page_detection_csv_header(std::ostream& out) {
  out << "doc_id,page,left,top,right,bottom\n";
}

void write_page_detection_csv(std::ostream& out, const std::string& doc_id, int page,
                              std::span<const Rect> boxes) {
  for (const Rect& b : boxes) {
    out << csv_escape(doc_id) << ',' << page << ',' << b.left() << ',' << b.top() << ','
        << b.right() << ',' << b.bottom() << '\n';
  }
}

}  // namespace fdp
