#include "fdp/detector.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "fdp/csv.hpp"
#include "fdp/errors.hpp"
#include "fdp/image.hpp"
#include "fdp/postprocess.hpp"
#include "fdp/rng.hpp"

namespace fdp {

OracleDetector::OracleDetector(OracleParams params) : params_(params) {
  if (params_.drop_prob < 0 || params_.drop_prob > 1) {
    throw std::invalid_argument("OracleDetector: drop_prob outside [0,1]");
  }
  if (params_.confidence_min < 0 || params_.confidence_max > 1 ||
      params_.confidence_min > params_.confidence_max) {
    throw std::invalid_argument("OracleDetector: bad confidence range");
  }
  if (params_.position_jitter_px < 0 || params_.size_jitter_px < 0) {
    throw std::invalid_argument("OracleDetector: negative jitter");
  }
}

WindowDetections OracleDetector::detect(const WindowSpec& w, std::span<const std::uint8_t>,
                                        std::span<const Rect> window_gt,
                                        std::uint64_t window_seed) const {
  WindowDetections out;
  out.window_id = w.window_id;
  Rng rng(window_seed);
  const int bound = w.input_size;

  for (const Rect& gt : window_gt) {
    // Consume the same random draws whether or not the box is dropped, so a
    // box's perturbation does not depend on its neighbors' drop outcomes.
    const bool drop = rng.bernoulli(params_.drop_prob);
    int dx = 0, dy = 0, dw = 0, dh = 0;
    if (params_.position_jitter_px > 0) {
      dx = static_cast<int>(rng.uniform_int(-params_.position_jitter_px, params_.position_jitter_px));
      dy = static_cast<int>(rng.uniform_int(-params_.position_jitter_px, params_.position_jitter_px));
    }
    if (params_.size_jitter_px > 0) {
      dw = static_cast<int>(rng.uniform_int(-params_.size_jitter_px, params_.size_jitter_px));
      dh = static_cast<int>(rng.uniform_int(-params_.size_jitter_px, params_.size_jitter_px));
    }
    const double conf = params_.confidence_min == params_.confidence_max
                            ? params_.confidence_max
                            : rng.uniform(params_.confidence_min, params_.confidence_max);
    if (drop) continue;

    int l = gt.left() + dx;
    int t = gt.top() + dy;
    int r = gt.right() + dx + dw;
    int b = gt.bottom() + dy + dh;
    // Clamp into the input square, keeping at least one pixel.
    l = std::clamp(l, 0, bound - 1);
    t = std::clamp(t, 0, bound - 1);
    r = std::clamp(r, l + 1, bound);
    b = std::clamp(b, t + 1, bound);
    out.detections.emplace_back(Rect(l, t, r, b), conf);
  }
  return out;
}

HeuristicDetector::HeuristicDetector(int merge_gap_px, int min_component_px)
    : merge_gap_px_(merge_gap_px), min_component_px_(min_component_px) {}

WindowDetections HeuristicDetector::detect(const WindowSpec& w,
                                           std::span<const std::uint8_t> raster,
                                           std::span<const Rect>, std::uint64_t) const {
  WindowDetections out;
  out.window_id = w.window_id;
  const int n = w.input_size;
  if (raster.size() != static_cast<std::size_t>(n) * n) {
    throw PipelineError("HeuristicDetector: raster size mismatch");
  }

  PageImage img;
  img.width = n;
  img.height = n;
  img.pixels.assign(raster.begin(), raster.end());
  const auto comps = connected_components(binarize(img), n, n);

  struct Blob {
    Rect rect;
    std::int64_t ink;
  };
  std::vector<Blob> blobs;
  for (const auto& c : comps) {
    if (c.pixel_count < min_component_px_) continue;
    blobs.push_back({c.rect, c.pixel_count});
  }
  std::sort(blobs.begin(), blobs.end(),
            [](const Blob& a, const Blob& b) { return a.rect < b.rect; });

  // Merge blobs reading left-to-right when the horizontal gap is small and
  // the vertical ranges overlap.
  std::vector<Blob> merged;
  std::vector<char> used(blobs.size(), 0);
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    if (used[i]) continue;
    Blob cur = blobs[i];
    used[i] = 1;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j = 0; j < blobs.size(); ++j) {
        if (used[j]) continue;
        const Rect& r = blobs[j].rect;
        const bool y_overlap = r.top() < cur.rect.bottom() && cur.rect.top() < r.bottom();
        const bool x_near = r.left() <= cur.rect.right() + merge_gap_px_ &&
                            cur.rect.left() <= r.right() + merge_gap_px_;
        if (y_overlap && x_near) {
          cur.rect = bounding_union(cur.rect, r);
          cur.ink += blobs[j].ink;
          used[j] = 1;
          grew = true;
        }
      }
    }
    merged.push_back(cur);
  }

  for (const auto& b : merged) {
    const double density =
        std::clamp(static_cast<double>(b.ink) / static_cast<double>(b.rect.area()), 0.0, 1.0);
    out.detections.emplace_back(b.rect, density);
  }
  return out;
}

std::vector<ScoredRect> nms(std::vector<ScoredRect> detections, double iou_threshold) {
  if (!(iou_threshold > 0 && iou_threshold <= 1)) {
    throw std::invalid_argument("nms: threshold must be in (0,1]");
  }
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  // Equal confidence keeps the earlier detection first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  std::vector<ScoredRect> kept;
  for (std::size_t idx : order) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (iou(detections[idx].rect, k.rect) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(detections[idx]);
  }
  return kept;
}

// --- bridge ------------------------------------------------------------------

namespace {

constexpr const char* kManifestHeader =
    "doc_id,page,window_id,origin_x,origin_y,window_size,input_size,clamped";
constexpr const char* kDetectionHeader =
    "doc_id,page,window_id,left,top,right,bottom,confidence";

long parse_long(const std::string& s, long line, const char* what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("row " + std::to_string(line) + ": bad " + what + " value '" + s + "'");
  }
}

double parse_double(const std::string& s, long line, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("row " + std::to_string(line) + ": bad " + what + " value '" + s + "'");
  }
}

}  // namespace

void write_window_manifest(std::ostream& out, std::span<const WindowManifestEntry> entries) {
  out << kManifestHeader << '\n';
  for (const auto& e : entries) {
    out << csv_escape(e.doc_id) << ',' << e.page << ',' << e.window_id << ',' << e.origin_x << ','
        << e.origin_y << ',' << e.window_size << ',' << e.input_size << ',' << (e.clamped ? 1 : 0)
        << '\n';
  }
}

std::vector<WindowManifestEntry> read_window_manifest(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) return {};
  if (fields.size() != 8) throw DataError("row 1: expected window manifest header (8 columns)");

  std::vector<WindowManifestEntry> out;
  while (reader.next(fields)) {
    const long line = reader.line_number();
    if (fields.size() != 8) {
      throw DataError("row " + std::to_string(line) + ": expected 8 fields");
    }
    WindowManifestEntry e;
    e.doc_id = fields[0];
    e.page = static_cast<int>(parse_long(fields[1], line, "page"));
    e.window_id = parse_long(fields[2], line, "window_id");
    e.origin_x = static_cast<int>(parse_long(fields[3], line, "origin_x"));
    e.origin_y = static_cast<int>(parse_long(fields[4], line, "origin_y"));
    e.window_size = static_cast<int>(parse_long(fields[5], line, "window_size"));
    e.input_size = static_cast<int>(parse_long(fields[6], line, "input_size"));
    e.clamped = parse_long(fields[7], line, "clamped") != 0;
    out.push_back(std::move(e));
  }
  return out;
}

void write_detection_csv(std::ostream& out, std::span<const WindowManifestEntry> manifest,
                         const std::map<long, WindowDetections>& by_window) {
  out << kDetectionHeader << '\n';
  char buf[32];
  for (const auto& e : manifest) {
    auto it = by_window.find(e.window_id);
    if (it == by_window.end()) continue;
    for (const auto& d : it->second.detections) {
      std::snprintf(buf, sizeof buf, "%.6f", d.confidence);
      out << csv_escape(e.doc_id) << ',' << e.page << ',' << e.window_id << ','
          << d.rect.left() << ',' << d.rect.top() << ',' << d.rect.right() << ','
          << d.rect.bottom() << ',' << buf << '\n';
    }
  }
}

BridgeImport bridge_import(std::istream& in, std::span<const WindowManifestEntry> manifest) {
  std::map<long, const WindowManifestEntry*> index;
  for (const auto& e : manifest) index[e.window_id] = &e;

  CsvReader reader(in);
  std::vector<std::string> fields;
  BridgeImport result;
  if (!reader.next(fields)) return result;  // empty file: no detections anywhere
  if (fields.size() != 8) throw DataError("row 1: expected detection CSV header (8 columns)");

  while (reader.next(fields)) {
    const long line = reader.line_number();
    if (fields.size() != 8) {
      throw DataError("row " + std::to_string(line) + ": expected 8 fields");
    }
    const long window_id = parse_long(fields[2], line, "window_id");
    auto it = index.find(window_id);
    if (it == index.end()) {
      throw DataError("row " + std::to_string(line) + ": unknown window_id " +
                      std::to_string(window_id));
    }
    const WindowManifestEntry& w = *it->second;
    const double conf = parse_double(fields[7], line, "confidence");
    if (!(conf >= 0.0 && conf <= 1.0)) {
      throw DataError("row " + std::to_string(line) + ": confidence " + fields[7] +
                      " outside [0,1]");
    }
    long l = parse_long(fields[3], line, "left");
    long t = parse_long(fields[4], line, "top");
    long r = parse_long(fields[5], line, "right");
    long b = parse_long(fields[6], line, "bottom");
    const int bound = w.input_size;
    const long cl = std::clamp(l, 0L, static_cast<long>(bound - 1));
    const long ct = std::clamp(t, 0L, static_cast<long>(bound - 1));
    const long cr = std::clamp(r, cl + 1, static_cast<long>(bound));
    const long cb = std::clamp(b, ct + 1, static_cast<long>(bound));
    if (cl != l || ct != t || cr != r || cb != b) ++result.clamped_boxes;
    if (cr <= cl || cb <= ct) {
      throw DataError("row " + std::to_string(line) + ": degenerate box");
    }

    auto& wd = result.by_window[window_id];
    wd.window_id = static_cast<int>(window_id);
    wd.detections.emplace_back(Rect(static_cast<int>(cl), static_cast<int>(ct),
                                    static_cast<int>(cr), static_cast<int>(cb)),
                               conf);
  }
  return result;
}

}  // namespace fdp
