#include "fdp/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fdp/errors.hpp"
#include "fdp/windowing.hpp"

namespace fdp {

void AnchorConfig::validate() const {
  if (input_size <= 0) throw std::invalid_argument("AnchorConfig: input_size must be positive");
  if (grid_sizes.empty()) throw std::invalid_argument("AnchorConfig: no grid sizes");
  for (std::size_t i = 0; i < grid_sizes.size(); ++i) {
    if (grid_sizes[i] <= 0) throw std::invalid_argument("AnchorConfig: grid sizes must be positive");
    if (i > 0 && grid_sizes[i] >= grid_sizes[i - 1]) {
      throw std::invalid_argument("AnchorConfig: grid sizes must be strictly decreasing");
    }
  }
  if (!(scale_min > 0 && scale_min <= 1 && scale_max > 0 && scale_max <= 1) ||
      scale_min > scale_max) {
    throw std::invalid_argument("AnchorConfig: scales must satisfy 0 < min <= max <= 1");
  }
  if (aspect_ratios.empty()) throw std::invalid_argument("AnchorConfig: no aspect ratios");
  for (double a : aspect_ratios) {
    if (!(a > 0)) throw std::invalid_argument("AnchorConfig: aspect ratios must be positive");
  }
}

double AnchorConfig::level_scale(std::size_t level) const {
  if (grid_sizes.size() == 1) return scale_min;
  return scale_min + (scale_max - scale_min) * static_cast<double>(level) /
                         static_cast<double>(grid_sizes.size() - 1);
}

AnchorSet generate_default_boxes(const AnchorConfig& cfg) {
  cfg.validate();
  AnchorSet set;
  const double input = cfg.input_size;
  for (std::size_t level = 0; level < cfg.grid_sizes.size(); ++level) {
    const int grid = cfg.grid_sizes[level];
    const double scale = cfg.level_scale(level);
    for (int cy = 0; cy < grid; ++cy) {
      for (int cx = 0; cx < grid; ++cx) {
        for (double ratio : cfg.aspect_ratios) {
          const double center_x = (cx + 0.5) / grid * input;
          const double center_y = (cy + 0.5) / grid * input;
          const double w = scale * input * std::sqrt(ratio);
          const double h = scale * input / std::sqrt(ratio);
          const int l = std::max(0, static_cast<int>(std::llround(center_x - w / 2)));
          const int t = std::max(0, static_cast<int>(std::llround(center_y - h / 2)));
          const int r = std::min(cfg.input_size, static_cast<int>(std::llround(center_x + w / 2)));
          const int b = std::min(cfg.input_size, static_cast<int>(std::llround(center_y + h / 2)));
          if (l >= r || t >= b) {
            ++set.dropped;
            continue;
          }
          DefaultBox box{Rect(l, t, r, b)};
          box.level = static_cast<int>(level);
          box.cell_x = cx;
          box.cell_y = cy;
          box.aspect_ratio = ratio;
          box.cx = center_x;
          box.cy = center_y;
          box.w = w;
          box.h = h;
          set.boxes.push_back(box);
        }
      }
    }
  }
  return set;
}

std::vector<int> MatchResult::negatives() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(num_boxes) - positives.size());
  std::size_t p = 0;
  for (int id = 0; id < num_boxes; ++id) {
    if (p < positives.size() && positives[p] == id) {
      ++p;
    } else {
      out.push_back(id);
    }
  }
  return out;
}

MatchResult match_ground_truth(std::span<const Rect> ground_truth,
                               std::span<const DefaultBox> boxes) {
  if (boxes.empty()) throw std::invalid_argument("match_ground_truth: empty default-box list");

  MatchResult result;
  result.num_boxes = static_cast<int>(boxes.size());
  if (ground_truth.empty()) return result;

  const std::size_t n_gt = ground_truth.size();
  const std::size_t n_box = boxes.size();

  // Best box per ground truth, and best ground truth per box.
  std::vector<int> best_box(n_gt, 0);
  std::vector<double> best_box_iou(n_gt, -1.0);
  std::vector<int> best_gt(n_box, 0);
  std::vector<double> best_gt_iou(n_box, -1.0);

  for (std::size_t b = 0; b < n_box; ++b) {
    for (std::size_t g = 0; g < n_gt; ++g) {
      const double v = iou(boxes[b].rect, ground_truth[g]);
      if (v > best_box_iou[g]) {
        best_box_iou[g] = v;
        best_box[g] = static_cast<int>(b);
      }
      if (v > best_gt_iou[b]) {
        best_gt_iou[b] = v;
        best_gt[b] = static_cast<int>(g);
      }
    }
  }

  std::vector<std::uint8_t> via_argmax(n_box, 0);
  for (std::size_t g = 0; g < n_gt; ++g) {
    result.assignments.push_back(
        {best_box[g], static_cast<int>(g), std::max(best_box_iou[g], 0.0)});
    via_argmax[static_cast<std::size_t>(best_box[g])] = 1;
  }
  for (std::size_t b = 0; b < n_box; ++b) {
    if (via_argmax[b] || best_gt_iou[b] <= 0.5) continue;
    result.assignments.push_back({static_cast<int>(b), best_gt[b], best_gt_iou[b]});
  }

  std::sort(result.assignments.begin(), result.assignments.end(),
            [](const MatchResult::Assignment& a, const MatchResult::Assignment& b) {
              if (a.box_id != b.box_id) return a.box_id < b.box_id;
              return a.gt_index < b.gt_index;
            });
  for (const auto& a : result.assignments) result.positives.push_back(a.box_id);
  result.positives.erase(std::unique(result.positives.begin(), result.positives.end()),
                         result.positives.end());
  return result;
}

BoxOffsets encode_offsets(const Rect& gt, const Rect& box) {
  const double gcx = (gt.left() + gt.right()) / 2.0;
  const double gcy = (gt.top() + gt.bottom()) / 2.0;
  const double bcx = (box.left() + box.right()) / 2.0;
  const double bcy = (box.top() + box.bottom()) / 2.0;
  return {(gcx - bcx) / box.width(), (gcy - bcy) / box.height(),
          std::log(static_cast<double>(gt.width()) / box.width()),
          std::log(static_cast<double>(gt.height()) / box.height())};
}

long export_training_targets(std::ostream& out, std::span<const GroundTruthPage> pages,
                             const AnchorConfig& cfg, int window_size, int stride,
                             double coverage_threshold) {
  const AnchorSet anchors = generate_default_boxes(cfg);
  out << "window_id,box_id,gt_left,gt_top,gt_right,gt_bottom,d_cx,d_cy,d_logw,d_logh\n";

  long records = 0;
  long window_id = 0;
  char buf[64];
  for (const auto& page : pages) {
    std::vector<Rect> formula_boxes;
    formula_boxes.reserve(page.formulas.size());
    for (const auto& f : page.formulas) formula_boxes.push_back(f.bbox);

    const auto windows = generate_windows(page.width, page.height, window_size, stride,
                                          cfg.input_size);
    for (const auto& w : windows) {
      const long global_id = window_id++;
      if (formula_boxes.empty()) continue;
      const auto cropped = crop_ground_truth(w, formula_boxes);
      std::vector<Rect> targets;
      for (const auto& c : cropped) {
        if (c.coverage >= coverage_threshold) {
          targets.push_back(c.input_rect);
          continue;
        }
        // Border slivers stay in only when some anchor still fits them well.
        double best = 0;
        for (const auto& b : anchors.boxes) best = std::max(best, iou(b.rect, c.input_rect));
        if (best > 0.5) targets.push_back(c.input_rect);
      }
      if (targets.empty()) continue;
      const MatchResult match = match_ground_truth(targets, anchors.boxes);
      for (const auto& a : match.assignments) {
        const Rect& gt = targets[static_cast<std::size_t>(a.gt_index)];
        const BoxOffsets off =
            encode_offsets(gt, anchors.boxes[static_cast<std::size_t>(a.box_id)].rect);
        out << global_id << ',' << a.box_id << ',' << gt.left() << ',' << gt.top() << ','
            << gt.right() << ',' << gt.bottom();
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f", off.d_cx, off.d_cy, off.d_logw,
                      off.d_logh);
        out << buf << '\n';
        ++records;
      }
    }
  }
  if (!out) throw PipelineError("export_training_targets: write failed");
  return records;
}

}  // namespace fdp
