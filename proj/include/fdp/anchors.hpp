#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "fdp/dataset.hpp"
#include "fdp/geometry.hpp"

namespace fdp {

/// Default-box layout for one detector input. Grid sizes are feature-map
/// resolutions from fine to coarse; box scales follow the usual linear
/// schedule from scale_min at the finest level to scale_max at the coarsest.
struct AnchorConfig {
  int input_size = 512;
  std::vector<int> grid_sizes = {64, 32, 16, 8, 4, 2, 1};
  double scale_min = 0.1;
  double scale_max = 0.9;
  std::vector<double> aspect_ratios = {1, 2, 3, 5, 7, 10};

  void validate() const;  // throws std::invalid_argument
  double level_scale(std::size_t level) const;
};

/// One anchor. cx/cy/w/h are the unclipped real-valued parameters (input
/// coordinates); rect is the integer box clipped to the input bounds.
struct DefaultBox {
  int level = 0;
  int cell_x = 0;
  int cell_y = 0;
  double aspect_ratio = 1.0;
  double cx = 0, cy = 0, w = 0, h = 0;
  Rect rect;

  DefaultBox(Rect r) : rect(r) {}
};

struct AnchorSet {
  std::vector<DefaultBox> boxes;
  int dropped = 0;  // degenerate after clipping
};

/// Boxes of width scale*input*sqrt(a) and height scale*input/sqrt(a) centered
/// on every cell of every grid level, clipped to the input square. Box ids
/// are indices into the returned vector (level-major, row-major cells, then
/// ratio order).
AnchorSet generate_default_boxes(const AnchorConfig& cfg);

/// Ground-truth-to-anchor assignment: every ground truth box is matched to
/// its highest-IOU default box, and every default box whose best IOU against
/// some ground truth exceeds 0.5 is matched to that ground truth. Matched
/// boxes are POS, all others NEG. Ties break toward the lowest box id
/// (and lowest ground-truth index), so matching is deterministic.
struct MatchResult {
  struct Assignment {
    int box_id;
    int gt_index;
    double iou;
  };
  std::vector<Assignment> assignments;  // sorted by (box_id, gt_index)
  std::vector<int> positives;           // sorted, unique box ids
  int num_boxes = 0;

  std::vector<int> negatives() const;
};

/// Throws std::invalid_argument on an empty default-box list.
MatchResult match_ground_truth(std::span<const Rect> ground_truth,
                               std::span<const DefaultBox> boxes);

/// SSD center-size offsets of a ground-truth box against a default box,
/// both taken as integer rects: (d_cx, d_cy, d_logw, d_logh).
struct BoxOffsets {
  double d_cx, d_cy, d_logw, d_logh;
};
BoxOffsets encode_offsets(const Rect& ground_truth, const Rect& default_box);

/// Writes one CSV row per POS assignment over every window of every page:
///   window_id,box_id,gt_left,gt_top,gt_right,gt_bottom,d_cx,d_cy,d_logw,d_logh
/// Window ids are global and sequential in page order, matching the window
/// manifest produced by the same configuration. A clipped formula becomes a
/// target only if at least `coverage_threshold` of its area is visible or
/// some default box overlaps it with IOU above 0.5. Returns the record count.
long export_training_targets(std::ostream& out, std::span<const GroundTruthPage> pages,
                             const AnchorConfig& cfg, int window_size = 1200, int stride = 120,
                             double coverage_threshold = 0.25);

}  // namespace fdp
