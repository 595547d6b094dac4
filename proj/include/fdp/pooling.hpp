#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fdp/detector.hpp"
#include "fdp/geometry.hpp"
#include "fdp/windowing.hpp"

namespace fdp {

/// Pixel vote scoring functions: uniform counts covering boxes, sum adds
/// their confidences, max keeps the best confidence, average divides sum by
/// count.
enum class VoteMethod { uniform, max, sum, average };

const char* to_string(VoteMethod m);
VoteMethod parse_vote_method(const std::string& name);  // throws on unknown

/// Per-pixel accumulator over a page (possibly at a coarser resolution).
/// Merging partial maps is pointwise and commutative, so workers may
/// accumulate disjoint batches in any grouping as long as merge order is
/// fixed; identical box multisets always produce identical maps.
class VoteMap {
 public:
  VoteMap(int width, int height);

  /// `box` is in map coordinates.
  void accumulate(const Rect& box, double confidence);
  void merge(const VoteMap& other);

  double score_at(int x, int y, VoteMethod m) const;

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const std::int32_t> counts() const { return count_; }
  std::span<const double> weighted_sums() const { return weighted_sum_; }
  std::span<const double> max_confidences() const { return max_conf_; }

 private:
  int width_, height_;
  std::vector<std::int32_t> count_;
  std::vector<double> weighted_sum_;
  std::vector<double> max_conf_;
};

/// Dense per-pixel scores produced from a VoteMap.
struct ScoreMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Maps every window detection into page coordinates and concatenates, in
/// window order. No merging happens here. Throws on a window_id that does
/// not resolve against `windows`.
std::vector<ScoredRect> stitch(std::span<const WindowDetections> window_detections,
                               std::span<const WindowSpec> windows);

/// Builds the vote map for `detections` over a page of `page_width` x
/// `page_height`, at 1/downscale resolution (boxes are mapped outward).
VoteMap accumulate_votes(std::span<const ScoredRect> detections, int page_width, int page_height,
                         int downscale = 1);

/// accumulate_votes + score extraction in one call.
ScoreMap vote(std::span<const ScoredRect> detections, int page_width, int page_height,
              VoteMethod method, int downscale = 1);

ScoreMap extract_scores(const VoteMap& map, VoteMethod method);

/// Pixel on iff score >= t; pixels no box ever voted for stay off at any
/// threshold (so t = 0 selects exactly the voted pixels). t >= 0.
std::vector<std::uint8_t> threshold_mask(const ScoreMap& scores, double t);

/// Tight bounding boxes of the 8-connected components of a binary mask.
std::vector<Rect> mask_components(const std::vector<std::uint8_t>& mask, int width, int height);

/// Scales component boxes from map resolution back to page pixels, clipped
/// to the page.
std::vector<Rect> upscale_boxes(std::span<const Rect> boxes, int downscale, int page_width,
                                int page_height);

/// The grids searched in threshold tuning: {0..55} for uniform and sum,
/// {0..100} for max, {0, 0.01, ..., 1} for average.
std::vector<double> default_threshold_grid(VoteMethod method);

/// One training page for grid-search tuning.
struct TunePage {
  int width = 0;
  int height = 0;
  std::vector<ScoredRect> detections;  // stitched, page coordinates
  std::vector<Rect> ground_truth;      // page coordinates
};

/// Returns the grid threshold maximizing the detection f-score at
/// `iou_threshold` across all pages; ties break toward the lowest threshold.
/// Throws on an empty grid.
double tune_threshold(std::span<const TunePage> pages, VoteMethod method,
                      std::span<const double> grid, double iou_threshold = 0.75,
                      int downscale = 1);

/// Final page-level detection rows: `doc_id,page,left,top,right,bottom`.
void write_page_detection_csv(std::ostream& out, const std::string& doc_id, int page,
                              std::span<const Rect> boxes);
void write_page_detection_csv_header(std::ostream& out);

}  // namespace fdp
