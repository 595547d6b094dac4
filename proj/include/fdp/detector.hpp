#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fdp/geometry.hpp"
#include "fdp/windowing.hpp"

namespace fdp {

/// Detections for one window, in detector-input coordinates.
struct WindowDetections {
  int window_id = 0;
  std::vector<ScoredRect> detections;
};

/// Window-level detector contract. Implementations must be safely callable
/// from multiple workers at once; any per-window randomness must derive only
/// from `window_seed` so the parallel schedule cannot change results.
class Detector {
 public:
  virtual ~Detector() = default;

  /// False for detectors that never look at pixels; the pipeline then skips
  /// cropping and passes an empty raster.
  virtual bool wants_pixels() const { return true; }

  /// `raster` is input_size^2 grayscale (empty iff !wants_pixels());
  /// `window_gt` is ground truth cropped to this window in input coordinates
  /// (empty for detectors that do not consume it).
  virtual WindowDetections detect(const WindowSpec& w, std::span<const std::uint8_t> raster,
                                  std::span<const Rect> window_gt,
                                  std::uint64_t window_seed) const = 0;
};

/// Test double for the trained network: emits the window's ground truth,
/// optionally jittered, dropped, and rescored. Zero noise reproduces the
/// ground truth with confidence 1.
struct OracleParams {
  int position_jitter_px = 0;
  int size_jitter_px = 0;
  double drop_prob = 0.0;
  double confidence_min = 1.0;
  double confidence_max = 1.0;
};

class OracleDetector : public Detector {
 public:
  explicit OracleDetector(OracleParams params = {});
  bool wants_pixels() const override { return false; }
  WindowDetections detect(const WindowSpec& w, std::span<const std::uint8_t> raster,
                          std::span<const Rect> window_gt,
                          std::uint64_t window_seed) const override;

 private:
  OracleParams params_;
};

/// Weak pixel-only baseline for demos without a trained network: binarizes
/// the window, merges horizontally adjacent components, scores by ink
/// density. Not a substitute for a learned detector.
class HeuristicDetector : public Detector {
 public:
  explicit HeuristicDetector(int merge_gap_px = 8, int min_component_px = 4);
  WindowDetections detect(const WindowSpec& w, std::span<const std::uint8_t> raster,
                          std::span<const Rect> window_gt,
                          std::uint64_t window_seed) const override;

 private:
  int merge_gap_px_;
  int min_component_px_;
};

/// Greedy non-maximal suppression: repeatedly keep the highest-confidence
/// remaining detection and discard everything overlapping it with IOU above
/// `iou_threshold`. Equal confidences keep input order. Threshold in (0,1].
std::vector<ScoredRect> nms(std::vector<ScoredRect> detections, double iou_threshold);

// --- external-detector bridge -----------------------------------------------

/// One row of the window manifest shared with an external detector.
/// window_id is globally unique across the manifest.
struct WindowManifestEntry {
  std::string doc_id;
  int page = 0;
  long window_id = 0;
  int origin_x = 0;
  int origin_y = 0;
  int window_size = 1200;
  int input_size = 512;
  bool clamped = false;
};

void write_window_manifest(std::ostream& out, std::span<const WindowManifestEntry> entries);
std::vector<WindowManifestEntry> read_window_manifest(std::istream& in);

/// Writes `doc_id,page,window_id,left,top,right,bottom,confidence` rows,
/// coordinates in detector-input space, confidence with six decimals.
void write_detection_csv(std::ostream& out, std::span<const WindowManifestEntry> manifest,
                         const std::map<long, WindowDetections>& by_window);

struct BridgeImport {
  std::map<long, WindowDetections> by_window;  // key: global window id
  long clamped_boxes = 0;                      // boxes nudged back into input bounds
};

/// Parses a detection CSV against the manifest. Unknown window ids and
/// confidences outside [0,1] are errors; boxes are clamped to the input
/// bounds with a count of how many needed it.
BridgeImport bridge_import(std::istream& in, std::span<const WindowManifestEntry> manifest);

}  // namespace fdp
