#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdp/config.hpp"
#include "fdp/dataset.hpp"
#include "fdp/detector.hpp"
#include "fdp/evaluation.hpp"

namespace fdp {

/// One page of the run universe: identity, raster path, optional ground
/// truth. Pages are sorted by (doc_id, page) so window numbering, output
/// order, and worker scheduling are all reproducible.
struct PageTask {
  std::string doc_id;
  int page = 0;
  std::filesystem::path image_path;
  const GroundTruthPage* ground_truth = nullptr;  // owned by the caller's page list
  int width = 0;
  int height = 0;  // from the image when loaded, otherwise ground-truth extents
};

/// Builds the sorted page universe from ground truth (when available) or a
/// directory scan of `pages_dir` for `{doc_id}_{page}.pgm` files.
std::vector<PageTask> build_page_tasks(const PipelineConfig& cfg,
                                       const std::vector<GroundTruthPage>& gt_pages);

/// The global window manifest for a page universe: windows numbered
/// sequentially across pages in task order.
std::vector<WindowManifestEntry> build_window_manifest(const PipelineConfig& cfg,
                                                       std::span<const PageTask> tasks);

struct PipelineOutcome {
  std::filesystem::path detections_csv;
  std::filesystem::path manifest_path;
  long pages = 0;
  long windows = 0;
  long window_detections = 0;
  long final_detections = 0;
  long window_errors = 0;
  std::string first_window_error;
  std::vector<std::pair<std::string, double>> stage_seconds;
};

/// Full run: tile, detect, per-window postprocess and NMS, stitch, vote,
/// threshold, connected components, page-level postprocess, write
/// detections CSV plus run manifest. Deterministic for a fixed config and
/// seed regardless of worker count.
PipelineOutcome run_pipeline(const PipelineConfig& cfg);

/// Detections for one page as computed by the pipeline stages (library entry
/// point for tests and the pool command). A detector failure in one window
/// is recorded and skipped; it does not abort the page.
struct PageStageResult {
  std::vector<Rect> final_boxes;
  long window_detections = 0;
  long window_errors = 0;
  std::string first_window_error;
};

/// `external`, when set, supplies detections keyed by window_id_base + the
/// local window id instead of running `detector`. `windows_override` replaces
/// the windows generated from the config (the pool command rebuilds them from
/// a manifest); local window ids then index that list.
PageStageResult process_page(const PipelineConfig& cfg, const PageTask& task,
                             const Detector* detector,
                             const std::map<long, WindowDetections>* external, long window_id_base,
                             const PageImage* image,
                             const std::vector<WindowSpec>* windows_override = nullptr);

std::uint64_t fnv1a_file(const std::filesystem::path& path);

}  // namespace fdp
