#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "fdp/anchors.hpp"
#include "fdp/detector.hpp"
#include "fdp/pooling.hpp"

namespace fdp {

enum class DetectorKind { oracle, heuristic, external };

const char* to_string(DetectorKind k);
DetectorKind parse_detector_kind(const std::string& name);

/// Full pipeline configuration. Defaults: 1200 px windows at stride 120 over
/// 600 dpi pages, 512 px detector inputs, uniform voting thresholded at 30,
/// NMS at 0.45, anchor ratios {1,2,3,5,7,10}.
struct PipelineConfig {
  int window_size = 1200;
  int stride = 120;
  int input_size = 512;

  VoteMethod vote_method = VoteMethod::uniform;
  double vote_threshold = 30.0;
  int vote_downscale = 4;  // vote maps at 1/4 page resolution; 1 = full

  double nms_iou = 0.45;

  AnchorConfig anchors;

  DetectorKind detector = DetectorKind::oracle;
  OracleParams oracle;
  std::uint64_t seed = 0;

  int workers = 1;
  bool postprocess = true;
  bool render_overlays = false;
  bool dump_heatmaps = false;

  std::string pages_dir;
  std::string gt_csv;
  std::string external_dets_csv;
  std::string out_dir = "out";

  void validate() const;  // throws std::invalid_argument
};

/// key=value lines, '#' comments. Unknown keys are errors.
PipelineConfig load_config_file(const std::filesystem::path& path);

/// Applies one key=value override (same keys as the file format).
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Canonical serialization: every key in fixed order, one per line. Equal
/// configurations serialize identically.
std::string serialize_config(const PipelineConfig& cfg);

std::uint64_t config_hash(const PipelineConfig& cfg);

}  // namespace fdp
