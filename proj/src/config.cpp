#include "fdp/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fdp/errors.hpp"
#include "fdp/rng.hpp"

namespace fdp {

const char* to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::oracle: return "oracle";
    case DetectorKind::heuristic: return "heuristic";
    case DetectorKind::external: return "external";
  }
  return "oracle";
}

DetectorKind parse_detector_kind(const std::string& name) {
  if (name == "oracle") return DetectorKind::oracle;
  if (name == "heuristic") return DetectorKind::heuristic;
  if (name == "external") return DetectorKind::external;
  throw std::invalid_argument("unknown detector '" + name + "'");
}

void PipelineConfig::validate() const {
  if (window_size <= 0 || stride <= 0 || input_size <= 0) {
    throw std::invalid_argument("config: sizes and stride must be positive");
  }
  if (stride > window_size) {
    throw std::invalid_argument("config: stride must not exceed window_size");
  }
  if (vote_threshold < 0) throw std::invalid_argument("config: vote_threshold must be >= 0");
  if (!(nms_iou > 0 && nms_iou <= 1)) throw std::invalid_argument("config: nms_iou in (0,1]");
  if (vote_downscale < 1) throw std::invalid_argument("config: vote_downscale must be >= 1");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  anchors.validate();
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

int to_int(const std::string& v, const std::string& key) {
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw DataError("config: bad integer for " + key + ": '" + v + "'");
  }
}

double to_double(const std::string& v, const std::string& key) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw DataError("config: bad number for " + key + ": '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw DataError("config: bad boolean for " + key + ": '" + v + "'");
}

}  // namespace

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "window_size") cfg.window_size = to_int(value, key);
  else if (key == "stride") cfg.stride = to_int(value, key);
  else if (key == "input_size") {
    cfg.input_size = to_int(value, key);
    cfg.anchors.input_size = cfg.input_size;
  } else if (key == "vote_method") cfg.vote_method = parse_vote_method(value);
  else if (key == "vote_threshold") cfg.vote_threshold = to_double(value, key);
  else if (key == "vote_downscale") cfg.vote_downscale = to_int(value, key);
  else if (key == "nms_iou") cfg.nms_iou = to_double(value, key);
  else if (key == "detector") cfg.detector = parse_detector_kind(value);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "workers") cfg.workers = to_int(value, key);
  else if (key == "postprocess") cfg.postprocess = to_bool(value, key);
  else if (key == "render_overlays") cfg.render_overlays = to_bool(value, key);
  else if (key == "dump_heatmaps") cfg.dump_heatmaps = to_bool(value, key);
  else if (key == "pages_dir") cfg.pages_dir = value;
  else if (key == "gt_csv") cfg.gt_csv = value;
  else if (key == "external_dets_csv") cfg.external_dets_csv = value;
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "oracle.position_jitter_px") cfg.oracle.position_jitter_px = to_int(value, key);
  else if (key == "oracle.size_jitter_px") cfg.oracle.size_jitter_px = to_int(value, key);
  else if (key == "oracle.drop_prob") cfg.oracle.drop_prob = to_double(value, key);
  else if (key == "oracle.confidence_min") cfg.oracle.confidence_min = to_double(value, key);
  else if (key == "oracle.confidence_max") cfg.oracle.confidence_max = to_double(value, key);
  else if (key == "anchors.scale_min") cfg.anchors.scale_min = to_double(value, key);
  else if (key == "anchors.scale_max") cfg.anchors.scale_max = to_double(value, key);
  else if (key == "anchors.grid_sizes") {
    cfg.anchors.grid_sizes.clear();
    for (const auto& s : split_list(value)) cfg.anchors.grid_sizes.push_back(to_int(s, key));
  } else if (key == "anchors.aspect_ratios") {
    cfg.anchors.aspect_ratios.clear();
    for (const auto& s : split_list(value)) cfg.anchors.aspect_ratios.push_back(to_double(s, key));
  } else {
    throw DataError("config: unknown key '" + key + "'");
  }
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path.string());
  PipelineConfig cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.erase(0, 1);
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

std::string serialize_config(const PipelineConfig& cfg) {
  std::ostringstream os;
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  os << "window_size=" << cfg.window_size << '\n';
  os << "stride=" << cfg.stride << '\n';
  os << "input_size=" << cfg.input_size << '\n';
  os << "vote_method=" << to_string(cfg.vote_method) << '\n';
  os << "vote_threshold=" << num(cfg.vote_threshold) << '\n';
  os << "vote_downscale=" << cfg.vote_downscale << '\n';
  os << "nms_iou=" << num(cfg.nms_iou) << '\n';
  os << "detector=" << to_string(cfg.detector) << '\n';
  os << "seed=" << cfg.seed << '\n';
  os << "workers=" << cfg.workers << '\n';
  os << "postprocess=" << (cfg.postprocess ? 1 : 0) << '\n';
  os << "render_overlays=" << (cfg.render_overlays ? 1 : 0) << '\n';
  os << "dump_heatmaps=" << (cfg.dump_heatmaps ? 1 : 0) << '\n';
  os << "pages_dir=" << cfg.pages_dir << '\n';
  os << "gt_csv=" << cfg.gt_csv << '\n';
  os << "external_dets_csv=" << cfg.external_dets_csv << '\n';
  os << "out_dir=" << cfg.out_dir << '\n';
  os << "oracle.position_jitter_px=" << cfg.oracle.position_jitter_px << '\n';
  os << "oracle.size_jitter_px=" << cfg.oracle.size_jitter_px << '\n';
  os << "oracle.drop_prob=" << num(cfg.oracle.drop_prob) << '\n';
  os << "oracle.confidence_min=" << num(cfg.oracle.confidence_min) << '\n';
  os << "oracle.confidence_max=" << num(cfg.oracle.confidence_max) << '\n';
  os << "anchors.scale_min=" << num(cfg.anchors.scale_min) << '\n';
  os << "anchors.scale_max=" << num(cfg.anchors.scale_max) << '\n';
  os << "anchors.grid_sizes=";
  for (std::size_t i = 0; i < cfg.anchors.grid_sizes.size(); ++i) {
    if (i) os << ',';
    os << cfg.anchors.grid_sizes[i];
  }
  os << '\n';
  os << "anchors.aspect_ratios=";
  for (std::size_t i = 0; i < cfg.anchors.aspect_ratios.size(); ++i) {
    if (i) os << ',';
    os << num(cfg.anchors.aspect_ratios[i]);
  }
  os << '\n';
  return os.str();
}

std::uint64_t config_hash(const PipelineConfig& cfg) { return fnv1a(serialize_config(cfg)); }

}  // namespace fdp
