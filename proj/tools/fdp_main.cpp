// fdp: formula-detection pipeline over scanned page images.
//
// Subcommands wire the library stages together: stats, tile, export-targets,
// detect, pool, evaluate, tune, pipeline. Configuration precedence is
// command-line flags > --config file > built-in defaults.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "fdp/anchors.hpp"
#include "fdp/config.hpp"
#include "fdp/dataset.hpp"
#include "fdp/detector.hpp"
#include "fdp/errors.hpp"
#include "fdp/evaluation.hpp"
#include "fdp/pipeline.hpp"
#include "fdp/pooling.hpp"
#include "fdp/postprocess.hpp"
#include "fdp/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPipeline = 3;

std::vector<fdp::GroundTruthPage> load_gt(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fdp::DataError("cannot open ground truth: " + path);
  return fdp::parse_gtdb(in);
}

// Evaluation ground truth may be character-level (11 columns) or already
// formula regions (7 columns); sniff the header.
std::vector<fdp::PageFormulas> load_formula_pages(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw fdp::DataError("cannot open ground truth: " + path);
  std::string header;
  std::getline(probe, header);
  const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  probe.close();

  std::ifstream in(path);
  if (columns == 7) return fdp::read_formula_csv(in);
  std::vector<fdp::PageFormulas> out;
  for (auto& page : fdp::parse_gtdb(in)) {
    out.push_back({page.doc_id, page.page_number, std::move(page.formulas)});
  }
  return out;
}

std::vector<fdp::PageDetections> load_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fdp::DataError("cannot open detections: " + path);
  return fdp::read_page_detection_csv(in);
}

struct ManifestPage {
  std::string doc_id;
  int page = 0;
  int width = 0, height = 0;
  int window_size = 1200, input_size = 512;
  std::vector<fdp::WindowManifestEntry> windows;
};

std::vector<ManifestPage> group_manifest(const std::vector<fdp::WindowManifestEntry>& manifest) {
  std::vector<ManifestPage> pages;
  std::map<std::pair<std::string, int>, std::size_t> index;
  for (const auto& e : manifest) {
    const auto key = std::make_pair(e.doc_id, e.page);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, pages.size()).first;
      pages.push_back({e.doc_id, e.page, 0, 0, e.window_size, e.input_size, {}});
    }
    ManifestPage& p = pages[it->second];
    p.width = std::max(p.width, e.origin_x + e.window_size);
    p.height = std::max(p.height, e.origin_y + e.window_size);
    p.windows.push_back(e);
  }
  return pages;
}

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> overrides;
};

fdp::PipelineConfig resolve_config(const CommonOpts& common) {
  fdp::PipelineConfig cfg;
  if (!common.config_file.empty()) cfg = fdp::load_config_file(common.config_file);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw fdp::DataError("--set expects key=value, got '" + kv + "'");
    }
    fdp::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& common) {
  cmd->add_option("--config", common.config_file, "key=value config file");
  cmd->add_option("--set", common.overrides, "override a config key (key=value, repeatable)");
}

int cmd_stats(const fdp::PipelineConfig&, const std::string& gt_path, const std::string& out_csv,
              const std::string& formulas_out) {
  const auto pages = load_gt(gt_path);
  const auto stats = fdp::collection_stats(pages);
  std::cout << "documents:             " << stats.docs << "\n"
            << "pages:                 " << stats.pages << "\n"
            << "single-symbol formulas:" << stats.single_symbol_formulas << "\n"
            << "multi-symbol formulas: " << stats.multi_symbol_formulas << "\n"
            << "total formulas:        " << stats.total_formulas << "\n";
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    out << "docs,pages,single_symbol,multi_symbol,total\n"
        << stats.docs << ',' << stats.pages << ',' << stats.single_symbol_formulas << ','
        << stats.multi_symbol_formulas << ',' << stats.total_formulas << "\n";
  }
  if (!formulas_out.empty()) {
    std::ofstream out(formulas_out);
    if (!out) throw fdp::DataError("cannot write " + formulas_out);
    fdp::write_formula_csv(out, pages);
  }
  return kExitOk;
}

int cmd_tile(const fdp::PipelineConfig& cfg_in, bool write_crops) {
  fdp::PipelineConfig cfg = cfg_in;
  std::vector<fdp::GroundTruthPage> gt_pages;
  if (!cfg.gt_csv.empty()) gt_pages = load_gt(cfg.gt_csv);
  const auto tasks = fdp::build_page_tasks(cfg, gt_pages);
  const auto manifest = fdp::build_window_manifest(cfg, tasks);

  std::filesystem::create_directories(cfg.out_dir);
  const auto manifest_path = std::filesystem::path(cfg.out_dir) / "windows.csv";
  {
    std::ofstream out(manifest_path);
    fdp::write_window_manifest(out, manifest);
  }
  long crops = 0;
  if (write_crops) {
    std::size_t row = 0;
    for (const auto& task : tasks) {
      const auto image = fdp::read_pgm(task.image_path);
      const auto windows = fdp::generate_windows(task.width, task.height, cfg.window_size,
                                                 cfg.stride, cfg.input_size);
      for (const auto& w : windows) {
        const auto& entry = manifest[row++];
        const auto raster = fdp::crop_window(image, w);
        fdp::PageImage crop;
        crop.width = w.input_size;
        crop.height = w.input_size;
        crop.pixels = raster;
        fdp::write_pgm(crop, std::filesystem::path(cfg.out_dir) /
                                 (task.doc_id + "_" + std::to_string(task.page) + "_" +
                                  std::to_string(entry.window_id) + ".pgm"));
        ++crops;
      }
    }
  }
  std::cout << "windows: " << manifest.size() << " -> " << manifest_path.string();
  if (write_crops) std::cout << " (+" << crops << " crops)";
  std::cout << "\n";
  return kExitOk;
}

int cmd_export_targets(const fdp::PipelineConfig& cfg, const std::string& out_path,
                       double coverage_threshold) {
  const auto pages = load_gt(cfg.gt_csv);
  std::ofstream out(out_path);
  if (!out) throw fdp::DataError("cannot write " + out_path);
  const long n = fdp::export_training_targets(out, pages, cfg.anchors, cfg.window_size,
                                              cfg.stride, coverage_threshold);
  std::cout << "training targets: " << n << " -> " << out_path << "\n";
  return kExitOk;
}

int cmd_detect(const fdp::PipelineConfig& cfg) {
  std::vector<fdp::GroundTruthPage> gt_pages;
  if (!cfg.gt_csv.empty()) gt_pages = load_gt(cfg.gt_csv);
  if (cfg.detector == fdp::DetectorKind::oracle && gt_pages.empty()) {
    throw fdp::DataError("oracle detector requires ground truth (gt_csv)");
  }
  const auto tasks = fdp::build_page_tasks(cfg, gt_pages);
  const auto manifest = fdp::build_window_manifest(cfg, tasks);

  std::unique_ptr<fdp::Detector> detector;
  if (cfg.detector == fdp::DetectorKind::oracle) {
    detector = std::make_unique<fdp::OracleDetector>(cfg.oracle);
  } else if (cfg.detector == fdp::DetectorKind::heuristic) {
    detector = std::make_unique<fdp::HeuristicDetector>();
  } else {
    throw fdp::DataError("detect: choose detector oracle or heuristic (external comes from CSV)");
  }

  std::map<long, fdp::WindowDetections> by_window;
  std::size_t row = 0;
  long total = 0;
  for (const auto& task : tasks) {
    std::optional<fdp::PageImage> image;
    if (detector->wants_pixels()) image = fdp::read_pgm(task.image_path);
    std::vector<fdp::Rect> formulas;
    if (task.ground_truth) {
      for (const auto& f : task.ground_truth->formulas) formulas.push_back(f.bbox);
    }
    const auto windows = fdp::generate_windows(task.width, task.height, cfg.window_size,
                                               cfg.stride, cfg.input_size);
    for (const auto& w : windows) {
      const auto& entry = manifest[row++];
      std::vector<fdp::Rect> gt_rects;
      for (const auto& g : fdp::crop_ground_truth(w, formulas)) gt_rects.push_back(g.input_rect);
      std::vector<std::uint8_t> raster;
      if (detector->wants_pixels()) raster = fdp::crop_window(*image, w);
      const std::uint64_t seed = fdp::mix_seed(
          fdp::mix_seed(fdp::mix_seed(cfg.seed, fdp::fnv1a(task.doc_id)),
                        static_cast<std::uint64_t>(task.page)),
          static_cast<std::uint64_t>(w.window_id));
      auto dets = detector->detect(w, raster, gt_rects, seed);
      if (dets.detections.empty()) continue;
      dets.window_id = static_cast<int>(entry.window_id);
      total += static_cast<long>(dets.detections.size());
      by_window[entry.window_id] = std::move(dets);
    }
  }

  std::filesystem::create_directories(cfg.out_dir);
  {
    std::ofstream out(std::filesystem::path(cfg.out_dir) / "windows.csv");
    fdp::write_window_manifest(out, manifest);
  }
  const auto det_path = std::filesystem::path(cfg.out_dir) / "window_detections.csv";
  {
    std::ofstream out(det_path);
    fdp::write_detection_csv(out, manifest, by_window);
  }
  std::cout << "window detections: " << total << " -> " << det_path.string() << "\n";
  return kExitOk;
}

int cmd_pool(const fdp::PipelineConfig& cfg, const std::string& manifest_path,
             const std::string& dets_path) {
  std::ifstream min(manifest_path);
  if (!min) throw fdp::DataError("cannot open manifest: " + manifest_path);
  const auto manifest = fdp::read_window_manifest(min);
  std::ifstream din(dets_path);
  if (!din) throw fdp::DataError("cannot open detections: " + dets_path);
  const auto imported = fdp::bridge_import(din, manifest);

  std::filesystem::create_directories(cfg.out_dir);
  const auto out_path = std::filesystem::path(cfg.out_dir) / "detections.csv";
  std::ofstream out(out_path);
  fdp::write_page_detection_csv_header(out);

  long total = 0;
  for (const auto& page : group_manifest(manifest)) {
    fdp::PipelineConfig page_cfg = cfg;
    page_cfg.window_size = page.window_size;
    page_cfg.input_size = page.input_size;
    page_cfg.postprocess = cfg.postprocess && !cfg.pages_dir.empty();
    page_cfg.render_overlays = false;
    page_cfg.dump_heatmaps = false;

    fdp::PageTask task;
    task.doc_id = page.doc_id;
    task.page = page.page;
    task.width = page.width;
    task.height = page.height;
    std::optional<fdp::PageImage> image;
    if (page_cfg.postprocess) {
      task.image_path = std::filesystem::path(cfg.pages_dir) /
                        (page.doc_id + "_" + std::to_string(page.page) + ".pgm");
      image = fdp::read_pgm(task.image_path);
      if (image->width != page.width || image->height != page.height) {
        throw fdp::DataError("image size mismatch against manifest for " + task.doc_id + "_" +
                             std::to_string(task.page));
      }
    }
    // Rebuild this page's windows from the manifest and rebase detections
    // onto local window ids (list positions).
    std::vector<fdp::WindowSpec> windows;
    std::map<long, fdp::WindowDetections> local;
    for (const auto& e : page.windows) {
      fdp::WindowSpec w;
      w.window_id = static_cast<int>(windows.size());
      w.origin_x = e.origin_x;
      w.origin_y = e.origin_y;
      w.window_size = e.window_size;
      w.input_size = e.input_size;
      w.clamped = e.clamped;
      auto it = imported.by_window.find(e.window_id);
      if (it != imported.by_window.end()) {
        fdp::WindowDetections wd = it->second;
        wd.window_id = w.window_id;
        local[w.window_id] = std::move(wd);
      }
      windows.push_back(w);
    }
    const auto result = fdp::process_page(page_cfg, task, nullptr, &local, 0,
                                          image ? &*image : nullptr, &windows);
    fdp::write_page_detection_csv(out, page.doc_id, page.page, result.final_boxes);
    total += static_cast<long>(result.final_boxes.size());
  }
  std::cout << "page detections: " << total << " -> " << out_path.string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& gt_path, const std::string& dets_path,
                 const std::string& char_gt_path, const std::string& report_path,
                 const std::string& csv_path) {
  const auto gt = load_formula_pages(gt_path);
  const auto dets = load_detections(dets_path);
  const auto suite = fdp::evaluate_suite(gt, dets);

  std::optional<fdp::CharEvalResult> chars;
  if (!char_gt_path.empty()) {
    const auto char_pages = load_gt(char_gt_path);
    chars = fdp::character_metrics(char_pages, dets);
  }

  const std::string table = fdp::format_metrics_table(suite, chars ? &*chars : nullptr);
  std::cout << table;
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << table;
  }
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    fdp::write_metrics_csv(out, suite, chars ? &*chars : nullptr);
  }
  return kExitOk;
}

int cmd_tune(const fdp::PipelineConfig& cfg, const std::string& gt_path,
             const std::string& manifest_path, const std::string& dets_path,
             const std::string& grid_spec, double target_iou) {
  std::ifstream min(manifest_path);
  if (!min) throw fdp::DataError("cannot open manifest: " + manifest_path);
  const auto manifest = fdp::read_window_manifest(min);
  std::ifstream din(dets_path);
  if (!din) throw fdp::DataError("cannot open detections: " + dets_path);
  const auto imported = fdp::bridge_import(din, manifest);
  const auto gt = load_formula_pages(gt_path);

  std::map<std::pair<std::string, int>, const fdp::PageFormulas*> gt_index;
  for (const auto& g : gt) gt_index[{g.doc_id, g.page}] = &g;

  std::vector<fdp::TunePage> pages;
  for (const auto& page : group_manifest(manifest)) {
    fdp::TunePage tp;
    tp.width = page.width;
    tp.height = page.height;
    auto it = gt_index.find({page.doc_id, page.page});
    if (it != gt_index.end()) {
      for (const auto& f : it->second->formulas) tp.ground_truth.push_back(f.bbox);
    }
    // Stitch this page's imported window detections.
    std::vector<fdp::WindowSpec> specs;
    std::vector<fdp::WindowDetections> dets;
    for (const auto& e : page.windows) {
      fdp::WindowSpec w;
      w.window_id = static_cast<int>(e.window_id);
      w.origin_x = e.origin_x;
      w.origin_y = e.origin_y;
      w.window_size = e.window_size;
      w.input_size = e.input_size;
      w.clamped = e.clamped;
      specs.push_back(w);
      auto dit = imported.by_window.find(e.window_id);
      if (dit != imported.by_window.end()) {
        fdp::WindowDetections wd = dit->second;
        wd.window_id = static_cast<int>(e.window_id);
        dets.push_back(std::move(wd));
      }
    }
    tp.detections = fdp::stitch(dets, specs);
    pages.push_back(std::move(tp));
  }

  std::vector<double> grid;
  if (grid_spec.empty()) {
    grid = fdp::default_threshold_grid(cfg.vote_method);
  } else {
    // "lo:hi" inclusive integer range or comma list
    const auto colon = grid_spec.find(':');
    if (colon != std::string::npos) {
      const int lo = std::stoi(grid_spec.substr(0, colon));
      const int hi = std::stoi(grid_spec.substr(colon + 1));
      for (int t = lo; t <= hi; ++t) grid.push_back(t);
    } else {
      std::stringstream ss(grid_spec);
      std::string item;
      while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
    }
  }

  const double best =
      fdp::tune_threshold(pages, cfg.vote_method, grid, target_iou, cfg.vote_downscale);
  std::cout << "best " << fdp::to_string(cfg.vote_method) << " threshold (f-score at IOU>="
            << target_iou << "): " << best << "\n";
  return kExitOk;
}

int cmd_pipeline(const fdp::PipelineConfig& cfg) {
  const auto outcome = fdp::run_pipeline(cfg);
  for (const auto& [stage, secs] : outcome.stage_seconds) {
    std::fprintf(stderr, "[timing] %-8s %.3fs\n", stage.c_str(), secs);
  }
  std::cout << "pages: " << outcome.pages << ", windows: " << outcome.windows
            << ", window detections: " << outcome.window_detections
            << ", final detections: " << outcome.final_detections << "\n"
            << "detections: " << outcome.detections_csv.string() << "\n"
            << "manifest:   " << outcome.manifest_path.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fdp: formula detection pipeline (tiling, detection, pooling, evaluation)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fdp 0.1.0");

  CommonOpts common;
  std::string gt_path, dets_path, manifest_path, out_path, char_gt_path, report_path, csv_path;
  std::string grid_spec;
  double coverage_threshold = 0.25;
  double target_iou = 0.75;
  bool write_crops = false;

  // Frequent config knobs as first-class flags; everything else via --set.
  std::string pages_dir, gt_csv, out_dir, detector_name, vote_method_name, external_csv;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> vote_threshold;
  std::optional<bool> postprocess;
  bool render_overlays = false, dump_heatmaps = false;

  const auto add_pipeline_flags = [&](CLI::App* cmd) {
    add_common(cmd, common);
    cmd->add_option("--pages", pages_dir, "directory of {doc_id}_{page}.pgm page images");
    cmd->add_option("--gt", gt_csv, "character-level ground truth CSV");
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--detector", detector_name, "oracle | heuristic | external");
    cmd->add_option("--external-dets", external_csv, "window detection CSV (external detector)");
    cmd->add_option("--vote-method", vote_method_name, "uniform | max | sum | average");
    cmd->add_option("--vote-threshold", vote_threshold, "pixel vote threshold");
    cmd->add_option("--seed", seed, "oracle randomness seed");
    cmd->add_option("--workers", workers, "worker thread count");
    cmd->add_option("--postprocess", postprocess, "crop detections to ink components (0/1)");
    cmd->add_flag("--render-overlays", render_overlays, "write detection overlays per page");
    cmd->add_flag("--dump-heatmaps", dump_heatmaps, "write vote heat maps per page");
  };

  const auto finish_config = [&]() {
    fdp::PipelineConfig cfg = resolve_config(common);
    if (!pages_dir.empty()) cfg.pages_dir = pages_dir;
    if (!gt_csv.empty()) cfg.gt_csv = gt_csv;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!detector_name.empty()) cfg.detector = fdp::parse_detector_kind(detector_name);
    if (!external_csv.empty()) cfg.external_dets_csv = external_csv;
    if (!vote_method_name.empty()) cfg.vote_method = fdp::parse_vote_method(vote_method_name);
    if (vote_threshold) cfg.vote_threshold = *vote_threshold;
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (postprocess) cfg.postprocess = *postprocess;
    if (render_overlays) cfg.render_overlays = true;
    if (dump_heatmaps) cfg.dump_heatmaps = true;
    cfg.validate();
    return cfg;
  };

  std::string formulas_out;
  auto* stats = app.add_subcommand("stats", "collection statistics from ground truth");
  add_common(stats, common);
  stats->add_option("--gt", gt_path, "character-level ground truth CSV")->required();
  stats->add_option("--csv", csv_path, "also write stats as CSV");
  stats->add_option("--formulas-out", formulas_out, "write derived formula regions as CSV");

  auto* tile = app.add_subcommand("tile", "window manifest (and crops) for the page set");
  add_pipeline_flags(tile);
  tile->add_flag("--write-crops", write_crops, "write each window crop as PGM");

  auto* exp = app.add_subcommand("export-targets", "anchor matching targets for training");
  add_pipeline_flags(exp);
  exp->add_option("--out", out_path, "target CSV path")->required();
  exp->add_option("--coverage-threshold", coverage_threshold,
                  "min visible-area fraction for clipped formulas");

  auto* detect = app.add_subcommand("detect", "window-level detections (bridge CSV)");
  add_pipeline_flags(detect);

  auto* pool = app.add_subcommand("pool", "stitch + vote + threshold + components");
  add_pipeline_flags(pool);
  pool->add_option("--manifest", manifest_path, "window manifest CSV")->required();
  pool->add_option("--window-dets", dets_path, "window detection CSV")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score detections against ground truth");
  add_common(evaluate, common);
  evaluate->add_option("--gt", gt_path, "formula or character ground truth CSV")->required();
  evaluate->add_option("--dets", dets_path, "page detection CSV")->required();
  evaluate->add_option("--char-gt", char_gt_path, "character CSV for character-level metrics");
  evaluate->add_option("--report", report_path, "write the plain-text report here");
  evaluate->add_option("--csv", csv_path, "write machine-readable metrics here");

  auto* tune = app.add_subcommand("tune", "grid-search the vote threshold");
  add_pipeline_flags(tune);
  tune->add_option("--gt-formulas", gt_path, "formula or character ground truth CSV")->required();
  tune->add_option("--manifest", manifest_path, "window manifest CSV")->required();
  tune->add_option("--window-dets", dets_path, "window detection CSV")->required();
  tune->add_option("--grid", grid_spec, "lo:hi integer range or comma list");
  tune->add_option("--target-iou", target_iou, "f-score IOU threshold to maximize");

  auto* pipeline = app.add_subcommand("pipeline", "full run: tile->detect->pool->write");
  add_pipeline_flags(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (stats->parsed()) return cmd_stats(resolve_config(common), gt_path, csv_path, formulas_out);
    if (tile->parsed()) return cmd_tile(finish_config(), write_crops);
    if (exp->parsed()) return cmd_export_targets(finish_config(), out_path, coverage_threshold);
    if (detect->parsed()) return cmd_detect(finish_config());
    if (pool->parsed()) return cmd_pool(finish_config(), manifest_path, dets_path);
    if (evaluate->parsed()) {
      return cmd_evaluate(gt_path, dets_path, char_gt_path, report_path, csv_path);
    }
    if (tune->parsed()) {
      return cmd_tune(finish_config(), gt_path, manifest_path, dets_path, grid_spec, target_iou);
    }
    if (pipeline->parsed()) return cmd_pipeline(finish_config());
  } catch (const fdp::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitUsage;
}
