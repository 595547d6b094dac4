#include "fdp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "fdp/errors.hpp"
#include "fdp/pooling.hpp"
#include "fdp/postprocess.hpp"
#include "fdp/rng.hpp"

namespace fdp {

namespace {

std::string page_stem(const std::string& doc_id, int page) {
  return doc_id + "_" + std::to_string(page);
}

// Runs fn(0..n-1) on `workers` threads, claiming indices in order. The first
// exception wins and is rethrown after all workers stop.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file for hashing: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return h;
}

std::vector<PageTask> build_page_tasks(const PipelineConfig& cfg,
                                       const std::vector<GroundTruthPage>& gt_pages) {
  std::vector<PageTask> tasks;
  if (!gt_pages.empty()) {
    for (const auto& page : gt_pages) {
      PageTask t;
      t.doc_id = page.doc_id;
      t.page = page.page_number;
      t.ground_truth = &page;
      t.width = page.width;
      t.height = page.height;
      if (!cfg.pages_dir.empty()) {
        t.image_path = std::filesystem::path(cfg.pages_dir) / (page_stem(t.doc_id, t.page) + ".pgm");
      }
      tasks.push_back(std::move(t));
    }
  } else {
    if (cfg.pages_dir.empty()) {
      throw DataError("no ground truth and no pages_dir: nothing to process");
    }
    if (!std::filesystem::is_directory(cfg.pages_dir)) {
      throw DataError("pages_dir is not a directory: " + cfg.pages_dir);
    }
    for (const auto& entry : std::filesystem::directory_iterator(cfg.pages_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
      const std::string stem = entry.path().stem().string();
      const auto us = stem.rfind('_');
      if (us == std::string::npos) continue;
      PageTask t;
      t.doc_id = stem.substr(0, us);
      try {
        t.page = std::stoi(stem.substr(us + 1));
      } catch (const std::exception&) {
        continue;  // not a page file
      }
      t.image_path = entry.path();
      tasks.push_back(std::move(t));
    }
    if (tasks.empty()) throw DataError("no page images found in " + cfg.pages_dir);
  }

  std::sort(tasks.begin(), tasks.end(), [](const PageTask& a, const PageTask& b) {
    if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
    return a.page < b.page;
  });

  // The image is the size authority whenever it exists.
  for (auto& t : tasks) {
    if (!t.image_path.empty() && std::filesystem::exists(t.image_path)) {
      const auto [w, h] = read_pgm_size(t.image_path);
      t.width = w;
      t.height = h;
    }
    if (t.width <= 0 || t.height <= 0) {
      throw DataError("cannot determine page size for " + page_stem(t.doc_id, t.page) +
                      (t.image_path.empty() ? " (no image, empty ground truth)"
                                            : " (missing image " + t.image_path.string() + ")"));
    }
  }
  return tasks;
}

std::vector<WindowManifestEntry> build_window_manifest(const PipelineConfig& cfg,
                                                       std::span<const PageTask> tasks) {
  std::vector<WindowManifestEntry> manifest;
  long next_id = 0;
  for (const auto& t : tasks) {
    const auto windows =
        generate_windows(t.width, t.height, cfg.window_size, cfg.stride, cfg.input_size);
    for (const auto& w : windows) {
      WindowManifestEntry e;
      e.doc_id = t.doc_id;
      e.page = t.page;
      e.window_id = next_id++;
      e.origin_x = w.origin_x;
      e.origin_y = w.origin_y;
      e.window_size = w.window_size;
      e.input_size = w.input_size;
      e.clamped = w.clamped;
      manifest.push_back(std::move(e));
    }
  }
  return manifest;
}

PageStageResult process_page(const PipelineConfig& cfg, const PageTask& task,
                             const Detector* detector,
                             const std::map<long, WindowDetections>* external, long window_id_base,
                             const PageImage* image,
                             const std::vector<WindowSpec>* windows_override) {
  PageStageResult result;
  const std::vector<WindowSpec> windows =
      windows_override ? *windows_override
                       : generate_windows(task.width, task.height, cfg.window_size, cfg.stride,
                                          cfg.input_size);

  std::vector<Rect> formulas;
  if (task.ground_truth) {
    formulas.reserve(task.ground_truth->formulas.size());
    for (const auto& f : task.ground_truth->formulas) formulas.push_back(f.bbox);
  }

  std::optional<InkComponents> ink;
  if (cfg.postprocess) {
    if (!image) {
      throw DataError("postprocessing requires the page image: missing " +
                      (task.image_path.empty() ? page_stem(task.doc_id, task.page)
                                               : task.image_path.string()));
    }
    ink.emplace(InkComponents::build(*image));
  }

  std::vector<ScoredRect> stitched;
  for (const auto& w : windows) {
    const auto window_gt = crop_ground_truth(w, formulas);
    std::vector<Rect> gt_rects;
    gt_rects.reserve(window_gt.size());
    for (const auto& g : window_gt) gt_rects.push_back(g.input_rect);

    WindowDetections dets;
    dets.window_id = w.window_id;
    if (external) {
      auto it = external->find(window_id_base + w.window_id);
      if (it != external->end()) dets.detections = it->second.detections;
    } else {
      std::vector<std::uint8_t> raster;
      if (detector->wants_pixels()) {
        if (!image) {
          throw DataError("detector requires the page image: missing " +
                          task.image_path.string());
        }
        raster = crop_window(*image, w);
      }
      const std::uint64_t window_seed = mix_seed(
          mix_seed(mix_seed(cfg.seed, fnv1a(task.doc_id)), static_cast<std::uint64_t>(task.page)),
          static_cast<std::uint64_t>(w.window_id));
      try {
        dets = detector->detect(w, raster, gt_rects, window_seed);
      } catch (const std::exception& e) {
        ++result.window_errors;
        if (result.first_window_error.empty()) {
          result.first_window_error = page_stem(task.doc_id, task.page) + " window " +
                                      std::to_string(w.window_id) + ": " + e.what();
        }
        dets.detections.clear();
      }
    }
    result.window_detections += static_cast<long>(dets.detections.size());

    // Crop to ink inside the window before mapping back to the page.
    if (ink) {
      std::vector<Rect> comp_rects;
      const Rect wrect = w.page_rect();
      for (const Rect& comp : ink->components_in(wrect)) {
        const auto clipped = intersect(comp, wrect);
        if (!clipped) continue;
        comp_rects.push_back(w.to_input().apply(clipped->translated(-w.origin_x, -w.origin_y)));
      }
      std::vector<ScoredRect> cropped;
      cropped.reserve(dets.detections.size());
      for (const auto& d : dets.detections) {
        if (const auto adjusted = crop_to_components(d.rect, comp_rects)) {
          cropped.emplace_back(*adjusted, d.confidence);
        }
      }
      dets.detections = std::move(cropped);
    }

    for (const auto& d : nms(std::move(dets.detections), cfg.nms_iou)) {
      stitched.emplace_back(window_to_page(w, d.rect), d.confidence);
    }
  }

  const VoteMap votes =
      accumulate_votes(stitched, task.width, task.height, cfg.vote_downscale);
  const ScoreMap scores = extract_scores(votes, cfg.vote_method);
  const auto mask = threshold_mask(scores, cfg.vote_threshold);
  const auto comps = mask_components(mask, scores.width, scores.height);
  std::vector<Rect> boxes = upscale_boxes(comps, cfg.vote_downscale, task.width, task.height);

  if (ink) {
    std::vector<Rect> final_boxes;
    final_boxes.reserve(boxes.size());
    for (const Rect& b : boxes) {
      if (const auto adjusted = ink->crop_box(b)) final_boxes.push_back(*adjusted);
    }
    boxes = std::move(final_boxes);
  }
  std::sort(boxes.begin(), boxes.end());
  boxes.erase(std::unique(boxes.begin(), boxes.end()), boxes.end());
  result.final_boxes = std::move(boxes);

  if (cfg.dump_heatmaps && !cfg.out_dir.empty()) {
    const auto dir = std::filesystem::path(cfg.out_dir) / "heatmaps";
    std::filesystem::create_directories(dir);
    for (VoteMethod m : {VoteMethod::uniform, VoteMethod::max, VoteMethod::sum,
                         VoteMethod::average}) {
      const ScoreMap s = extract_scores(votes, m);
      double peak = 0;
      for (double v : s.values) peak = std::max(peak, v);
      PageImage heat = PageImage::blank(s.width, s.height, 0);
      if (peak > 0) {
        for (std::size_t i = 0; i < s.values.size(); ++i) {
          heat.pixels[i] = static_cast<std::uint8_t>(255.0 * s.values[i] / peak + 0.5);
        }
      }
      write_pgm(heat, dir / (page_stem(task.doc_id, task.page) + "_" + to_string(m) + ".pgm"));
    }
  }
  if (cfg.render_overlays && image && !cfg.out_dir.empty()) {
    const auto dir = std::filesystem::path(cfg.out_dir) / "overlays";
    std::filesystem::create_directories(dir);
    PageImage overlay = *image;
    for (const Rect& b : result.final_boxes) draw_rect_outline(overlay, b, 128, 5);
    write_pgm(overlay, dir / (page_stem(task.doc_id, task.page) + "_overlay.pgm"));
  }
  return result;
}

PipelineOutcome run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<GroundTruthPage> gt_pages;
  if (!cfg.gt_csv.empty()) {
    std::ifstream in(cfg.gt_csv);
    if (!in) throw DataError("cannot open ground truth: " + cfg.gt_csv);
    gt_pages = parse_gtdb(in);
  }
  if (cfg.detector == DetectorKind::oracle && gt_pages.empty()) {
    throw DataError("oracle detector requires ground truth (gt_csv)");
  }

  const std::vector<PageTask> tasks = build_page_tasks(cfg, gt_pages);
  const double t_setup = seconds_since(t_start);

  std::unique_ptr<Detector> detector;
  std::map<long, WindowDetections> external;
  std::vector<long> window_base(tasks.size(), 0);
  {
    long next = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      window_base[i] = next;
      const auto windows = generate_windows(tasks[i].width, tasks[i].height, cfg.window_size,
                                            cfg.stride, cfg.input_size);
      next += static_cast<long>(windows.size());
    }
  }

  switch (cfg.detector) {
    case DetectorKind::oracle:
      detector = std::make_unique<OracleDetector>(cfg.oracle);
      break;
    case DetectorKind::heuristic:
      detector = std::make_unique<HeuristicDetector>();
      break;
    case DetectorKind::external: {
      if (cfg.external_dets_csv.empty()) {
        throw DataError("external detector requires external_dets_csv");
      }
      const auto manifest = build_window_manifest(cfg, tasks);
      std::ifstream in(cfg.external_dets_csv);
      if (!in) throw DataError("cannot open detections: " + cfg.external_dets_csv);
      external = bridge_import(in, manifest).by_window;
      break;
    }
  }

  const bool need_image = cfg.postprocess || cfg.render_overlays ||
                          (detector && detector->wants_pixels());

  std::vector<PageStageResult> results(tasks.size());
  std::mutex timing_mu;
  double t_load_total = 0, t_process_total = 0;

  parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int i) {
    const PageTask& task = tasks[static_cast<std::size_t>(i)];
    std::optional<PageImage> image;
    const auto t0 = std::chrono::steady_clock::now();
    if (need_image) {
      if (task.image_path.empty()) {
        throw DataError("page image required but pages_dir not set (page " +
                        page_stem(task.doc_id, task.page) + ")");
      }
      image = read_pgm(task.image_path);
    }
    const double t_loaded = seconds_since(t0);
    results[static_cast<std::size_t>(i)] =
        process_page(cfg, task, detector.get(),
                     cfg.detector == DetectorKind::external ? &external : nullptr,
                     window_base[static_cast<std::size_t>(i)], image ? &*image : nullptr);
    std::lock_guard<std::mutex> lock(timing_mu);
    t_load_total += t_loaded;
    t_process_total += seconds_since(t0) - t_loaded;
  });

  PipelineOutcome outcome;
  outcome.pages = static_cast<long>(tasks.size());
  outcome.windows = tasks.empty() ? 0
                                  : window_base.back() +
                                        static_cast<long>(generate_windows(tasks.back().width,
                                                                           tasks.back().height,
                                                                           cfg.window_size,
                                                                           cfg.stride,
                                                                           cfg.input_size)
                                                              .size());
  const auto t_write0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cfg.out_dir);
  outcome.detections_csv = std::filesystem::path(cfg.out_dir) / "detections.csv";
  {
    std::ofstream out(outcome.detections_csv);
    if (!out) throw PipelineError("cannot write " + outcome.detections_csv.string());
    write_page_detection_csv_header(out);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      write_page_detection_csv(out, tasks[i].doc_id, tasks[i].page, results[i].final_boxes);
      outcome.final_detections += static_cast<long>(results[i].final_boxes.size());
      outcome.window_detections += results[i].window_detections;
      outcome.window_errors += results[i].window_errors;
      if (outcome.first_window_error.empty() && !results[i].first_window_error.empty()) {
        outcome.first_window_error = results[i].first_window_error;
      }
    }
  }
  if (outcome.window_errors > 0) {
    std::fprintf(stderr, "warning: %ld window(s) failed detection (first: %s)\n",
                 outcome.window_errors, outcome.first_window_error.c_str());
  }

  outcome.manifest_path = std::filesystem::path(cfg.out_dir) / "run_manifest.txt";
  {
    std::ofstream out(outcome.manifest_path);
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    out << "fdp_version=0.1.0\n";
    out << "config_hash=" << hex << "\n";
    out << "[config]\n" << serialize_config(cfg);
    out << "[inputs]\n";
    if (!cfg.gt_csv.empty()) {
      std::snprintf(hex, sizeof hex, "%016llx",
                    static_cast<unsigned long long>(fnv1a_file(cfg.gt_csv)));
      out << "gt_csv=" << cfg.gt_csv << ":" << hex << "\n";
    }
    if (!cfg.external_dets_csv.empty()) {
      std::snprintf(hex, sizeof hex, "%016llx",
                    static_cast<unsigned long long>(fnv1a_file(cfg.external_dets_csv)));
      out << "external_dets=" << cfg.external_dets_csv << ":" << hex << "\n";
    }
    for (const auto& t : tasks) {
      if (!t.image_path.empty() && std::filesystem::exists(t.image_path)) {
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(t.image_path)));
        out << "page." << page_stem(t.doc_id, t.page) << "=" << hex << "\n";
      }
    }
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a_file(outcome.detections_csv)));
    out << "[outputs]\ndetections=" << hex << "\n";
  }

  outcome.stage_seconds = {{"setup", t_setup},
                           {"load", t_load_total},
                           {"process", t_process_total},
                           {"write", seconds_since(t_write0)}};
  return outcome;
}

}  // namespace fdp
