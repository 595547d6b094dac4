// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria that depend on data not shipped with the repository
// (the TFD-ICDAR2019v2 collection) are skipped when the data is absent.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fdp/config.hpp"
#include "fdp/dataset.hpp"
#include "fdp/detector.hpp"
#include "fdp/evaluation.hpp"
#include "fdp/pipeline.hpp"
#include "fdp/pooling.hpp"
#include "fdp/rng.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace {

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind = kPass;
  std::string detail;
};

Outcome pass(std::string detail) { return {Outcome::kPass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Outcome::kFail, std::move(detail)}; }
Outcome skip(std::string detail) { return {Outcome::kSkip, std::move(detail)}; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempTree {
  std::filesystem::path path;
  explicit TempTree(const char* tag) {
    path = std::filesystem::temp_directory_path() / (std::string("fdp_accept_") + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempTree() { std::filesystem::remove_all(path); }
};

// --- C1: geometry IOU vs per-pixel brute force ------------------------------

// The literal cross product of every rect pair on the 0..32 lattice is
// ~3.9e10 pairs and cannot run in 60 s, so the enumeration is factorized:
// every interval pair exhaustively per axis (unit granularity), the full 2D
// family at stride 4, the full 2D family of the 0..8 sublattice at stride 1,
// and a large seeded random sample of unit-granularity 2D pairs.
Outcome c1_geometry() {
  long pairs = 0;

  const auto check = [&](const fdp::Rect& a, const fdp::Rect& b) {
    ++pairs;
    return fdp::iou(a, b) == oracle::iou_pixels(a, b);
  };

  // Axis-exhaustive passes: all interval pairs on {0..32}, the other axis
  // fixed to a unit strip.
  std::vector<std::pair<int, int>> intervals;
  for (int l = 0; l < 32; ++l) {
    for (int r = l + 1; r <= 32; ++r) intervals.emplace_back(l, r);
  }
  for (const auto& [al, ar] : intervals) {
    for (const auto& [bl, br] : intervals) {
      if (!check(fdp::Rect(al, 0, ar, 1), fdp::Rect(bl, 0, br, 1))) {
        return fail("x-interval mismatch");
      }
      if (!check(fdp::Rect(0, al, 1, ar), fdp::Rect(0, bl, 1, br))) {
        return fail("y-interval mismatch");
      }
    }
  }

  // Full 2D, corners on multiples of 4 across the whole 32x32 lattice.
  std::vector<fdp::Rect> coarse;
  for (int l = 0; l < 32; l += 4)
    for (int r = l + 4; r <= 32; r += 4)
      for (int t = 0; t < 32; t += 4)
        for (int b = t + 4; b <= 32; b += 4) coarse.emplace_back(l, t, r, b);
  for (const auto& a : coarse) {
    for (const auto& b : coarse) {
      if (!check(a, b)) return fail("coarse 2D mismatch");
    }
  }

  // Full 2D at unit granularity on the 0..8 sublattice.
  std::vector<fdp::Rect> fine;
  for (int l = 0; l < 8; ++l)
    for (int r = l + 1; r <= 8; ++r)
      for (int t = 0; t < 8; ++t)
        for (int b = t + 1; b <= 8; ++b) fine.emplace_back(l, t, r, b);
  for (const auto& a : fine) {
    for (const auto& b : fine) {
      if (!check(a, b)) return fail("fine 2D mismatch");
    }
  }

  // Seeded random unit-granularity pairs over the full lattice.
  fdp::Rng rng(2024);
  for (int i = 0; i < 200000; ++i) {
    const auto rand_rect = [&] {
      const int l = static_cast<int>(rng.uniform_int(0, 31));
      const int t = static_cast<int>(rng.uniform_int(0, 31));
      return fdp::Rect(l, t, l + static_cast<int>(rng.uniform_int(1, 32 - l)),
                       t + static_cast<int>(rng.uniform_int(1, 32 - t)));
    };
    if (!check(rand_rect(), rand_rect())) return fail("random pair mismatch");
  }

  return pass(std::to_string(pairs) + " pairs, exact");
}

// --- C2: window coverage ------------------------------------------------------

Outcome c2_windowing() {
  fdp::Rng rng(11);
  long checked_pixels = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim_x = static_cast<int>(rng.uniform_int(1200, 8192));
    const int dim_y = static_cast<int>(rng.uniform_int(1200, 8192));
    const auto windows = fdp::generate_windows(dim_x, dim_y);

    std::vector<int> xs, ys;
    for (const auto& w : windows) {
      if (w.origin_y == 0) xs.push_back(w.origin_x);
      if (w.origin_x == 0) ys.push_back(w.origin_y);
    }
    if (xs.size() * ys.size() != windows.size()) return fail("window grid is not a cross product");

    const auto axis_cov = [](int dim, const std::vector<int>& origins) {
      std::vector<int> diff(static_cast<std::size_t>(dim) + 1, 0);
      for (int o : origins) {
        diff[static_cast<std::size_t>(o)] += 1;
        diff[static_cast<std::size_t>(std::min(dim, o + 1200))] -= 1;
      }
      std::vector<int> cov(static_cast<std::size_t>(dim));
      int run = 0;
      for (int x = 0; x < dim; ++x) {
        run += diff[static_cast<std::size_t>(x)];
        cov[static_cast<std::size_t>(x)] = run;
      }
      return cov;
    };
    const auto cov_x = axis_cov(dim_x, xs);
    const auto cov_y = axis_cov(dim_y, ys);
    for (int x = 0; x < dim_x; ++x) {
      if (cov_x[static_cast<std::size_t>(x)] < 1) return fail("uncovered column");
    }
    for (int y = 0; y < dim_y; ++y) {
      if (cov_y[static_cast<std::size_t>(y)] < 1) return fail("uncovered row");
    }
    checked_pixels += dim_x + dim_y;

    // Interior band: exactly 10 strided windows per axis; the band ends
    // before the clamped window's reach when one exists.
    const bool clamp_x = (dim_x - 1200) % 120 != 0;
    const bool clamp_y = (dim_y - 1200) % 120 != 0;
    const int lo = 1200 - 120;
    const int hi_x = clamp_x ? dim_x - 1200 - 1 : dim_x - 1200 + 119;
    const int hi_y = clamp_y ? dim_y - 1200 - 1 : dim_y - 1200 + 119;
    for (int x = lo; x <= hi_x; ++x) {
      if (cov_x[static_cast<std::size_t>(x)] != 10) return fail("interior column != 10");
    }
    for (int y = lo; y <= hi_y; ++y) {
      if (cov_y[static_cast<std::size_t>(y)] != 10) return fail("interior row != 10");
    }

    // 2D spot checks: product rule against direct membership count, interior
    // pixels at exactly 100.
    for (int probe = 0; probe < 5; ++probe) {
      const int px = static_cast<int>(rng.uniform_int(0, dim_x - 1));
      const int py = static_cast<int>(rng.uniform_int(0, dim_y - 1));
      int direct = 0;
      for (const auto& w : windows) {
        if (w.page_rect().contains(px, py)) ++direct;
      }
      if (direct != cov_x[static_cast<std::size_t>(px)] * cov_y[static_cast<std::size_t>(py)]) {
        return fail("2D coverage is not the axis product");
      }
    }
    // Pages this small have no full-coverage interior band; skip the probe.
    if (hi_x >= lo && hi_y >= lo) {
      const int ix = lo + static_cast<int>(rng.uniform_int(0, hi_x - lo));
      const int iy = lo + static_cast<int>(rng.uniform_int(0, hi_y - lo));
      int direct = 0;
      for (const auto& w : windows) {
        if (w.page_rect().contains(ix, iy)) ++direct;
      }
      if (direct != 100) return fail("interior pixel not covered by exactly 100 windows");
    }
  }
  return pass("1000 page sizes, every pixel covered, interior exactly 100");
}

// --- C3: vote map vs per-pixel brute force -----------------------------------

Outcome c3_votes() {
  fdp::Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = static_cast<int>(rng.uniform_int(4, 128));
    const int h = static_cast<int>(rng.uniform_int(4, 128));
    std::vector<fdp::ScoredRect> boxes;
    const int n = static_cast<int>(rng.uniform_int(0, 50));
    for (int i = 0; i < n; ++i) {
      const int l = static_cast<int>(rng.uniform_int(0, w - 2));
      const int t = static_cast<int>(rng.uniform_int(0, h - 2));
      boxes.emplace_back(fdp::Rect(l, t, l + static_cast<int>(rng.uniform_int(1, w - l)),
                                   t + static_cast<int>(rng.uniform_int(1, h - t))),
                         rng.uniform());
    }
    const auto uniform = fdp::vote(boxes, w, h, fdp::VoteMethod::uniform);
    const auto sum = fdp::vote(boxes, w, h, fdp::VoteMethod::sum);
    const auto mx = fdp::vote(boxes, w, h, fdp::VoteMethod::max);
    const auto avg = fdp::vote(boxes, w, h, fdp::VoteMethod::average);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto px = oracle::vote_pixel(x, y, boxes);
        if (uniform.at(x, y) != static_cast<double>(px.count)) return fail("uniform mismatch");
        if (std::abs(sum.at(x, y) - px.sum) > 1e-9) return fail("sum mismatch");
        if (std::abs(mx.at(x, y) - px.max) > 1e-9) return fail("max mismatch");
        const double want_avg = px.count ? px.sum / px.count : 0.0;
        if (std::abs(avg.at(x, y) - want_avg) > 1e-9) return fail("average mismatch");
      }
    }
  }
  return pass("200 instances, all four scoring functions");
}

// --- C4: NMS vs brute-force greedy --------------------------------------------

Outcome c4_nms() {
  fdp::Rng rng(44);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<fdp::ScoredRect> dets;
    const int n = static_cast<int>(rng.uniform_int(0, 12));
    for (int i = 0; i < n; ++i) {
      const int l = static_cast<int>(rng.uniform_int(0, 40));
      const int t = static_cast<int>(rng.uniform_int(0, 40));
      dets.emplace_back(fdp::Rect(l, t, l + static_cast<int>(rng.uniform_int(1, 48 - l)),
                                  t + static_cast<int>(rng.uniform_int(1, 48 - t))),
                        rng.uniform());
    }
    const double threshold = 0.15 + 0.8 * rng.uniform();
    const auto got = fdp::nms(dets, threshold);
    const auto want = oracle::nms_greedy(dets, threshold);
    if (got.size() != want.size()) return fail("kept-set size differs");
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (!(got[i].rect == want[i].rect) || got[i].confidence != want[i].confidence) {
        return fail("kept set differs");
      }
    }
  }
  return pass("1000 trials, identical kept sets");
}

// --- C5: anchor matching vs exhaustive ----------------------------------------

Outcome c5_anchors() {
  fdp::Rng rng(55);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<fdp::DefaultBox> boxes;
    const int nb = static_cast<int>(rng.uniform_int(1, 12));
    for (int i = 0; i < nb; ++i) {
      const int l = static_cast<int>(rng.uniform_int(0, 40));
      const int t = static_cast<int>(rng.uniform_int(0, 40));
      boxes.push_back(fdp::DefaultBox{
          fdp::Rect(l, t, l + static_cast<int>(rng.uniform_int(1, 48 - l)),
                    t + static_cast<int>(rng.uniform_int(1, 48 - t)))});
    }
    std::vector<fdp::Rect> gt;
    const int ng = static_cast<int>(rng.uniform_int(1, 4));
    for (int g = 0; g < ng; ++g) {
      const int l = static_cast<int>(rng.uniform_int(0, 40));
      const int t = static_cast<int>(rng.uniform_int(0, 40));
      gt.emplace_back(l, t, l + static_cast<int>(rng.uniform_int(1, 48 - l)),
                      t + static_cast<int>(rng.uniform_int(1, 48 - t)));
    }
    const auto got = fdp::match_ground_truth(gt, boxes);
    const auto want = oracle::match_exhaustive(gt, boxes);
    if (got.assignments.size() != want.assignments.size()) return fail("assignment count");
    for (std::size_t i = 0; i < got.assignments.size(); ++i) {
      if (got.assignments[i].box_id != want.assignments[i].box_id ||
          got.assignments[i].gt_index != want.assignments[i].gt_index) {
        return fail("assignment differs");
      }
    }
    if (got.positives != want.positives) return fail("positive set differs");
  }
  return pass("500 instances, best + >0.5 rule");
}

// --- C6/C7: end-to-end oracle fidelity and degradation -------------------------

struct E2EFixture {
  TempTree tmp{"e2e"};
  std::vector<fdp::GroundTruthPage> pages;
  std::filesystem::path gt_path;
  std::vector<fdp::PageFormulas> gt_formulas;

  E2EFixture() {
    pages = synth::make_corpus(20240607, 50);
    gt_path = synth::write_corpus(tmp.path / "pages", pages);
    for (const auto& p : pages) {
      gt_formulas.push_back({p.doc_id, p.page_number, p.formulas});
    }
  }

  fdp::PipelineConfig base_config(const char* out_tag) const {
    fdp::PipelineConfig cfg;
    cfg.pages_dir = (tmp.path / "pages").string();
    cfg.gt_csv = gt_path.string();
    cfg.out_dir = (tmp.path / out_tag).string();
    cfg.workers = 1;
    return cfg;
  }
};

Outcome c6_oracle_fidelity(const E2EFixture& fx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto outcome = fdp::run_pipeline(fx.base_config("zero_noise"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ifstream det_in(outcome.detections_csv);
  const auto dets = fdp::read_page_detection_csv(det_in);
  const auto res = fdp::match_formulas(fx.gt_formulas, dets, 0.75);
  char buf[160];
  std::snprintf(buf, sizeof buf, "f=%.4f at IOU>=0.75 over %ld formulas, %.1fs single-threaded",
                res.fscore, res.tp + res.fn, secs);
  if (res.fscore != 1.0) return fail(buf);
  if (secs >= 300.0) return fail(std::string(buf) + " (over the 5 min budget)");
  // Stronger than the criterion: the output equals the ground truth bit for bit.
  if (slurp(outcome.detections_csv) != synth::expected_detection_csv(fx.pages)) {
    return fail("f=1.0 but the detection CSV is not byte-equal to ground truth");
  }
  return pass(buf);
}

Outcome c7_degradation(const E2EFixture& fx) {
  fdp::PipelineConfig cfg = fx.base_config("degraded");
  cfg.seed = 4242;
  cfg.oracle.position_jitter_px = 8;
  cfg.oracle.size_jitter_px = 8;
  cfg.oracle.drop_prob = 0.3;
  cfg.oracle.confidence_min = 0.5;
  cfg.oracle.confidence_max = 1.0;
  const auto outcome = fdp::run_pipeline(cfg);

  std::ifstream det_in(outcome.detections_csv);
  const auto dets = fdp::read_page_detection_csv(det_in);
  const auto res = fdp::match_formulas(fx.gt_formulas, dets, 0.5);
  char buf[120];
  std::snprintf(buf, sizeof buf, "jitter 8px drop 0.3 -> f=%.4f at IOU>=0.5 (need >= 0.95)",
                res.fscore);
  return res.fscore >= 0.95 ? pass(buf) : fail(buf);
}

// --- C8: default-constant conformance --------------------------------------------

Outcome c8_constants() {
  const fdp::PipelineConfig cfg;
  std::vector<std::string> wrong;
  if (cfg.window_size != 1200) wrong.push_back("window_size");
  if (cfg.stride != 120) wrong.push_back("stride");
  if (cfg.input_size != 512) wrong.push_back("input_size");
  if (cfg.anchors.input_size != 512) wrong.push_back("anchors.input_size");
  if (cfg.anchors.aspect_ratios != std::vector<double>{1, 2, 3, 5, 7, 10}) {
    wrong.push_back("aspect_ratios");
  }
  if (cfg.vote_method != fdp::VoteMethod::uniform) wrong.push_back("vote_method");
  if (cfg.vote_threshold != 30.0) wrong.push_back("vote_threshold");

  const auto uniform_grid = fdp::default_threshold_grid(fdp::VoteMethod::uniform);
  const auto sum_grid = fdp::default_threshold_grid(fdp::VoteMethod::sum);
  const auto max_grid = fdp::default_threshold_grid(fdp::VoteMethod::max);
  if (uniform_grid.size() != 56 || uniform_grid.front() != 0 || uniform_grid.back() != 55) {
    wrong.push_back("uniform grid {0..55}");
  }
  if (sum_grid != uniform_grid) wrong.push_back("sum grid {0..55}");
  if (max_grid.size() != 101 || max_grid.front() != 0 || max_grid.back() != 100) {
    wrong.push_back("max grid {0..100}");
  }

  if (!wrong.empty()) {
    std::string detail = "mismatched:";
    for (const auto& w : wrong) detail += " " + w;
    return fail(detail);
  }
  return pass("window 1200, stride 120, input 512, ratios {1,2,3,5,7,10}, uniform t=30, "
              "grids {0..55}/{0..100}");
}

// --- C9: TFD-ICDAR2019v2 statistics (when present) ------------------------------

Outcome c9_dataset_stats() {
  const char* dir = std::getenv("FDP_TFD_DIR");
  if (!dir || !*dir) return skip("FDP_TFD_DIR not set; TFD-ICDAR2019v2 not available");
  const auto check_split = [](const std::filesystem::path& csv, long docs, long pages,
                              long single, long multi, long total) -> std::string {
    std::ifstream in(csv);
    if (!in) return "missing " + csv.string();
    const auto gt = fdp::parse_gtdb(in);
    const auto stats = fdp::collection_stats(gt);
    char buf[256];
    if (stats.docs != docs || stats.pages != pages || stats.single_symbol_formulas != single ||
        stats.multi_symbol_formulas != multi || stats.total_formulas != total) {
      std::snprintf(buf, sizeof buf,
                    "%s: got docs=%ld pages=%ld single=%ld multi=%ld total=%ld, want "
                    "%ld/%ld/%ld/%ld/%ld",
                    csv.filename().string().c_str(), stats.docs, stats.pages,
                    stats.single_symbol_formulas, stats.multi_symbol_formulas,
                    stats.total_formulas, docs, pages, single, multi, total);
      return buf;
    }
    return "";
  };
  const std::filesystem::path base(dir);
  std::string err = check_split(base / "training.csv", 36, 569, 7506, 18947, 26453);
  if (err.empty()) err = check_split(base / "test.csv", 10, 236, 2556, 9350, 11906);
  if (!err.empty()) return fail(err);
  return pass("training 36(569)/7506/18947/26453, test 10(236)/2556/9350/11906");
}

// --- C10: determinism across runs and worker counts -----------------------------

Outcome c10_determinism() {
  TempTree tmp("det");
  const auto pages = synth::make_corpus(555, 6);
  const auto gt_path = synth::write_corpus(tmp.path / "pages", pages);

  fdp::PipelineConfig cfg;
  cfg.pages_dir = (tmp.path / "pages").string();
  cfg.gt_csv = gt_path.string();
  cfg.seed = 31337;
  cfg.oracle.position_jitter_px = 3;
  cfg.oracle.size_jitter_px = 2;
  cfg.oracle.drop_prob = 0.1;
  cfg.oracle.confidence_min = 0.5;
  cfg.oracle.confidence_max = 1.0;

  cfg.workers = 1;
  cfg.out_dir = (tmp.path / "w1a").string();
  const auto a = fdp::run_pipeline(cfg);
  cfg.out_dir = (tmp.path / "w1b").string();
  const auto b = fdp::run_pipeline(cfg);
  cfg.workers = 8;
  cfg.out_dir = (tmp.path / "w8").string();
  const auto c = fdp::run_pipeline(cfg);

  const std::string bytes = slurp(a.detections_csv);
  if (bytes.empty()) return fail("empty detections");
  if (slurp(b.detections_csv) != bytes) return fail("rerun with the same seed differs");
  if (slurp(c.detections_csv) != bytes) return fail("workers 1 vs 8 differ");
  return pass("same seed twice and workers 1 vs 8: byte-identical CSVs");
}

// --- C11: evaluator regression fixture -------------------------------------------

Outcome c11_evaluator() {
  // One exact match, one split formula, one merged pair (the error classes
  // the evaluation protocol has to price correctly).
  std::vector<fdp::PageFormulas> gt(1);
  gt[0].doc_id = "d";
  gt[0].page = 0;
  int fid = 0;
  for (const fdp::Rect& r :
       {fdp::Rect(100, 100, 300, 200), fdp::Rect(400, 100, 600, 200),
        fdp::Rect(100, 300, 300, 400), fdp::Rect(400, 300, 600, 400)}) {
    gt[0].formulas.emplace_back("f" + std::to_string(fid++), r,
                                std::vector<std::string>{"c"});
  }
  const std::vector<fdp::PageDetections> dets = {
      {"d",
       0,
       {fdp::Rect(100, 100, 300, 200), fdp::Rect(400, 100, 500, 200),
        fdp::Rect(500, 100, 600, 200), fdp::Rect(100, 300, 600, 400)}}};

  struct Want {
    double iou;
    long tp, fp, fn;
    double p, r, f;
  };
  const Want wants[] = {
      {0.50, 2, 2, 2, 0.5, 0.5, 0.5},
      {0.75, 1, 3, 3, 0.25, 0.25, 0.25},
      {1.00, 1, 3, 3, 0.25, 0.25, 0.25},
  };
  for (const auto& want : wants) {
    const auto res = fdp::match_formulas(gt, dets, want.iou);
    if (res.tp != want.tp || res.fp != want.fp || res.fn != want.fn ||
        res.precision != want.p || res.recall != want.r || res.fscore != want.f) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "IOU>=%.2f: got tp=%ld fp=%ld fn=%ld p=%.4f r=%.4f f=%.4f, want "
                    "%ld/%ld/%ld %.2f/%.2f/%.2f",
                    want.iou, res.tp, res.fp, res.fn, res.precision, res.recall, res.fscore,
                    want.tp, want.fp, want.fn, want.p, want.r, want.f);
      return fail(buf);
    }
  }
  return pass("split + merge fixture exact at IOU 0.5 / 0.75 / 1.0");
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> run;
  };

  // The 50-page corpus is shared between C6 and C7.
  std::unique_ptr<E2EFixture> e2e;
  const auto fixture = [&]() -> E2EFixture& {
    if (!e2e) e2e = std::make_unique<E2EFixture>();
    return *e2e;
  };

  const std::vector<Criterion> criteria = {
      {"C1", "geometry-iou-oracle-equivalence", c1_geometry},
      {"C2", "windowing-coverage", c2_windowing},
      {"C3", "vote-map-oracle-equivalence", c3_votes},
      {"C4", "nms-oracle-equivalence", c4_nms},
      {"C5", "anchor-matching-oracle-equivalence", c5_anchors},
      {"C6", "end-to-end-oracle-fidelity", [&] { return c6_oracle_fidelity(fixture()); }},
      {"C7", "degradation-under-jitter-and-drops", [&] { return c7_degradation(fixture()); }},
      {"C8", "default-constant-conformance", c8_constants},
      {"C9", "tfd-icdar2019v2-statistics", c9_dataset_stats},
      {"C10", "pipeline-determinism", c10_determinism},
      {"C11", "evaluator-regression-fixture", c11_evaluator},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* verdict = outcome.kind == Outcome::kPass   ? "PASS"
                          : outcome.kind == Outcome::kSkip ? "SKIP"
                                                           : "FAIL";
    if (outcome.kind == Outcome::kFail) ++failures;
    std::printf("%-4s %-42s %s (%.1fs) %s\n", c.id, c.name, verdict, secs,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  if (failures) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
