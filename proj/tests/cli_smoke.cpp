// Drives the fdp binary through every subcommand against a synthetic corpus
// and checks outputs and exit codes. argv[1] is the binary path.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "fdp/dataset.hpp"
#include "fdp/evaluation.hpp"
#include "support/synthetic.hpp"

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    std::cerr << "FAIL: " << what << "\n";
  }
}

int run(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_smoke <fdp-binary>\n";
    return 2;
  }
  const std::string fdp = std::string("\"") + argv[1] + "\"";

  const auto root = std::filesystem::temp_directory_path() / "fdp_cli_smoke";
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);

  synth::CorpusParams params;
  params.page_width = 2400;
  params.page_height = 2400;
  params.min_formulas = 2;
  params.max_formulas = 3;
  const auto pages = synth::make_corpus(808, 2, params);
  const auto gt = synth::write_corpus(root / "pages", pages);
  const std::string pages_dir = (root / "pages").string();

  // pipeline
  expect(run(fdp + " pipeline --pages " + pages_dir + " --gt " + gt.string() + " --out-dir " +
             (root / "out").string()) == 0,
         "pipeline exits 0");
  expect(slurp(root / "out" / "detections.csv") == synth::expected_detection_csv(pages),
         "pipeline output equals ground truth");
  expect(std::filesystem::exists(root / "out" / "run_manifest.txt"), "manifest written");

  // stats (+ derived formula regions)
  expect(run(fdp + " stats --gt " + gt.string() + " --formulas-out " +
             (root / "formulas.csv").string()) == 0,
         "stats exits 0");
  expect(slurp(root / "formulas.csv").rfind("doc_id,page,formula_id,left,top,right,bottom\n",
                                            0) == 0,
         "formula regions written");
  {
    std::ifstream in(root / "formulas.csv");
    const auto regions = fdp::read_formula_csv(in);
    std::size_t total = 0;
    for (const auto& p : regions) total += p.formulas.size();
    std::size_t want = 0;
    for (const auto& p : pages) want += p.formulas.size();
    expect(total == want, "formula region count matches the corpus");
  }

  // tile with crops
  expect(run(fdp + " tile --pages " + pages_dir + " --gt " + gt.string() + " --out-dir " +
             (root / "tile").string() + " --write-crops") == 0,
         "tile exits 0");
  expect(std::filesystem::exists(root / "tile" / "windows.csv"), "window manifest written");
  expect(std::filesystem::exists(root / "tile" / "doc0_0_0.pgm"), "window crops written");

  // detect -> pool reproduces the fused pipeline
  expect(run(fdp + " detect --pages " + pages_dir + " --gt " + gt.string() + " --out-dir " +
             (root / "det").string()) == 0,
         "detect exits 0");
  expect(run(fdp + " pool --manifest " + (root / "det" / "windows.csv").string() +
             " --window-dets " + (root / "det" / "window_detections.csv").string() + " --pages " +
             pages_dir + " --out-dir " + (root / "pool").string()) == 0,
         "pool exits 0");
  expect(slurp(root / "pool" / "detections.csv") == slurp(root / "out" / "detections.csv"),
         "detect|pool equals the fused pipeline");

  // heuristic detector in directory-scan mode (no ground truth at all):
  // solid synthetic boxes are easy ink, so it recovers them exactly too
  expect(run(fdp + " pipeline --pages " + pages_dir + " --detector heuristic --out-dir " +
             (root / "heur").string()) == 0,
         "heuristic dir-scan pipeline exits 0");
  expect(slurp(root / "heur" / "detections.csv") == synth::expected_detection_csv(pages),
         "heuristic output equals ground truth on solid boxes");

  // evaluate
  expect(run(fdp + " evaluate --gt " + gt.string() + " --dets " +
             (root / "out" / "detections.csv").string() + " --char-gt " + gt.string() +
             " --csv " + (root / "metrics.csv").string()) == 0,
         "evaluate exits 0");
  const std::string metrics = slurp(root / "metrics.csv");
  expect(metrics.find("all,0.75,1.0000,1.0000,1.0000") != std::string::npos,
         "metrics CSV reports f=1 at 0.75");
  expect(metrics.find("charlevel") != std::string::npos, "metrics CSV has character rows");

  // tune
  expect(run(fdp + " tune --gt-formulas " + gt.string() + " --manifest " +
             (root / "det" / "windows.csv").string() + " --window-dets " +
             (root / "det" / "window_detections.csv").string() + " --grid 25:35") == 0,
         "tune exits 0");

  // export-targets
  expect(run(fdp + " export-targets --gt " + gt.string() + " --out " +
             (root / "targets.csv").string()) == 0,
         "export-targets exits 0");
  {
    std::ifstream in(root / "targets.csv");
    std::string header, row;
    std::getline(in, header);
    expect(header == "window_id,box_id,gt_left,gt_top,gt_right,gt_bottom,d_cx,d_cy,d_logw,d_logh",
           "targets header");
    expect(static_cast<bool>(std::getline(in, row)), "targets has records");
  }

  // exit codes: usage, data error
  expect(run(fdp + " no-such-command") == 1, "unknown command exits 1");
  expect(run(fdp + " evaluate --gt missing.csv --dets also_missing.csv") == 2,
         "missing inputs exit 2");
  expect(run(fdp + " pipeline --pages /nonexistent --set detector=heuristic") == 2,
         "bad pages dir exits 2");
  expect(run(fdp + " --version") == 0, "--version exits 0");

  std::filesystem::remove_all(root);
  if (failures) {
    std::cerr << failures << " smoke check(s) failed\n";
    return 1;
  }
  std::printf("cli smoke: all checks passed\n");
  return 0;
}
