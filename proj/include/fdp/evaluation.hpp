#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fdp/dataset.hpp"
#include "fdp/geometry.hpp"

namespace fdp {

/// Final page-level detections for one page.
struct PageDetections {
  std::string doc_id;
  int page = 0;
  std::vector<Rect> boxes;
};

/// Reads the final detection CSV (`doc_id,page,left,top,right,bottom`) back,
/// grouped by page in file order.
std::vector<PageDetections> read_page_detection_csv(std::istream& in);

/// One-to-one greedy matching of one page's ground truth against its
/// detections: candidate pairs with IOU >= threshold, taken in descending
/// IOU (ties by lowest gt index, then lowest detection index).
struct PageMatch {
  struct Pair {
    int gt_index;
    int det_index;
    double iou;
  };
  std::vector<Pair> pairs;
  long tp = 0, fp = 0, fn = 0;
};

PageMatch match_page(std::span<const Rect> ground_truth, std::span<const Rect> detections,
                     double iou_threshold);

struct DocMetrics {
  long tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, fscore = 0;
};

struct EvalResult {
  double iou_threshold = 0.5;
  long tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, fscore = 0;
  bool zero_denominator = false;  // some metric fell back to 0/0 -> 0
  std::map<std::string, DocMetrics> per_document;

  struct Match {
    std::string doc_id;
    int page;
    std::string gt_id;
    int det_index;
    double iou;
  };
  std::vector<Match> matches;
};

/// Matches per page, aggregates counts overall and per document. Pages
/// missing from one side count as all-unmatched on the other.
EvalResult match_formulas(std::span<const PageFormulas> ground_truth,
                          std::span<const PageDetections> detections, double iou_threshold);

/// The competition protocol: coarse (IOU >= 0.5), fine (>= 0.75), and exact
/// (IOU = 1) matching in one pass.
struct EvalSuite {
  EvalResult at_050;
  EvalResult at_075;
  EvalResult exact;
};

EvalSuite evaluate_suite(std::span<const PageFormulas> ground_truth,
                         std::span<const PageDetections> detections);

/// Character-level metrics: characters are predicted math when at least half
/// their box area lies inside a single detection. The center-point variant
/// (character center inside a detection) is reported alongside for
/// sensitivity.
struct CharEvalResult {
  long tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, fscore = 0;
  long tp_center = 0, fp_center = 0, fn_center = 0;
  double precision_center = 0, recall_center = 0, fscore_center = 0;
};

CharEvalResult character_metrics(std::span<const GroundTruthPage> ground_truth,
                                 std::span<const PageDetections> detections);

/// `scope,iou,precision,recall,fscore` rows: overall, each document, and the
/// character level.
void write_metrics_csv(std::ostream& out, const EvalSuite& suite, const CharEvalResult* chars);

std::string format_metrics_table(const EvalSuite& suite, const CharEvalResult* chars);

}  // namespace fdp
