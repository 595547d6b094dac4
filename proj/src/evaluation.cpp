#include "fdp/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "fdp/csv.hpp"
#include "fdp/errors.hpp"

namespace fdp {

namespace {

void finish_metrics(long tp, long fp, long fn, double& precision, double& recall, double& fscore,
                    bool* zero_flag) {
  const long pd = tp + fp;
  const long rd = tp + fn;
  precision = pd > 0 ? static_cast<double>(tp) / static_cast<double>(pd) : 0.0;
  recall = rd > 0 ? static_cast<double>(tp) / static_cast<double>(rd) : 0.0;
  fscore = (precision + recall) > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  if (zero_flag && (pd == 0 || rd == 0 || precision + recall == 0)) *zero_flag = true;
}

}  // namespace

std::vector<PageDetections> read_page_detection_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) return {};
  if (fields.size() != 6) throw DataError("row 1: expected detection CSV header (6 columns)");

  std::vector<PageDetections> out;
  std::map<std::pair<std::string, int>, std::size_t> index;
  while (reader.next(fields)) {
    const long line = reader.line_number();
    if (fields.size() != 6) throw DataError("row " + std::to_string(line) + ": expected 6 fields");
    int vals[5];
    for (int i = 1; i < 6; ++i) {
      try {
        std::size_t pos = 0;
        vals[i - 1] = std::stoi(fields[static_cast<std::size_t>(i)], &pos);
        if (pos != fields[static_cast<std::size_t>(i)].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw DataError("row " + std::to_string(line) + ": bad integer field");
      }
    }
    const auto key = std::make_pair(fields[0], vals[0]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({fields[0], vals[0], {}});
    }
    try {
      out[it->second].boxes.emplace_back(vals[1], vals[2], vals[3], vals[4]);
    } catch (const std::invalid_argument& e) {
      throw DataError("row " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

PageMatch match_page(std::span<const Rect> ground_truth, std::span<const Rect> detections,
                     double iou_threshold) {
  struct Candidate {
    double iou;
    int gt_index;
    int det_index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    for (std::size_t d = 0; d < detections.size(); ++d) {
      const double v = iou(ground_truth[g], detections[d]);
      if (v >= iou_threshold) {
        candidates.push_back({v, static_cast<int>(g), static_cast<int>(d)});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.gt_index != b.gt_index) return a.gt_index < b.gt_index;
    return a.det_index < b.det_index;
  });

  PageMatch out;
  std::vector<std::uint8_t> gt_used(ground_truth.size(), 0), det_used(detections.size(), 0);
  for (const auto& c : candidates) {
    if (gt_used[static_cast<std::size_t>(c.gt_index)] ||
        det_used[static_cast<std::size_t>(c.det_index)]) {
      continue;
    }
    gt_used[static_cast<std::size_t>(c.gt_index)] = 1;
    det_used[static_cast<std::size_t>(c.det_index)] = 1;
    out.pairs.push_back({c.gt_index, c.det_index, c.iou});
  }
  out.tp = static_cast<long>(out.pairs.size());
  out.fp = static_cast<long>(detections.size()) - out.tp;
  out.fn = static_cast<long>(ground_truth.size()) - out.tp;
  return out;
}

EvalResult match_formulas(std::span<const PageFormulas> ground_truth,
                          std::span<const PageDetections> detections, double iou_threshold) {
  EvalResult result;
  result.iou_threshold = iou_threshold;

  std::map<std::pair<std::string, int>, const PageDetections*> det_index;
  for (const auto& d : detections) det_index[{d.doc_id, d.page}] = &d;

  struct DocCounts {
    long tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, DocCounts> per_doc;
  std::set<std::pair<std::string, int>> seen_pages;

  static const std::vector<Rect> kNoBoxes;
  for (const auto& gt_page : ground_truth) {
    seen_pages.insert({gt_page.doc_id, gt_page.page});
    auto it = det_index.find({gt_page.doc_id, gt_page.page});
    const std::vector<Rect>& det_boxes = it != det_index.end() ? it->second->boxes : kNoBoxes;

    std::vector<Rect> gt_boxes;
    gt_boxes.reserve(gt_page.formulas.size());
    for (const auto& f : gt_page.formulas) gt_boxes.push_back(f.bbox);

    const PageMatch pm = match_page(gt_boxes, det_boxes, iou_threshold);
    result.tp += pm.tp;
    result.fp += pm.fp;
    result.fn += pm.fn;
    auto& doc = per_doc[gt_page.doc_id];
    doc.tp += pm.tp;
    doc.fp += pm.fp;
    doc.fn += pm.fn;
    for (const auto& p : pm.pairs) {
      result.matches.push_back({gt_page.doc_id, gt_page.page,
                                gt_page.formulas[static_cast<std::size_t>(p.gt_index)].formula_id,
                                p.det_index, p.iou});
    }
  }
  // Detections on pages with no ground-truth entry are all false positives.
  for (const auto& d : detections) {
    if (seen_pages.count({d.doc_id, d.page})) continue;
    result.fp += static_cast<long>(d.boxes.size());
    per_doc[d.doc_id].fp += static_cast<long>(d.boxes.size());
  }

  finish_metrics(result.tp, result.fp, result.fn, result.precision, result.recall, result.fscore,
                 &result.zero_denominator);
  for (auto& [doc, counts] : per_doc) {
    DocMetrics m;
    m.tp = counts.tp;
    m.fp = counts.fp;
    m.fn = counts.fn;
    finish_metrics(m.tp, m.fp, m.fn, m.precision, m.recall, m.fscore, nullptr);
    result.per_document.emplace(doc, m);
  }
  return result;
}

EvalSuite evaluate_suite(std::span<const PageFormulas> ground_truth,
                         std::span<const PageDetections> detections) {
  EvalSuite suite;
  suite.at_050 = match_formulas(ground_truth, detections, 0.5);
  suite.at_075 = match_formulas(ground_truth, detections, 0.75);
  suite.exact = match_formulas(ground_truth, detections, 1.0);
  return suite;
}

CharEvalResult character_metrics(std::span<const GroundTruthPage> ground_truth,
                                 std::span<const PageDetections> detections) {
  std::map<std::pair<std::string, int>, const PageDetections*> det_index;
  for (const auto& d : detections) det_index[{d.doc_id, d.page}] = &d;

  CharEvalResult out;
  for (const auto& page : ground_truth) {
    auto it = det_index.find({page.doc_id, page.page_number});
    const std::vector<Rect>* boxes = it != det_index.end() ? &it->second->boxes : nullptr;
    for (const auto& c : page.characters) {
      bool area_math = false;
      bool center_math = false;
      if (boxes) {
        const double cx = (c.bbox.left() + c.bbox.right()) / 2.0;
        const double cy = (c.bbox.top() + c.bbox.bottom()) / 2.0;
        for (const Rect& det : *boxes) {
          if (!area_math) {
            const auto inter = intersect(c.bbox, det);
            if (inter && static_cast<double>(inter->area()) >=
                             0.5 * static_cast<double>(c.bbox.area())) {
              area_math = true;
            }
          }
          if (!center_math && cx >= det.left() && cx < det.right() && cy >= det.top() &&
              cy < det.bottom()) {
            center_math = true;
          }
          if (area_math && center_math) break;
        }
      }
      if (area_math && c.is_math) ++out.tp;
      else if (area_math && !c.is_math) ++out.fp;
      else if (!area_math && c.is_math) ++out.fn;
      if (center_math && c.is_math) ++out.tp_center;
      else if (center_math && !c.is_math) ++out.fp_center;
      else if (!center_math && c.is_math) ++out.fn_center;
    }
  }
  finish_metrics(out.tp, out.fp, out.fn, out.precision, out.recall, out.fscore, nullptr);
  finish_metrics(out.tp_center, out.fp_center, out.fn_center, out.precision_center,
                 out.recall_center, out.fscore_center, nullptr);
  return out;
}

namespace {

void write_metric_row(std::ostream& out, const std::string& scope, const char* iou_label, long tp,
                      long fp, long fn) {
  double p, r, f;
  finish_metrics(tp, fp, fn, p, r, f, nullptr);
  char buf[64];
  std::snprintf(buf, sizeof buf, ",%.4f,%.4f,%.4f", p, r, f);
  out << scope << ',' << iou_label << buf << '\n';
}

}  // namespace

void write_metrics_csv(std::ostream& out, const EvalSuite& suite, const CharEvalResult* chars) {
  out << "scope,iou,precision,recall,fscore\n";
  for (const auto* res : {&suite.at_050, &suite.at_075, &suite.exact}) {
    const char* label = res == &suite.at_050 ? "0.50" : res == &suite.at_075 ? "0.75" : "1.00";
    write_metric_row(out, "all", label, res->tp, res->fp, res->fn);
    for (const auto& [doc, m] : res->per_document) {
      write_metric_row(out, csv_escape(doc), label, m.tp, m.fp, m.fn);
    }
  }
  if (chars) {
    write_metric_row(out, "charlevel", "area0.5", chars->tp, chars->fp, chars->fn);
    write_metric_row(out, "charlevel", "center", chars->tp_center, chars->fp_center,
                     chars->fn_center);
  }
}

std::string format_metrics_table(const EvalSuite& suite, const CharEvalResult* chars) {
  std::ostringstream os;
  char line[160];
  os << "                 precision   recall   fscore       TP      FP      FN\n";
  const auto row = [&](const char* name, const EvalResult& r) {
    std::snprintf(line, sizeof line, "%-12s %11.4f %8.4f %8.4f %8ld %7ld %7ld\n", name,
                  r.precision, r.recall, r.fscore, r.tp, r.fp, r.fn);
    os << line;
  };
  row("IOU>=0.50", suite.at_050);
  row("IOU>=0.75", suite.at_075);
  row("IOU=1.00", suite.exact);
  if (chars) {
    std::snprintf(line, sizeof line, "%-12s %11.4f %8.4f %8.4f %8ld %7ld %7ld\n", "char(area)",
                  chars->precision, chars->recall, chars->fscore, chars->tp, chars->fp, chars->fn);
    os << line;
    std::snprintf(line, sizeof line, "%-12s %11.4f %8.4f %8.4f %8ld %7ld %7ld\n", "char(center)",
                  chars->precision_center, chars->recall_center, chars->fscore_center,
                  chars->tp_center, chars->fp_center, chars->fn_center);
    os << line;
  }
  if (!suite.at_050.per_document.empty()) {
    os << "\nper-document fscore (IOU>=0.50 / IOU>=0.75):\n";
    for (const auto& [doc, m] : suite.at_050.per_document) {
      const auto it75 = suite.at_075.per_document.find(doc);
      std::snprintf(line, sizeof line, "  %-24s %6.4f / %6.4f\n", doc.c_str(), m.fscore,
                    it75 != suite.at_075.per_document.end() ? it75->second.fscore : 0.0);
      os << line;
    }
  }
  return os.str();
}

}  // namespace fdp
