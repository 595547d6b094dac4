#pragma once

// Synthetic solid-box "formula" corpus used by the pipeline tests and the
// acceptance suite. Boxes are placed on a padded grid so every formula sits
// deep enough in the page to collect full window coverage, and any two
// formulas stay at least 200 px apart.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fdp/dataset.hpp"
#include "fdp/image.hpp"
#include "fdp/rng.hpp"

namespace synth {

struct CorpusParams {
  int page_width = 3000;
  int page_height = 3000;
  int margin = 600;        // >= 150 per the edge constraint; 600 keeps every
                           // formula pixel under >= 36 overlapping windows
  int cell_width = 600;    // max box 400 wide + 200 separation
  int cell_height = 400;   // max box 200 tall + 200 separation
  int min_box_w = 150, max_box_w = 400;
  int min_box_h = 80, max_box_h = 200;
  int min_formulas = 3, max_formulas = 6;
  int size_jitter = 97;  // widen pages by up to this much so clamped windows occur
};

inline fdp::GroundTruthPage make_page(fdp::Rng& rng, const std::string& doc_id, int page_no,
                                      const CorpusParams& p = {}) {
  fdp::GroundTruthPage page;
  page.doc_id = doc_id;
  page.page_number = page_no;
  page.width = p.page_width + (p.size_jitter > 0
                                   ? static_cast<int>(rng.uniform_int(0, p.size_jitter))
                                   : 0);
  page.height = p.page_height + (p.size_jitter > 0
                                     ? static_cast<int>(rng.uniform_int(0, p.size_jitter))
                                     : 0);

  const int cols = (p.page_width - 2 * p.margin) / p.cell_width;
  const int rows = (p.page_height - 2 * p.margin) / p.cell_height;
  const int cells = cols * rows;
  const int want = static_cast<int>(rng.uniform_int(p.min_formulas, p.max_formulas));
  const int count = std::min(want, cells);

  // Pick `count` distinct cells.
  std::vector<int> cell_ids(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) cell_ids[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < count; ++i) {
    const int j = static_cast<int>(rng.uniform_int(i, cells - 1));
    std::swap(cell_ids[static_cast<std::size_t>(i)], cell_ids[static_cast<std::size_t>(j)]);
  }

  int char_no = 0;
  for (int k = 0; k < count; ++k) {
    const int cell = cell_ids[static_cast<std::size_t>(k)];
    const int cx0 = p.margin + (cell % cols) * p.cell_width;
    const int cy0 = p.margin + (cell / cols) * p.cell_height;
    const int bw = static_cast<int>(rng.uniform_int(p.min_box_w, p.max_box_w));
    const int bh = static_cast<int>(rng.uniform_int(p.min_box_h, p.max_box_h));
    const int jx = static_cast<int>(rng.uniform_int(0, p.cell_width - bw - 200));
    const int jy = static_cast<int>(rng.uniform_int(0, p.cell_height - bh - 200));
    const int left = cx0 + jx;
    const int top = cy0 + jy;

    // Split the box into 2-3 horizontally chained member characters.
    const int pieces = static_cast<int>(rng.uniform_int(2, 3));
    int x = left;
    std::string prev_id;
    for (int piece = 0; piece < pieces; ++piece) {
      const int next_x = piece + 1 == pieces ? left + bw : left + bw * (piece + 1) / pieces;
      fdp::CharacterRecord rec("c" + std::to_string(char_no++),
                               fdp::Rect(x, top, next_x, top + bh));
      rec.label = "sym";
      rec.is_math = true;
      if (!prev_id.empty()) {
        rec.parent_id = prev_id;
        rec.relationship = fdp::Relationship::horizontal;
      }
      prev_id = rec.char_id;
      page.characters.push_back(std::move(rec));
      x = next_x;
    }
  }
  page.formulas = fdp::formulas_from_characters(page);
  return page;
}

inline fdp::PageImage render_page(const fdp::GroundTruthPage& page) {
  fdp::PageImage img = fdp::PageImage::blank(page.width, page.height, 255);
  for (const auto& f : page.formulas) fdp::fill_rect(img, f.bbox, 0);
  return img;
}

inline std::string ground_truth_csv(const std::vector<fdp::GroundTruthPage>& pages) {
  std::ostringstream os;
  os << "doc_id,page,char_id,left,top,right,bottom,label,is_math,parent_id,relationship\n";
  for (const auto& page : pages) {
    for (const auto& c : page.characters) {
      os << page.doc_id << ',' << page.page_number << ',' << c.char_id << ',' << c.bbox.left()
         << ',' << c.bbox.top() << ',' << c.bbox.right() << ',' << c.bbox.bottom() << ','
         << c.label << ',' << (c.is_math ? 1 : 0) << ','
         << (c.parent_id ? *c.parent_id : std::string()) << ',' << to_string(c.relationship)
         << '\n';
    }
  }
  return os.str();
}

/// What a perfect pipeline run over this corpus must print: pages in
/// (doc_id, page) order, boxes in Rect order.
inline std::string expected_detection_csv(std::vector<fdp::GroundTruthPage> pages) {
  std::sort(pages.begin(), pages.end(),
            [](const fdp::GroundTruthPage& a, const fdp::GroundTruthPage& b) {
              if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
              return a.page_number < b.page_number;
            });
  std::ostringstream os;
  os << "doc_id,page,left,top,right,bottom\n";
  for (const auto& page : pages) {
    std::vector<fdp::Rect> boxes;
    for (const auto& f : page.formulas) boxes.push_back(f.bbox);
    std::sort(boxes.begin(), boxes.end());
    for (const auto& b : boxes) {
      os << page.doc_id << ',' << page.page_number << ',' << b.left() << ',' << b.top() << ','
         << b.right() << ',' << b.bottom() << '\n';
    }
  }
  return os.str();
}

/// Writes `{doc}_{page}.pgm` images plus `gt.csv`; returns the gt path.
inline std::filesystem::path write_corpus(const std::filesystem::path& dir,
                                          const std::vector<fdp::GroundTruthPage>& pages) {
  std::filesystem::create_directories(dir);
  for (const auto& page : pages) {
    fdp::write_pgm(render_page(page),
                   dir / (page.doc_id + "_" + std::to_string(page.page_number) + ".pgm"));
  }
  const auto gt_path = dir / "gt.csv";
  std::ofstream out(gt_path);
  out << ground_truth_csv(pages);
  return gt_path;
}

inline std::vector<fdp::GroundTruthPage> make_corpus(std::uint64_t seed, int n_pages,
                                                     const CorpusParams& p = {}) {
  fdp::Rng rng(seed);
  std::vector<fdp::GroundTruthPage> pages;
  pages.reserve(static_cast<std::size_t>(n_pages));
  for (int i = 0; i < n_pages; ++i) {
    pages.push_back(make_page(rng, "doc" + std::to_string(i / 4), i % 4, p));
  }
  return pages;
}

}  // namespace synth
