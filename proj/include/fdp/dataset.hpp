#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fdp/geometry.hpp"

namespace fdp {

/// Spatial relationship of a character to its parent character.
enum class Relationship { horizontal, subscript, superscript, above, below, inside, none };

const char* to_string(Relationship r);

struct CharacterRecord {
  std::string char_id;
  Rect bbox;
  std::string label;
  bool is_math = false;
  std::optional<std::string> parent_id;
  Relationship relationship = Relationship::none;

  CharacterRecord(std::string id, Rect box) : char_id(std::move(id)), bbox(box) {}
};

/// One math region: the tight union of its member characters' boxes.
struct FormulaRegion {
  std::string formula_id;
  Rect bbox;
  std::vector<std::string> member_char_ids;

  FormulaRegion(std::string id, Rect box, std::vector<std::string> members)
      : formula_id(std::move(id)), bbox(box), member_char_ids(std::move(members)) {}
};

struct GroundTruthPage {
  std::string doc_id;
  int page_number = 0;
  int width = 0;   // px at 600 dpi
  int height = 0;
  std::vector<CharacterRecord> characters;
  std::vector<FormulaRegion> formulas;
};

struct ParseOptions {
  /// Source right/bottom are inclusive pixel indices; +1 normalizes them to
  /// the half-open convention used everywhere else.
  bool inclusive_coords = false;
};

/// Parses character-level ground truth CSV with header
///   doc_id,page,char_id,left,top,right,bottom,label,is_math,parent_id,relationship
/// Groups rows into pages, validates parent references, derives formula
/// regions, and sets page size to the tight cover of all boxes. Unrecognized
/// relationship labels map to `none` and are reported through `warnings`.
/// Throws DataError on malformed rows (with the line number) and dangling
/// parent ids (naming the id).
std::vector<GroundTruthPage> parse_gtdb(std::istream& in, const ParseOptions& opts = {},
                                        std::vector<std::string>* warnings = nullptr);

/// Partitions the page's math characters into connected groups under the
/// undirected child/parent link graph (links between two math characters
/// only) and emits one FormulaRegion per group; isolated math characters
/// become single-symbol formulas. Output order and ids are independent of
/// the characters' input order.
std::vector<FormulaRegion> formulas_from_characters(const GroundTruthPage& page);

/// Applies `t` to every character and formula box and to the page size.
/// Throws DataError when a transformed box lands outside the new page bounds.
GroundTruthPage adjust_ground_truth(const GroundTruthPage& page, const Transform& t);

struct CollectionStats {
  long docs = 0;
  long pages = 0;
  long single_symbol_formulas = 0;
  long multi_symbol_formulas = 0;
  long total_formulas = 0;
};

CollectionStats collection_stats(std::span<const GroundTruthPage> pages);

/// Formula regions for one page, the evaluation-side ground-truth unit.
struct PageFormulas {
  std::string doc_id;
  int page = 0;
  std::vector<FormulaRegion> formulas;
};

/// Writes `doc_id,page,formula_id,left,top,right,bottom` rows with header.
void write_formula_csv(std::ostream& out, std::span<const GroundTruthPage> pages);
void write_formula_csv(std::ostream& out, std::span<const PageFormulas> pages);

/// Reads the formula-region CSV back, grouped by page in file order.
std::vector<PageFormulas> read_formula_csv(std::istream& in);

}  // namespace fdp
