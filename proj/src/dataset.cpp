#include "fdp/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "fdp/csv.hpp"
#include "fdp/errors.hpp"

namespace fdp {

const char* to_string(Relationship r) {
  switch (r) {
    case Relationship::horizontal: return "horizontal";
    case Relationship::subscript: return "subscript";
    case Relationship::superscript: return "superscript";
    case Relationship::above: return "above";
    case Relationship::below: return "below";
    case Relationship::inside: return "inside";
    case Relationship::none: return "none";
  }
  return "none";
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_relationship(const std::string& raw, Relationship& out) {
  const std::string s = lower(raw);
  if (s == "horizontal" || s == "right" || s == "hor") out = Relationship::horizontal;
  else if (s == "subscript" || s == "sub" || s == "rsub") out = Relationship::subscript;
  else if (s == "superscript" || s == "sup" || s == "super" || s == "rsup") out = Relationship::superscript;
  else if (s == "above" || s == "upper") out = Relationship::above;
  else if (s == "below" || s == "under") out = Relationship::below;
  else if (s == "inside" || s == "within") out = Relationship::inside;
  else if (s == "none" || s.empty() || s == "-") out = Relationship::none;
  else return false;
  return true;
}

int parse_int_field(const std::string& s, long line, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("row " + std::to_string(line) + ": bad " + what + " value '" + s + "'");
  }
}

bool parse_bool_field(const std::string& s, long line, const char* what) {
  const std::string v = lower(s);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw DataError("row " + std::to_string(line) + ": bad " + what + " value '" + s + "'");
}

constexpr const char* kGtHeader =
    "doc_id,page,char_id,left,top,right,bottom,label,is_math,parent_id,relationship";

}  // namespace

std::vector<GroundTruthPage> parse_gtdb(std::istream& in, const ParseOptions& opts,
                                        std::vector<std::string>* warnings) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) return {};  // empty file

  {
    std::string header;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) header += ',';
      header += lower(fields[i]);
    }
    if (header != kGtHeader) {
      throw DataError("row 1: unexpected header, want '" + std::string(kGtHeader) + "'");
    }
  }

  std::vector<GroundTruthPage> pages;
  std::map<std::pair<std::string, int>, std::size_t> page_index;

  while (reader.next(fields)) {
    const long line = reader.line_number();
    if (fields.size() != 11) {
      throw DataError("row " + std::to_string(line) + ": expected 11 fields, got " +
                      std::to_string(fields.size()));
    }
    const std::string& doc_id = fields[0];
    const int page_no = parse_int_field(fields[1], line, "page");
    const std::string& char_id = fields[2];
    if (doc_id.empty() || char_id.empty()) {
      throw DataError("row " + std::to_string(line) + ": empty doc_id or char_id");
    }
    int l = parse_int_field(fields[3], line, "left");
    int t = parse_int_field(fields[4], line, "top");
    int r = parse_int_field(fields[5], line, "right");
    int b = parse_int_field(fields[6], line, "bottom");
    if (opts.inclusive_coords) {
      ++r;
      ++b;
    }
    Rect bbox = [&] {
      try {
        return Rect(l, t, r, b);
      } catch (const std::invalid_argument& e) {
        throw DataError("row " + std::to_string(line) + ": " + e.what());
      }
    }();

    CharacterRecord rec(char_id, bbox);
    rec.label = fields[7];
    rec.is_math = parse_bool_field(fields[8], line, "is_math");
    if (!fields[9].empty()) rec.parent_id = fields[9];
    if (!parse_relationship(fields[10], rec.relationship)) {
      rec.relationship = Relationship::none;
      if (warnings) {
        warnings->push_back("row " + std::to_string(line) + ": unrecognized relationship '" +
                            fields[10] + "' mapped to none");
      }
    }
    if (rec.parent_id && *rec.parent_id == rec.char_id) {
      throw DataError("row " + std::to_string(line) + ": character '" + char_id +
                      "' is its own parent");
    }

    const auto key = std::make_pair(doc_id, page_no);
    auto it = page_index.find(key);
    if (it == page_index.end()) {
      it = page_index.emplace(key, pages.size()).first;
      GroundTruthPage page;
      page.doc_id = doc_id;
      page.page_number = page_no;
      pages.push_back(std::move(page));
    }
    pages[it->second].characters.push_back(std::move(rec));
  }

  for (auto& page : pages) {
    std::set<std::string> ids;
    for (const auto& c : page.characters) {
      if (!ids.insert(c.char_id).second) {
        throw DataError("duplicate char_id '" + c.char_id + "' on " + page.doc_id + " page " +
                        std::to_string(page.page_number));
      }
    }
    for (const auto& c : page.characters) {
      if (c.parent_id && !ids.count(*c.parent_id)) {
        throw DataError("dangling parent_id '" + *c.parent_id + "' on " + page.doc_id +
                        " page " + std::to_string(page.page_number));
      }
      page.width = std::max(page.width, c.bbox.right());
      page.height = std::max(page.height, c.bbox.bottom());
    }
    page.formulas = formulas_from_characters(page);
  }
  return pages;
}

std::vector<FormulaRegion> formulas_from_characters(const GroundTruthPage& page) {
  // Indices of math characters and a lookup from id to math index.
  std::vector<std::size_t> math_chars;
  std::map<std::string, std::size_t> math_index;  // char_id -> index into math_chars
  for (std::size_t i = 0; i < page.characters.size(); ++i) {
    if (page.characters[i].is_math) {
      math_index.emplace(page.characters[i].char_id, math_chars.size());
      math_chars.push_back(i);
    }
  }
  if (math_chars.empty()) return {};

  // Union-find over math characters; a child/parent link joins two groups
  // only when both ends are math.
  std::vector<std::size_t> parent(math_chars.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto find = [&](std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

  for (std::size_t mi = 0; mi < math_chars.size(); ++mi) {
    const auto& c = page.characters[math_chars[mi]];
    if (!c.parent_id) continue;
    auto it = math_index.find(*c.parent_id);
    if (it != math_index.end()) unite(mi, it->second);
  }

  struct Group {
    std::vector<std::string> members;
    std::optional<Rect> bbox;
  };
  std::map<std::size_t, Group> groups;
  for (std::size_t mi = 0; mi < math_chars.size(); ++mi) {
    const auto& c = page.characters[math_chars[mi]];
    Group& g = groups[find(mi)];
    g.members.push_back(c.char_id);
    g.bbox = g.bbox ? bounding_union(*g.bbox, c.bbox) : c.bbox;
  }

  std::vector<FormulaRegion> out;
  out.reserve(groups.size());
  for (auto& [root, g] : groups) {
    std::sort(g.members.begin(), g.members.end());
    out.emplace_back("", *g.bbox, std::move(g.members));
  }
  // Reading order, independent of character row order.
  std::sort(out.begin(), out.end(), [](const FormulaRegion& a, const FormulaRegion& b) {
    if (a.bbox != b.bbox) return a.bbox < b.bbox;
    return a.member_char_ids.front() < b.member_char_ids.front();
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].formula_id = "f" + std::to_string(i);
  }
  return out;
}

GroundTruthPage adjust_ground_truth(const GroundTruthPage& page, const Transform& t) {
  GroundTruthPage out;
  out.doc_id = page.doc_id;
  out.page_number = page.page_number;

  // New page bounds follow the page rect through the same transform.
  const Rect page_rect = t.apply(Rect(0, 0, std::max(page.width, 1), std::max(page.height, 1)));
  out.width = page_rect.right();
  out.height = page_rect.bottom();

  auto map_box = [&](const Rect& r, const std::string& what) {
    Rect m = [&] {
      try {
        return t.apply(r);
      } catch (const std::invalid_argument& e) {
        throw DataError("adjust_ground_truth: " + what + ": " + e.what());
      }
    }();
    if (m.right() > out.width || m.bottom() > out.height) {
      throw DataError("adjust_ground_truth: " + what + " transformed outside page bounds");
    }
    return m;
  };

  out.characters.reserve(page.characters.size());
  for (const auto& c : page.characters) {
    CharacterRecord rec(c.char_id, map_box(c.bbox, "character '" + c.char_id + "'"));
    rec.label = c.label;
    rec.is_math = c.is_math;
    rec.parent_id = c.parent_id;
    rec.relationship = c.relationship;
    out.characters.push_back(std::move(rec));
  }
  out.formulas.reserve(page.formulas.size());
  for (const auto& f : page.formulas) {
    out.formulas.emplace_back(f.formula_id, map_box(f.bbox, "formula '" + f.formula_id + "'"),
                              f.member_char_ids);
  }
  return out;
}

CollectionStats collection_stats(std::span<const GroundTruthPage> pages) {
  CollectionStats s;
  std::set<std::string> docs;
  for (const auto& page : pages) {
    docs.insert(page.doc_id);
    ++s.pages;
    for (const auto& f : page.formulas) {
      if (f.member_char_ids.size() == 1) ++s.single_symbol_formulas;
      else ++s.multi_symbol_formulas;
      ++s.total_formulas;
    }
  }
  s.docs = static_cast<long>(docs.size());
  return s;
}

namespace {

void write_formula_rows(std::ostream& out, const std::string& doc_id, int page,
                        std::span<const FormulaRegion> formulas) {
  for (const auto& f : formulas) {
    out << csv_escape(doc_id) << ',' << page << ',' << csv_escape(f.formula_id) << ','
        << f.bbox.left() << ',' << f.bbox.top() << ',' << f.bbox.right() << ','
        << f.bbox.bottom() << '\n';
  }
}

}  // namespace

void write_formula_csv(std::ostream& out, std::span<const GroundTruthPage> pages) {
  out << "doc_id,page,formula_id,left,top,right,bottom\n";
  for (const auto& p : pages) write_formula_rows(out, p.doc_id, p.page_number, p.formulas);
}

void write_formula_csv(std::ostream& out, std::span<const PageFormulas> pages) {
  out << "doc_id,page,formula_id,left,top,right,bottom\n";
  for (const auto& p : pages) write_formula_rows(out, p.doc_id, p.page, p.formulas);
}

std::vector<PageFormulas> read_formula_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) return {};
  if (fields.size() != 7) {
    throw DataError("row 1: expected formula CSV header with 7 columns");
  }

  std::vector<PageFormulas> out;
  std::map<std::pair<std::string, int>, std::size_t> index;
  while (reader.next(fields)) {
    const long line = reader.line_number();
    if (fields.size() != 7) {
      throw DataError("row " + std::to_string(line) + ": expected 7 fields, got " +
                      std::to_string(fields.size()));
    }
    const std::string& doc_id = fields[0];
    const int page = parse_int_field(fields[1], line, "page");
    Rect bbox = [&] {
      try {
        return Rect(parse_int_field(fields[3], line, "left"),
                    parse_int_field(fields[4], line, "top"),
                    parse_int_field(fields[5], line, "right"),
                    parse_int_field(fields[6], line, "bottom"));
      } catch (const std::invalid_argument& e) {
        throw DataError("row " + std::to_string(line) + ": " + e.what());
      }
    }();
    const auto key = std::make_pair(doc_id, page);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({doc_id, page, {}});
    }
    out[it->second].formulas.emplace_back(fields[2], bbox, std::vector<std::string>{fields[2]});
  }
  return out;
}

}  // namespace fdp
