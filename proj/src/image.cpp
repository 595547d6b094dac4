#include "fdp/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <string>

#include "fdp/errors.hpp"

namespace fdp {

PageImage PageImage::blank(int width, int height, std::uint8_t value) {
  PageImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, value);
  return img;
}

namespace {

// Skips whitespace and '#' comments between PGM header tokens.
int next_pgm_token(std::istream& in, const std::filesystem::path& path) {
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  if (!(in >> value) || value < 0) {
    throw DataError("malformed PGM header: " + path.string());
  }
  return value;
}

}  // namespace

PageImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open page image: " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  const bool binary = magic[0] == 'P' && magic[1] == '5';
  const bool ascii = magic[0] == 'P' && magic[1] == '2';
  if (!binary && !ascii) throw DataError("not a PGM file: " + path.string());

  PageImage img;
  img.width = next_pgm_token(in, path);
  img.height = next_pgm_token(in, path);
  const int maxval = next_pgm_token(in, path);
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 255) {
    throw DataError("unsupported PGM dimensions/maxval: " + path.string());
  }
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(n);
  if (binary) {
    in.get();  // single whitespace after maxval
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
      throw DataError("truncated PGM data: " + path.string());
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      int v;
      if (!(in >> v) || v < 0 || v > maxval) throw DataError("bad PGM sample: " + path.string());
      img.pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

std::pair<int, int> read_pgm_size(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open page image: " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '2')) {
    throw DataError("not a PGM file: " + path.string());
  }
  const int w = next_pgm_token(in, path);
  const int h = next_pgm_token(in, path);
  return {w, h};
}

void write_pgm(const PageImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image: " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw DataError("failed writing image: " + path.string());
}

void fill_rect(PageImage& img, const Rect& r, std::uint8_t value) {
  const int x0 = std::max(0, r.left());
  const int x1 = std::min(img.width, r.right());
  const int y0 = std::max(0, r.top());
  const int y1 = std::min(img.height, r.bottom());
  for (int y = y0; y < y1; ++y) {
    std::fill(img.pixels.begin() + static_cast<std::size_t>(y) * img.width + x0,
              img.pixels.begin() + static_cast<std::size_t>(y) * img.width + x1, value);
  }
}

void draw_rect_outline(PageImage& img, const Rect& r, std::uint8_t value, int thickness) {
  const int t = std::min({thickness, r.width(), r.height()});
  fill_rect(img, Rect(r.left(), r.top(), r.right(), r.top() + t), value);
  fill_rect(img, Rect(r.left(), r.bottom() - t, r.right(), r.bottom()), value);
  fill_rect(img, Rect(r.left(), r.top(), r.left() + t, r.bottom()), value);
  fill_rect(img, Rect(r.right() - t, r.top(), r.right(), r.bottom()), value);
}

std::vector<LabeledComponent> connected_components(const std::vector<std::uint8_t>& mask,
                                                   int width, int height) {
  std::vector<LabeledComponent> out;
  if (width <= 0 || height <= 0) return out;
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<std::pair<int, int>> stack;

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * width + x;
      if (!mask[idx] || seen[idx]) continue;
      int min_x = x, max_x = x, min_y = y, max_y = y;
      std::int64_t count = 0;
      seen[idx] = 1;
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++count;
        min_x = std::min(min_x, cx);
        max_x = std::max(max_x, cx);
        min_y = std::min(min_y, cy);
        max_y = std::max(max_y, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * width + nx;
            if (mask[nidx] && !seen[nidx]) {
              seen[nidx] = 1;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
      out.push_back({Rect(min_x, min_y, max_x + 1, max_y + 1), count});
    }
  }
  return out;
}

}  // namespace fdp
