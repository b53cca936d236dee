#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace topv {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// 8-bit RGB raster, row 0 at the top. All drawing clips to the image.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::uint8_t>& bytes() const { return data_; }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  void blend(int x, int y, Rgb c, double alpha);

  void fill_rect(int x, int y, int w, int h, Rgb c);
  void stroke_rect(int x, int y, int w, int h, Rgb c);
  void line(int x0, int y0, int x1, int y1, Rgb c);
  void disc(int cx, int cy, int radius, Rgb c);

  // 5x7 glyphs on a 7 px advance; lowercase is drawn as uppercase.
  void text(int x, int y, std::string_view s, Rgb c);
  static constexpr int kGlyphAdvance = 7;
  static constexpr int kGlyphHeight = 7;

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// PNG byte stream (8-bit RGB, no timestamps, deterministic).
std::string encode_png(const Image& image);

}  // namespace topv
