#include "handpose/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "handpose/error.hpp"

namespace handpose {

namespace {

bool is_pbm_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// Header token scanner: skips whitespace and #-comments, never reads past
// the end.
class HeaderScanner {
 public:
  HeaderScanner(const std::string& data, std::size_t pos) : data_(data), pos_(pos) {}

  // Non-negative decimal integer token.
  long next_int(const char* what) {
    skip_separators(what);
    if (pos_ >= data_.size() || data_[pos_] < '0' || data_[pos_] > '9') {
      throw FormatError(std::string("image header: expected ") + what);
    }
    long value = 0;
    while (pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '9') {
      value = value * 10 + (data_[pos_] - '0');
      if (value > 1 << 30) throw FormatError(std::string("image header: oversized ") + what);
      ++pos_;
    }
    return value;
  }

  // The raster starts after exactly one whitespace byte.
  std::size_t raster_offset() const {
    if (pos_ >= data_.size() || !is_pbm_space(data_[pos_])) {
      throw FormatError("image header: missing separator before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_separators(const char* what) {
    bool any = false;
    while (pos_ < data_.size()) {
      if (is_pbm_space(data_[pos_])) {
        ++pos_;
        any = true;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
        any = true;
      } else {
        break;
      }
    }
    if (!any) throw FormatError(std::string("image header: expected whitespace before ") + what);
  }

  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageBuffer read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string data = buffer.str();

  if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '6')) {
    throw FormatError("image: bad magic (want P5 or P6): " + path);
  }
  const int channels = data[1] == '5' ? 1 : 3;

  HeaderScanner scanner(data, 2);
  const long width = scanner.next_int("width");
  const long height = scanner.next_int("height");
  const long maxval = scanner.next_int("maxval");
  if (width < 1 || height < 1) throw FormatError("image: dimensions must be >= 1: " + path);
  if (maxval != 255) throw FormatError("image: only maxval 255 supported: " + path);

  const std::size_t offset = scanner.raster_offset();
  const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
  if (data.size() < offset + expected) throw FormatError("image: truncated raster: " + path);
  if (data.size() > offset + expected) throw FormatError("image: trailing bytes: " + path);

  ImageBuffer image;
  image.width = static_cast<int>(width);
  image.height = static_cast<int>(height);
  image.channels = channels;
  image.samples.assign(data.begin() + static_cast<std::ptrdiff_t>(offset), data.end());
  return image;
}

void write_image(const ImageBuffer& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3) {
    throw InvalidInputError("write_image: channels must be 1 or 3");
  }
  if (image.width < 1 || image.height < 1) {
    throw InvalidInputError("write_image: dimensions must be >= 1");
  }
  const std::size_t expected =
      static_cast<std::size_t>(image.width) * image.height * image.channels;
  if (image.samples.size() != expected) {
    throw InvalidInputError("write_image: sample count does not match dimensions");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open image for writing: " + path);
  out << (image.channels == 1 ? "P5" : "P6") << '\n'
      << image.width << ' ' << image.height << '\n'
      << "255\n";
  out.write(reinterpret_cast<const char*>(image.samples.data()),
            static_cast<std::streamsize>(image.samples.size()));
  if (!out) throw FormatError("image write failed: " + path);
}

std::vector<Grid> to_planes(const ImageBuffer& image) {
  std::vector<Grid> planes;
  planes.reserve(static_cast<std::size_t>(image.channels));
  for (int c = 0; c < image.channels; ++c) {
    Grid plane(image.width, image.height);
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) plane.at(x, y) = image.at(x, y, c) / 255.0;
    }
    planes.push_back(std::move(plane));
  }
  return planes;
}

ImageBuffer from_planes(const std::vector<Grid>& planes) {
  if (planes.empty() || (planes.size() != 1 && planes.size() != 3)) {
    throw InvalidInputError("from_planes: need 1 or 3 planes");
  }
  for (const Grid& plane : planes) {
    if (!plane.same_shape(planes.front())) throw ShapeError("from_planes: shapes differ");
  }
  ImageBuffer image;
  image.width = planes.front().width();
  image.height = planes.front().height();
  image.channels = static_cast<int>(planes.size());
  image.samples.resize(static_cast<std::size_t>(image.width) * image.height * image.channels);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        const double v = std::min(1.0, std::max(0.0, planes[c].at(x, y)));
        image.at(x, y, c) = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return image;
}

}  // namespace handpose
