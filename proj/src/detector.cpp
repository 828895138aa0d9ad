#include "handpose/detector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "handpose/error.hpp"

namespace handpose {

BinaryMask binarize(const SkeletonImage& img, double foreground_threshold) {
  if (!(foreground_threshold > 0.0) || !(foreground_threshold < 1.0)) {
    throw InvalidInputError("binarize: threshold must lie in (0,1)");
  }
  BinaryMask mask;
  mask.width = img.width();
  mask.height = img.height();
  mask.bits.resize(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    mask.bits[i] = img.values()[i] >= foreground_threshold ? 1 : 0;
  }
  return mask;
}

std::vector<Region> region_grow(const BinaryMask& mask) {
  std::vector<Region> regions;
  if (mask.bits.empty()) return regions;

  std::vector<std::uint8_t> visited(mask.bits.size(), 0);
  std::vector<Pixel> frontier;
  for (int sy = 0; sy < mask.height; ++sy) {
    for (int sx = 0; sx < mask.width; ++sx) {
      const std::size_t seed = static_cast<std::size_t>(sy) * mask.width + sx;
      if (!mask.bits[seed] || visited[seed]) continue;

      Region region;
      frontier.clear();
      frontier.push_back({sx, sy});
      visited[seed] = 1;
      while (!frontier.empty()) {
        const Pixel p = frontier.back();
        frontier.pop_back();
        region.push_back(p);
        constexpr int dx[4] = {1, -1, 0, 0};
        constexpr int dy[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          const int nx = p.x + dx[d];
          const int ny = p.y + dy[d];
          if (nx < 0 || nx >= mask.width || ny < 0 || ny >= mask.height) continue;
          const std::size_t idx = static_cast<std::size_t>(ny) * mask.width + nx;
          if (!mask.bits[idx] || visited[idx]) continue;
          visited[idx] = 1;
          frontier.push_back({nx, ny});
        }
      }
      std::sort(region.begin(), region.end(), [](const Pixel& a, const Pixel& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
      });
      regions.push_back(std::move(region));
    }
  }
  return regions;
}

BoundingBox bbox_of_region(const Region& region) {
  if (region.empty()) throw InvalidInputError("bbox_of_region: empty region");
  BoundingBox box{region.front().x, region.front().y, region.front().x, region.front().y};
  for (const Pixel& p : region) {
    box.x_min = std::min(box.x_min, p.x);
    box.x_max = std::max(box.x_max, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

DetectionDecision decide_hand_presence(const SkeletonImage& img, const DetectorThresholds& th) {
  if (th.presence_count < 1) throw InvalidInputError("decide_hand_presence: presence_count < 1");
  const BinaryMask mask = binarize(img, th.foreground_threshold);
  const std::vector<Region> regions = region_grow(mask);

  DetectionDecision decision;
  for (const Region& r : regions) decision.foreground_pixels += static_cast<std::int64_t>(r.size());
  decision.hand_present = decision.foreground_pixels >= th.presence_count;
  if (decision.hand_present) {
    const Region* largest = &regions.front();
    for (const Region& r : regions) {
      if (r.size() > largest->size()) largest = &r;  // ties keep the earlier seed
    }
    decision.bbox = bbox_of_region(*largest);
  }
  return decision;
}

CropResult crop_and_resize(const std::vector<Grid>& channels, const BoundingBox& box, int out_size,
                           double margin) {
  if (channels.empty()) throw InvalidInputError("crop_and_resize: no channels");
  if (out_size < 1) throw InvalidInputError("crop_and_resize: output size must be >= 1");
  if (margin < 0.0) throw InvalidInputError("crop_and_resize: margin must be >= 0");
  if (!box.valid()) throw InvalidInputError("crop_and_resize: invalid box");

  const Grid& first = channels.front();
  for (const Grid& c : channels) {
    if (!c.same_shape(first)) throw ShapeError("crop_and_resize: channel shapes differ");
  }

  const int grow = static_cast<int>(std::llround(margin * std::max(box.width(), box.height())));
  BoundingBox window{box.x_min - grow, box.y_min - grow, box.x_max + grow, box.y_max + grow};
  if (window.x_max < 0 || window.y_max < 0 || window.x_min > first.width() - 1 ||
      window.y_min > first.height() - 1) {
    throw InvalidInputError("crop_and_resize: box does not intersect the image");
  }
  window.x_min = std::max(window.x_min, 0);
  window.y_min = std::max(window.y_min, 0);
  window.x_max = std::min(window.x_max, first.width() - 1);
  window.y_max = std::min(window.y_max, first.height() - 1);

  // Pixel centers sit on integers, so the window spans
  // [x_min - 0.5, x_max + 0.5) and maps onto [-0.5, out - 0.5).
  CropResult result;
  result.expanded_box = window;
  result.transform.scale_x = static_cast<double>(out_size) / window.width();
  result.transform.scale_y = static_cast<double>(out_size) / window.height();
  result.transform.offset_x = window.x_min - 0.5 + 0.5 / result.transform.scale_x;
  result.transform.offset_y = window.y_min - 0.5 + 0.5 / result.transform.scale_y;

  result.channels.reserve(channels.size());
  for (const Grid& src : channels) {
    Grid out(out_size, out_size);
    for (int i = 0; i < out_size; ++i) {
      const Keypoint row_probe = result.transform.invert({0.0, static_cast<double>(i)});
      const double sy = std::clamp(row_probe.y, static_cast<double>(window.y_min),
                                   static_cast<double>(window.y_max));
      const int y0 = static_cast<int>(sy);
      const int y1 = std::min(y0 + 1, window.y_max);
      const double fy = sy - y0;
      for (int j = 0; j < out_size; ++j) {
        const Keypoint probe = result.transform.invert({static_cast<double>(j), 0.0});
        const double sx = std::clamp(probe.x, static_cast<double>(window.x_min),
                                     static_cast<double>(window.x_max));
        const int x0 = static_cast<int>(sx);
        const int x1 = std::min(x0 + 1, window.x_max);
        const double fx = sx - x0;
        const double top = src.at(x0, y0) * (1.0 - fx) + src.at(x1, y0) * fx;
        const double bottom = src.at(x0, y1) * (1.0 - fx) + src.at(x1, y1) * fx;
        out.at(j, i) = top * (1.0 - fy) + bottom * fy;
      }
    }
    result.channels.push_back(std::move(out));
  }
  return result;
}

}  // namespace handpose
