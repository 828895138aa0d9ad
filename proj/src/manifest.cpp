#include "handpose/manifest.hpp"

#include <fstream>
#include <sstream>

#include "handpose/error.hpp"
#include "handpose/textfmt.hpp"

namespace handpose {

bool operator==(const AnnotationRecord& a, const AnnotationRecord& b) {
  auto joints_equal = [](const JointSet& x, const JointSet& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].x != y[i].x || x[i].y != y[i].y) return false;
    }
    return true;
  };
  return a.image_path == b.image_path && a.width == b.width && a.height == b.height &&
         a.split == b.split && a.hand_present == b.hand_present &&
         joints_equal(a.joints2d, b.joints2d) && a.joints3d == b.joints3d && a.bbox == b.bbox;
}

bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
  return a.joint_count == b.joint_count && a.topology == b.topology && a.records == b.records;
}

namespace {

constexpr char kMagic[] = "HANDPOSE-MANIFEST v1";

bool valid_split(const std::string& split) {
  return split == "train" || split == "val" || split == "test";
}

std::vector<double> parse_number_list(const std::string& text, std::size_t line_no) {
  std::vector<double> numbers;
  std::istringstream ss(text);
  std::string token;
  while (ss >> token) {
    double value = 0.0;
    if (!parse_double(token, value)) {
      throw ParseError("expected a number, got '" + token + "'", line_no);
    }
    numbers.push_back(value);
  }
  return numbers;
}

// First whitespace-delimited word and the remainder of the line.
std::pair<std::string, std::string> split_key(const std::string& line) {
  const std::size_t space = line.find_first_of(" \t");
  if (space == std::string::npos) return {line, ""};
  const std::size_t rest = line.find_first_not_of(" \t", space);
  return {line.substr(0, space), rest == std::string::npos ? "" : line.substr(rest)};
}

std::string trim(const std::string& s) {
  const std::size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const std::size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void validate_record(const AnnotationRecord& record, int joint_count, std::size_t line_no) {
  if (record.image_path.empty()) throw ParseError("record missing image path", line_no);
  if (record.width < 1 || record.height < 1) {
    throw ParseError("record missing or invalid resolution", line_no);
  }
  if (!valid_split(record.split)) throw ParseError("record missing split tag", line_no);
  if (!record.joints2d.empty() && static_cast<int>(record.joints2d.size()) != joint_count) {
    throw ParseError("joints2d length does not match joint_count", line_no);
  }
  if (!record.joints3d.empty() && static_cast<int>(record.joints3d.size()) != joint_count) {
    throw ParseError("joints3d length does not match joint_count", line_no);
  }
  if (record.bbox) {
    const BoundingBox& box = *record.bbox;
    if (!box.valid() || box.x_min < 0 || box.y_min < 0 || box.x_max >= record.width ||
        box.y_max >= record.height) {
      throw ParseError("bbox outside the stated resolution", line_no);
    }
  }
}

}  // namespace

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest: " + path);

  DatasetManifest manifest;
  manifest.joint_count = 0;
  manifest.topology.clear();

  std::string raw;
  std::size_t line_no = 0;
  if (!std::getline(in, raw) || trim(raw) != kMagic) {
    throw ParseError("missing manifest magic '" + std::string(kMagic) + "'", 1);
  }
  ++line_no;

  bool in_record = false;
  AnnotationRecord record;
  bool seen[8] = {};  // image, resolution, split, hand_present, joints2d, joints3d, bbox

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto [key, rest] = split_key(line);

    if (!in_record) {
      if (key == "joint_count") {
        const std::vector<double> v = parse_number_list(rest, line_no);
        if (v.size() != 1 || v[0] != static_cast<int>(v[0]) ||
            (static_cast<int>(v[0]) != 20 && static_cast<int>(v[0]) != 21)) {
          throw ParseError("joint_count must be 20 or 21", line_no);
        }
        manifest.joint_count = static_cast<int>(v[0]);
      } else if (key == "topology") {
        if (rest.empty()) throw ParseError("topology id missing", line_no);
        manifest.topology = rest;
      } else if (key == "record") {
        if (manifest.joint_count == 0) {
          throw ParseError("joint_count must precede the first record", line_no);
        }
        in_record = true;
        record = {};
        for (bool& s : seen) s = false;
      } else {
        throw ParseError("unexpected key '" + key + "'", line_no);
      }
      continue;
    }

    auto mark = [&](int idx) {
      if (seen[idx]) throw ParseError("duplicate field '" + key + "' in record", line_no);
      seen[idx] = true;
    };

    if (key == "image") {
      mark(0);
      if (rest.empty()) throw ParseError("image path missing", line_no);
      record.image_path = rest;
    } else if (key == "resolution") {
      mark(1);
      const std::vector<double> v = parse_number_list(rest, line_no);
      if (v.size() != 2 || v[0] < 1 || v[1] < 1 || v[0] != static_cast<int>(v[0]) ||
          v[1] != static_cast<int>(v[1])) {
        throw ParseError("resolution needs two positive integers", line_no);
      }
      record.width = static_cast<int>(v[0]);
      record.height = static_cast<int>(v[1]);
    } else if (key == "split") {
      mark(2);
      if (!valid_split(rest)) throw ParseError("split must be train, val or test", line_no);
      record.split = rest;
    } else if (key == "hand_present") {
      mark(3);
      if (rest != "0" && rest != "1") throw ParseError("hand_present must be 0 or 1", line_no);
      record.hand_present = rest == "1";
    } else if (key == "joints2d") {
      mark(4);
      const std::vector<double> v = parse_number_list(rest, line_no);
      if (v.empty() || v.size() % 2 != 0) {
        throw ParseError("joints2d needs an even, non-zero number count", line_no);
      }
      for (std::size_t i = 0; i < v.size(); i += 2) record.joints2d.push_back({v[i], v[i + 1]});
    } else if (key == "joints3d") {
      mark(5);
      const std::vector<double> v = parse_number_list(rest, line_no);
      if (v.empty() || v.size() % 3 != 0) {
        throw ParseError("joints3d needs a multiple of three numbers", line_no);
      }
      for (std::size_t i = 0; i < v.size(); i += 3) {
        record.joints3d.push_back({v[i], v[i + 1], v[i + 2]});
      }
    } else if (key == "bbox") {
      mark(6);
      const std::vector<double> v = parse_number_list(rest, line_no);
      if (v.size() != 4) throw ParseError("bbox needs 4 integers", line_no);
      for (double x : v) {
        if (x != static_cast<int>(x)) throw ParseError("bbox coordinates must be integers", line_no);
      }
      record.bbox = BoundingBox{static_cast<int>(v[0]), static_cast<int>(v[1]),
                                static_cast<int>(v[2]), static_cast<int>(v[3])};
    } else if (key == "end") {
      validate_record(record, manifest.joint_count, line_no);
      manifest.records.push_back(std::move(record));
      in_record = false;
    } else {
      throw ParseError("unexpected record field '" + key + "'", line_no);
    }
  }

  if (in_record) throw ParseError("unterminated record (missing 'end')", line_no);
  if (manifest.joint_count == 0) throw ParseError("manifest missing joint_count", line_no);
  if (manifest.topology.empty()) {
    manifest.topology = "hand" + std::to_string(manifest.joint_count);
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open manifest for writing: " + path);
  out << kMagic << '\n';
  out << "joint_count " << manifest.joint_count << '\n';
  out << "topology " << manifest.topology << '\n';
  for (const AnnotationRecord& record : manifest.records) {
    out << "record\n";
    out << "image " << record.image_path << '\n';
    out << "resolution " << record.width << ' ' << record.height << '\n';
    out << "split " << record.split << '\n';
    out << "hand_present " << (record.hand_present ? 1 : 0) << '\n';
    if (!record.joints2d.empty()) {
      out << "joints2d";
      for (const Keypoint& j : record.joints2d) {
        out << ' ' << format_double(j.x) << ' ' << format_double(j.y);
      }
      out << '\n';
    }
    if (!record.joints3d.empty()) {
      out << "joints3d";
      for (const std::array<double, 3>& j : record.joints3d) {
        out << ' ' << format_double(j[0]) << ' ' << format_double(j[1]) << ' '
            << format_double(j[2]);
      }
      out << '\n';
    }
    if (record.bbox) {
      out << "bbox " << record.bbox->x_min << ' ' << record.bbox->y_min << ' '
          << record.bbox->x_max << ' ' << record.bbox->y_max << '\n';
    }
    out << "end\n";
  }
  if (!out) throw FormatError("manifest write failed: " + path);
}

}  // namespace handpose
