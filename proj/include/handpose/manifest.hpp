#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "handpose/grid.hpp"

namespace handpose {

// One annotated sample. Joint lists are empty when the image has no hand.
struct AnnotationRecord {
  std::string image_path;
  int width = 0;
  int height = 0;
  std::string split;  // train | val | test
  bool hand_present = false;
  JointSet joints2d;
  std::vector<std::array<double, 3>> joints3d;
  std::optional<BoundingBox> bbox;
};

struct DatasetManifest {
  int joint_count = 21;
  std::string topology = "hand21";
  std::vector<AnnotationRecord> records;
};

bool operator==(const AnnotationRecord& a, const AnnotationRecord& b);
bool operator==(const DatasetManifest& a, const DatasetManifest& b);

// Versioned line-oriented text format. Loading validates joint counts and
// that boxes lie inside the stated resolution; save-then-load is
// value-exact. Parse failures carry the 1-based line number.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

}  // namespace handpose
