#pragma once

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "shafttrack/detection.hpp"

namespace shafttrack {

struct GroundTruth {
  Vec3 b = Vec3::Zero();
  Vec3 w = Vec3::Zero();
  Vec2 tip_px = Vec2::Zero();
};

/// One JSON Lines record:
/// {"t", "q", "segments", "heatmap", "gt": {"b","w","tip_px"} | null, "image_size": [w, h]}
/// `image_size` is optional on input; readers fall back to a caller-supplied size.
struct FrameRecord {
  long t = 0;
  std::vector<double> q;
  DetectionFrame frame;
  std::optional<GroundTruth> gt;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Streaming reader. Blank lines are skipped; line numbers in errors are 1-based.
class FrameReader {
 public:
  /// Throws IoError if the file cannot be opened.
  explicit FrameReader(const std::string& path, std::optional<ImageSize> default_size = std::nullopt);

  /// Next record in file order, or nullopt at end of file.
  /// Throws ParseError (with line) or SchemaError naming the missing field.
  std::optional<FrameRecord> next();

 private:
  std::ifstream in_;
  std::optional<ImageSize> default_size_;
  long line_no_ = 0;
};

FrameRecord parse_frame_record(const std::string& line, long line_no, std::optional<ImageSize> default_size);

std::vector<FrameRecord> load_frames(const std::string& path, std::optional<ImageSize> default_size = std::nullopt);

/// Serializes one record as a single JSON line (no trailing newline).
std::string frame_record_to_json(const FrameRecord& rec);

void write_frames(std::ostream& out, const std::vector<FrameRecord>& records);

}  // namespace shafttrack
