#include "shafttrack/dataset.hpp"

#include <json.hpp>

namespace shafttrack {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* field, long line_no) {
  if (!j.is_object() || !j.contains(field)) {
    throw Error(ErrorCode::SchemaError, std::string("missing field '") + field + "'", line_no);
  }
  return j.at(field);
}

Vec2 read_vec2(const json& j, const char* field, long line_no) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::SchemaError, std::string("field '") + field + "' must be a 2-vector", line_no);
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 read_vec3(const json& j, const char* field, long line_no) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::SchemaError, std::string("field '") + field + "' must be a 3-vector", line_no);
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

FrameRecord parse_frame_record(const std::string& line, long line_no, std::optional<ImageSize> default_size) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what(), line_no);
  }
  try {
    FrameRecord rec;
    rec.t = require(j, "t", line_no).get<long>();
    for (const auto& v : require(j, "q", line_no)) rec.q.push_back(v.get<double>());
    for (const auto& s : require(j, "segments", line_no)) {
      if (!s.is_array() || s.size() != 2) {
        throw Error(ErrorCode::SchemaError, "field 'segments' entries must be endpoint pairs", line_no);
      }
      rec.frame.segments.push_back({read_vec2(s[0], "segments", line_no), read_vec2(s[1], "segments", line_no)});
    }
    for (const auto& h : require(j, "heatmap", line_no)) {
      if (!h.is_array() || h.size() != 3) {
        throw Error(ErrorCode::SchemaError, "field 'heatmap' entries must be [u, v, intensity]", line_no);
      }
      rec.frame.heatmap.push_back(h[0].get<double>(), h[1].get<double>(), h[2].get<double>());
    }
    // `gt` may be absent or null on replayed detector output.
    if (j.contains("gt") && !j.at("gt").is_null()) {
      const json& gt = j.at("gt");
      GroundTruth g;
      g.b = read_vec3(require(gt, "b", line_no), "gt.b", line_no);
      g.w = read_vec3(require(gt, "w", line_no), "gt.w", line_no);
      g.tip_px = read_vec2(require(gt, "tip_px", line_no), "gt.tip_px", line_no);
      rec.gt = g;
    }
    if (j.contains("image_size")) {
      const Vec2 sz = read_vec2(j.at("image_size"), "image_size", line_no);
      rec.frame.width = static_cast<int>(sz.x());
      rec.frame.height = static_cast<int>(sz.y());
    } else if (default_size) {
      rec.frame.width = default_size->width;
      rec.frame.height = default_size->height;
    } else {
      throw Error(ErrorCode::SchemaError, "missing field 'image_size'", line_no);
    }
    try {
      rec.frame.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
    return rec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + e.what(), line_no);
  }
}

FrameReader::FrameReader(const std::string& path, std::optional<ImageSize> default_size)
    : in_(path), default_size_(default_size) {
  if (!in_) throw Error(ErrorCode::IoError, "cannot open dataset '" + path + "'");
}

std::optional<FrameRecord> FrameReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    return parse_frame_record(line, line_no_, default_size_);
  }
  return std::nullopt;
}

std::vector<FrameRecord> load_frames(const std::string& path, std::optional<ImageSize> default_size) {
  FrameReader reader(path, default_size);
  std::vector<FrameRecord> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  return out;
}

std::string frame_record_to_json(const FrameRecord& rec) {
  nlohmann::ordered_json j;
  j["t"] = rec.t;
  j["q"] = rec.q;
  auto segments = nlohmann::ordered_json::array();
  for (const auto& s : rec.frame.segments) {
    segments.push_back({{s.a.x(), s.a.y()}, {s.b.x(), s.b.y()}});
  }
  j["segments"] = segments;
  auto heat = nlohmann::ordered_json::array();
  const Heatmap& h = rec.frame.heatmap;
  for (std::size_t i = 0; i < h.size(); ++i) heat.push_back({h.x[i], h.y[i], h.intensity[i]});
  j["heatmap"] = heat;
  if (rec.gt) {
    j["gt"] = {{"b", {rec.gt->b.x(), rec.gt->b.y(), rec.gt->b.z()}},
               {"w", {rec.gt->w.x(), rec.gt->w.y(), rec.gt->w.z()}},
               {"tip_px", {rec.gt->tip_px.x(), rec.gt->tip_px.y()}}};
  } else {
    j["gt"] = nullptr;
  }
  j["image_size"] = {rec.frame.width, rec.frame.height};
  return j.dump();
}

void write_frames(std::ostream& out, const std::vector<FrameRecord>& records) {
  for (const auto& r : records) out << frame_record_to_json(r) << '\n';
}

}  // namespace shafttrack
