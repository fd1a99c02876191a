#include "forestalign/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>
#include <vector>

#include "forestalign/error.hpp"

namespace forestalign::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::kParse, path.string() + ": " + what);
}

[[noreturn]] void io_error(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::kIo, path.string() + ": " + what);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

bool ply_type_from_name(const std::string& name, PlyType& out) {
  static const std::pair<const char*, PlyType> table[] = {
      {"char", PlyType::kInt8},     {"int8", PlyType::kInt8},     {"uchar", PlyType::kUInt8},
      {"uint8", PlyType::kUInt8},   {"short", PlyType::kInt16},   {"int16", PlyType::kInt16},
      {"ushort", PlyType::kUInt16}, {"uint16", PlyType::kUInt16}, {"int", PlyType::kInt32},
      {"int32", PlyType::kInt32},   {"uint", PlyType::kUInt32},   {"uint32", PlyType::kUInt32},
      {"float", PlyType::kFloat32}, {"float32", PlyType::kFloat32},
      {"double", PlyType::kFloat64}, {"float64", PlyType::kFloat64},
  };
  for (const auto& [n, t] : table) {
    if (name == n) {
      out = t;
      return true;
    }
  }
  return false;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUInt8: return 1;
    case PlyType::kInt16:
    case PlyType::kUInt16: return 2;
    case PlyType::kInt32:
    case PlyType::kUInt32:
    case PlyType::kFloat32: return 4;
    case PlyType::kFloat64: return 8;
  }
  return 0;
}

template <typename T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

double load_value(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kInt8: return load_le<std::int8_t>(p);
    case PlyType::kUInt8: return load_le<std::uint8_t>(p);
    case PlyType::kInt16: return load_le<std::int16_t>(p);
    case PlyType::kUInt16: return load_le<std::uint16_t>(p);
    case PlyType::kInt32: return load_le<std::int32_t>(p);
    case PlyType::kUInt32: return load_le<std::uint32_t>(p);
    case PlyType::kFloat32: return load_le<float>(p);
    case PlyType::kFloat64: return load_le<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat32;
  bool is_list = false;
  PlyType count_type = PlyType::kUInt8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

struct PlyHeader {
  bool binary = false;
  std::vector<PlyElement> elements;
  std::size_t body_offset = 0;
  std::size_t header_lines = 0;
};

PlyHeader parse_ply_header(const fs::path& path, const std::string& data) {
  PlyHeader h;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_format = false;
  auto next_line = [&](std::string& line) {
    if (pos >= data.size()) return false;
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    line.assign(data, pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& what) {
    parse_error(path, "header line " + std::to_string(line_no) + ": " + what);
  };

  std::string line;
  if (!next_line(line) || line != "ply") fail("missing 'ply' magic");
  while (true) {
    if (!next_line(line)) fail("unexpected end of file before end_header");
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string key(tok[0]);
    if (key == "end_header") break;
    if (key == "comment" || key == "obj_info") continue;
    if (key == "format") {
      if (tok.size() < 3) fail("malformed format line");
      if (tok[1] == "ascii") {
        h.binary = false;
      } else if (tok[1] == "binary_little_endian") {
        h.binary = true;
      } else {
        fail("unsupported format '" + std::string(tok[1]) + "'");
      }
      saw_format = true;
    } else if (key == "element") {
      if (tok.size() != 3) fail("malformed element line");
      PlyElement e;
      e.name = std::string(tok[1]);
      unsigned long long count = 0;
      const auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), count);
      if (ec != std::errc() || p != tok[2].data() + tok[2].size()) fail("bad element count");
      e.count = static_cast<std::size_t>(count);
      h.elements.push_back(std::move(e));
    } else if (key == "property") {
      if (h.elements.empty()) fail("property before any element");
      PlyProperty prop;
      if (tok.size() == 5 && tok[1] == "list") {
        prop.is_list = true;
        if (!ply_type_from_name(std::string(tok[2]), prop.count_type) ||
            !ply_type_from_name(std::string(tok[3]), prop.type)) {
          fail("unknown list property type");
        }
        prop.name = std::string(tok[4]);
      } else if (tok.size() == 3) {
        if (!ply_type_from_name(std::string(tok[1]), prop.type)) {
          fail("unknown property type '" + std::string(tok[1]) + "'");
        }
        prop.name = lower(std::string(tok[2]));
      } else {
        fail("malformed property line");
      }
      h.elements.back().props.push_back(std::move(prop));
    } else {
      fail("unknown header keyword '" + key + "'");
    }
  }
  if (!saw_format) parse_error(path, "header has no format line");
  h.body_offset = pos;
  h.header_lines = line_no;
  return h;
}

struct VertexLayout {
  int x = -1, y = -1, z = -1, label = -1;
};

VertexLayout vertex_layout(const fs::path& path, const PlyElement& e) {
  VertexLayout v;
  for (std::size_t i = 0; i < e.props.size(); ++i) {
    const auto& p = e.props[i];
    if (p.is_list) continue;
    const int idx = static_cast<int>(i);
    if (p.name == "x") v.x = idx;
    if (p.name == "y") v.y = idx;
    if (p.name == "z") v.z = idx;
    if (p.name == "label") v.label = idx;
  }
  if (v.x < 0 || v.y < 0 || v.z < 0) parse_error(path, "vertex element lacks x/y/z");
  return v;
}

PointCloud read_ply_binary(const fs::path& path, const std::string& data, const PlyHeader& h) {
  std::size_t pos = h.body_offset;
  std::vector<Vec3> pts;
  std::vector<Label> labels;
  auto need = [&](std::size_t n) {
    if (pos + n > data.size()) {
      parse_error(path, "truncated binary payload at byte offset " + std::to_string(pos));
    }
  };
  bool done = false;
  for (const auto& e : h.elements) {
    if (done) break;
    const bool is_vertex = e.name == "vertex";
    VertexLayout layout;
    if (is_vertex) {
      layout = vertex_layout(path, e);
      pts.reserve(e.count);
      if (layout.label >= 0) labels.reserve(e.count);
    }
    std::vector<double> values(e.props.size(), 0.0);
    for (std::size_t r = 0; r < e.count; ++r) {
      const std::size_t row_start = pos;
      for (std::size_t k = 0; k < e.props.size(); ++k) {
        const auto& p = e.props[k];
        if (p.is_list) {
          need(ply_size(p.count_type));
          const double n = load_value(p.count_type, data.data() + pos);
          pos += ply_size(p.count_type);
          if (n < 0) parse_error(path, "negative list length at byte offset " + std::to_string(pos));
          const std::size_t bytes = static_cast<std::size_t>(n) * ply_size(p.type);
          need(bytes);
          pos += bytes;
        } else {
          need(ply_size(p.type));
          values[k] = load_value(p.type, data.data() + pos);
          pos += ply_size(p.type);
        }
      }
      if (is_vertex) {
        const Vec3 q(values[layout.x], values[layout.y], values[layout.z]);
        if (!q.allFinite()) {
          parse_error(path, "non-finite coordinate in vertex " + std::to_string(r) +
                                " at byte offset " + std::to_string(row_start));
        }
        pts.push_back(q);
        if (layout.label >= 0) labels.push_back(static_cast<Label>(values[layout.label]));
      }
    }
    if (is_vertex) done = true;
  }
  return PointCloud(std::move(pts), std::move(labels));
}

PointCloud read_ply_ascii(const fs::path& path, const std::string& data, const PlyHeader& h) {
  std::size_t pos = h.body_offset;
  std::size_t line_no = h.header_lines;
  std::vector<Vec3> pts;
  std::vector<Label> labels;
  std::string line;
  auto next_line = [&]() {
    while (pos < data.size()) {
      std::size_t end = data.find('\n', pos);
      if (end == std::string::npos) end = data.size();
      line.assign(data, pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!split_ws(line).empty()) return true;
    }
    return false;
  };
  for (const auto& e : h.elements) {
    const bool is_vertex = e.name == "vertex";
    VertexLayout layout;
    if (is_vertex) layout = vertex_layout(path, e);
    std::vector<double> values(e.props.size(), 0.0);
    for (std::size_t r = 0; r < e.count; ++r) {
      if (!next_line()) {
        parse_error(path, "truncated payload: expected " + std::to_string(e.count) + " '" +
                              e.name + "' rows, file ends at line " + std::to_string(line_no));
      }
      const auto tok = split_ws(line);
      std::size_t t = 0;
      for (std::size_t k = 0; k < e.props.size(); ++k) {
        const auto& p = e.props[k];
        if (t >= tok.size()) parse_error(path, "line " + std::to_string(line_no) + ": too few values");
        double v = 0.0;
        if (!parse_double(tok[t], v)) {
          parse_error(path, "line " + std::to_string(line_no) + ": bad number '" +
                                std::string(tok[t]) + "'");
        }
        ++t;
        if (p.is_list) {
          if (v < 0) parse_error(path, "line " + std::to_string(line_no) + ": negative list length");
          t += static_cast<std::size_t>(v);
        } else {
          values[k] = v;
        }
      }
      if (is_vertex) {
        const Vec3 q(values[layout.x], values[layout.y], values[layout.z]);
        if (!q.allFinite()) {
          parse_error(path, "line " + std::to_string(line_no) + ": non-finite coordinate");
        }
        pts.push_back(q);
        if (layout.label >= 0) labels.push_back(static_cast<Label>(values[layout.label]));
      }
    }
    if (is_vertex) break;
  }
  return PointCloud(std::move(pts), std::move(labels));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json euler_json(const EulerPose& e) {
  return json{{"roll", e.roll}, {"pitch", e.pitch}, {"yaw", e.yaw},
              {"tx", e.tx},     {"ty", e.ty},       {"tz", e.tz}};
}

json params_json(const ParamVector& p) {
  return json{{"roll", p[0]}, {"pitch", p[1]}, {"yaw", p[2]},
              {"tx", p[3]},   {"ty", p[4]},    {"tz", p[5]}};
}

}  // namespace

CloudFormat format_from_path(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".ply") return CloudFormat::kPly;
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::kXyz;
  io_error(path, "unrecognized point cloud extension '" + ext + "' (expected .ply or .xyz)");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) io_error(path, "read failed");
  return ss.str();
}

void write_text_atomic(const fs::path& path, std::string_view contents) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_error(tmp, "cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) io_error(tmp, "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    io_error(path, "cannot move temporary file into place");
  }
}

PointCloud read_ply(const fs::path& path) {
  const std::string data = read_text(path);
  const PlyHeader header = parse_ply_header(path, data);
  if (std::none_of(header.elements.begin(), header.elements.end(),
                   [](const PlyElement& e) { return e.name == "vertex"; })) {
    parse_error(path, "no vertex element");
  }
  return header.binary ? read_ply_binary(path, data, header) : read_ply_ascii(path, data, header);
}

PointCloud read_xyz(const fs::path& path) {
  const std::string data = read_text(path);
  std::vector<Vec3> pts;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < data.size()) {
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    std::string_view line(data.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() < 3) {
      parse_error(path, "line " + std::to_string(line_no) + ": expected 'x y z'");
    }
    Vec3 p;
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(tok[k], p[k])) {
        parse_error(path, "line " + std::to_string(line_no) + ": bad number '" +
                              std::string(tok[k]) + "'");
      }
    }
    if (!p.allFinite()) parse_error(path, "line " + std::to_string(line_no) + ": non-finite coordinate");
    pts.push_back(p);
  }
  return PointCloud(std::move(pts));
}

PointCloud read_cloud(const fs::path& path, CloudFormat format) {
  return format == CloudFormat::kPly ? read_ply(path) : read_xyz(path);
}

PointCloud read_cloud(const fs::path& path) { return read_cloud(path, format_from_path(path)); }

void write_ply(const PointCloud& cloud, const fs::path& path, PlyEncoding encoding) {
  const bool binary = encoding == PlyEncoding::kBinaryLittleEndian;
  std::string out;
  out += "ply\n";
  out += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  out += "comment forestalign " FORESTALIGN_VERSION "\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_labels()) out += "property int label\n";
  out += "end_header\n";

  const auto pts = cloud.points();
  const auto labels = cloud.labels();
  if (binary) {
    const std::size_t stride = 24 + (cloud.has_labels() ? 4 : 0);
    const std::size_t header = out.size();
    out.resize(header + stride * pts.size());
    char* dst = out.data() + header;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        double v = pts[i][k];
        if constexpr (std::endian::native == std::endian::big) {
          auto* b = reinterpret_cast<unsigned char*>(&v);
          std::reverse(b, b + 8);
        }
        std::memcpy(dst, &v, 8);
        dst += 8;
      }
      if (cloud.has_labels()) {
        std::int32_t l = labels[i];
        if constexpr (std::endian::native == std::endian::big) {
          auto* b = reinterpret_cast<unsigned char*>(&l);
          std::reverse(b, b + 4);
        }
        std::memcpy(dst, &l, 4);
        dst += 4;
      }
    }
  } else {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out += format_double(pts[i].x()) + " " + format_double(pts[i].y()) + " " +
             format_double(pts[i].z());
      if (cloud.has_labels()) out += " " + std::to_string(labels[i]);
      out += "\n";
    }
  }
  write_text_atomic(path, out);
}

void write_xyz(const PointCloud& cloud, const fs::path& path) {
  std::string out;
  for (const auto& p : cloud.points()) {
    out += format_double(p.x()) + " " + format_double(p.y()) + " " + format_double(p.z()) + "\n";
  }
  write_text_atomic(path, out);
}

void write_cloud(const PointCloud& cloud, const fs::path& path, CloudFormat format) {
  if (format == CloudFormat::kPly) {
    write_ply(cloud, path);
  } else {
    write_xyz(cloud, path);
  }
}

void write_cloud(const PointCloud& cloud, const fs::path& path) {
  write_cloud(cloud, path, format_from_path(path));
}

json to_json(const RigidTransform& transform) {
  const Mat4 m = transform.matrix();
  json rows = json::array();
  for (int r = 0; r < 4; ++r) {
    rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
  }
  return json{{"matrix", rows}, {"euler", euler_json(transform.to_euler())}};
}

json to_json(const TransformRecord& record) {
  json j = to_json(record.transform);
  j["metadata"] = record.metadata;
  if (!record.run.empty()) j["run"] = record.run;
  return j;
}

TransformRecord transform_record_from_json(const json& j) {
  TransformRecord rec;
  try {
    const auto& rows = j.at("matrix");
    if (!rows.is_array() || rows.size() != 4) throw Error(ErrorCode::kParse, "matrix must be 4x4");
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
      if (!rows[r].is_array() || rows[r].size() != 4) {
        throw Error(ErrorCode::kParse, "matrix must be 4x4");
      }
      for (int c = 0; c < 4; ++c) m(r, c) = rows[r][c].get<double>();
    }
    rec.transform = RigidTransform::from_matrix(m);
    if (j.contains("metadata")) rec.metadata = j.at("metadata");
    if (j.contains("run")) rec.run = j.at("run");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("transform record: ") + e.what());
  }
  if (!rec.transform.is_valid(1e-6)) {
    throw Error(ErrorCode::kParse, "transform record matrix is not a proper rotation");
  }
  return rec;
}

void write_transform_record(const TransformRecord& record, const fs::path& path) {
  write_text_atomic(path, dump(to_json(record)));
}

TransformRecord read_transform_record(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return transform_record_from_json(j);
}

json to_json(const ForestAlignConfig& c) {
  return json{{"voxel", c.voxel},
              {"refine_voxel", c.refine_voxel},
              {"normal_radius", c.normal_radius},
              {"k_source", c.k_source},
              {"k_target", c.k_target},
              {"max_corr_dist", c.icp.max_corr_dist},
              {"level_iterations", c.icp.max_iterations},
              {"rel_tolerance", c.icp.rel_tolerance},
              {"refine_iterations", c.refine_iterations},
              {"seed", c.seed}};
}

std::string config_hash(const ForestAlignConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const RegistrationResult& r) {
  json stages = json::array();
  for (const auto& s : r.stages) {
    json st{{"source_level", s.source_level},
            {"target_level", s.target_level},
            {"source_points", s.source_points},
            {"target_points", s.target_points},
            {"inlier_rmse", s.inlier_rmse},
            {"iterations", s.iterations},
            {"converged", s.converged}};
    st["transform"] = to_json(s.transform);
    if (s.source_level < 0) st["stage"] = "refine";
    stages.push_back(std::move(st));
  }
  auto components = [](const std::vector<VmfComponent>& comps) {
    json out = json::array();
    for (const auto& c : comps) {
      out.push_back({{"mu", {c.mu.x(), c.mu.y(), c.mu.z()}}, {"kappa", c.kappa}, {"weight", c.weight}});
    }
    return out;
  };
  json j;
  j["final"] = to_json(r.final_transform);
  j["converged"] = r.converged;
  j["overlap_percent"] = r.overlap_percent;
  j["inlier_rmse"] = r.inlier_rmse;
  j["assignment"] = {{"sigma", r.assignment.sigma},
                     {"cost", r.assignment.cost},
                     {"unmatched_source", r.assignment.unmatched_source},
                     {"unmatched_target", r.assignment.unmatched_target}};
  j["source"] = {{"complexity", r.source_profile.sc},
                 {"group_sizes", r.source_profile.group_sizes},
                 {"components", components(r.source_components)}};
  j["target"] = {{"complexity", r.target_profile.sc},
                 {"group_sizes", r.target_profile.group_sizes},
                 {"components", components(r.target_components)}};
  j["stages"] = std::move(stages);
  j["run"] = {{"wall_seconds", r.wall_seconds}};
  return j;
}

std::string trials_csv(const TrialReport& report) {
  std::string out =
      "trial,failed,init_roll,init_pitch,init_yaw,init_tx,init_ty,init_tz,"
      "err_roll,err_pitch,err_yaw,err_tx,err_ty,err_tz,overlap_percent,inlier_rmse\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out += buf;
  };
  for (const auto& row : report.trials) {
    out += std::to_string(row.index) + "," + (row.failed ? "1" : "0");
    for (double v : row.initial_error) {
      out += ",";
      num(v);
    }
    for (double v : row.final_error) {
      out += ",";
      num(v);
    }
    out += ",";
    num(row.overlap_percent);
    out += ",";
    num(row.inlier_rmse);
    out += "\n";
  }
  return out;
}

json trials_summary(const TrialReport& report, const TrialSpec& spec,
                    const ForestAlignConfig& config) {
  double wall = 0.0;
  json failures = json::array();
  for (const auto& row : report.trials) {
    wall += row.wall_seconds;
    if (row.failed) failures.push_back({{"trial", row.index}, {"error", row.failure}});
  }
  json j;
  j["trials"] = report.trials.size();
  j["failed"] = report.failed;
  j["failures"] = std::move(failures);
  j["rmse"] = params_json(report.rmse);
  j["initial_rmse"] = params_json(report.initial_rmse);
  j["trial_spec"] = {{"rot_range", spec.rot_range},
                     {"trans_range", spec.trans_range},
                     {"n_trials", spec.n_trials},
                     {"seed", spec.seed}};
  j["config"] = to_json(config);
  j["run"] = {{"wall_seconds", wall}, {"timestamp", utc_timestamp()}};
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace forestalign::io
