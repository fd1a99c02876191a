#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "forestalign/evaluation.hpp"
#include "forestalign/forest_align.hpp"
#include "forestalign/geometry.hpp"

namespace forestalign::io {

enum class CloudFormat { kPly, kXyz };
enum class PlyEncoding { kAscii, kBinaryLittleEndian };

/// Format from the file extension (.ply / .xyz / .txt); throws kIo for
/// anything else.
CloudFormat format_from_path(const std::filesystem::path& path);

/// Reads x/y/z (any numeric PLY type) and an optional integer `label`
/// vertex property; other properties and elements are skipped. Parse
/// errors report the line (ASCII) or byte offset (binary) of the problem.
PointCloud read_ply(const std::filesystem::path& path);
PointCloud read_xyz(const std::filesystem::path& path);
PointCloud read_cloud(const std::filesystem::path& path);
PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format);

/// Writes float64 x/y/z (plus an int `label` property when the cloud is
/// labeled). Files are written to a temporary sibling and renamed.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path,
               PlyEncoding encoding = PlyEncoding::kBinaryLittleEndian);
void write_xyz(const PointCloud& cloud, const std::filesystem::path& path);
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path);
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);

/// Atomically replaces `path` with `contents`.
void write_text_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_text(const std::filesystem::path& path);

/// A transform plus provenance, stored as JSON:
///   {"matrix": 4x4 row-major, "euler": {roll,pitch,yaw,tx,ty,tz},
///    "metadata": {...}, "run": {...}}
/// "run" holds the timestamp and other values that legitimately differ
/// between identical invocations.
struct TransformRecord {
  RigidTransform transform;
  nlohmann::json metadata = nlohmann::json::object();
  nlohmann::json run = nlohmann::json::object();
};

nlohmann::json to_json(const RigidTransform& transform);
nlohmann::json to_json(const TransformRecord& record);
/// Reads the matrix; throws kParse when it is missing, malformed or not a
/// rotation within 1e-6.
TransformRecord transform_record_from_json(const nlohmann::json& j);
void write_transform_record(const TransformRecord& record, const std::filesystem::path& path);
TransformRecord read_transform_record(const std::filesystem::path& path);

nlohmann::json to_json(const ForestAlignConfig& config);
/// Stable FNV-1a hash (hex) of the config's canonical JSON dump.
std::string config_hash(const ForestAlignConfig& config);

nlohmann::json to_json(const RegistrationResult& result);

/// trials.csv: one row per trial, no timing columns.
std::string trials_csv(const TrialReport& report);
/// summary.json body: aggregate RMSE, failure count and configuration;
/// timing under "run".
nlohmann::json trials_summary(const TrialReport& report, const TrialSpec& spec,
                              const ForestAlignConfig& config);

/// Serialization used for every JSON file the tools write.
std::string dump(const nlohmann::json& j);

std::string utc_timestamp();

}  // namespace forestalign::io
