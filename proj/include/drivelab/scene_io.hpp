#ifndef DRIVELAB_SCENE_IO_HPP
#define DRIVELAB_SCENE_IO_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "drivelab/scene.hpp"

namespace drivelab {

inline constexpr const char* kGeneratorVersion = "1";

/// Raised on malformed dataset files; carries the 1-based line number and the
/// dotted field path of the offending value.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::size_t line, std::string field, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Serialize one demonstration as a single canonical JSON line (no newline).
/// Numbers carry exactly 6 decimal digits so read-write round trips are
/// byte-identical.
std::string serialize_demonstration(const Demonstration& demo);

/// Parse one JSON line; `line_no` is only used for error reporting.
Demonstration parse_demonstration(const std::string& line, std::size_t line_no);

/// Writes line-delimited records; returns the record count.
std::size_t write_dataset(const std::vector<Demonstration>& demos, const std::string& path);

std::vector<Demonstration> read_dataset(const std::string& path);

struct DatasetManifest {
  std::string generator_version{kGeneratorVersion};
  std::uint64_t seed{0};
  std::map<std::string, std::int64_t> counts;  // type name -> count

  std::int64_t total() const;
};

std::string manifest_path_for(const std::string& dataset_path);
void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

/// FNV-1a 64 content hash used by experiment manifests, as a hex string.
std::string file_hash_hex(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace drivelab

#endif  // DRIVELAB_SCENE_IO_HPP
