#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sigbench/event_model.hpp"
#include "sigbench/generator.hpp"

namespace sigbench {

// Dataset files are UTF-8 JSON lines with LF endings: one header object,
// then one object per event in index order:
//
//   {"format":"sigbench-dataset","version":1,"event_count":N,
//    "object_universe_size":U,"labelled":true,"params":{...}|null,
//    "object_universe":[...]}
//   {"index":0,"timestamp_ms":...,"type_id":...,"objects":[...],"label":-1}
//
// Object lists are sorted, so identical inputs always give identical bytes.
// "label" is omitted on every line when the file is unlabelled.
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr const char* kDatasetFormatName = "sigbench-dataset";

struct DatasetFileHeader {
  int format_version = kDatasetFormatVersion;
  std::optional<GenerationParams> params;
  std::size_t object_universe_size = 0;
  std::size_t event_count = 0;
  bool labelled = false;
};

struct DatasetFile {
  DatasetFileHeader header;
  Dataset dataset;
  std::optional<GroundTruth> truth;
};

struct WriteOptions {
  std::optional<GenerationParams> params;
  // Publish without labels even when a ground truth is supplied.
  bool strip_labels = false;
};

// Throws InvalidInput when truth does not cover every event.
void write_dataset(std::ostream& out, const Dataset& dataset, const GroundTruth* truth,
                   const WriteOptions& options = {});

// Writes through a temporary sibling file and renames it into place; on any
// failure the partial file is removed and IoError is thrown.
void write_dataset_file(const std::filesystem::path& path, const Dataset& dataset,
                        const GroundTruth* truth, const WriteOptions& options = {});

// Throws ParseError (with line number) on malformed content and
// UnsupportedVersion when the header names another format version.
DatasetFile read_dataset(std::istream& in);
DatasetFile read_dataset_file(const std::filesystem::path& path);

// Predicted labels: one integer per line, in event index order.
void write_labels(std::ostream& out, const std::vector<Label>& labels);
void write_labels_file(const std::filesystem::path& path, const std::vector<Label>& labels);
std::vector<Label> read_labels(std::istream& in);
std::vector<Label> read_labels_file(const std::filesystem::path& path);

// Field names that turn an external JSON-lines record into an Event.
struct ImportMapping {
  std::string timestamp_field;
  std::optional<std::string> type_field;
  std::vector<std::string> object_fields;
};

// Parses {"timestamp": "...", "type": "...", "objects": ["...", ...]}.
ImportMapping parse_import_mapping(const std::string& json_text);
ImportMapping load_import_mapping(const std::filesystem::path& path);

struct ImportResult {
  Dataset dataset;
  std::size_t records_read = 0;
  std::size_t records_skipped = 0;
  std::vector<std::string> warnings;  // one per skipped record
};

// Each JSON-lines record becomes an event whose objects are the stringified
// values of the mapped object fields. Records missing a mapped field, or
// whose object fields are all empty, are skipped with a warning.
// Timestamps may be integer milliseconds or ISO-8601 UTC strings.
// Throws ParseError when no record could be imported.
ImportResult import_external(std::istream& in, const ImportMapping& mapping);

// Milliseconds since the epoch for "YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM]".
std::optional<std::int64_t> parse_iso8601_ms(const std::string& text);

}  // namespace sigbench
