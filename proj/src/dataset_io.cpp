#include "sigbench/dataset_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sigbench/error.hpp"

namespace sigbench {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json params_to_json(const GenerationParams& p) {
  ordered_json j;
  j["num_signatures"] = p.num_signatures;
  j["events_per_signature"] = p.events_per_signature;
  j["objects_per_event"] = p.objects_per_event;
  j["similarity_pct"] = p.similarity_pct;
  j["total_events"] = p.total_events;
  j["num_unique_objects"] = p.num_unique_objects;
  j["repetitions"] = p.repetitions;
  j["seed"] = p.seed;
  return j;
}

template <typename T>
T require_field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ParseError(line, std::string("field '") + key + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ParseError(line, std::string("field '") + key + "' must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_unsigned()) return it->template get<T>();
        if (it->template get<std::int64_t>() < 0) {
          throw ParseError(line, std::string("field '") + key + "' must be non-negative");
        }
      }
    }
    return it->template get<T>();
  } catch (const json::exception& e) {
    throw ParseError(line, std::string("field '") + key + "': " + e.what());
  }
}

GenerationParams params_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "'params' must be an object or null");
  GenerationParams p;
  p.num_signatures = require_field<std::int64_t>(j, "num_signatures", line);
  p.events_per_signature = require_field<std::int64_t>(j, "events_per_signature", line);
  p.objects_per_event = require_field<std::int64_t>(j, "objects_per_event", line);
  p.similarity_pct = require_field<std::int64_t>(j, "similarity_pct", line);
  p.total_events = require_field<std::int64_t>(j, "total_events", line);
  p.num_unique_objects = require_field<std::int64_t>(j, "num_unique_objects", line);
  p.repetitions = require_field<std::int64_t>(j, "repetitions", line);
  p.seed = require_field<std::uint64_t>(j, "seed", line);
  return p;
}

json parse_line(const std::string& text, std::size_t line) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ParseError(line, "expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<ObjectId> object_list(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) {
    throw ParseError(line, std::string("field '") + key + "' must be an array of strings");
  }
  std::vector<ObjectId> ids;
  ids.reserve(it->size());
  for (const json& v : *it) {
    if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
      throw ParseError(line, std::string("field '") + key + "' must hold non-empty strings");
    }
    ids.emplace_back(v.get<std::string>());
  }
  return ids;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

template <typename WriteFn>
void atomic_write(const std::filesystem::path& path, WriteFn&& write) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  try {
    {
      std::ofstream out = open_for_write(tmp);
      write(out);
      out.flush();
      if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
  } catch (const std::filesystem::filesystem_error& e) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError(std::string("cannot write '") + path.string() + "': " + e.what());
  } catch (...) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw;
  }
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2 ? 1 : 0;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::optional<std::string> stringify(const json& v) {
  if (v.is_null()) return std::nullopt;
  std::string out = v.is_string() ? v.get<std::string>() : v.dump();
  if (out.empty()) return std::nullopt;
  return out;
}

std::optional<std::int64_t> timestamp_value(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
    return std::nullopt;
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (auto n = parse_int(s)) return n;
    return parse_iso8601_ms(s);
  }
  return std::nullopt;
}

std::optional<std::uint32_t> type_value(const json& v) {
  std::optional<std::int64_t> n;
  if (v.is_number_integer()) n = v.get<std::int64_t>();
  if (v.is_string()) n = parse_int(v.get_ref<const std::string&>());
  if (!n || *n < 0 || *n > static_cast<std::int64_t>(UINT32_MAX)) return std::nullopt;
  return static_cast<std::uint32_t>(*n);
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& dataset, const GroundTruth* truth,
                   const WriteOptions& options) {
  if (truth != nullptr && truth->labels.size() != dataset.events.size()) {
    throw InvalidInput("ground truth has " + std::to_string(truth->labels.size()) +
                       " labels for " + std::to_string(dataset.events.size()) + " events");
  }
  const bool labelled = truth != nullptr && !options.strip_labels;

  ordered_json header;
  header["format"] = kDatasetFormatName;
  header["version"] = kDatasetFormatVersion;
  header["event_count"] = dataset.events.size();
  header["object_universe_size"] = dataset.object_universe.size();
  header["labelled"] = labelled;
  header["params"] = options.params ? params_to_json(*options.params) : ordered_json(nullptr);
  ordered_json universe = ordered_json::array();
  for (const ObjectId& id : dataset.object_universe) universe.push_back(id.str());
  header["object_universe"] = std::move(universe);
  out << header.dump() << '\n';

  for (std::size_t i = 0; i < dataset.events.size(); ++i) {
    const Event& e = dataset.events[i];
    ordered_json line;
    line["index"] = i;
    line["timestamp_ms"] = e.timestamp_ms;
    line["type_id"] = e.type_id;
    ordered_json objects = ordered_json::array();
    for (const ObjectId& id : e.objects) objects.push_back(id.str());
    line["objects"] = std::move(objects);
    if (labelled) line["label"] = truth->labels[i];
    out << line.dump() << '\n';
  }
  if (!out) throw IoError("dataset write failed");
}

void write_dataset_file(const std::filesystem::path& path, const Dataset& dataset,
                        const GroundTruth* truth, const WriteOptions& options) {
  atomic_write(path, [&](std::ostream& out) { write_dataset(out, dataset, truth, options); });
}

DatasetFile read_dataset(std::istream& in) {
  DatasetFile file;
  std::string text;
  if (!std::getline(in, text)) throw ParseError(1, "missing header line");
  strip_cr(text);
  const json header = parse_line(text, 1);
  if (header.value("format", std::string{}) != kDatasetFormatName) {
    throw ParseError(1, std::string("not a ") + kDatasetFormatName + " file");
  }
  const int version = require_field<int>(header, "version", 1);
  if (version != kDatasetFormatVersion) {
    throw UnsupportedVersion("dataset format version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kDatasetFormatVersion) + ")");
  }
  file.header.format_version = version;
  file.header.event_count = require_field<std::size_t>(header, "event_count", 1);
  file.header.object_universe_size = require_field<std::size_t>(header, "object_universe_size", 1);
  file.header.labelled = require_field<bool>(header, "labelled", 1);
  if (auto it = header.find("params"); it != header.end() && !it->is_null()) {
    file.header.params = params_from_json(*it, 1);
  }
  try {
    file.dataset.object_universe = ObjectSet(object_list(header, "object_universe", 1));
  } catch (const InvalidInput& e) {
    throw ParseError(1, e.what());
  }
  if (file.dataset.object_universe.size() != file.header.object_universe_size) {
    throw ParseError(1, "object_universe_size is " + std::to_string(file.header.object_universe_size) +
                            " but the universe lists " +
                            std::to_string(file.dataset.object_universe.size()) + " objects");
  }

  GroundTruth truth;
  file.dataset.events.reserve(file.header.event_count);
  std::size_t line_no = 1;
  while (std::getline(in, text)) {
    ++line_no;
    strip_cr(text);
    const std::size_t index = file.dataset.events.size();
    if (index == file.header.event_count) {
      throw ParseError(line_no, "unexpected content after " + std::to_string(index) + " events");
    }
    const json line = parse_line(text, line_no);
    if (require_field<std::size_t>(line, "index", line_no) != index) {
      throw ParseError(line_no, "expected event index " + std::to_string(index));
    }
    Event e;
    e.timestamp_ms = require_field<std::int64_t>(line, "timestamp_ms", line_no);
    e.type_id = require_field<std::uint32_t>(line, "type_id", line_no);
    try {
      e.objects = ObjectSet(object_list(line, "objects", line_no));
    } catch (const InvalidInput& err) {
      throw ParseError(line_no, err.what());
    }
    for (const ObjectId& id : e.objects) {
      if (!file.dataset.object_universe.contains(id)) {
        throw ParseError(line_no, "object '" + id.str() + "' is not in the object universe");
      }
    }
    const bool has_label = line.contains("label");
    if (has_label != file.header.labelled) {
      throw ParseError(line_no, file.header.labelled ? "missing 'label' in a labelled file"
                                                     : "'label' present in an unlabelled file");
    }
    if (has_label) {
      const auto label = require_field<std::int64_t>(line, "label", line_no);
      if (label < kNoiseLabel || label > INT32_MAX) {
        throw ParseError(line_no, "label " + std::to_string(label) + " is out of range");
      }
      truth.labels.push_back(static_cast<Label>(label));
    }
    file.dataset.events.push_back(std::move(e));
  }
  if (file.dataset.events.size() != file.header.event_count) {
    throw ParseError(line_no, "truncated file: header declares " +
                                  std::to_string(file.header.event_count) + " events, found " +
                                  std::to_string(file.dataset.events.size()));
  }
  if (file.header.labelled) file.truth = std::move(truth);
  return file;
}

DatasetFile read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  return read_dataset(in);
}

void write_labels(std::ostream& out, const std::vector<Label>& labels) {
  for (Label l : labels) out << l << '\n';
  if (!out) throw IoError("labels write failed");
}

void write_labels_file(const std::filesystem::path& path, const std::vector<Label>& labels) {
  atomic_write(path, [&](std::ostream& out) { write_labels(out, labels); });
}

std::vector<Label> read_labels(std::istream& in) {
  std::vector<Label> labels;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    strip_cr(text);
    auto value = parse_int(text);
    if (!value || *value < kNoiseLabel || *value > INT32_MAX) {
      throw ParseError(line_no, "expected an integer label >= -1, got '" + text + "'");
    }
    labels.push_back(static_cast<Label>(*value));
  }
  return labels;
}

std::vector<Label> read_labels_file(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  return read_labels(in);
}

ImportMapping parse_import_mapping(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("import mapping is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(0, "import mapping must be a JSON object");
  ImportMapping m;
  auto ts = j.find("timestamp");
  if (ts == j.end() || !ts->is_string() || ts->get_ref<const std::string&>().empty()) {
    throw ParseError(0, "import mapping needs a non-empty 'timestamp' field name");
  }
  m.timestamp_field = ts->get<std::string>();
  if (auto type = j.find("type"); type != j.end() && !type->is_null()) {
    if (!type->is_string()) throw ParseError(0, "import mapping 'type' must be a field name");
    m.type_field = type->get<std::string>();
  }
  auto objects = j.find("objects");
  if (objects == j.end() || !objects->is_array() || objects->empty()) {
    throw ParseError(0, "import mapping needs a non-empty 'objects' list of field names");
  }
  for (const json& f : *objects) {
    if (!f.is_string()) throw ParseError(0, "import mapping 'objects' must list field names");
    m.object_fields.push_back(f.get<std::string>());
  }
  return m;
}

ImportMapping load_import_mapping(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_import_mapping(buffer.str());
}

ImportResult import_external(std::istream& in, const ImportMapping& mapping) {
  ImportResult result;
  std::set<ObjectId> universe;
  std::string text;
  std::size_t line_no = 0;
  auto skip = [&](const std::string& why) {
    ++result.records_skipped;
    result.warnings.push_back("record " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, text)) {
    ++line_no;
    strip_cr(text);
    if (text.empty()) continue;
    ++result.records_read;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error&) {
      skip("not valid JSON");
      continue;
    }
    if (!record.is_object()) {
      skip("not a JSON object");
      continue;
    }
    auto ts = record.find(mapping.timestamp_field);
    if (ts == record.end()) {
      skip("missing timestamp field '" + mapping.timestamp_field + "'");
      continue;
    }
    auto timestamp = timestamp_value(*ts);
    if (!timestamp) {
      skip("unreadable timestamp in '" + mapping.timestamp_field + "'");
      continue;
    }
    Event e;
    e.timestamp_ms = *timestamp;
    if (mapping.type_field) {
      auto type = record.find(*mapping.type_field);
      if (type == record.end()) {
        skip("missing type field '" + *mapping.type_field + "'");
        continue;
      }
      auto id = type_value(*type);
      if (!id) {
        skip("type field '" + *mapping.type_field + "' is not a non-negative integer");
        continue;
      }
      e.type_id = *id;
    }
    std::vector<ObjectId> ids;
    std::string missing;
    for (const std::string& field : mapping.object_fields) {
      auto v = record.find(field);
      if (v == record.end()) {
        missing = field;
        break;
      }
      if (auto s = stringify(*v)) ids.emplace_back(std::move(*s));
    }
    if (!missing.empty()) {
      skip("missing object field '" + missing + "'");
      continue;
    }
    if (ids.empty()) {
      skip("all object fields are empty");
      continue;
    }
    e.objects = ObjectSet::from_any(std::move(ids));
    for (const ObjectId& id : e.objects) universe.insert(id);
    result.dataset.events.push_back(std::move(e));
  }
  if (result.dataset.events.empty()) {
    throw ParseError(0, "no importable records (" + std::to_string(result.records_read) +
                            " read, " + std::to_string(result.records_skipped) + " skipped)");
  }
  result.dataset.object_universe =
      ObjectSet(std::vector<ObjectId>(universe.begin(), universe.end()));
  return result;
}

std::optional<std::int64_t> parse_iso8601_ms(const std::string& text) {
  // YYYY-MM-DDTHH:MM:SS
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  auto field = [&](std::size_t pos, std::size_t len) { return parse_int(std::string_view(text).substr(pos, len)); };
  const auto year = field(0, 4);
  const auto month = field(5, 2);
  const auto day = field(8, 2);
  const auto hour = field(11, 2);
  const auto minute = field(14, 2);
  const auto second = field(17, 2);
  if (!year || !month || !day || !hour || !minute || !second) return std::nullopt;
  if (*month < 1 || *month > 12 || *day < 1 || *day > 31 || *hour > 23 || *minute > 59 || *second > 60) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  std::int64_t millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::int64_t scale = 100;
    const std::size_t digits_start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      millis += (text[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == digits_start) return std::nullopt;
  }
  std::int64_t offset_minutes = 0;
  if (pos < text.size()) {
    if (text[pos] == 'Z' && pos + 1 == text.size()) {
      ++pos;
    } else if ((text[pos] == '+' || text[pos] == '-') && text.size() == pos + 6 && text[pos + 3] == ':') {
      const auto oh = field(pos + 1, 2);
      const auto om = field(pos + 4, 2);
      if (!oh || !om) return std::nullopt;
      offset_minutes = (*oh * 60 + *om) * (text[pos] == '-' ? -1 : 1);
      pos = text.size();
    } else {
      return std::nullopt;
    }
  }
  const std::int64_t days =
      days_from_civil(*year, static_cast<unsigned>(*month), static_cast<unsigned>(*day));
  const std::int64_t seconds = days * 86400 + *hour * 3600 + *minute * 60 + *second - offset_minutes * 60;
  return seconds * 1000 + millis;
}

}  // namespace sigbench
