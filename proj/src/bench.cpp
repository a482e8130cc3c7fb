#include "sigbench/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sigbench/error.hpp"
#include "sigbench/feature_space.hpp"
#include "sigbench/metrics.hpp"

namespace sigbench {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct ParamField {
  Parameter parameter;
  const char* name;
  std::int64_t GenerationParams::*member;
};

constexpr ParamField kFields[] = {
    {Parameter::kNumSignatures, "num_signatures", &GenerationParams::num_signatures},
    {Parameter::kEventsPerSignature, "events_per_signature", &GenerationParams::events_per_signature},
    {Parameter::kObjectsPerEvent, "objects_per_event", &GenerationParams::objects_per_event},
    {Parameter::kSimilarityPct, "similarity_pct", &GenerationParams::similarity_pct},
    {Parameter::kTotalEvents, "total_events", &GenerationParams::total_events},
    {Parameter::kNumUniqueObjects, "num_unique_objects", &GenerationParams::num_unique_objects},
    {Parameter::kRepetitions, "repetitions", &GenerationParams::repetitions},
};

const ParamField& field_of(Parameter p) {
  for (const auto& f : kFields) {
    if (f.parameter == p) return f;
  }
  throw InvalidParameter("unknown parameter");
}

std::vector<std::int64_t> range(std::int64_t lo, std::int64_t hi, std::int64_t step) {
  std::vector<std::int64_t> out;
  for (std::int64_t v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::vector<std::int64_t> parse_values(const json& j, const std::string& name) {
  std::vector<std::int64_t> out;
  if (j.is_array()) {
    for (const auto& v : j) {
      if (!v.is_number_integer()) throw InvalidSpec("'" + name + "' values must be integers");
      out.push_back(v.get<std::int64_t>());
    }
  } else if (j.is_object()) {
    for (const char* key : {"min", "max", "step"}) {
      if (!j.contains(key) || !j.at(key).is_number_integer()) {
        throw InvalidSpec("'" + name + "' range needs integer '" + key + "'");
      }
    }
    auto lo = j.at("min").get<std::int64_t>();
    auto hi = j.at("max").get<std::int64_t>();
    auto step = j.at("step").get<std::int64_t>();
    if (step <= 0) throw InvalidSpec("'" + name + "' step must be positive");
    if (hi < lo) throw InvalidSpec("'" + name + "' max is below min");
    out = range(lo, hi, step);
  } else if (j.is_number_integer()) {
    out.push_back(j.get<std::int64_t>());
  } else {
    throw InvalidSpec("'" + name + "' must be a list, a number or {min, max, step}");
  }
  if (out.empty()) throw InvalidSpec("'" + name + "' has no values");
  return out;
}

ordered_json params_json(const GenerationParams& p) {
  ordered_json j;
  for (const auto& f : kFields) j[f.name] = p.*(f.member);
  j["seed"] = p.seed;
  return j;
}

GenerationParams params_from(const json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "'params' must be an object");
  GenerationParams p;
  for (const auto& f : kFields) {
    auto it = j.find(f.name);
    if (it == j.end() || !it->is_number_integer()) {
      throw ParseError(line, std::string("params.") + f.name + " missing or not an integer");
    }
    p.*(f.member) = it->get<std::int64_t>();
  }
  auto it = j.find("seed");
  if (it == j.end() || !it->is_number_unsigned()) {
    throw ParseError(line, "params.seed missing or not a non-negative integer");
  }
  p.seed = it->get<std::uint64_t>();
  return p;
}

auto params_tuple(const GenerationParams& p) {
  return std::tuple(p.num_signatures, p.events_per_signature, p.objects_per_event, p.similarity_pct,
                    p.total_events, p.num_unique_objects, p.repetitions, p.seed);
}

AriSpread spread_of(std::vector<double> values) {
  AriSpread s;
  s.count = values.size();
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  s.median = median_of(std::move(values));
  return s;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string_view parameter_name(Parameter p) { return field_of(p).name; }

std::int64_t parameter_value(const GenerationParams& params, Parameter p) {
  return params.*(field_of(p).member);
}

SweepSpec SweepSpec::benchmark_grid() {
  SweepSpec spec;
  spec.values[Parameter::kNumSignatures] = range(10, 40, 10);
  spec.values[Parameter::kEventsPerSignature] = range(10, 40, 10);
  spec.values[Parameter::kObjectsPerEvent] = range(5, 15, 5);
  spec.values[Parameter::kSimilarityPct] = range(20, 80, 20);
  spec.values[Parameter::kTotalEvents] = range(10000, 40000, 10000);
  spec.values[Parameter::kNumUniqueObjects] = range(100, 400, 100);
  spec.values[Parameter::kRepetitions] = range(1, 4, 1);
  return spec;
}

SweepSpec SweepSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidSpec(std::string("sweep spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidSpec("sweep spec must be a JSON object");

  std::set<std::string> known{"seeds", "policy"};
  for (const auto& f : kFields) known.insert(f.name);
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw InvalidSpec("unknown sweep spec key '" + key + "'");
  }

  SweepSpec spec = benchmark_grid();
  for (const auto& f : kFields) {
    if (auto it = j.find(f.name); it != j.end()) spec.values[f.parameter] = parse_values(*it, f.name);
  }
  if (auto it = j.find("seeds"); it != j.end()) {
    if (!it->is_array() || it->empty()) throw InvalidSpec("'seeds' must be a non-empty list");
    spec.seeds.clear();
    for (const auto& s : *it) {
      if (!s.is_number_unsigned()) throw InvalidSpec("'seeds' must hold non-negative integers");
      spec.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (auto it = j.find("policy"); it != j.end()) {
    if (it->is_string() && it->get<std::string>() == "auto") {
      spec.policy = ConfigPolicy::suggest();
    } else if (it->is_object() && it->contains("eps") && it->contains("min_samples") &&
               it->at("eps").is_number() && it->at("min_samples").is_number_unsigned()) {
      DbscanConfig config{it->at("eps").get<double>(), it->at("min_samples").get<std::size_t>()};
      try {
        config.validate();
      } catch (const InvalidParameter& e) {
        throw InvalidSpec(std::string("policy: ") + e.what());
      }
      spec.policy = ConfigPolicy::fixed_config(config);
    } else {
      throw InvalidSpec("'policy' must be \"auto\" or {\"eps\": x, \"min_samples\": k}");
    }
  }
  return spec;
}

SweepSpec SweepSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(text.str());
}

std::vector<GenerationParams> enumerate_grid(const SweepSpec& spec) {
  std::vector<const std::vector<std::int64_t>*> lists;
  for (Parameter p : kAllParameters) {
    auto it = spec.values.find(p);
    if (it == spec.values.end() || it->second.empty()) {
      throw InvalidSpec("no values for '" + std::string(parameter_name(p)) + "'");
    }
    lists.push_back(&it->second);
  }
  if (spec.seeds.empty()) throw InvalidSpec("no seeds");

  std::vector<GenerationParams> out;
  std::array<std::size_t, 7> idx{};
  while (true) {
    for (std::uint64_t seed : spec.seeds) {
      GenerationParams p;
      for (std::size_t k = 0; k < kAllParameters.size(); ++k) {
        p.*(field_of(kAllParameters[k]).member) = (*lists[k])[idx[k]];
      }
      p.seed = seed;
      out.push_back(p);
    }
    std::size_t k = kAllParameters.size();
    while (k > 0) {
      --k;
      if (++idx[k] < lists[k]->size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
  }
}

std::string cell_key(const GenerationParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : params.to_string()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

BenchRecord run_cell(const GenerationParams& params, const ConfigPolicy& policy,
                     const CellOptions& options) {
  BenchRecord record;
  record.params = params;
  try {
    params.validate();
    params.validate_signature_shape(static_cast<std::size_t>(params.num_unique_objects));
  } catch (const InvalidParameter& e) {
    record.status = std::string("skipped: ") + e.what();
    return record;
  }
  try {
    auto start = std::chrono::steady_clock::now();
    GeneratedLog log = generate_dataset(params);
    record.gen_time_ms = round3(elapsed_ms(start));

    start = std::chrono::steady_clock::now();
    EncodedDataset data = encode(log.dataset);
    DbscanConfig config = policy.mode == ConfigPolicy::Mode::kFixed
                              ? policy.fixed
                              : suggest_config(data, params);
    DbscanOptions dbopts;
    dbopts.threads = options.dbscan_threads;
    ClusteringResult result = dbscan(data, config, dbopts);
    record.cluster_time_ms = round3(elapsed_ms(start));

    record.cluster_count = result.cluster_count;
    record.noise_count = result.noise_count();
    PairCounts counts = pair_counts(log.truth.labels, result.labels);
    record.ari = adjusted_rand_index(counts);
    record.ri = rand_index(counts);
  } catch (const std::exception& e) {
    record.status = std::string("failed: ") + e.what();
    record.ari = record.ri = 0.0;
  }
  return record;
}

std::string record_to_line(const BenchRecord& r) {
  ordered_json j;
  j["params"] = params_json(r.params);
  j["ari"] = r.ok() ? ordered_json(r.ari) : ordered_json(nullptr);
  j["ri"] = r.ok() ? ordered_json(r.ri) : ordered_json(nullptr);
  j["gen_time_ms"] = round3(r.gen_time_ms);
  j["cluster_time_ms"] = round3(r.cluster_time_ms);
  j["cluster_count"] = r.cluster_count;
  j["noise_count"] = r.noise_count;
  j["status"] = r.status;
  return j.dump();
}

BenchRecord record_from_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    throw ParseError(line_no, "results record is not valid JSON");
  }
  if (!j.is_object()) throw ParseError(line_no, "results record must be a JSON object");
  static const std::set<std::string> kKeys{"params",          "ari",           "ri",
                                           "gen_time_ms",     "cluster_time_ms", "cluster_count",
                                           "noise_count",     "status"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.count(key)) throw ParseError(line_no, "unexpected field '" + key + "'");
  }
  for (const auto& key : kKeys) {
    if (!j.contains(key)) throw ParseError(line_no, "missing field '" + key + "'");
  }
  BenchRecord r;
  r.params = params_from(j["params"], line_no);
  if (!j["status"].is_string()) throw ParseError(line_no, "'status' must be a string");
  r.status = j["status"].get<std::string>();
  auto number = [&](const char* key) {
    if (!j[key].is_number()) throw ParseError(line_no, std::string("'") + key + "' must be a number");
    return j[key].get<double>();
  };
  auto count = [&](const char* key) {
    if (!j[key].is_number_unsigned()) {
      throw ParseError(line_no, std::string("'") + key + "' must be a non-negative integer");
    }
    return j[key].get<std::uint64_t>();
  };
  if (r.ok()) {
    r.ari = number("ari");
    r.ri = number("ri");
    if (r.ari < -1.0 || r.ari > 1.0) throw ParseError(line_no, "'ari' outside [-1, 1]");
  } else if (!j["ari"].is_null() || !j["ri"].is_null()) {
    throw ParseError(line_no, "'ari' and 'ri' must be null for a record that is not ok");
  }
  r.gen_time_ms = number("gen_time_ms");
  r.cluster_time_ms = number("cluster_time_ms");
  if (r.gen_time_ms < 0 || r.cluster_time_ms < 0) throw ParseError(line_no, "negative time");
  r.cluster_count = count("cluster_count");
  r.noise_count = count("noise_count");
  return r;
}

std::vector<BenchRecord> read_results(std::istream& in) {
  std::vector<BenchRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool terminated = !in.eof();
    if (line.empty()) {
      if (!terminated) break;
      throw ParseError(line_no, "empty line");
    }
    try {
      out.push_back(record_from_line(line, line_no));
    } catch (const ParseError&) {
      if (!terminated) break;  // torn final append
      throw;
    }
  }
  return out;
}

std::vector<BenchRecord> read_results_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_results(in);
}

void sort_records(std::vector<BenchRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return params_tuple(a.params) < params_tuple(b.params);
  });
}

void write_results_file(const std::filesystem::path& path, std::vector<BenchRecord> records) {
  sort_records(records);
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    for (const auto& r : records) out << record_to_line(r) << '\n';
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot replace '" + path.string() + "'");
  }
}

SweepSummary run_sweep(const SweepSpec& spec, const std::filesystem::path& results_path,
                       const SweepOptions& options) {
  std::vector<GenerationParams> cells = enumerate_grid(spec);
  SweepSummary summary;
  summary.planned = cells.size();

  std::vector<BenchRecord> records;
  if (std::filesystem::exists(results_path)) records = read_results_file(results_path);

  // Keep one record per cell; a later line replaces an earlier one.
  std::map<std::string, std::size_t> by_key;
  {
    std::vector<BenchRecord> unique;
    for (auto& r : records) {
      auto key = cell_key(r.params);
      if (auto it = by_key.find(key); it != by_key.end()) {
        unique[it->second] = std::move(r);
      } else {
        by_key.emplace(key, unique.size());
        unique.push_back(std::move(r));
      }
    }
    records = std::move(unique);
  }

  std::vector<GenerationParams> todo;
  for (const auto& p : cells) {
    if (by_key.count(cell_key(p))) {
      ++summary.reused;
    } else {
      todo.push_back(p);
    }
  }

  // Rewrite first so that appends start after a clean newline.
  write_results_file(results_path, records);

  std::mutex mu;
  std::ofstream append(results_path, std::ios::binary | std::ios::app);
  if (!append) throw IoError("cannot open '" + results_path.string() + "' for appending");
  std::size_t next = 0;
  std::size_t done = 0;

  auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= todo.size()) return;
        i = next++;
      }
      BenchRecord r = run_cell(todo[i], spec.policy, options.cell);
      std::lock_guard lock(mu);
      append << record_to_line(r) << '\n';
      append.flush();
      if (r.ok()) {
        ++summary.computed;
      } else if (r.status.rfind("skipped", 0) == 0) {
        ++summary.skipped;
      } else {
        ++summary.failed;
      }
      records.push_back(r);
      ++done;
      if (options.on_record) options.on_record(r, done, todo.size());
    }
  };

  unsigned workers = std::max(1u, options.workers);
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, todo.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  append.close();
  if (!append) throw IoError("append to '" + results_path.string() + "' failed");

  write_results_file(results_path, std::move(records));
  return summary;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median of an empty sample");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<ParameterRow> aggregate_by_parameter(const std::vector<BenchRecord>& records) {
  std::vector<ParameterRow> rows;
  bool any = false;
  for (Parameter p : kAllParameters) {
    std::map<std::int64_t, std::vector<double>> groups;
    for (const auto& r : records) {
      if (!r.ok()) continue;
      any = true;
      groups[parameter_value(r.params, p)].push_back(r.ari);
    }
    for (auto& [value, aris] : groups) rows.push_back({p, value, spread_of(std::move(aris))});
  }
  if (!any) throw InvalidInput("no successful records to aggregate");
  return rows;
}

std::vector<PoorGroup> extract_poor_combinations(const std::vector<BenchRecord>& records,
                                                 double threshold) {
  std::map<std::array<std::int64_t, 4>, std::vector<double>> groups;
  for (const auto& r : records) {
    if (!r.ok() || !(r.ari < threshold)) continue;
    const auto& p = r.params;
    groups[{p.num_signatures, p.events_per_signature, p.total_events, p.repetitions}].push_back(r.ari);
  }
  std::vector<PoorGroup> out;
  for (const auto& [key, aris] : groups) {
    PoorGroup g;
    g.num_signatures = key[0];
    g.events_per_signature = key[1];
    g.total_events = key[2];
    g.repetitions = key[3];
    g.avg_ari = std::accumulate(aris.begin(), aris.end(), 0.0) / static_cast<double>(aris.size());
    auto [lo, hi] = std::minmax_element(aris.begin(), aris.end());
    g.min_ari = *lo;
    g.max_ari = *hi;
    g.cell_count = aris.size();
    out.push_back(g);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PoorGroup& a, const PoorGroup& b) { return a.avg_ari < b.avg_ari; });
  return out;
}

std::vector<BoxStats> timing_summary(const std::vector<BenchRecord>& records, TimingMetric metric) {
  std::map<std::int64_t, std::vector<double>> groups;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    groups[r.params.total_events].push_back(metric == TimingMetric::kGeneration ? r.gen_time_ms
                                                                                : r.cluster_time_ms);
  }
  std::vector<BoxStats> out;
  for (auto& [n, times] : groups) {
    std::sort(times.begin(), times.end());
    BoxStats b;
    b.total_events = n;
    b.count = times.size();
    b.min = times.front();
    b.max = times.back();
    b.q1 = quantile_sorted(times, 0.25);
    b.median = quantile_sorted(times, 0.5);
    b.q3 = quantile_sorted(times, 0.75);
    double iqr = b.q3 - b.q1;
    b.lower_whisker = b.q1 - 1.5 * iqr;
    b.upper_whisker = b.q3 + 1.5 * iqr;
    out.push_back(b);
  }
  return out;
}

void write_parameter_csv(std::ostream& out, const std::vector<ParameterRow>& rows) {
  out << "parameter,value,min,median,max\n";
  for (const auto& r : rows) {
    out << parameter_name(r.parameter) << ',' << r.value << ',' << fmt6(r.ari.min) << ','
        << fmt6(r.ari.median) << ',' << fmt6(r.ari.max) << '\n';
  }
}

void write_poor_csv(std::ostream& out, const std::vector<PoorGroup>& groups) {
  out << "num_signatures,events_per_signature,total_events,repetitions,avg_ari,min_ari,max_ari,cell_count\n";
  for (const auto& g : groups) {
    out << g.num_signatures << ',' << g.events_per_signature << ',' << g.total_events << ','
        << g.repetitions << ',' << fmt6(g.avg_ari) << ',' << fmt6(g.min_ari) << ','
        << fmt6(g.max_ari) << ',' << g.cell_count << '\n';
  }
}

void write_timing_csv(std::ostream& out, const std::vector<BoxStats>& generation,
                      const std::vector<BoxStats>& clustering) {
  out << "metric,total_events,count,lower_whisker,q1,median,q3,upper_whisker,min,max\n";
  auto emit = [&](const char* metric, const std::vector<BoxStats>& rows) {
    for (const auto& b : rows) {
      out << metric << ',' << b.total_events << ',' << b.count << ',' << fmt6(b.lower_whisker) << ','
          << fmt6(b.q1) << ',' << fmt6(b.median) << ',' << fmt6(b.q3) << ','
          << fmt6(b.upper_whisker) << ',' << fmt6(b.min) << ',' << fmt6(b.max) << '\n';
    }
  };
  emit("gen_time_ms", generation);
  emit("cluster_time_ms", clustering);
}

}  // namespace sigbench
