#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sigbench/dbscan.hpp"
#include "sigbench/generator.hpp"

namespace sigbench {

enum class Parameter {
  kNumSignatures,
  kEventsPerSignature,
  kObjectsPerEvent,
  kSimilarityPct,
  kTotalEvents,
  kNumUniqueObjects,
  kRepetitions,
};

inline constexpr std::array<Parameter, 7> kAllParameters = {
    Parameter::kNumSignatures, Parameter::kEventsPerSignature, Parameter::kObjectsPerEvent,
    Parameter::kSimilarityPct, Parameter::kTotalEvents,        Parameter::kNumUniqueObjects,
    Parameter::kRepetitions};

std::string_view parameter_name(Parameter p);
std::int64_t parameter_value(const GenerationParams& params, Parameter p);

// How each cell picks its DBSCAN configuration.
struct ConfigPolicy {
  enum class Mode { kSuggest, kFixed };
  Mode mode = Mode::kSuggest;
  DbscanConfig fixed;  // used when mode == kFixed

  static ConfigPolicy suggest() { return {}; }
  static ConfigPolicy fixed_config(DbscanConfig config) { return {Mode::kFixed, config}; }
};

struct SweepSpec {
  std::map<Parameter, std::vector<std::int64_t>> values;
  std::vector<std::uint64_t> seeds{1};
  ConfigPolicy policy;

  // The benchmark grid: S, L in 10..40/10; m in 5..15/5; sim in 20..80/20;
  // N in 10K..40K/10K; |O| in 100..400/100; r in 1..4/1; one seed.
  static SweepSpec benchmark_grid();

  // JSON object; each parameter key holds a list or {"min","max","step"}.
  // Missing parameters take the benchmark-grid range. "seeds" is a list and
  // "policy" is "auto" or {"eps": x, "min_samples": k}.
  static SweepSpec from_json(const std::string& text);
  static SweepSpec load(const std::filesystem::path& path);
};

// Cartesian product in lexicographic order over (S, L, m, sim, N, |O|, r, seed).
// Throws InvalidSpec when a value list or the seed list is empty.
std::vector<GenerationParams> enumerate_grid(const SweepSpec& spec);

struct BenchRecord {
  GenerationParams params;
  double ari = 0.0;
  double ri = 0.0;
  double gen_time_ms = 0.0;
  double cluster_time_ms = 0.0;
  std::uint64_t cluster_count = 0;
  std::uint64_t noise_count = 0;
  // "ok", "skipped: <reason>" for infeasible cells, "failed: <reason>".
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

// 16 hex digits of FNV-1a over the canonical parameter rendering.
std::string cell_key(const GenerationParams& params);

struct CellOptions {
  unsigned dbscan_threads = 1;
};

// generate -> encode -> dbscan -> score. Errors become a failed record.
BenchRecord run_cell(const GenerationParams& params, const ConfigPolicy& policy,
                     const CellOptions& options = {});

// Results file: one JSON object per line with exactly the fields params, ari,
// ri, gen_time_ms, cluster_time_ms, cluster_count, noise_count, status.
// ari and ri are null for records that are not ok.
std::string record_to_line(const BenchRecord& record);
BenchRecord record_from_line(const std::string& line, std::size_t line_no);

// Reads a results file. A final line without its terminating newline is a
// torn append and is dropped; any other malformed line throws ParseError.
std::vector<BenchRecord> read_results(std::istream& in);
std::vector<BenchRecord> read_results_file(const std::filesystem::path& path);

// Canonical order: by (S, L, m, sim, N, |O|, r, seed).
void sort_records(std::vector<BenchRecord>& records);
void write_results_file(const std::filesystem::path& path, std::vector<BenchRecord> records);

struct SweepOptions {
  unsigned workers = 1;
  CellOptions cell;
  std::function<void(const BenchRecord&, std::size_t done, std::size_t total)> on_record;
};

struct SweepSummary {
  std::size_t planned = 0;
  std::size_t reused = 0;
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

// Runs every cell of the spec that the results file does not already hold,
// appending each record as it completes, then rewrites the file in canonical
// order. Records already present for other cells are kept.
SweepSummary run_sweep(const SweepSpec& spec, const std::filesystem::path& results_path,
                       const SweepOptions& options = {});

struct AriSpread {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

// Median of an even count is the mean of the two middle values.
double median_of(std::vector<double> values);

// Linear-interpolation quantile (q in [0,1]) of sorted values.
double quantile_sorted(const std::vector<double>& sorted, double q);

struct ParameterRow {
  Parameter parameter;
  std::int64_t value = 0;
  AriSpread ari;
};

// Per parameter and value: min/median/max ARI over ok records. Rows follow
// kAllParameters order, values ascending. Throws InvalidInput when no record is ok.
std::vector<ParameterRow> aggregate_by_parameter(const std::vector<BenchRecord>& records);

struct PoorGroup {
  std::int64_t num_signatures = 0;
  std::int64_t events_per_signature = 0;
  std::int64_t total_events = 0;
  std::int64_t repetitions = 0;
  double avg_ari = 0.0;
  double min_ari = 0.0;
  double max_ari = 0.0;
  std::size_t cell_count = 0;  // records of this group below the threshold
};

// Ok records with ari < threshold, grouped by (S, L, N, r), ascending by
// average ARI.
std::vector<PoorGroup> extract_poor_combinations(const std::vector<BenchRecord>& records,
                                                 double threshold = 0.95);

enum class TimingMetric { kGeneration, kClustering };

struct BoxStats {
  std::int64_t total_events = 0;
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  // Fences at 1.5 IQR beyond the quartiles.
  double lower_whisker = 0.0;
  double upper_whisker = 0.0;
};

// Box statistics of a timing field over ok records, grouped by total_events.
std::vector<BoxStats> timing_summary(const std::vector<BenchRecord>& records,
                                     TimingMetric metric = TimingMetric::kGeneration);

void write_parameter_csv(std::ostream& out, const std::vector<ParameterRow>& rows);
void write_poor_csv(std::ostream& out, const std::vector<PoorGroup>& groups);
void write_timing_csv(std::ostream& out, const std::vector<BoxStats>& generation,
                      const std::vector<BoxStats>& clustering);

}  // namespace sigbench
