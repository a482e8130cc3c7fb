// sigbench: generate, cluster and score synthetic object-centric event logs.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sigbench/bench.hpp"
#include "sigbench/dataset_io.hpp"
#include "sigbench/dbscan.hpp"
#include "sigbench/error.hpp"
#include "sigbench/feature_space.hpp"
#include "sigbench/generator.hpp"
#include "sigbench/metrics.hpp"

namespace fs = std::filesystem;
using namespace sigbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Relative output paths land under $SIGBENCH_OUTPUT_DIR when it is set.
fs::path output_path(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("SIGBENCH_OUTPUT_DIR"); dir && *dir) return fs::path(dir) / path;
  }
  return path;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

double ms_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t).count();
}

void print_metrics(const std::vector<Label>& truth, const std::vector<Label>& pred, bool noise_as_cluster) {
  MetricOptions opts;
  opts.noise_as_cluster = noise_as_cluster;
  PairCounts counts = pair_counts(truth, pred, opts);
  std::printf("ARI=%.6f RI=%.6f\n", adjusted_rand_index(counts), rand_index(counts));
}

void add_param_flags(CLI::App* cmd, GenerationParams& p, bool with_totals) {
  cmd->add_option("--signatures", p.num_signatures,
                  "Number of signatures S (>= 1; benchmark grid 10..40 step 10)")
      ->capture_default_str();
  cmd->add_option("--events-per-signature", p.events_per_signature,
                  "Events per signature L (>= 1; grid 10..40 step 10)")
      ->capture_default_str();
  cmd->add_option("--objects-per-event", p.objects_per_event,
                  "Objects per event m (>= 1, <= unique objects; grid 5..15 step 5)")
      ->capture_default_str();
  cmd->add_option("--similarity", p.similarity_pct,
                  "Share of objects common to a signature, percent (0..100; grid 20..80 step 20)")
      ->capture_default_str();
  if (with_totals) {
    cmd->add_option("--total-events", p.total_events,
                    "Total events N (>= S*L*r; grid 10000..40000 step 10000)")
        ->capture_default_str();
    cmd->add_option("--unique-objects", p.num_unique_objects,
                    "Size of the object universe |O| (>= m; grid 100..400 step 100)")
        ->capture_default_str();
  }
  cmd->add_option("--repetitions", p.repetitions,
                  "Repetitions of each signature r (>= 1; grid 1..4 step 1)")
      ->capture_default_str();
  cmd->add_option("--seed", p.seed, "Random seed (any unsigned 64-bit value)")->capture_default_str();
}

struct GenerateArgs {
  GenerationParams params;
  std::string output;
  bool strip_labels = false;
};

int cmd_generate(const GenerateArgs& a) {
  a.params.validate();
  a.params.validate_signature_shape(static_cast<std::size_t>(a.params.num_unique_objects));
  auto start = std::chrono::steady_clock::now();
  GeneratedLog log = generate_dataset(a.params);
  fs::path out = output_path(a.output);
  ensure_parent(out);
  WriteOptions wopts;
  wopts.params = a.params;
  wopts.strip_labels = a.strip_labels;
  write_dataset_file(out, log.dataset, &log.truth, wopts);
  std::printf("events=%zu signatures=%lld signature_events=%lld noise=%lld elapsed_ms=%.3f output=%s\n",
              log.dataset.events.size(), static_cast<long long>(a.params.num_signatures),
              static_cast<long long>(a.params.signature_event_count()),
              static_cast<long long>(a.params.noise_event_count()), ms_since(start), out.c_str());
  return kExitOk;
}

struct InjectArgs {
  GenerationParams params;
  std::string input;
  std::string output;
};

int cmd_inject(InjectArgs a) {
  DatasetFile base = read_dataset_file(a.input);
  GenerationParams& p = a.params;
  p.num_unique_objects = static_cast<std::int64_t>(base.dataset.object_universe.size());
  p.total_events = static_cast<std::int64_t>(base.dataset.events.size()) + p.signature_event_count();
  p.validate_signature_shape(base.dataset.object_universe.size());
  auto start = std::chrono::steady_clock::now();
  GeneratedLog log = inject_signatures(base.dataset, p);
  fs::path out = output_path(a.output);
  ensure_parent(out);
  WriteOptions wopts;
  wopts.params = p;
  write_dataset_file(out, log.dataset, &log.truth, wopts);
  std::printf("events=%zu base_events=%zu signature_events=%lld elapsed_ms=%.3f output=%s\n",
              log.dataset.events.size(), base.dataset.events.size(),
              static_cast<long long>(p.signature_event_count()), ms_since(start), out.c_str());
  return kExitOk;
}

struct ImportArgs {
  std::string input;
  std::string mapping;
  std::string output;
};

int cmd_import(const ImportArgs& a) {
  ImportMapping mapping = load_import_mapping(a.mapping);
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw IoError("cannot open '" + a.input + "' for reading");
  ImportResult result = import_external(in, mapping);
  for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  fs::path out = output_path(a.output);
  ensure_parent(out);
  write_dataset_file(out, result.dataset, nullptr);
  std::printf("records=%zu imported=%zu skipped=%zu objects=%zu output=%s\n", result.records_read,
              result.dataset.events.size(), result.records_skipped,
              result.dataset.object_universe.size(), out.c_str());
  return kExitOk;
}

struct ClusterArgs {
  std::string input;
  std::string output;
  std::optional<double> eps;
  std::optional<std::size_t> min_samples;
  bool automatic = false;
  bool noise_as_cluster = true;
  bool include_type_id = false;
  unsigned threads = 1;
};

int cmd_cluster(const ClusterArgs& a) {
  if (!a.automatic && (!a.eps || !a.min_samples)) {
    throw InvalidParameter("give --eps and --min-samples, or --auto");
  }
  if (a.eps || a.min_samples) {
    DbscanConfig probe{a.eps.value_or(0.5), a.min_samples.value_or(1)};
    probe.validate();
  }
  DatasetFile file = read_dataset_file(a.input);
  FeatureOptions fopts;
  fopts.include_type_id = a.include_type_id;
  EncodedDataset data = encode(file.dataset, fopts);
  DbscanConfig config = a.automatic ? suggest_config(data, file.header.params) : DbscanConfig{};
  if (a.eps) config.eps = *a.eps;
  if (a.min_samples) config.min_samples = *a.min_samples;
  config.validate();
  DbscanOptions dopts;
  dopts.threads = a.threads;
  ClusteringResult result = dbscan(data, config, dopts);

  fs::path out = output_path(a.output);
  ensure_parent(out);
  write_labels_file(out, result.labels);
  std::printf("eps=%.6f min_samples=%zu clusters=%zu noise=%zu elapsed_ms=%.3f output=%s\n", config.eps,
              config.min_samples, result.cluster_count, result.noise_count(), result.wall_time_ms,
              out.c_str());
  if (file.truth) {
    print_metrics(file.truth->labels, result.labels, a.noise_as_cluster);
  } else {
    std::printf("no ground truth in %s; metrics omitted\n", a.input.c_str());
  }
  return kExitOk;
}

struct EvaluateArgs {
  std::string truth;
  std::string pred;
  bool noise_as_cluster = true;
};

int cmd_evaluate(const EvaluateArgs& a) {
  std::vector<Label> truth;
  // A dataset file carries its labels; anything else is read as a labels file.
  std::ifstream probe(a.truth, std::ios::binary);
  if (!probe) throw IoError("cannot open '" + a.truth + "' for reading");
  if (probe.peek() == '{') {
    DatasetFile file = read_dataset(probe);
    if (!file.truth) throw InvalidInput("'" + a.truth + "' has no ground truth");
    truth = file.truth->labels;
  } else {
    truth = read_labels(probe);
  }
  std::vector<Label> pred = read_labels_file(a.pred);
  print_metrics(truth, pred, a.noise_as_cluster);
  return kExitOk;
}

struct BenchArgs {
  bool full_grid = false;
  std::string spec;
  bool dry_run = false;
  std::string results;
  unsigned workers = 1;
  unsigned threads = 1;
  std::optional<double> eps;
  std::optional<std::size_t> min_samples;
};

int cmd_bench(const BenchArgs& a) {
  if (a.full_grid == !a.spec.empty()) throw InvalidSpec("give exactly one of --full-grid and --spec");
  SweepSpec spec = a.full_grid ? SweepSpec::benchmark_grid() : SweepSpec::load(a.spec);
  if (a.eps.has_value() != a.min_samples.has_value()) {
    throw InvalidSpec("--eps and --min-samples go together");
  }
  if (a.eps) {
    DbscanConfig config{*a.eps, *a.min_samples};
    config.validate();
    spec.policy = ConfigPolicy::fixed_config(config);
  }
  std::vector<GenerationParams> cells = enumerate_grid(spec);
  if (a.dry_run) {
    std::printf("%zu planned cells\n", cells.size());
    return kExitOk;
  }
  if (a.results.empty()) throw InvalidSpec("--results is required unless --dry-run is given");
  fs::path results = output_path(a.results);
  ensure_parent(results);

  SweepOptions opts;
  opts.workers = a.workers;
  opts.cell.dbscan_threads = a.threads;
  opts.on_record = [](const BenchRecord& r, std::size_t done, std::size_t total) {
    if (r.ok()) {
      std::fprintf(stderr, "[%zu/%zu] %s ari=%.6f\n", done, total, r.params.to_string().c_str(), r.ari);
    } else {
      std::fprintf(stderr, "[%zu/%zu] %s %s\n", done, total, r.params.to_string().c_str(),
                   r.status.c_str());
    }
  };
  SweepSummary s = run_sweep(spec, results, opts);
  std::printf("planned=%zu reused=%zu computed=%zu skipped=%zu failed=%zu results=%s\n", s.planned,
              s.reused, s.computed, s.skipped, s.failed, results.c_str());
  return kExitOk;
}

struct AnalyzeArgs {
  std::string results;
  std::string out_dir = ".";
  double poor_threshold = 0.95;
};

void write_csv(const fs::path& path, const std::function<void(std::ostream&)>& fill) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  fill(out);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

int cmd_analyze(const AnalyzeArgs& a) {
  std::vector<BenchRecord> records = read_results_file(a.results);
  if (records.empty()) throw IoError("results file '" + a.results + "' holds no records");
  std::vector<ParameterRow> rows = aggregate_by_parameter(records);
  std::vector<PoorGroup> poor = extract_poor_combinations(records, a.poor_threshold);
  fs::path dir = output_path(a.out_dir);
  fs::create_directories(dir);
  write_csv(dir / "ari_by_parameter.csv", [&](std::ostream& o) { write_parameter_csv(o, rows); });
  write_csv(dir / "poor_combinations.csv", [&](std::ostream& o) { write_poor_csv(o, poor); });
  write_csv(dir / "timing.csv", [&](std::ostream& o) {
    write_timing_csv(o, timing_summary(records, TimingMetric::kGeneration),
                     timing_summary(records, TimingMetric::kClustering));
  });
  std::size_t ok = 0, below = 0;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    ++ok;
    if (r.ari < a.poor_threshold) ++below;
  }
  std::printf("records=%zu ok=%zu below_threshold=%zu poor_groups=%zu out_dir=%s\n", records.size(), ok,
              below, poor.size(), dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic object-centric event log benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sigbench 1.0.0");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a labelled synthetic event log");
  add_param_flags(generate, gen.params, true);
  generate->add_option("-o,--output", gen.output, "Output dataset file")->required();
  generate->add_flag("--strip-labels", gen.strip_labels, "Omit ground-truth labels from the file");

  InjectArgs inj;
  auto* inject = app.add_subcommand("inject", "Interleave synthetic signatures into an existing dataset");
  inject->add_option("-i,--input", inj.input, "Base dataset file")->required()->check(CLI::ExistingFile);
  add_param_flags(inject, inj.params, false);
  inject->add_option("-o,--output", inj.output, "Output dataset file")->required();

  ImportArgs imp;
  auto* import = app.add_subcommand("import", "Convert a JSON-lines log into a dataset file");
  import->add_option("-i,--input", imp.input, "JSON-lines log")->required()->check(CLI::ExistingFile);
  import->add_option("-m,--mapping", imp.mapping, "Field mapping (JSON)")->required()->check(CLI::ExistingFile);
  import->add_option("-o,--output", imp.output, "Output dataset file")->required();

  ClusterArgs clu;
  auto* cluster = app.add_subcommand("cluster", "Run DBSCAN on a dataset file");
  cluster->add_option("-i,--input", clu.input, "Dataset file")->required();
  cluster->add_option("-o,--output", clu.output, "Output labels file")->required();
  cluster->add_option("--eps", clu.eps, "Jaccard radius (0 < eps <= 1)");
  cluster->add_option("--min-samples", clu.min_samples, "Core threshold, point included (>= 1)");
  cluster->add_flag("--auto", clu.automatic,
                    "Derive eps/min_samples from the file's generation parameters or the k-distance knee");
  cluster->add_option("--noise-as-cluster", clu.noise_as_cluster,
                      "Score all noise labels as one group (true) or as singletons (false)")
      ->capture_default_str();
  cluster->add_flag("--include-type-id", clu.include_type_id, "Add the event type as a feature");
  cluster->add_option("--threads", clu.threads, "Threads for the neighbour scan (>= 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score predicted labels against ground truth");
  evaluate->add_option("-t,--truth", ev.truth, "Labelled dataset file or labels file")->required();
  evaluate->add_option("-p,--pred", ev.pred, "Predicted labels file")->required();
  evaluate->add_option("--noise-as-cluster", ev.noise_as_cluster,
                       "Score all noise labels as one group (true) or as singletons (false)")
      ->capture_default_str();

  BenchArgs ben;
  auto* bench = app.add_subcommand("bench", "Run a resumable parameter sweep");
  bench->add_flag("--full-grid,--paper-grid", ben.full_grid, "Use the full 12,288-cell benchmark grid");
  bench->add_option("--spec", ben.spec, "Sweep spec file (JSON)");
  bench->add_flag("--dry-run", ben.dry_run, "Print the number of planned cells and exit");
  bench->add_option("-r,--results", ben.results, "Results file (JSON lines); existing records are reused");
  bench->add_option("-w,--workers", ben.workers, "Cells run in parallel (>= 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--threads", ben.threads, "Threads per cell for the neighbour scan (>= 1)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--eps", ben.eps, "Fixed eps for every cell instead of the automatic choice");
  bench->add_option("--min-samples", ben.min_samples, "Fixed min_samples, used with --eps");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Aggregate a results file into CSV tables");
  analyze->add_option("-r,--results", ana.results, "Results file")->required();
  analyze->add_option("--out-dir", ana.out_dir, "Directory for the CSV files")->capture_default_str();
  analyze->add_option("--poor-threshold", ana.poor_threshold, "ARI below which a cell counts as poor")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (inject->parsed()) return cmd_inject(inj);
    if (import->parsed()) return cmd_import(imp);
    if (cluster->parsed()) return cmd_cluster(clu);
    if (evaluate->parsed()) return cmd_evaluate(ev);
    if (bench->parsed()) return cmd_bench(ben);
    if (analyze->parsed()) return cmd_analyze(ana);
  } catch (const InvalidParameter& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const InvalidSpec& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
