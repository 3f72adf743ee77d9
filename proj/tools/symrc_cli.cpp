#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "symrc/harness/experiment.hpp"
#include "symrc/harness/scaling.hpp"

namespace fs = std::filesystem;
using namespace symrc;
using namespace symrc::harness;

namespace {

struct CommonFlags {
  std::string config;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> budget;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "experiment INI file")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("-j,--workers", f.workers, "worker threads (SYMRC_WORKERS wins)");
  cmd->add_option("--budget", f.budget, "optimizer evaluations per instance; 0 = fixed params");
}

ExperimentConfig load(const CommonFlags& f, const std::string& task) {
  ExperimentConfig c = load_config(f.config);
  if (!task.empty()) {
    if (c.task.empty()) c.task = task;
    else if (c.task != task)
      throw ConfigError("task", "config says '" + c.task + "' but the subcommand runs '" + task + "'");
  }
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.budget) c.budget = *f.budget;
  return c;
}

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

std::string cell_tag(const ExperimentRecord& r) {
  std::ostringstream s;
  if (r.task != kInference) s << "n" << r.n << "_";
  s << "N" << r.n_nodes << "_eta" << r.params.eta_r << "_i" << r.instance;
  return s.str();
}

void write_instances(const fs::path& out, const std::string& id,
                     const std::vector<InstanceResult>& results) {
  auto records = open_out(out / (id + ".records.jsonl"));
  for (const auto& res : results) {
    records << to_line(res.record) << '\n';
    if (!res.raw.rows.empty()) {
      auto raw = open_out(out / "raw" / (id + "_" + cell_tag(res.record) + ".tsv"));
      write_raw(raw, res.raw);
    }
  }
}

int run_single(const CommonFlags& f, const std::string& task) {
  const ExperimentConfig c = load(f, task);
  validate(c);
  const int workers = resolve_workers(c.workers);
  const auto results = run_experiment(c, workers);
  write_instances(f.out, c.id, results);

  std::vector<double> values;
  for (const auto& res : results) {
    const auto& r = res.record;
    std::cout << c.id << " instance " << r.instance << ": ";
    if (r.ok()) {
      std::cout << r.metric_name << "=" << r.metric << " (validation " << r.validation_metric
                << ", " << r.evaluations << " evals, " << r.wall_time << " s)\n";
      values.push_back(r.metric);
    } else {
      std::cout << "failed: " << r.error << '\n';
    }
  }
  if (!values.empty()) {
    const auto s = summarize(values);
    std::cout << "summary: mean " << s.mean << "  min " << s.min << "  median " << s.median
              << "  max " << s.max << "  zero " << s.zero_fraction << "  ("
              << s.count << "/" << results.size() << " ok)\n";
  }
  std::cout << "records: " << (fs::path(f.out) / (c.id + ".records.jsonl")).string() << '\n';
  return values.size() == results.size() ? 0 : 3;
}

int run_sweep_cmd(const CommonFlags& f) {
  const ExperimentConfig c = load(f, "");
  validate(c, true);
  const int workers = resolve_workers(c.workers);
  const auto res = run_sweep(c, workers, [](const SweepRow& row) {
    std::cerr << row.task << " n=" << row.n << " eta_r=" << row.eta_r << " N=" << row.n_nodes
              << " mean=" << row.summary.mean << " zero=" << row.summary.zero_fraction
              << (row.complete ? "" : " (incomplete)") << '\n';
  });
  write_instances(f.out, c.id, res.instances);
  auto table = open_out(fs::path(f.out) / (c.id + ".sweep.tsv"));
  write_sweep_table(table, res.rows);
  auto zero = open_out(fs::path(f.out) / (c.id + ".zero.tsv"));
  write_zero_points(zero, zero_error_points(res.rows));
  write_sweep_table(std::cout, res.rows);
  return 0;
}

// Reads two named columns from a tab-separated table with a header row.
int run_fit(const std::string& path, const std::string& xcol, const std::string& ycol,
            const std::string& model) {
  std::ifstream in(path);
  if (!in) throw ConfigError("table", "cannot read " + path);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    for (std::string col; std::getline(h, col, '\t');) header.push_back(col);
  }
  auto index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError(name, "no such column in " + path);
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto xi = index(xcol), yi = index(ycol);
  std::vector<double> x, y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, '\t');) cells.push_back(cell);
    if (cells.size() <= std::max(xi, yi)) throw ConfigError("table", "short row: " + line);
    const double yv = std::stod(cells[yi]);
    if (!(yv > 0.0)) {
      std::cerr << "skipping row without a positive " << ycol << ": " << line << '\n';
      continue;
    }
    x.push_back(std::stod(cells[xi]));
    y.push_back(yv);
  }
  const auto fit = fit_scaling(x, y, parse_scaling_model(model));
  std::cout << model << " fit of " << ycol << " vs " << xcol << " over " << x.size()
            << " points\n";
  if (fit.model == ScalingModel::linear)
    std::cout << "N = " << fit.slope << " n + " << fit.intercept << '\n';
  else
    std::cout << "log N = " << fit.slope << " n + " << fit.intercept << '\n';
  std::cout << "R^2 = " << fit.r_squared << '\n';
  return 0;
}

int run_coverage(int n, long length, std::uint64_t seed, const std::string& bits_file) {
  BitSeries s;
  if (!bits_file.empty()) {
    std::ifstream in(bits_file);
    if (!in) throw ConfigError("bits", "cannot read " + bits_file);
    for (int b; in >> b;) s.bits.push_back(b);
  } else {
    s = random_bits(static_cast<std::size_t>(length), seed);
  }
  const auto c = coverage_check(s, n);
  long missing = 0;
  for (long v : c.counts) missing += v == 0;
  std::cout << "bits " << s.size() << "  n " << n << "  patterns " << c.counts.size()
            << "  missing " << missing << "  complete " << (c.complete ? "yes" : "no") << '\n';
  if (n <= 40) std::cout << "expected draws to see every pattern: " << coupon_expectation(n) << '\n';
  return c.complete ? 0 : 4;
}

int run_rerun(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("records", "cannot read " + path);
  int mismatches = 0, checked = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto r = record_from_line(line);
    if (!r.ok()) continue;
    const double again = rerun(r);
    ++checked;
    const bool same = again == r.metric;
    mismatches += !same;
    std::cout << r.experiment_id << " " << cell_tag(r) << ": recorded " << r.metric << " rerun "
              << again << (same ? "  identical" : "  MISMATCH") << '\n';
  }
  std::cout << checked << " records checked, " << mismatches << " mismatches\n";
  return mismatches == 0 ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry-aware reservoir computing experiments"};
  app.set_version_flag("--version", std::string(SYMRC_VERSION));
  app.require_subcommand(1);

  CommonFlags serial, parallel, infer, sweep;
  auto* c_serial = app.add_subcommand("parity-serial", "serial-input parity experiment");
  add_common(c_serial, serial);
  auto* c_parallel = app.add_subcommand("parity-parallel", "tapped-delay parity experiment");
  add_common(c_parallel, parallel);
  auto* c_infer = app.add_subcommand("infer", "Lorenz z-from-(x, y) inference experiment");
  add_common(c_infer, infer);
  auto* c_sweep = app.add_subcommand("sweep", "grid over n, eta_r and N with the stop rule");
  add_common(c_sweep, sweep);

  std::string table, xcol = "n", ycol = "N_all_zero", model = "linear";
  auto* c_fit = app.add_subcommand("fit-scaling", "fit N against n from a table");
  c_fit->add_option("table", table, "tab-separated table with a header row")->required();
  c_fit->add_option("--x", xcol, "x column")->capture_default_str();
  c_fit->add_option("--y", ycol, "y column")->capture_default_str();
  c_fit->add_option("--model", model, "linear | exponential")->capture_default_str();

  int cov_n = 0;
  long cov_length = 1000;
  std::uint64_t cov_seed = 1;
  std::string cov_file;
  auto* c_cov = app.add_subcommand("check-coverage", "does a bit series contain every n-bit pattern");
  c_cov->add_option("-n", cov_n, "parity order")->required();
  c_cov->add_option("--length", cov_length, "random series length")->capture_default_str();
  c_cov->add_option("--seed", cov_seed, "random series seed")->capture_default_str();
  c_cov->add_option("--bits", cov_file, "file of whitespace-separated +1/-1 bits instead");

  std::string records;
  auto* c_rerun = app.add_subcommand("rerun", "recompute metrics from a records file");
  c_rerun->add_option("records", records, "JSON-lines records")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_serial->parsed()) return run_single(serial, kParitySerial);
    if (c_parallel->parsed()) return run_single(parallel, kParityParallel);
    if (c_infer->parsed()) return run_single(infer, kInference);
    if (c_sweep->parsed()) return run_sweep_cmd(sweep);
    if (c_fit->parsed()) return run_fit(table, xcol, ycol, model);
    if (c_cov->parsed()) return run_coverage(cov_n, cov_length, cov_seed, cov_file);
    if (c_rerun->parsed()) return run_rerun(records);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
