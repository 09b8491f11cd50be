// maire: rule explanations for black-box classifiers.
//
//   maire explain  --data D.csv --schema S.json (--label-column y | --predictor-cmd CMD | --oracle JSON)
//                  (--query-row I | --query-json OBJ) [--precision P] [--max-attrs K] ...
//   maire global   --data D.csv --schema S.json <predictor> [--anchors 200] [--budget 10] ...
//   maire synth    rect|circle|two-region|discrete-strip [--precision P] [--lambda2 L] ...
//   maire audit    (--data D.csv --schema S.json <predictor> | --synthetic-dims D) ...
//
// Exit status: 0 success, 2 explanation infeasible, 1 error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "maire/blackbox.hpp"
#include "maire/error.hpp"
#include "maire/global_explain.hpp"
#include "maire/local_explain.hpp"
#include "maire/schema.hpp"
#include "maire/soft_indicator.hpp"
#include "maire/svg.hpp"
#include "maire/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct DataOptions {
  std::string data;
  std::string schema;
  std::string label_column;
  std::string predictor_cmd;
  std::string oracle;
  double predictor_timeout = 30.0;
};

struct ConstantOptions {
  std::optional<double> c1, c2, cl, ch;
  bool lemma = false;
};

struct Options {
  DataOptions data;
  ConstantOptions constants;
  maire::ExplainConfig explain;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  // explain
  std::optional<std::size_t> query_row;
  std::string query_json;
  bool trace = false;

  // global
  std::size_t anchors = 200;
  std::size_t budget = 10;
  std::string method = "msd";
  std::string test_data;

  // synth
  std::string shape;
  std::size_t samples = 5000;
  bool no_snap = false;

  // audit
  std::optional<std::size_t> synthetic_dims;
  std::size_t queries = 100;
  std::string boxes = "explain";
};

void add_data_options(CLI::App* cmd, DataOptions& d, bool required) {
  auto* data = cmd->add_option("--data", d.data, "CSV table with a header row");
  auto* schema = cmd->add_option("--schema", d.schema, "JSON attribute schema");
  if (required) {
    data->required();
    schema->required();
  }
  auto* label = cmd->add_option("--label-column", d.label_column, "Use the stored labels in this column");
  auto* pcmd = cmd->add_option("--predictor-cmd", d.predictor_cmd,
                               "Shell command answering JSON point batches with JSON labels");
  auto* oracle = cmd->add_option("--oracle", d.oracle, "Synthetic oracle shape as inline JSON or a file");
  label->excludes(pcmd)->excludes(oracle);
  pcmd->excludes(oracle);
  cmd->add_option("--predictor-timeout-s", d.predictor_timeout, "Seconds to wait for a predictor reply")
      ->check(CLI::PositiveNumber);
}

void add_optimizer_options(CLI::App* cmd, Options& o) {
  auto& c = o.explain.optimizer;
  cmd->add_option("--precision", c.precision_threshold, "Precision threshold P")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--max-attrs", o.explain.max_attrs, "Keep at most K clauses")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda1", c.lambda1, "Weight of the precision term");
  cmd->add_option("--lambda2", c.lambda2, "Weight of the query containment penalty");
  cmd->add_option("--lr", c.learning_rate, "Adam learning rate");
  cmd->add_option("--iters", c.max_iters, "Maximum optimizer iterations");
  cmd->add_option("--seed", o.seed, "Seed for sampling");
  cmd->add_option("--out-dir", o.out_dir, "Directory for output files");
}

void add_constant_options(CLI::App* cmd, ConstantOptions& k) {
  cmd->add_option("--c1", k.c1, "Soft indicator constant c1 (c3 = 1 - c1)");
  cmd->add_option("--c2", k.c2, "Soft indicator slope c2");
  cmd->add_option("--cl", k.cl, "Upper-bound offset cl");
  cmd->add_option("--ch", k.ch, "Soft AND threshold ch");
  cmd->add_flag("--lemma-constants", k.lemma, "Scale c1 and ch to the dimension");
}

maire::ApproxConstants make_constants(const ConstantOptions& o, std::size_t dims) {
  maire::ApproxConstants k = o.lemma ? maire::ApproxConstants::lemma_scaled(dims) : maire::ApproxConstants{};
  if (o.c1 || o.c2 || o.cl || o.ch) {
    k = maire::ApproxConstants::with(o.c1.value_or(k.c1), o.c2.value_or(k.c2), o.cl.value_or(k.cl),
                                     o.ch.value_or(k.ch));
  }
  k.validate();
  return k;
}

json read_json_arg(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw maire::ArgumentError(fmt::format("invalid JSON argument: {}", e.what()));
    }
  }
  std::ifstream in(text);
  if (!in) throw maire::ArgumentError(fmt::format("cannot open '{}'", text));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw maire::ArgumentError(fmt::format("'{}': {}", text, e.what()));
  }
}

struct Dataset {
  maire::RawTable table;
  maire::EncodedSpace space;
  std::unique_ptr<maire::PredictionProvider> provider;
};

Dataset load_dataset(const DataOptions& d) {
  const int sources = !d.label_column.empty() + !d.predictor_cmd.empty() + !d.oracle.empty();
  if (sources != 1) {
    throw maire::ArgumentError("exactly one of --label-column, --predictor-cmd, --oracle is required");
  }
  const auto schema = maire::load_schema(d.schema);
  Dataset ds;
  ds.table = maire::load_table(d.data, schema, d.label_column);
  ds.space = maire::encode(ds.table, maire::fit_schema(schema, ds.table));
  if (!d.label_column.empty()) {
    ds.provider = std::make_unique<maire::StoredColumnProvider>(ds.space.matrix(), ds.table.labels);
  } else if (!d.predictor_cmd.empty()) {
    ds.provider = std::make_unique<maire::ExternalCommandProvider>(d.predictor_cmd, d.predictor_timeout);
  } else {
    ds.provider = std::make_unique<maire::SyntheticOracle>(maire::SyntheticShape::from_json(read_json_arg(d.oracle)));
  }
  return ds;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw maire::ArgumentError(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw maire::ArgumentError(fmt::format("cannot write '{}'", path.string()));
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw maire::ArgumentError(fmt::format("cannot create output directory '{}': {}", dir, ec.message()));
  return p;
}

std::string trace_jsonl(const maire::OptimizationTrace& trace) {
  std::string out;
  for (const auto& r : trace.records) out += maire::to_json(r).dump() + "\n";
  json tail{{"termination", trace.termination == maire::Termination::converged ? "converged" : "iteration_cap"},
            {"best_iteration", trace.best_iteration}};
  out += tail.dump() + "\n";
  return out;
}

void print_explanation(const maire::Explanation& e) {
  fmt::print("{}\n", maire::render_rule(e));
  fmt::print("label {}  coverage {:.4f}  precision {}  {}\n", e.query_label, e.coverage,
             e.precision ? fmt::format("{:.4f}", *e.precision) : std::string("undefined"),
             e.feasible ? "feasible" : "infeasible");
}

int cmd_explain(const Options& o) {
  if (o.query_row.has_value() == !o.query_json.empty()) {
    throw maire::ArgumentError("exactly one of --query-row, --query-json is required");
  }
  auto ds = load_dataset(o.data);
  maire::RawRow query;
  if (o.query_row) {
    if (*o.query_row >= ds.table.size()) {
      throw maire::ArgumentError(fmt::format("--query-row {} is out of range ({} rows)", *o.query_row, ds.table.size()));
    }
    query = ds.table.rows[*o.query_row];
  } else {
    query = maire::parse_instance(read_json_arg(o.query_json), ds.space.schema());
  }
  const auto k = make_constants(o.constants, ds.space.dims());
  auto cfg = o.explain;
  cfg.optimizer.seed = o.seed;

  maire::OptimizationTrace trace;
  maire::Explanation e;
  if (o.query_row && !o.data.label_column.empty()) {
    e = maire::explain(ds.space.matrix().row(*o.query_row), ds.table.labels[*o.query_row], ds.space,
                       ds.table.labels, cfg, k, &trace);
  } else {
    e = maire::explain(query, ds.space, *ds.provider, cfg, k, &trace);
  }
  const auto dir = prepare_out_dir(o.out_dir);
  auto doc = maire::to_json(e);
  doc["constants"] = maire::to_json(k);
  if (o.trace) {
    write_file(dir / "trace.jsonl", trace_jsonl(trace));
    doc["trace"] = "trace.jsonl";
  }
  write_file(dir / "explanation.json", doc.dump(2) + "\n");
  write_file(dir / "rule.txt", maire::render_rule(e) + "\n");
  print_explanation(e);
  return e.feasible ? kExitOk : kExitInfeasible;
}

int cmd_global(const Options& o) {
  if (o.method != "msd" && o.method != "rp" && o.method != "both") {
    throw maire::ArgumentError("--method must be msd, rp or both");
  }
  auto ds = load_dataset(o.data);
  const auto k = make_constants(o.constants, ds.space.dims());
  const auto labels = maire::predict_batch(*ds.provider, ds.space.matrix(), ds.space.dims());
  const auto anchors = maire::sample_anchors(ds.space.matrix().rows(), o.anchors, o.seed);
  auto candidates = maire::explain_anchors(ds.space, labels, anchors, o.explain, k, o.threads);

  maire::Matrix test = ds.space.matrix();
  std::vector<int> test_labels = labels;
  if (!o.test_data.empty()) {
    const auto table = maire::load_table(o.test_data, ds.space.schema());
    maire::EncodedSpace space(ds.space.schema());
    for (const auto& row : table.rows) space.append(row);
    test = space.matrix();
    test_labels = maire::predict_batch(*ds.provider, test, ds.space.dims());
  }

  const auto dir = prepare_out_dir(o.out_dir);
  auto emit = [&](maire::GlobalExplanation g, const std::string& tag) {
    g.anchor_set = anchors;
    g.curves = maire::evaluate_curves(g, test, test_labels);
    write_file(dir / fmt::format("global_{}.json", tag), maire::to_json(g).dump(2) + "\n");
    write_file(dir / fmt::format("curves_{}.csv", tag), maire::curves_csv(g.curves));
    fmt::print("{}: {} members", tag, g.members.size());
    if (!g.curves.empty()) {
      const auto& last = g.curves.back();
      fmt::print(", coverage {:.4f}, precision {}", last.coverage,
                 last.precision ? fmt::format("{:.4f}", *last.precision) : std::string("undefined"));
    }
    fmt::print("\n");
  };
  if (o.method != "rp") emit(maire::msd_select(candidates, ds.space.matrix(), o.budget), "msd");
  if (o.method != "msd") emit(maire::rp_select(candidates, ds.space.matrix(), o.budget, o.seed), "rp");
  return kExitOk;
}

int cmd_synth(const Options& o) {
  const auto scenario = maire::make_scenario(o.shape);
  const auto data = maire::sample_scenario(scenario, o.samples, o.seed);
  const auto k = make_constants(o.constants, data.space.dims());
  auto cfg = o.explain;
  cfg.optimizer.seed = o.seed;
  cfg.optimizer.snap_containment = !o.no_snap;
  const int query_label = maire::SyntheticOracle(scenario.shape)(scenario.query);

  maire::OptimizationTrace trace;
  const auto e = maire::explain(scenario.query, query_label, data.space, data.labels, cfg, k, &trace);
  const auto dir = prepare_out_dir(o.out_dir);
  write_file(dir / (scenario.name + ".svg"), maire::render_svg(scenario.shape, scenario.schema, e.bounds, e.query));
  auto doc = maire::to_json(e);
  doc["shape"] = scenario.shape.to_json();
  doc["samples"] = o.samples;
  doc["seed"] = o.seed;
  if (o.trace) {
    write_file(dir / (scenario.name + "_trace.jsonl"), trace_jsonl(trace));
    doc["trace"] = scenario.name + "_trace.jsonl";
  }
  write_file(dir / (scenario.name + ".json"), doc.dump(2) + "\n");
  print_explanation(e);
  return e.feasible ? kExitOk : kExitInfeasible;
}

int cmd_audit(const Options& o) {
  if (o.boxes != "explain" && o.boxes != "random") throw maire::ArgumentError("--boxes must be explain or random");
  maire::EncodedSpace space;
  std::vector<int> labels;
  if (o.synthetic_dims) {
    if (!o.data.data.empty()) throw maire::ArgumentError("--synthetic-dims and --data are exclusive");
    const std::size_t d = *o.synthetic_dims;
    if (d < 1) throw maire::ArgumentError("--synthetic-dims must be at least 1");
    if (o.samples < 1) throw maire::ArgumentError("dataset is empty");
    maire::Schema schema;
    for (std::size_t j = 0; j < d; ++j) {
      schema.push_back(maire::AttributeSchema::continuous(fmt::format("x{}", j + 1), std::pair{0.0, 1.0}));
    }
    space = maire::EncodedSpace(schema);
    const auto points = maire::uniform_points(o.samples, d, o.seed);
    for (std::size_t i = 0; i < points.rows(); ++i) {
      space.append_encoded(points.row(i));
      labels.push_back(points(i, 0) < 0.5 ? 1 : 0);
    }
  } else {
    if (o.data.data.empty() || o.data.schema.empty()) {
      throw maire::ArgumentError("either --synthetic-dims or --data with --schema is required");
    }
    auto ds = load_dataset(o.data);
    labels = maire::predict_batch(*ds.provider, ds.space.matrix(), ds.space.dims());
    space = std::move(ds.space);
  }
  const auto& points = space.matrix();
  if (points.rows() == 0) throw maire::ArgumentError("dataset is empty");
  const std::size_t dims = space.dims();
  const auto k = make_constants(o.constants, dims);

  std::vector<maire::BoxBounds> boxes;
  std::vector<int> query_labels;
  std::mt19937_64 rng(o.seed);
  if (o.boxes == "random") {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, points.rows() - 1);
    for (std::size_t q = 0; q < o.queries; ++q) {
      maire::BoxBounds b;
      for (std::size_t j = 0; j < dims; ++j) {
        const double a = unit(rng), c = unit(rng);
        b.lower.push_back(std::min(a, c));
        b.upper.push_back(std::max(a, c));
      }
      boxes.push_back(std::move(b));
      query_labels.push_back(labels[pick(rng)]);
    }
  } else {
    const auto anchors = maire::sample_anchors(points.rows(), o.queries, o.seed);
    const auto expl = maire::explain_anchors(space, labels, anchors, o.explain, k, o.threads);
    for (const auto& e : expl) {
      boxes.push_back(e.bounds);
      query_labels.push_back(e.query_label);
    }
  }

  double se_cov = 0.0, se_pre = 0.0;
  std::size_t pre_pairs = 0, cov_viol = 0, pre_checked = 0, pre_viol = 0;
  json per_box = json::array();
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const auto a = maire::audit_bounds(boxes[b], points, labels, query_labels[b], k);
    se_cov += (a.coverage - a.coverage_hat) * (a.coverage - a.coverage_hat);
    if (a.precision) {
      se_pre += (*a.precision - a.precision_hat) * (*a.precision - a.precision_hat);
      ++pre_pairs;
    }
    cov_viol += a.coverage_violated();
    pre_checked += a.precision_checked && a.precision_hypothesis;
    pre_viol += a.precision_violated();
    per_box.push_back(maire::to_json(a));
  }

  json report{
      {"dims", dims},
      {"rows", points.rows()},
      {"boxes", o.boxes},
      {"queries", boxes.size()},
      {"constants", maire::to_json(k)},
      {"coverage_bound_hypothesis", k.satisfies_coverage_bound(dims) ? "met" : "unmet"},
      {"membership_bound_hypothesis", k.satisfies_membership_bound(dims) ? "met" : "unmet"},
      {"mse_coverage", boxes.empty() ? 0.0 : se_cov / static_cast<double>(boxes.size())},
      {"mse_precision", pre_pairs ? json(se_pre / static_cast<double>(pre_pairs)) : json(nullptr)},
      {"precision_pairs", pre_pairs},
      {"coverage_bound_violations", cov_viol},
      {"precision_bound_checked", pre_checked},
      {"precision_bound_violations", pre_viol},
  };
  const auto dir = prepare_out_dir(o.out_dir);
  auto full = report;
  full["audits"] = std::move(per_box);
  write_file(dir / "audit.json", full.dump(2) + "\n");
  fmt::print("{}\n", report.dump(2));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule explanations for black-box classifiers"};
  app.require_subcommand(1);
  Options o;

  auto* explain = app.add_subcommand("explain", "Explain one query");
  add_data_options(explain, o.data, true);
  add_optimizer_options(explain, o);
  add_constant_options(explain, o.constants);
  explain->add_option("--query-row", o.query_row, "Row of the table to explain");
  explain->add_option("--query-json", o.query_json, "Instance to explain as a JSON object or file");
  explain->add_flag("--trace", o.trace, "Write per-iteration records to trace.jsonl");

  auto* global = app.add_subcommand("global", "Compose local explanations into a global one");
  add_data_options(global, o.data, true);
  add_optimizer_options(global, o);
  add_constant_options(global, o.constants);
  global->add_option("--anchors", o.anchors, "Number of anchor rows to explain");
  global->add_option("--budget", o.budget, "Maximum number of members")->check(CLI::PositiveNumber);
  global->add_option("--method", o.method, "msd, rp or both");
  global->add_option("--test-data", o.test_data, "CSV to evaluate the curves on (default: --data)");
  global->add_option("--threads", o.threads, "Worker threads for anchor explanations")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Explain a 2D synthetic problem and plot it");
  synth->add_option("shape", o.shape, "rect, circle, two-region or discrete-strip")->required();
  add_optimizer_options(synth, o);
  add_constant_options(synth, o.constants);
  synth->add_option("--samples", o.samples, "Number of sampled points");
  synth->add_flag("--no-snap", o.no_snap, "Skip the final query containment snap");
  synth->add_flag("--trace", o.trace, "Write per-iteration records");

  auto* audit = app.add_subcommand("audit", "Compare exact and soft measures and audit the bounds");
  add_data_options(audit, o.data, false);
  add_optimizer_options(audit, o);
  add_constant_options(audit, o.constants);
  audit->add_option("--synthetic-dims", o.synthetic_dims, "Use uniform synthetic data of this dimension");
  audit->add_option("--samples", o.samples, "Rows of synthetic data");
  audit->add_option("--queries", o.queries, "Number of audited boxes");
  audit->add_option("--boxes", o.boxes, "explain: explanations of random rows; random: random boxes");
  audit->add_option("--threads", o.threads, "Worker threads for explanations")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*explain) return cmd_explain(o);
    if (*global) return cmd_global(o);
    if (*synth) return cmd_synth(o);
    if (*audit) {
      if (audit->count("--samples") == 0) o.samples = 1000;
      return cmd_audit(o);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "maire: error: " << msg << "\n";
    return kExitError;
  }
  return kExitError;
}
