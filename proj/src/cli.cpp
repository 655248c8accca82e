#include "dasim/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dasim/das_model.hpp"
#include "dasim/discovery.hpp"
#include "dasim/errors.hpp"
#include "dasim/event_log.hpp"
#include "dasim/metrics.hpp"
#include "dasim/scenario_gen.hpp"
#include "dasim/sim_engine.hpp"

namespace dasim::cli {
namespace {

using Clock = std::chrono::steady_clock;

class Timer {
 public:
  Timer(RunReport& r, std::string phase) : r_(r), phase_(std::move(phase)), t0_(Clock::now()) {}
  ~Timer() { r_.timings[phase_] = std::chrono::duration<double>(Clock::now() - t0_).count(); }

 private:
  RunReport& r_;
  std::string phase_;
  Clock::time_point t0_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

struct Options {
  std::string log, other, model, das, out, report, spec, train, test;
  std::uint64_t seed = 0;
  std::size_t cases = 2000;
  double threshold = 0.9;
  std::size_t min_samples = 30;
  std::size_t policy_min_samples = 50;
  bool no_data = false;
  bool sparse = false;
  std::string metrics = "emd,ks,ngram";
  int ngram_n = 3;
  double ratio = 0.5;
  std::string pattern, placement = "SE";
  double noise = 0.0;
};

void cmd_discover(const Options& o, RunReport& r) {
  r.inputs = {{"log", o.log}, {"model", o.model}};
  r.config = {{"threshold", o.threshold},
              {"min_samples", o.min_samples},
              {"policy_min_samples", o.policy_min_samples},
              {"no_data", o.no_data}};
  EventLog log;
  ProcessModel process;
  std::optional<DASModel> tmpl;
  {
    Timer t(r, "load");
    log = parse_log_file(o.log);
    auto text = read_file(o.model);
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      auto j = nlohmann::json::parse(text, nullptr, false);
      if (j.is_discarded()) throw SchemaError("model file is not valid JSON");
      if (j.contains("das_version")) {
        tmpl = das_from_json(j);
        process = tmpl->process;
      } else {
        process = process_from_json(j);
      }
    } else {
      process = parse_model(text);
    }
  }
  DiscoveryOptions opts;
  if (o.threshold <= 0.0 || o.threshold > 1.0) throw ArgumentError("--threshold must lie in (0, 1]");
  opts.case_threshold = o.threshold;
  opts.classification.min_samples = o.min_samples;
  opts.policy.min_samples = o.policy_min_samples;
  opts.policy.no_data = o.no_data;
  DiscoveryResult res;
  {
    Timer t(r, "discover");
    res = discover(log, process, tmpl, opts);
  }
  r.warnings.insert(r.warnings.end(), res.report.warnings.begin(), res.report.warnings.end());
  r.details = to_json(res.report);
  save_das_file(o.out, res.model);
  r.outputs["das"] = o.out;
  std::cout << "discovered " << res.model.attributes.size() << " attributes, "
            << res.model.rules.size() << " rules, " << res.model.policies.size()
            << " gateway policies -> " << o.out << '\n';
}

void cmd_simulate(const Options& o, RunReport& r) {
  r.inputs = {{"das", o.das}};
  r.config = {{"cases", o.cases}, {"seed", o.seed}, {"sparse", o.sparse}};
  if (o.cases == 0) throw ArgumentError("--cases must be positive");
  DASModel m = load_das_file(o.das);
  SimConfig cfg;
  cfg.n_cases = o.cases;
  cfg.seed = o.seed;
  cfg.sparse_output = o.sparse;
  SimResult res;
  {
    Timer t(r, "simulate");
    res = simulate(m, cfg);
  }
  write_log_file(o.out, res.log);
  r.outputs["log"] = o.out;
  r.details = {{"cases", res.stats.cases},
               {"events", res.stats.events},
               {"skipped_rules", res.stats.skipped_rules},
               {"unknown_markov_states", res.stats.unknown_markov_states}};
  if (res.stats.skipped_rules > 0)
    r.warnings.push_back(std::to_string(res.stats.skipped_rules) +
                         " rule applications produced non-finite values and were skipped");
  std::cout << "simulated " << res.stats.cases << " cases, " << res.stats.events << " events -> "
            << o.out << '\n';
}

std::set<std::string> parse_metrics(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item != "emd" && item != "ks" && item != "ngram")
      throw ArgumentError("unknown metric '" + item + "'");
    out.insert(item);
  }
  return out;
}

void cmd_evaluate(const Options& o, RunReport& r) {
  r.inputs = {{"log", o.log}, {"other", o.other}};
  r.config = {{"metrics", o.metrics}, {"ngram_n", o.ngram_n}};
  auto wanted = parse_metrics(o.metrics);
  if (o.ngram_n < 1) throw ArgumentError("--ngram-n must be positive");
  EventLog a = parse_log_file(o.log), b = parse_log_file(o.other);
  Timer t(r, "evaluate");
  nlohmann::json attrs = nlohmann::json::object();
  for (const auto& [name, kind] : a.schema()) {
    auto it = b.schema().find(name);
    if (it == b.schema().end()) continue;
    if (it->second != kind) {
      r.warnings.push_back("attribute '" + name + "' has different kinds in the two logs");
      continue;
    }
    std::vector<Value> va, vb;
    for (const auto& e : a.events())
      if (auto f = e.attributes.find(name); f != e.attributes.end()) va.push_back(f->second);
    for (const auto& e : b.events())
      if (auto f = e.attributes.find(name); f != e.attributes.end()) vb.push_back(f->second);
    if (va.empty() || vb.empty()) continue;
    nlohmann::json m = nlohmann::json::object();
    if (wanted.count("emd") && kind == AttrKind::Numeric) {
      std::vector<double> da, db;
      for (const auto& v : va) da.push_back(as_number(v));
      for (const auto& v : vb) db.push_back(as_number(v));
      m["emd"] = emd_1d(da, db);
    }
    if (wanted.count("ks")) m["ks"] = ks_stat(va, vb);
    if (!m.empty()) attrs[name] = m;
  }
  nlohmann::json result{{"attributes", attrs}};
  if (wanted.count("ngram"))
    result["ngram"] = {{"n", o.ngram_n}, {"distance", ngram_distance(a, b, o.ngram_n)}};
  r.details = result;
  if (!o.out.empty()) {
    write_json(o.out, result);
    r.outputs["metrics"] = o.out;
  }
  std::cout << result.dump(2) << '\n';
}

void cmd_split(const Options& o, RunReport& r) {
  r.inputs = {{"log", o.log}};
  r.config = {{"ratio", o.ratio}};
  if (!(o.ratio > 0.0 && o.ratio < 1.0)) throw ArgumentError("--ratio must lie in (0, 1)");
  EventLog log = parse_log_file(o.log);
  auto [train, test] = split_temporal(log, o.ratio);
  write_log_file(o.train, train);
  write_log_file(o.test, test);
  r.outputs = {{"train", o.train}, {"test", o.test}};
  auto n = [](const EventLog& l) { return traces(l).size(); };
  r.details = {{"train_traces", n(train)}, {"test_traces", n(test)}};
  std::cout << "split " << n(train) << " / " << n(test) << " traces\n";
}

void cmd_scenario(const Options& o, RunReport& r) {
  nlohmann::json spec;
  if (!o.spec.empty()) {
    spec = nlohmann::json::parse(read_file(o.spec), nullptr, false);
    if (spec.is_discarded()) throw SchemaError("scenario spec is not valid JSON");
  } else {
    if (o.pattern.empty()) throw ArgumentError("scenario needs --spec or --pattern");
    spec = {{"type", "attribute"}, {"pattern", o.pattern}, {"placement", o.placement},
            {"noise", o.noise},    {"seed", o.seed}};
  }
  r.inputs = {{"spec", spec}};
  r.config = {{"cases", o.cases}, {"seed", o.seed}};
  if (o.cases == 0) throw ArgumentError("--cases must be positive");
  const std::string type = spec.value("type", std::string("attribute"));
  nlohmann::json manifest{{"type", type}, {"cases", o.cases}, {"seed", o.seed}};
  DASModel model;
  EventLog log;
  Timer t(r, "generate");
  if (type == "attribute") {
    auto ps = pattern_spec_from_json(spec);
    auto sc = build_attribute_scenario(ps, base_attribute_model());
    log = generate_attribute_log(sc, o.cases, o.seed);
    model = sc.model;
    manifest["spec"] = to_json(ps);
    manifest["truth"] = to_json(sc.truth);
  } else if (type == "condition") {
    auto cs = condition_scenario_from_json(spec);
    auto [m, truth] = build_condition_scenario(cs);
    SimConfig cfg;
    cfg.n_cases = o.cases;
    cfg.seed = o.seed;
    log = simulate(m, cfg).log;
    model = std::move(m);
    manifest["spec"] = to_json(cs);
    nlohmann::json pols = nlohmann::json::object();
    for (const auto& [gw, p] : truth.policies) {
      nlohmann::json flows = nlohmann::json::array();
      for (const auto& fp : p.flows)
        flows.push_back({{"flow", fp.flow}, {"condition", to_json(fp.condition)},
                         {"probability", fp.probability}});
      pols[gw] = flows;
    }
    manifest["truth"] = {{"policies", pols}, {"params", truth.params}};
  } else {
    throw ArgumentError("scenario type must be 'attribute' or 'condition'");
  }
  write_log_file(o.out, log);
  const std::string model_path = o.out + ".das.json";
  const std::string manifest_path = o.out + ".manifest.json";
  save_das_file(model_path, model);
  manifest["log"] = o.out;
  manifest["model"] = model_path;
  write_json(manifest_path, manifest);
  r.outputs = {{"log", o.out}, {"model", model_path}, {"manifest", manifest_path}};
  std::cout << "generated " << traces(log).size() << " cases -> " << o.out << '\n';
}

int exit_code_of(const std::exception& e) {
  if (dynamic_cast<const ReplayError*>(&e)) return kReplay;
  if (dynamic_cast<const DeadlockError*>(&e)) return kDeadlock;
  if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const RowError*>(&e) ||
      dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
      dynamic_cast<const ImmutableAttributeError*>(&e) ||
      dynamic_cast<const nlohmann::json::exception*>(&e))
    return kInvalid;
  return kFailure;
}

}  // namespace

nlohmann::json to_json(const RunReport& r) {
  return {{"command", r.command},   {"inputs", r.inputs},   {"config", r.config},
          {"timings", r.timings},   {"warnings", r.warnings}, {"outputs", r.outputs},
          {"details", r.details},   {"exit_code", r.exit_code}, {"error", r.error}};
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Data-aware business process simulation: discovery, simulation, evaluation"};
  app.require_subcommand(1);
  Options o;

  auto* disc = app.add_subcommand("discover", "Discover a data-aware simulation model");
  disc->add_option("--log", o.log, "Event log CSV")->required();
  disc->add_option("--model", o.model, "Process model (JSON, BPMN XML or DAS JSON)")->required();
  disc->add_option("--out", o.out, "Output DAS JSON")->required();
  disc->add_option("--threshold", o.threshold, "Case-attribute constancy threshold");
  disc->add_option("--min-samples", o.min_samples, "Minimum pairs per activity for scope scoring");
  disc->add_option("--policy-min-samples", o.policy_min_samples,
                   "Minimum observations per gateway for condition learning");
  disc->add_flag("--no-data", o.no_data, "Emit the data-unaware baseline");
  disc->add_option("--seed", o.seed, "Random seed");

  auto* sim = app.add_subcommand("simulate", "Simulate a DAS model");
  sim->add_option("--das", o.das, "DAS JSON")->required();
  sim->add_option("--out", o.out, "Output log CSV")->required();
  sim->add_option("--cases", o.cases, "Number of cases");
  sim->add_option("--seed", o.seed, "Random seed");
  sim->add_flag("--sparse", o.sparse, "Only emit attributes written by each event");

  auto* eval = app.add_subcommand("evaluate", "Compare two logs");
  eval->add_option("--log", o.log, "First log CSV")->required();
  eval->add_option("--other", o.other, "Second log CSV")->required();
  eval->add_option("--out", o.out, "Metrics JSON");
  eval->add_option("--metrics", o.metrics, "Comma-separated subset of emd,ks,ngram");
  eval->add_option("--ngram-n", o.ngram_n, "n-gram length");

  auto* split = app.add_subcommand("split", "Temporal train/test split");
  split->add_option("--log", o.log, "Event log CSV")->required();
  split->add_option("--ratio", o.ratio, "Share of traces for training");
  split->add_option("--train", o.train, "Training log CSV")->required();
  split->add_option("--test", o.test, "Test log CSV")->required();

  auto* scen = app.add_subcommand("scenario", "Generate a synthetic scenario log");
  scen->add_option("--spec", o.spec, "Scenario spec JSON");
  scen->add_option("--pattern", o.pattern, "Attribute pattern code");
  scen->add_option("--placement", o.placement, "SE, ME, SG or MG");
  scen->add_option("--noise", o.noise, "Noise level");
  scen->add_option("--cases", o.cases, "Number of cases");
  scen->add_option("--seed", o.seed, "Random seed");
  scen->add_option("--out", o.out, "Output log CSV")->required();

  for (auto* sc : {disc, sim, eval, split, scen})
    sc->add_option("--report", o.report, "Run report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  RunReport r;
  r.command = app.get_subcommands().front()->get_name();
  auto t0 = Clock::now();
  try {
    if (r.command == "discover") cmd_discover(o, r);
    else if (r.command == "simulate") cmd_simulate(o, r);
    else if (r.command == "evaluate") cmd_evaluate(o, r);
    else if (r.command == "split") cmd_split(o, r);
    else cmd_scenario(o, r);
  } catch (const std::exception& e) {
    r.exit_code = exit_code_of(e);
    r.error = e.what();
    std::cerr << "error: " << e.what() << '\n';
  }
  r.timings["total"] = std::chrono::duration<double>(Clock::now() - t0).count();
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';

  std::string report_path = o.report;
  if (report_path.empty()) {
    if (!o.out.empty()) report_path = o.out + ".report.json";
    else if (!o.train.empty()) report_path = o.train + ".report.json";
    else report_path = "report.json";
  }
  try {
    write_json(report_path, to_json(r));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (r.exit_code == kOk) r.exit_code = kInvalid;
  }
  return r.exit_code;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"dasim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace dasim::cli
