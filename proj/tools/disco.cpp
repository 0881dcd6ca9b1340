#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "disco/annotation/annotation.hpp"
#include "disco/backend/backend.hpp"
#include "disco/common/paths.hpp"
#include "disco/common/text.hpp"
#include "disco/config/config.hpp"
#include "disco/corpus/corpus.hpp"
#include "disco/disfluency/disfluency.hpp"
#include "disco/eval/eval.hpp"
#include "disco/metrics/metrics.hpp"
#include "disco/scenario/scenario.hpp"
#include "disco/sim/sim.hpp"

namespace fs = std::filesystem;
using namespace disco;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage:
      return 1;
    case ErrorCategory::data:
      return 2;
    case ErrorCategory::backend:
      return 3;
  }
  return 2;
}

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage:
      return "usage";
    case ErrorCategory::data:
      return "data";
    case ErrorCategory::backend:
      return "backend";
  }
  return "data";
}

struct Globals {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string data_dir;
  std::string backend_kind;
  std::string endpoint;
  std::string model;
  bool json_errors = false;
  bool print_config = false;

  config::PipelineConfig cfg;

  void load() {
    const fs::path data = data_dir.empty() ? default_data_dir() : fs::path(data_dir);
    cfg = config_file.empty() ? config::default_config(data) : config::load_config(config_file, data);
    if (!data_dir.empty() && !config_file.empty()) {
      const auto keep = cfg;
      cfg = config::default_config(data);
      cfg.backend = keep.backend;
      cfg.scenario_counts = keep.scenario_counts;
      cfg.simulation = keep.simulation;
      cfg.schedule = keep.schedule;
      cfg.jobs = keep.jobs;
      cfg.seeds = keep.seeds;
      cfg.paths.output_dir = keep.paths.output_dir;
    }
    if (jobs) cfg.jobs = *jobs;
    if (seed) cfg.seeds.seed = seed;
    if (!backend_kind.empty()) {
      Json b = backend::to_json(cfg.backend);
      b["kind"] = backend_kind;
      cfg.backend = backend::backend_config_from_json(b);
    }
    if (!endpoint.empty()) cfg.backend.endpoint_url = endpoint;
    if (!model.empty()) cfg.backend.model_name = model;
    cfg.validate();
  }

  std::uint64_t require_seed(const std::string& stage) const {
    if (seed) return *seed;
    if (const auto s = cfg.seeds.for_stage(stage)) return *s;
    throw ArgumentError("--seed is required for " + stage);
  }
};

disfluency::LexiconSet lexicons(const Globals& g) { return disfluency::load_lexicons(g.cfg.paths.lexicon_dir); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = text::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

Corpus read_any(const std::string& path, const std::string& format, const std::string& split) {
  if (format == "jsonl") return read_corpus(fs::path(path));
  if (format == "kvret") return eval::read_kvret(path, split);
  if (format == "multiwoz") return eval::read_multiwoz(path, split);
  if (format == "sgd") return eval::read_sgd(path, split);
  throw ArgumentError("unknown input format \"" + format + "\"");
}

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

// -- subcommands ------------------------------------------------------------------

struct ScenariosArgs {
  std::string out;
  std::string domain;
  int count = -1;
  int batch = 10;
};

int run_scenarios(Globals& g, const ScenariosArgs& a) {
  const auto seed = g.require_seed("scenarios");
  std::map<DomainTag, int> counts = g.cfg.scenario_counts;
  if (!a.domain.empty()) {
    const auto d = parse_domain(a.domain);
    counts = {{d, a.count >= 0 ? a.count : counts[d]}};
  } else if (a.count >= 0) {
    for (auto& [d, n] : counts) n = a.count;
  }
  auto backend = backend::make_backend(g.cfg.backend);
  scenario::ScenarioGenOptions opts;
  opts.batch_size = a.batch;
  std::vector<Scenario> all;
  for (const auto& [domain, n] : counts) {
    const auto bank = scenario::load_fewshot_bank(g.cfg.paths.fewshot_dir, domain);
    auto got = scenario::generate_scenarios(*backend, bank, static_cast<std::size_t>(n),
                                            derive_seed(seed, to_string(domain)), opts);
    all.insert(all.end(), got.begin(), got.end());
  }
  write_scenarios(all, a.out);
  std::cerr << "wrote " << all.size() << " scenarios to " << a.out << '\n';
  return 0;
}

struct SimulateArgs {
  std::string scenarios;
  std::string out;
  int length = 0;
  std::string schedule;
  int history_window = 0;
  std::string failures;
};

int run_simulate(Globals& g, const SimulateArgs& a) {
  const auto seed = g.require_seed("simulate");
  sim::GenerationPlan plan;
  plan.scenarios = read_scenarios(a.scenarios);
  plan.simulation = g.cfg.simulation;
  if (a.history_window > 0) plan.simulation.history_window = a.history_window;
  plan.schedule = a.schedule.empty() ? g.cfg.schedule : sim::parse_length_schedule(a.schedule);
  if (a.length > 0) plan.fixed_length = a.length;
  plan.seed = seed;
  plan.jobs = g.cfg.jobs;
  auto backend = backend::make_backend(g.cfg.backend);
  const auto templates = sim::load_templates(g.cfg.paths.prompts_dir);
  const auto result = sim::generate_corpus(plan, *backend, lexicons(g), templates);
  write_corpus(result.corpus, fs::path(a.out));
  if (!a.failures.empty()) {
    std::ofstream f(a.failures, std::ios::binary | std::ios::trunc);
    for (const auto& fail : result.failures) f << sim::to_json(fail).dump() << '\n';
  }
  std::cerr << "wrote " << result.corpus.dialogs.size() << " dialogs to " << a.out << '\n';
  if (!result.failures.empty()) {
    throw BackendUnavailableError(std::to_string(result.failures.size()) + " of " +
                                  std::to_string(plan.scenarios.size()) + " dialogs failed; first: " +
                                  result.failures.front().message);
  }
  return 0;
}

struct InjectArgs {
  std::string in;
  std::string out;
  double rate = 0.5;
  std::string ops = "repetition,replacement,restart";
  double cue_probability = 0.8;
  bool invert = false;
};

int run_inject(Globals& g, const InjectArgs& a) {
  const Corpus corpus = read_corpus(fs::path(a.in));
  if (a.invert) {
    write_corpus(disfluency::invert_corpus(corpus), fs::path(a.out));
    return 0;
  }
  const auto seed = g.require_seed("inject");
  disfluency::InjectionPlan plan;
  plan.rate = a.rate;
  plan.replacement.cue_probability = a.cue_probability;
  plan.weights = {0.0, 0.0, 0.0};
  for (const auto& op : split_list(a.ops)) plan.weights[static_cast<std::size_t>(disfluency::parse_injection_op(op))] = 1.0;
  const auto result = disfluency::inject_corpus(corpus, plan, lexicons(g), seed);
  write_corpus(result.corpus, fs::path(a.out));
  std::cerr << "modified " << result.modified << " driver turns, skipped " << result.skipped << '\n';
  return 0;
}

int run_tag(Globals& g, const std::string& in, const std::string& out) {
  Corpus corpus = read_corpus(fs::path(in));
  disfluency::tag_corpus(corpus, lexicons(g));
  write_corpus(corpus, fs::path(out));
  return 0;
}

struct DistinctArgs {
  std::vector<std::string> corpora;
  std::vector<std::string> names;
  int n = 4;
  std::string speaker = "all";
  std::string format = "jsonl";
  bool json = false;
};

int run_distinct(Globals&, const DistinctArgs& a) {
  if (!a.names.empty() && a.names.size() != a.corpora.size()) {
    throw ArgumentError("--names needs one name per corpus");
  }
  if (a.speaker != "all" && a.speaker != "driver" && a.speaker != "car_ai") {
    throw ArgumentError("--speaker must be all, driver or car_ai");
  }
  std::vector<metrics::DistinctColumn> columns;
  for (std::size_t i = 0; i < a.corpora.size(); ++i) {
    const Corpus c = read_any(a.corpora[i], a.format, "train");
    metrics::DistinctColumn col;
    col.name = a.names.empty() ? fs::path(a.corpora[i]).stem().string() : a.names[i];
    for (const auto& d : c.dialogs) {
      for (const auto& t : d.turns) {
        if (a.speaker != "all" && to_string(t.speaker) != a.speaker) continue;
        col.utterances.push_back(text::metric_tokens(t.text));
      }
    }
    columns.push_back(std::move(col));
  }
  if (a.json) {
    Json j = Json::object();
    for (const auto& col : columns) {
      Json vals = Json::array();
      for (int n = 1; n <= a.n; ++n) vals.push_back(metrics::distinct_n(col.utterances, n));
      j[col.name] = vals;
    }
    print_json(j);
  } else {
    std::cout << metrics::render_distinct_table(columns, a.n);
  }
  return 0;
}

struct SampleArgs {
  std::string protocol = "discodrive";
  std::string corpus;
  std::string train, valid, test;
  std::string format = "jsonl";
  std::string out;
  int per_stratum = 4;
  int n_train = 100, n_valid = 20, n_test = 20;
};

int run_sample(Globals& g, const SampleArgs& a) {
  const auto seed = g.require_seed("sample");
  Corpus out;
  if (a.protocol == "discodrive") {
    if (a.corpus.empty()) throw ArgumentError("--corpus is required for the discodrive protocol");
    const Corpus c = read_corpus(fs::path(a.corpus));
    out.dialogs = eval::sample_discodrive(c.dialogs, seed, static_cast<std::size_t>(a.per_stratum));
  } else if (a.protocol == "external") {
    if (a.train.empty() || a.valid.empty() || a.test.empty()) {
      throw ArgumentError("--train, --valid and --test are required for the external protocol");
    }
    eval::ExternalSplits splits{read_any(a.train, a.format, "train").dialogs,
                                read_any(a.valid, a.format, "valid").dialogs,
                                read_any(a.test, a.format, "test").dialogs};
    out.dialogs = eval::sample_external(
        splits,
        {static_cast<std::size_t>(a.n_train), static_cast<std::size_t>(a.n_valid), static_cast<std::size_t>(a.n_test)},
        seed);
  } else {
    throw ArgumentError("--protocol must be discodrive or external");
  }
  out.provenance = Json{{"generator", "disco-sample"}, {"protocol", a.protocol}, {"seed", seed}};
  write_corpus(out, fs::path(a.out));
  std::cerr << "sampled " << out.dialogs.size() << " dialogs\n";
  return 0;
}

struct PairArgs {
  std::string a, b, out;
  std::string source_a = "a", source_b = "b";
};

int run_pair(Globals& g, const PairArgs& a) {
  const auto seed = g.require_seed("pair");
  const Corpus ca = read_corpus(fs::path(a.a));
  const Corpus cb = read_corpus(fs::path(a.b));
  const auto pairs = eval::pair_for_comparison(ca.dialogs, cb.dialogs, seed, a.source_a, a.source_b);
  std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
  if (!f) throw NotFoundError("cannot write " + a.out);
  for (const auto& p : pairs) f << eval::to_json(p).dump() << '\n';
  return 0;
}

std::vector<eval::BlindPair> read_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open pair manifest " + path);
  std::vector<eval::BlindPair> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (text::is_blank(line)) continue;
    try {
      out.push_back(eval::pair_from_json(Json::parse(line)));
    } catch (const Json::parse_error& e) {
      throw ParseError(e.what(), n);
    }
  }
  return out;
}

struct AggregateArgs {
  std::string ratings;
  std::string mode = "intrinsic";
  std::string pairs;
  double ci_z = 1.96;
  bool json = false;
};

int run_aggregate(Globals&, const AggregateArgs& a) {
  const auto mode = eval::parse_eval_mode(a.mode);
  const auto records = eval::read_ratings(fs::path(a.ratings));
  for (const auto& r : records) eval::validate_rating(r, mode);
  Json j = Json::object();
  std::ostringstream table;
  if (mode == eval::EvalMode::pairwise) {
    const auto raw = eval::aggregate_pairwise(records);
    const auto majority = eval::pairwise_majority(records);
    table << "Metric | A | B | Majority A | Majority B | Ties\n";
    for (const auto& [metric, c] : raw) {
      const auto& m = majority.at(metric);
      table << metric << " | " << c.a << " | " << c.b << " | " << m.a << " | " << m.b << " | " << m.ties << '\n';
      j["pairwise"][metric] = Json{{"A", c.a}, {"B", c.b}};
      j["majority"][metric] = Json{{"A", m.a}, {"B", m.b}, {"ties", m.ties}};
    }
    if (!a.pairs.empty()) {
      const auto pairs = read_pairs(a.pairs);
      const auto by_source = eval::unblind_pairwise(records, pairs);
      j["by_source"] = by_source;
      table << "\nMetric | Source | Choices\n";
      for (const auto& [metric, counts] : by_source) {
        for (const auto& [source, n] : counts) table << metric << " | " << source << " | " << n << '\n';
      }
    }
  } else {
    eval::AggregationParams params;
    params.ci_z = a.ci_z;
    const auto agg = eval::aggregate_likert(records, params);
    table << "Metric | Score | N\n";
    for (const auto& [metric, s] : agg) {
      table << metric << " | " << s.render() << " | " << s.n << '\n';
      j["likert"][metric] = Json{{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}, {"half_width", s.half_width},
                                 {"rendered", s.render()}};
    }
  }
  if (a.json) {
    print_json(j);
  } else {
    std::cout << table.str();
  }
  return 0;
}

struct FilterArgs {
  std::string in, out;
  std::string format = "jsonl";
  std::string split = "test";
  std::string whitelist;
  int cap = 220;
  double fraction = 0.0;
  bool any = false;
};

int run_filter(Globals& g, const FilterArgs& a) {
  const auto seed = g.require_seed("filter");
  const Corpus in = read_any(a.in, a.format, a.split);
  Corpus out;
  if (a.fraction > 0.0) {
    out.dialogs = eval::split_fraction(in.dialogs, a.fraction, seed);
    std::cerr << "kept " << out.dialogs.size() << " of " << in.dialogs.size() << " dialogs\n";
  } else {
    std::set<std::string> wl;
    if (a.whitelist.empty()) {
      wl = eval::default_service_whitelist();
    } else {
      for (const auto& s : split_list(a.whitelist)) wl.insert(eval::normalize_service(s));
    }
    auto r = eval::filter_incar_subset(in.dialogs, wl, static_cast<std::size_t>(a.cap), seed, !a.any);
    std::cerr << "qualifying " << r.qualifying << ", excluded " << r.excluded << ", unlabeled " << r.unlabeled
              << ", kept " << r.dialogs.size() << '\n';
    out.dialogs = std::move(r.dialogs);
  }
  out.provenance = Json{{"generator", "disco-filter"}, {"seed", seed}, {"source", in.provenance}};
  write_corpus(out, fs::path(a.out));
  return 0;
}

struct ScoreArgs {
  std::string generations;
  int max_n = 4;
  bool no_smoothing = false;
  bool keep_case = false;
  bool sentence_bleu = false;
  bool bertscore_column = false;
  bool json = false;
};

int run_score(Globals&, const ScoreArgs& a) {
  metrics::MetricParams params;
  params.max_n = a.max_n;
  if (a.no_smoothing) params.bleu_smoothing = metrics::BleuSmoothing::none;
  params.lowercase = !a.keep_case;
  if (a.sentence_bleu) params.bleu_mode = metrics::BleuMode::sentence;
  const auto report = metrics::corpus_report(fs::path(a.generations), params);
  if (a.json) {
    print_json(metrics::to_json(report));
  } else {
    std::cout << metrics::render_table(report, a.bertscore_column);
  }
  return 0;
}

struct ValidateArgs {
  std::string corpus;
  bool lenient = false;
  bool json = false;
};

int run_validate(Globals&, const ValidateArgs& a) {
  const Corpus c = read_corpus(fs::path(a.corpus));
  check_unique_ids(c);
  ValidationPolicy policy;
  policy.strict_lengths = !a.lenient;
  std::size_t violations = 0;
  std::size_t warnings = 0;
  Json report = Json::array();
  for (const auto& d : c.dialogs) {
    const auto r = validate_dialog(d, policy);
    for (const auto& v : r.violations) {
      ++violations;
      if (!a.json) std::cout << d.id << ": " << v.code << ": " << v.message << '\n';
    }
    for (const auto& w : r.warnings) {
      ++warnings;
      if (!a.json) std::cout << d.id << ": warning: " << w.code << ": " << w.message << '\n';
    }
    if (a.json && (!r.violations.empty() || !r.warnings.empty())) {
      Json vs = Json::array();
      for (const auto& v : r.violations) vs.push_back(to_json(v));
      Json ws = Json::array();
      for (const auto& w : r.warnings) ws.push_back(to_json(w));
      report.push_back(Json{{"dialog_id", d.id}, {"violations", vs}, {"warnings", ws}});
    }
  }
  if (a.json) {
    print_json(Json{{"dialogs", c.dialogs.size()}, {"violations", violations}, {"warnings", warnings}, {"report", report}});
  } else {
    std::cout << violations << " violations\n";
  }
  return violations == 0 ? 0 : 2;
}

struct ServeArgs {
  std::string dir;
  std::vector<std::string> corpora;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
};

annotation::AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(Globals& g, const ServeArgs& a) {
  annotation::ItemLibrary library;
  for (const auto& spec : a.corpora) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ArgumentError("--corpus takes name=path, got \"" + spec + "\"");
    library.add(spec.substr(0, eq), read_corpus(fs::path(spec.substr(eq + 1))));
  }
  annotation::AnnotationStore store(a.dir, std::move(library), eval::load_metric_sets(g.cfg.paths.metric_sets));
  annotation::ServerOptions opts;
  opts.host = a.host;
  opts.port = a.port;
  opts.static_dir = a.static_dir;
  annotation::AnnotationServer server(store, opts);
  const int port = server.bind();
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on http://" << a.host << ":" << port << '\n';
  server.serve();
  g_server = nullptr;
  return 0;
}

void report_error(const Globals& g, std::string_view code, ErrorCategory category, std::string_view message) {
  if (g.json_errors) {
    std::cerr << Json{{"error", Json{{"code", code}, {"category", category_name(category)}, {"message", message}}}}.dump()
              << '\n';
  } else {
    std::cerr << "disco: " << message << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic in-car dialog generation, disfluency processing and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_file, "JSON pipeline config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for stochastic subcommands (overrides the config)");
  app.add_option("--jobs", g.jobs, "Cap on parallel dialogs")->check(CLI::PositiveNumber);
  app.add_option("--data-dir", g.data_dir, "Templates, lexicons and banks (default: $DISCO_DATA_DIR or the build's data dir)");
  app.add_option("--backend", g.backend_kind, "Backend kind")->check(CLI::IsMember({"mock", "http"}));
  app.add_option("--endpoint", g.endpoint, "Chat-completion base URL for the http backend");
  app.add_option("--model", g.model, "Model name sent to the http backend");
  app.add_flag("--json-errors", g.json_errors, "Print errors as a JSON envelope on stderr");
  app.add_flag("--print-config", g.print_config, "Print the effective config as JSON before running");

  std::function<int()> action;

  ScenariosArgs sc;
  auto* c_sc = app.add_subcommand("scenarios", "Generate driving scenarios from few-shot banks");
  c_sc->add_option("out", sc.out, "Output scenario JSONL")->required();
  c_sc->add_option("--domain", sc.domain, "Only this domain");
  c_sc->add_option("--count", sc.count, "Scenarios per domain (default: config counts)")->check(CLI::NonNegativeNumber);
  c_sc->add_option("--batch", sc.batch, "Scenarios requested per backend call")->check(CLI::Range(1, 25));
  c_sc->callback([&] { action = [&] { return run_scenarios(g, sc); }; });

  SimulateArgs si;
  auto* c_si = app.add_subcommand("simulate", "Simulate driver / car-AI dialogs for scenarios");
  c_si->add_option("scenarios", si.scenarios, "Scenario JSONL")->required()->check(CLI::ExistingFile);
  c_si->add_option("out", si.out, "Output corpus JSONL")->required();
  c_si->add_option("--length", si.length, "Fixed dialog length")->check(CLI::IsMember({6, 8, 10, 12, 14}));
  c_si->add_option("--schedule", si.schedule, "Length schedule")->check(CLI::IsMember({"stratified", "uniform"}));
  c_si->add_option("--history-window", si.history_window, "Turns of history in each prompt")->check(CLI::PositiveNumber);
  c_si->add_option("--failures", si.failures, "Write failed dialogs (with partial turns) to this JSONL file");
  c_si->callback([&] { action = [&] { return run_simulate(g, si); }; });

  InjectArgs in;
  auto* c_in = app.add_subcommand("inject", "Post-hoc disfluency injection into driver turns");
  c_in->add_option("in", in.in, "Input corpus JSONL")->required()->check(CLI::ExistingFile);
  c_in->add_option("out", in.out, "Output corpus JSONL")->required();
  c_in->add_option("--rate", in.rate, "Probability that a driver turn is modified")->check(CLI::Range(0.0, 1.0));
  c_in->add_option("--ops", in.ops, "Comma-separated operations: repetition,replacement,restart");
  c_in->add_option("--cue-probability", in.cue_probability, "Probability of a repair cue in replacements")
      ->check(CLI::Range(0.0, 1.0));
  c_in->add_flag("--invert", in.invert, "Undo a previous injection using its edit traces");
  c_in->callback([&] { action = [&] { return run_inject(g, in); }; });

  std::string tag_in, tag_out;
  auto* c_tag = app.add_subcommand("tag", "Tag disfluency spans in driver turns");
  c_tag->add_option("in", tag_in, "Input corpus JSONL")->required()->check(CLI::ExistingFile);
  c_tag->add_option("out", tag_out, "Output corpus JSONL")->required();
  c_tag->callback([&] { action = [&] { return run_tag(g, tag_in, tag_out); }; });

  DistinctArgs di;
  auto* c_me = app.add_subcommand("metrics", "Corpus statistics");
  c_me->require_subcommand(1);
  auto* c_di = c_me->add_subcommand("distinct", "Distinct-n table over one or more corpora");
  c_di->add_option("corpora", di.corpora, "Corpus files")->required()->check(CLI::ExistingPath);
  c_di->add_option("--n", di.n, "Largest n")->check(CLI::Range(1, 10));
  c_di->add_option("--names", di.names, "Column names, one per corpus")->delimiter(',');
  c_di->add_option("--speaker", di.speaker, "Turns to include: all, driver or car_ai");
  c_di->add_option("--format", di.format, "Input format")->check(CLI::IsMember({"jsonl", "kvret", "multiwoz", "sgd"}));
  c_di->add_flag("--json", di.json, "JSON output");
  c_di->callback([&] { action = [&] { return run_distinct(g, di); }; });

  SampleArgs sa;
  auto* c_sa = app.add_subcommand("sample", "Stratified sampling for human evaluation");
  c_sa->add_option("out", sa.out, "Output corpus JSONL")->required();
  c_sa->add_option("--protocol", sa.protocol, "discodrive or external");
  c_sa->add_option("--corpus", sa.corpus, "Generated corpus (discodrive protocol)");
  c_sa->add_option("--train", sa.train, "Train split (external protocol)");
  c_sa->add_option("--valid", sa.valid, "Validation split (external protocol)");
  c_sa->add_option("--test", sa.test, "Test split (external protocol)");
  c_sa->add_option("--format", sa.format, "Split format")->check(CLI::IsMember({"jsonl", "kvret", "multiwoz", "sgd"}));
  c_sa->add_option("--per-stratum", sa.per_stratum, "Dialogs per (domain, length)")->check(CLI::PositiveNumber);
  c_sa->add_option("--n-train", sa.n_train, "Train draws")->check(CLI::NonNegativeNumber);
  c_sa->add_option("--n-valid", sa.n_valid, "Validation draws")->check(CLI::NonNegativeNumber);
  c_sa->add_option("--n-test", sa.n_test, "Test draws")->check(CLI::NonNegativeNumber);
  c_sa->callback([&] { action = [&] { return run_sample(g, sa); }; });

  PairArgs pa;
  auto* c_pa = app.add_subcommand("pair", "Blind A/B pairs for comparative evaluation");
  c_pa->add_option("a", pa.a, "First corpus")->required()->check(CLI::ExistingFile);
  c_pa->add_option("b", pa.b, "Second corpus")->required()->check(CLI::ExistingFile);
  c_pa->add_option("out", pa.out, "Pair manifest JSONL")->required();
  c_pa->add_option("--source-a", pa.source_a, "Name of the first corpus");
  c_pa->add_option("--source-b", pa.source_b, "Name of the second corpus");
  c_pa->callback([&] { action = [&] { return run_pair(g, pa); }; });

  AggregateArgs ag;
  auto* c_ag = app.add_subcommand("aggregate", "Aggregate a rating log");
  c_ag->add_option("ratings", ag.ratings, "Rating log JSONL")->required()->check(CLI::ExistingFile);
  c_ag->add_option("--mode", ag.mode, "Evaluation mode")
      ->check(CLI::IsMember({"intrinsic", "pairwise", "disfluency_integration"}));
  c_ag->add_option("--pairs", ag.pairs, "Pair manifest for unblinding pairwise choices");
  c_ag->add_option("--ci-z", ag.ci_z, "z value of the confidence interval")->check(CLI::PositiveNumber);
  c_ag->add_flag("--json", ag.json, "JSON output");
  c_ag->callback([&] { action = [&] { return run_aggregate(g, ag); }; });

  FilterArgs fi;
  auto* c_fi = app.add_subcommand("filter", "In-car subset of an external corpus");
  c_fi->add_option("in", fi.in, "Input corpus file or directory")->required()->check(CLI::ExistingPath);
  c_fi->add_option("out", fi.out, "Output corpus JSONL")->required();
  c_fi->add_option("--format", fi.format, "Input format")->check(CLI::IsMember({"jsonl", "kvret", "multiwoz", "sgd"}));
  c_fi->add_option("--split", fi.split, "Split name recorded on adapted dialogs");
  c_fi->add_option("--whitelist", fi.whitelist, "Comma-separated services (default: navigation,weather,hotel,attraction,restaurant)");
  c_fi->add_option("--cap", fi.cap, "Maximum dialogs kept")->check(CLI::NonNegativeNumber);
  c_fi->add_flag("--any", fi.any, "Keep dialogs with any whitelisted service instead of all");
  c_fi->add_option("--fraction", fi.fraction, "Keep round(fraction * N) dialogs instead of filtering")
      ->check(CLI::Range(0.0, 1.0));
  c_fi->callback([&] { action = [&] { return run_filter(g, fi); }; });

  ScoreArgs so;
  auto* c_so = app.add_subcommand("score", "BLEU, ROUGE-L and METEOR of model generations");
  c_so->add_option("generations", so.generations, "JSONL with context, reference, hypothesis")
      ->required()
      ->check(CLI::ExistingFile);
  c_so->add_option("--max-n", so.max_n, "Highest BLEU order")->check(CLI::Range(1, 8));
  c_so->add_flag("--no-smoothing", so.no_smoothing, "Plain corpus BLEU");
  c_so->add_flag("--sentence-bleu", so.sentence_bleu, "Average sentence-level BLEU instead of corpus BLEU");
  c_so->add_flag("--keep-case", so.keep_case, "Do not lowercase before scoring");
  c_so->add_flag("--bertscore-column", so.bertscore_column, "Add an empty BERTScore column");
  c_so->add_flag("--json", so.json, "JSON output");
  c_so->callback([&] { action = [&] { return run_score(g, so); }; });

  ValidateArgs va;
  auto* c_va = app.add_subcommand("validate", "Check corpus invariants");
  c_va->add_option("corpus", va.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  c_va->add_flag("--lenient", va.lenient, "Report unusual dialog lengths as warnings");
  c_va->add_flag("--json", va.json, "JSON output");
  c_va->callback([&] { action = [&] { return run_validate(g, va); }; });

  ServeArgs se;
  auto* c_se = app.add_subcommand("serve", "Run the annotation service");
  c_se->add_option("--dir", se.dir, "Directory for session manifests and the rating log")->required();
  c_se->add_option("--corpus", se.corpora, "Dialogs to serve as name=path; repeatable");
  c_se->add_option("--host", se.host, "Listen address");
  c_se->add_option("--port", se.port, "Listen port (0 picks one)")->check(CLI::Range(0, 65535));
  c_se->add_option("--static", se.static_dir, "Directory of the annotation UI bundle")->check(CLI::ExistingDirectory);
  c_se->callback([&] { action = [&] { return run_serve(g, se); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (g.json_errors) {
      report_error(g, "usage", ErrorCategory::usage, e.what());
      return 1;
    }
    app.exit(e);
    return 1;
  }

  try {
    g.load();
    if (g.print_config) std::cout << config::to_json(g.cfg).dump(2) << '\n';
    return action ? action() : 0;
  } catch (const Error& e) {
    report_error(g, e.code(), e.category(), e.what());
    return exit_code(e.category());
  } catch (const std::exception& e) {
    report_error(g, "internal", ErrorCategory::data, e.what());
    return 2;
  }
}
