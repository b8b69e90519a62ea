// SPDX-License-Identifier: Apache-2.0
#include "tcsi/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "tcsi/bench.hpp"
#include "tcsi/corpus.hpp"
#include "tcsi/evaluation.hpp"
#include "tcsi/external_backend.hpp"
#include "tcsi/lexical.hpp"
#include "tcsi/oracle_backend.hpp"
#include "tcsi/pipeline.hpp"
#include "tcsi/protocol.hpp"
#include "tcsi/segmenter.hpp"
#include "tcsi/text.hpp"

namespace tcsi {

using nlohmann::json;

namespace {

// Bad flag values detected after CLI11 parsing; mapped to the usage exit code.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& content, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << content;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  f << content;
}

SplitRatios parse_ratios(const std::string& spec) {
  std::vector<double> v;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const double d = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
      v.push_back(d);
    } catch (const std::exception&) {
      throw UsageError("--ratios: '" + part + "' is not a number");
    }
  }
  if (v.size() != 3) throw UsageError("--ratios needs three comma-separated values (train,validation,test)");
  for (double d : v) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw UsageError("--ratios: values must be non-negative");
  }
  if (std::abs(v[0] + v[1] + v[2] - 1.0) > 1e-9) {
    throw UsageError("--ratios must sum to 1, got " + spec);
  }
  return {v[0], v[1], v[2]};
}

Thresholds parse_thresholds(const std::vector<std::string>& specs, Thresholds base) {
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--threshold expects TASK=VALUE, got '" + s + "'");
    const auto task = parse_task(s.substr(0, eq));
    double v = 0.0;
    try {
      v = std::stod(s.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--threshold value is not a number: '" + s + "'");
    }
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("--threshold value must lie in [0,1]: '" + s + "'");
    if (!task) throw UsageError("--threshold: unknown task in '" + s + "'");
    switch (*task) {
      case Task::Importance: base.importance = v; break;
      case Task::Risk: base.risk = v; break;
      case Task::Sensitivity: base.sensitivity = v; break;
      case Task::Topic:
        base.topic = v;
        base.multi_label_topics = true;
        break;
      case Task::Rewrite: throw UsageError("--threshold: Rewrite has no threshold");
    }
  }
  return base;
}

std::string resolve_backend_spec(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TCSI_BACKEND"); env && *env) return env;
  throw UsageError("no backend: pass --backend or set TCSI_BACKEND");
}

std::unique_ptr<ExpertBackend> backend_from(const std::string& spec, const std::vector<std::string>& thresholds) {
  auto b = make_backend(spec);
  b->set_thresholds(parse_thresholds(thresholds, b->thresholds()));
  return b;
}

TopicSelection parse_selection(const std::string& spec) {
  try {
    return TopicSelection::parse(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--topics: ") + e.what());
  }
}

template <typename T>
T parse_enum_flag(const std::string& flag, const std::string& value,
                  const std::vector<std::pair<std::string, T>>& choices) {
  const auto l = text::to_lower_ascii(value);
  for (const auto& [name, v] : choices) {
    if (l == name) return v;
  }
  throw UsageError(flag + ": unknown value '" + value + "'");
}

bool wants_json(const std::string& format) {
  return parse_enum_flag<bool>("--format", format, {{"json", true}, {"text", false}});
}

// ---------------------------------------------------------------------------

struct Globals {
  std::ostream& out;
  std::ostream& err;
};

int cmd_validate(Globals& g, const std::string& in, bool lenient, const std::string& format) {
  ParseOptions po;
  po.lenient = lenient;
  po.skip_validation = true;
  const Corpus c = parse_corpus(read_file(in), po);
  const auto report = validate(c, po);
  if (wants_json(format)) {
    g.out << to_json(report).dump(2) << "\n";
  } else {
    for (const auto& v : report.violations) {
      g.out << (v.severity == Violation::Severity::Error ? "error" : "warning") << " " << v.rule << " doc="
            << v.doc_id;
      if (!v.sentence_id.empty()) g.out << " sentence=" << v.sentence_id;
      g.out << ": " << v.message << "\n";
    }
    g.out << (report.ok() ? "valid" : "invalid") << ": " << c.documents.size() << " documents, "
          << c.sentence_count() << " sentences, " << report.error_count() << " errors, "
          << report.violations.size() - report.error_count() << " warnings\n";
  }
  return report.ok() ? kExitOk : kExitFailure;
}

int cmd_stats(Globals& g, const std::string& in, bool lenient, const std::string& format) {
  ParseOptions po;
  po.lenient = lenient;
  const auto stats = compute_stats(load_corpus(in, po));
  g.out << (wants_json(format) ? to_json(stats).dump(2) + "\n" : format_stats_table(stats));
  return kExitOk;
}

struct SplitArgs {
  std::string in, ratios = "0.8,0.1,0.1", unit = "sentence", out;
  std::uint64_t seed = 0;
};

SplitUnit parse_unit(const std::string& s) {
  return parse_enum_flag<SplitUnit>("--unit", s, {{"sentence", SplitUnit::Sentence}, {"document", SplitUnit::Document}});
}

int cmd_split(Globals& g, const SplitArgs& a) {
  const auto ratios = parse_ratios(a.ratios);
  const auto unit = parse_unit(a.unit);
  const auto plan = split_all(load_corpus(a.in), ratios, a.seed, unit);
  emit(to_json(plan).dump(2) + "\n", a.out, g.out);
  return kExitOk;
}

struct TrainArgs {
  std::string in, split, ratios = "0.8,0.1,0.1", out, alternation = "per-batch",
                         weighting = "inverse-frequency", format = "json";
  std::uint64_t seed = 1;
  std::size_t epochs = 30, batch_size = 16, dim = 1u << 18;
  double lr = 0.5, l2 = 1e-6;
  std::vector<std::string> thresholds;
};

int cmd_train(Globals& g, const TrainArgs& a) {
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.learning_rate = a.lr;
  cfg.l2 = a.l2;
  cfg.seed = a.seed;
  cfg.batch_size = a.batch_size;
  cfg.featurizer.dim = static_cast<std::uint32_t>(a.dim);
  cfg.alternation = parse_enum_flag<Alternation>(
      "--alternation", a.alternation, {{"per-batch", Alternation::PerBatch}, {"per-epoch", Alternation::PerEpoch}});
  cfg.class_weighting = parse_enum_flag<ClassWeighting>(
      "--class-weighting", a.weighting,
      {{"none", ClassWeighting::None}, {"inverse-frequency", ClassWeighting::InverseFrequency}});
  cfg.thresholds = parse_thresholds(a.thresholds, {});
  try {
    cfg.validate();
  } catch (const TrainingError& e) {
    throw UsageError(e.what());
  }
  const bool as_json = wants_json(a.format);
  const auto ratios = parse_ratios(a.ratios);

  const Corpus c = load_corpus(a.in);
  const SplitPlan plan =
      a.split.empty() ? split_all(c, ratios, a.seed) : split_plan_from_json(json::parse(read_file(a.split)));
  auto result = train_multitask(c, plan, cfg);
  save_lexical_model(*result.backend, a.out);

  json report{{"model", a.out}, {"validation", json::object()}, {"loss", result.backend->metadata["loss"]}};
  std::vector<std::pair<std::string, ClassificationReport>> rows;
  for (const auto& [t, rep] : result.validation) {
    report["validation"][std::string(task_name(t))] = {{"micro_f1", rep.micro_f1}, {"macro_f1", rep.macro_f1}};
    rows.emplace_back(std::string(task_name(t)), rep);
  }
  g.out << (as_json ? report.dump(2) + "\n" : format_task_table(rows));
  g.err << "model written to " << a.out << "\n";
  return kExitOk;
}

struct SummarizeArgs {
  std::string in, doc, topics = "ALL", backend, format = "json", out;
  std::size_t workers = 0, max_words = 512;
  bool keep_empty = false, no_semicolon = false;
  double min_confidence = 0.0;
  std::vector<std::string> thresholds;
};

int cmd_summarize(Globals& g, const SummarizeArgs& a) {
  const auto fmt = parse_render_format(a.format);
  if (!fmt) throw UsageError("--format must be json, markdown or html");
  const auto sel = parse_selection(a.topics);
  if (!(a.min_confidence >= 0.0 && a.min_confidence <= 1.0)) throw UsageError("--min-confidence must lie in [0,1]");
  if (a.max_words < 1) throw UsageError("--max-words must be at least 1");
  auto backend = backend_from(resolve_backend_spec(a.backend), a.thresholds);

  SummarizeOptions opts;
  opts.workers = a.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : a.workers;
  opts.keep_empty_sections = a.keep_empty;
  opts.min_confidence = a.min_confidence;
  opts.max_input_words = a.max_words;
  opts.segmenter.split_on_semicolon = !a.no_semicolon;

  const std::string raw = read_file(a.in);
  Summary summary;
  json parsed = json::parse(raw, nullptr, false);
  if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("documents")) {
    const Corpus c = parse_corpus(raw);
    const Document* doc = nullptr;
    if (a.doc.empty()) {
      if (c.documents.size() != 1) throw UsageError("corpus has several documents; pick one with --doc");
      doc = &c.documents.front();
    } else {
      for (const auto& d : c.documents) {
        if (d.doc_id == a.doc) doc = &d;
      }
      if (!doc) throw UsageError("no document '" + a.doc + "' in " + a.in);
    }
    summary = summarize(*doc, sel, *backend, opts);
  } else if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("sentences")) {
    summary = summarize(segmented_document_from_json(parsed), sel, *backend, opts);
  } else {
    summary = summarize(RawDocument{a.in, raw}, sel, *backend, opts);
  }
  emit(render(summary, *fmt), a.out, g.out);
  return kExitOk;
}

struct EvaluateArgs {
  std::string in, backend, split, part, format = "json";
  std::size_t slice_k = 0, max_words = 512;
  std::vector<std::string> thresholds;
};

int cmd_evaluate(Globals& g, const EvaluateArgs& a) {
  const bool as_json = wants_json(a.format);
  auto backend = backend_from(resolve_backend_spec(a.backend), a.thresholds);
  const Corpus c = load_corpus(a.in);
  std::vector<EvalItem> items;
  if (a.split.empty()) {
    if (!a.part.empty() && a.part != "all") throw UsageError("--part needs --split");
    items = eval_items(c);
  } else {
    const auto plan = split_plan_from_json(json::parse(read_file(a.split)));
    const auto part = parse_enum_flag<std::optional<SplitPart>>(
        "--part", a.part.empty() ? "test" : a.part,
        {{"train", SplitPart::Train}, {"validation", SplitPart::Validation}, {"test", SplitPart::Test},
         {"all", std::nullopt}});
    auto it = plan.find(Task::Importance);
    if (it == plan.end()) throw std::runtime_error("split plan lacks the Importance population");
    if (part) {
      items = eval_items(c, it->second.ids(*part));
    } else {
      items = eval_items(c);
    }
  }
  EvaluationOptions eo;
  eo.max_input_words = a.max_words;
  if (a.slice_k > 0) {
    const auto r = slice_by_length(items, a.slice_k, *backend, eo);
    if (as_json) {
      g.out << to_json(r).dump(2) << "\n";
    } else {
      g.out << "== longest " << r.k << " ==\n" << format_evaluation(r.longest) << "\n== shortest " << r.k
            << " ==\n" << format_evaluation(r.shortest) << "\n== all ==\n" << format_evaluation(r.all);
    }
    return kExitOk;
  }
  const auto r = evaluate_backend(*backend, items, eo);
  g.out << (as_json ? to_json(r).dump(2) + "\n" : format_evaluation(r));
  return kExitOk;
}

struct BenchArgs {
  std::string in, backend, topics = "ALL", format = "json";
  double delay_ms = 0.0;
  bool exhaustive = false;
  std::size_t workers = 1, max_words = 512;
};

int cmd_bench(Globals& g, const BenchArgs& a) {
  const bool as_json = wants_json(a.format);
  const auto sel = parse_selection(a.topics);
  if (!(a.delay_ms >= 0.0)) throw UsageError("--delay-ms must be non-negative");
  if (a.workers < 1) throw UsageError("--workers must be at least 1");
  const auto spec = resolve_backend_spec(a.backend);
  const Corpus c = load_corpus(a.in);
  BenchOptions bo;
  bo.encode_delay = std::chrono::microseconds(static_cast<long long>(std::llround(a.delay_ms * 1000.0)));
  bo.exhaustive = a.exhaustive;
  bo.workers = a.workers;
  bo.max_input_words = a.max_words;
  const auto r = run_efficiency(c.documents, [&] { return make_backend(spec); }, sel, bo);
  g.out << (as_json ? to_json(r).dump(2) + "\n" : format_efficiency_table(r));
  return kExitOk;
}

int cmd_segment(Globals& g, const std::string& in, bool no_semicolon) {
  SegmenterOptions so;
  so.split_on_semicolon = !no_semicolon;
  g.out << to_json(segment_document(RawDocument{in, read_file(in)}, so)).dump(2) << "\n";
  return kExitOk;
}

int cmd_conformance(Globals& g, std::string command, std::size_t timeout_ms) {
  if (command.rfind("external:", 0) == 0) command = command.substr(9);
  if (command.empty()) throw UsageError("conformance needs --command");
  const auto r = run_conformance(command, std::chrono::milliseconds(timeout_ms));
  g.out << to_json(r).dump(2) << "\n";
  return r.passed() ? kExitOk : kExitFailure;
}

}  // namespace

std::unique_ptr<ExpertBackend> make_backend(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon + 1 >= spec.size()) {
    throw std::invalid_argument("backend spec must be oracle:<corpus>, lexical:<model> or external:<command>");
  }
  const auto kind = spec.substr(0, colon);
  const auto arg = spec.substr(colon + 1);
  if (kind == "oracle") return attach_oracle(load_corpus(arg));
  if (kind == "lexical") return load_lexical_model(arg);
  if (kind == "external") return open_external_backend(arg);
  throw std::invalid_argument("unknown backend kind '" + kind + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topic-controlled summarization and interpretation of privacy policies.", "tcsi"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string in, format = "text";
  bool lenient = false;

  auto* validate_cmd = app.add_subcommand("validate", "Check a corpus against the schema and invariants");
  validate_cmd->add_option("--in", in, "Corpus JSON")->required();
  validate_cmd->add_flag("--lenient", lenient, "Downgrade flag-without-important findings to warnings");
  validate_cmd->add_option("--format", format, "text | json")->capture_default_str();

  auto* stats_cmd = app.add_subcommand("stats", "Per-label counts and sentence lengths");
  stats_cmd->add_option("--in", in, "Corpus JSON")->required();
  stats_cmd->add_flag("--lenient", lenient, "Accept flag-without-important sentences");
  stats_cmd->add_option("--format", format, "text | json")->capture_default_str();

  SplitArgs sa;
  auto* split_cmd = app.add_subcommand("split", "Seeded train/validation/test split per task population");
  split_cmd->add_option("--in", sa.in, "Corpus JSON")->required();
  split_cmd->add_option("--ratios", sa.ratios, "train,validation,test")->capture_default_str();
  split_cmd->add_option("--seed", sa.seed, "Ranking seed")->capture_default_str();
  split_cmd->add_option("--unit", sa.unit, "sentence | document")->capture_default_str();
  split_cmd->add_option("--out", sa.out, "Write the plan here instead of stdout");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train the lexical backend");
  train_cmd->add_option("--in", ta.in, "Corpus JSON")->required();
  train_cmd->add_option("--out", ta.out, "Model file to write")->required();
  train_cmd->add_option("--split", ta.split, "Split plan JSON (default: split with --seed and --ratios)");
  train_cmd->add_option("--ratios", ta.ratios, "train,validation,test")->capture_default_str();
  train_cmd->add_option("--seed", ta.seed, "Split and shuffling seed")->capture_default_str();
  train_cmd->add_option("--epochs", ta.epochs)->capture_default_str();
  train_cmd->add_option("--lr", ta.lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--l2", ta.l2, "L2 strength")->capture_default_str();
  train_cmd->add_option("--batch-size", ta.batch_size)->capture_default_str();
  train_cmd->add_option("--dim", ta.dim, "Hashed feature dimension (power of two)")->capture_default_str();
  train_cmd->add_option("--alternation", ta.alternation, "per-batch | per-epoch")->capture_default_str();
  train_cmd->add_option("--class-weighting", ta.weighting, "none | inverse-frequency")->capture_default_str();
  train_cmd->add_option("--threshold", ta.thresholds, "TASK=VALUE, repeatable");
  train_cmd->add_option("--format", ta.format, "json | text")->capture_default_str();

  SummarizeArgs ma;
  auto* sum_cmd = app.add_subcommand("summarize", "Summarize one policy document");
  sum_cmd->add_option("--in", ma.in, "HTML/text policy, segmented JSON, or corpus JSON")->required();
  sum_cmd->add_option("--doc", ma.doc, "Document id when --in is a corpus");
  sum_cmd->add_option("--topics", ma.topics, "ALL or a comma-separated topic list")->capture_default_str();
  sum_cmd->add_option("--backend", ma.backend, "oracle:<corpus> | lexical:<model> | external:<command>");
  sum_cmd->add_option("--format", ma.format, "json | markdown | html")->capture_default_str();
  sum_cmd->add_option("--workers", ma.workers, "Worker threads (default: available cores)");
  sum_cmd->add_option("--max-words", ma.max_words, "Input truncation per sentence")->capture_default_str();
  sum_cmd->add_option("--min-confidence", ma.min_confidence)->capture_default_str();
  sum_cmd->add_flag("--keep-empty", ma.keep_empty, "Emit sections that have no items");
  sum_cmd->add_flag("--no-semicolon", ma.no_semicolon, "Do not split sentences at semicolons");
  sum_cmd->add_option("--threshold", ma.thresholds, "TASK=VALUE, repeatable");
  sum_cmd->add_option("--out", ma.out, "Write here instead of stdout");

  EvaluateArgs ea;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a backend against gold annotations");
  eval_cmd->add_option("--in", ea.in, "Corpus JSON")->required();
  eval_cmd->add_option("--backend", ea.backend, "oracle:<corpus> | lexical:<model> | external:<command>");
  eval_cmd->add_option("--split", ea.split, "Split plan JSON");
  eval_cmd->add_option("--part", ea.part, "train | validation | test | all (default test with --split)");
  eval_cmd->add_option("--slice-k", ea.slice_k, "Also report the k longest and k shortest sentences");
  eval_cmd->add_option("--max-words", ea.max_words)->capture_default_str();
  eval_cmd->add_option("--threshold", ea.thresholds, "TASK=VALUE, repeatable");
  eval_cmd->add_option("--format", ea.format, "json | text")->capture_default_str();

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Shared-encoder (V2) versus per-task encoding (V1)");
  bench_cmd->add_option("--in", ba.in, "Corpus JSON")->required();
  bench_cmd->add_option("--backend", ba.backend, "oracle:<corpus> | lexical:<model> | external:<command>");
  bench_cmd->add_option("--topics", ba.topics)->capture_default_str();
  bench_cmd->add_option("--delay-ms", ba.delay_ms, "Simulated encode latency")->capture_default_str();
  bench_cmd->add_flag("--exhaustive", ba.exhaustive, "V1 consults every head on every sentence");
  bench_cmd->add_option("--workers", ba.workers)->capture_default_str();
  bench_cmd->add_option("--max-words", ba.max_words)->capture_default_str();
  bench_cmd->add_option("--format", ba.format, "json | text")->capture_default_str();

  bool no_semicolon = false;
  auto* seg_cmd = app.add_subcommand("segment", "Strip markup and split a policy into sentences");
  seg_cmd->add_option("--in", in, "HTML or text policy")->required();
  seg_cmd->add_flag("--no-semicolon", no_semicolon);

  std::string command;
  std::size_t timeout_ms = 10000;
  auto* conf_cmd = app.add_subcommand("conformance", "Run the protocol conformance exchanges against a backend");
  conf_cmd->add_option("--command", command, "Backend command line (or external:<command>)")->required();
  conf_cmd->add_option("--timeout-ms", timeout_ms)->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("tcsi");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Globals g{out, err};
  try {
    if (*validate_cmd) return cmd_validate(g, in, lenient, format);
    if (*stats_cmd) return cmd_stats(g, in, lenient, format);
    if (*split_cmd) return cmd_split(g, sa);
    if (*train_cmd) return cmd_train(g, ta);
    if (*sum_cmd) return cmd_summarize(g, ma);
    if (*eval_cmd) return cmd_evaluate(g, ea);
    if (*bench_cmd) return cmd_bench(g, ba);
    if (*seg_cmd) return cmd_segment(g, in, no_semicolon);
    if (*conf_cmd) return cmd_conformance(g, command, timeout_ms);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace tcsi
