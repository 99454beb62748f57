#include "agreeloss/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "agreeloss/checkpoint.hpp"
#include "agreeloss/error.hpp"
#include "agreeloss/losses.hpp"
#include "agreeloss/metrics.hpp"

namespace agreeloss::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void configure_logging() {
  static const bool configured = [] {
    auto logger = spdlog::stderr_logger_st("agreeloss");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("AGREELOSS_LOG")) {
      spdlog::set_level(spdlog::level::from_str(env));
    }
    return true;
  }();
  (void)configured;
}

std::string format_name(InputFormat f) { return f == InputFormat::Csv ? "csv" : "jsonl"; }

InputFormat parse_format(const std::string& s) {
  if (s == "csv") return InputFormat::Csv;
  if (s == "jsonl") return InputFormat::JsonLines;
  throw InputError("unknown input format '" + s + "' (expected csv or jsonl)");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
}

std::pair<LossKind, std::string> split_kind_path(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw InputError("expected LOSS=PATH, got '" + spec + "'");
  try {
    return {parse_loss_kind(spec.substr(0, eq)), spec.substr(eq + 1)};
  } catch (const InvalidParameter& e) {
    throw InputError(e.what());
  }
}

// Options shared by commands that read a dataset.
struct DataOptions {
  std::string format = "csv";
  ColumnNames columns;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--format", format, "Input format")->check(CLI::IsMember({"csv", "jsonl"}));
    cmd.add_option("--text-col", columns.text, "Text column");
    cmd.add_option("--label-col", columns.label, "Label column");
    cmd.add_option("--votes-col", columns.votes, "Annotator count column");
    cmd.add_option("--agreement-col", columns.agreement, "Agreement column");
  }
};

std::string trace_csv(const std::vector<double>& losses) {
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) {
    out += fmt::format("{},{:.17g}\n", e + 1, losses[e]);
  }
  return out;
}

EvalReport evaluate_model(const Checkpoint& ckpt, const Dataset& ds, double threshold) {
  const auto pred = predict(ckpt.model, ds, ckpt.featurizer, threshold);
  std::vector<int> gold;
  gold.reserve(ds.size());
  for (const auto& ex : ds) gold.push_back(ex.label);
  return evaluate(pred, gold);
}

void write_report(const fs::path& json_path, const EvalReport& report) {
  write_text(json_path, to_json(report).dump(2) + "\n");
  auto csv_path = json_path;
  csv_path.replace_extension();
  csv_path += "_confusion.csv";
  write_text(csv_path, confusion_csv(report));
}

}  // namespace

json to_json(const RunManifest& m) {
  return {
      {"version", m.version},
      {"train",
       {{"epochs", m.train.epochs},
        {"lr", m.train.lr},
        {"seed", m.train.seed},
        {"batch_size", m.train.batch_size},
        {"loss", std::string(to_string(m.train.loss))},
        {"shuffle", m.train.shuffle}}},
      {"featurizer",
       {{"dim", m.featurizer.dim},
        {"ngram_min", m.featurizer.ngram_min},
        {"ngram_max", m.featurizer.ngram_max},
        {"lowercase", m.featurizer.lowercase},
        {"normalize", m.featurizer.normalize}}},
      {"inputs",
       {{"data", m.data_path},
        {"val", m.val_path},
        {"format", format_name(m.format)},
        {"columns",
         {{"text", m.columns.text},
          {"label", m.columns.label},
          {"votes", m.columns.votes},
          {"agreement", m.columns.agreement}}},
        {"threshold", m.threshold}}},
      {"artifacts", {{"checkpoint", m.checkpoint_path}, {"loss_trace", m.trace_path}}},
      {"wall_clock", {{"started_utc", m.started_utc}, {"elapsed_seconds", m.elapsed_seconds}}},
      {"final_loss", m.final_loss},
  };
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    const auto& t = j.at("train");
    m.train.epochs = t.at("epochs").get<int>();
    m.train.lr = t.at("lr").get<double>();
    m.train.seed = t.at("seed").get<std::uint64_t>();
    m.train.batch_size = t.at("batch_size").get<std::size_t>();
    m.train.loss = parse_loss_kind(t.at("loss").get<std::string>());
    m.train.shuffle = t.at("shuffle").get<bool>();
    const auto& f = j.at("featurizer");
    m.featurizer.dim = f.at("dim").get<std::uint32_t>();
    m.featurizer.ngram_min = f.at("ngram_min").get<int>();
    m.featurizer.ngram_max = f.at("ngram_max").get<int>();
    m.featurizer.lowercase = f.at("lowercase").get<bool>();
    m.featurizer.normalize = f.at("normalize").get<bool>();
    const auto& in = j.at("inputs");
    m.data_path = in.at("data").get<std::string>();
    m.val_path = in.value("val", std::string{});
    m.format = parse_format(in.value("format", std::string("csv")));
    if (const auto c = in.find("columns"); c != in.end()) {
      m.columns.text = c->value("text", m.columns.text);
      m.columns.label = c->value("label", m.columns.label);
      m.columns.votes = c->value("votes", m.columns.votes);
      m.columns.agreement = c->value("agreement", m.columns.agreement);
    }
    m.threshold = in.value("threshold", 0.5);
    if (const auto a = j.find("artifacts"); a != j.end()) {
      m.checkpoint_path = a->value("checkpoint", std::string{});
      m.trace_path = a->value("loss_trace", std::string{});
    }
    if (const auto w = j.find("wall_clock"); w != j.end()) {
      m.started_utc = w->value("started_utc", std::string{});
      m.elapsed_seconds = w->value("elapsed_seconds", 0.0);
    }
    m.final_loss = j.value("final_loss", 0.0);
    m.version = j.value("version", std::string(kVersion));
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed run manifest: ") + e.what());
  } catch (const InvalidParameter& e) {
    throw InputError(std::string("malformed run manifest: ") + e.what());
  }
}

namespace {

int cmd_train(CLI::App& cmd, const RunManifest& flags, const std::string& manifest_in,
              const std::string& out_dir, std::ostream& out) {
  RunManifest m = flags;
  if (!manifest_in.empty()) {
    m = manifest_from_json(read_json(manifest_in));
    // Flags given explicitly on the command line override the manifest.
    auto given = [&](const char* name) { return cmd.count(name) > 0; };
    if (given("--data")) m.data_path = flags.data_path;
    if (given("--val")) m.val_path = flags.val_path;
    if (given("--format")) m.format = flags.format;
    if (given("--loss")) m.train.loss = flags.train.loss;
    if (given("--epochs")) m.train.epochs = flags.train.epochs;
    if (given("--lr")) m.train.lr = flags.train.lr;
    if (given("--seed")) m.train.seed = flags.train.seed;
    if (given("--batch-size")) m.train.batch_size = flags.train.batch_size;
    if (given("--no-shuffle")) m.train.shuffle = false;
    if (given("--dim")) m.featurizer.dim = flags.featurizer.dim;
    if (given("--ngram-min")) m.featurizer.ngram_min = flags.featurizer.ngram_min;
    if (given("--ngram-max")) m.featurizer.ngram_max = flags.featurizer.ngram_max;
    if (given("--threshold")) m.threshold = flags.threshold;
    if (given("--text-col")) m.columns.text = flags.columns.text;
    if (given("--label-col")) m.columns.label = flags.columns.label;
    if (given("--votes-col")) m.columns.votes = flags.columns.votes;
    if (given("--agreement-col")) m.columns.agreement = flags.columns.agreement;
  }
  if (m.data_path.empty()) throw InputError("train needs --data (or --manifest)");
  m.data_path = fs::absolute(m.data_path).lexically_normal().string();
  if (!m.val_path.empty()) m.val_path = fs::absolute(m.val_path).lexically_normal().string();
  try {
    m.featurizer.validate();
    m.train.validate();
  } catch (const InvalidParameter& e) {
    throw InputError(e.what());
  }

  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset ds = load_dataset(m.data_path, m.format, m.columns);
  if (ds.empty()) throw EmptyDataset();
  spdlog::info("training {} loss on {} examples from {}", to_string(m.train.loss), ds.size(),
               m.data_path);

  const auto result = train(ds, m.featurizer, m.train);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const auto ckpt_path = dir / "model.bin";
  const auto trace_path = dir / "loss_trace.csv";
  save_checkpoint(ckpt_path, Checkpoint{result.model, m.featurizer});
  write_text(trace_path, trace_csv(result.epoch_loss));

  m.checkpoint_path = ckpt_path.string();
  m.trace_path = trace_path.string();
  m.final_loss = result.epoch_loss.back();
  m.started_utc = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                              fmt::gmtime(std::chrono::system_clock::to_time_t(started)));

  if (!m.val_path.empty()) {
    const Dataset val = load_dataset(m.val_path, m.format, m.columns);
    const auto report = evaluate_model(Checkpoint{result.model, m.featurizer}, val, m.threshold);
    write_report(dir / "val_metrics.json", report);
    out << fmt::format("validation f1: {:.4f} (tp={} fp={} tn={} fn={})\n", report.f1, report.tp,
                       report.fp, report.tn, report.fn);
  }

  m.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(dir / "manifest.json", to_json(m).dump(2) + "\n");
  out << fmt::format("final training loss: {:.9g}\n", m.final_loss);
  return kOk;
}

struct EvalFlags {
  std::string model;
  std::string data;
  double threshold = 0.5;
  std::uint32_t dim = 0;
  int ngram_max = 0;
  std::string out_path;
  std::string out_dir = ".";
};

int cmd_eval(const EvalFlags& f, const DataOptions& data_opts, std::ostream& out) {
  const auto ckpt = load_checkpoint(f.model);
  if (f.dim != 0 && f.dim != ckpt.featurizer.dim) {
    throw InputError(fmt::format("--dim {} does not match checkpoint dim {}", f.dim,
                                 ckpt.featurizer.dim));
  }
  if (f.ngram_max != 0 && f.ngram_max != ckpt.featurizer.ngram_max) {
    throw InputError(fmt::format("--ngram-max {} does not match checkpoint ngram_max {}",
                                 f.ngram_max, ckpt.featurizer.ngram_max));
  }
  const Dataset ds = load_dataset(f.data, parse_format(data_opts.format), data_opts.columns);
  if (ds.empty()) throw EmptyDataset();
  const auto report = evaluate_model(ckpt, ds, f.threshold);

  const fs::path json_path =
      f.out_path.empty() ? fs::path(f.out_dir) / "metrics.json" : fs::path(f.out_path);
  if (json_path.has_parent_path()) fs::create_directories(json_path.parent_path());
  write_report(json_path, report);
  out << to_json(report).dump(2) << "\n" << confusion_csv(report);
  return kOk;
}

struct GradcheckFlags {
  GradcheckOptions options;
  std::size_t max_listed = 10;
};

int cmd_gradcheck(const GradcheckFlags& f, const Hooks& hooks, std::ostream& out,
                  std::ostream& err) {
  const GradientFn gradient = hooks.gradient ? hooks.gradient : GradientFn(grad_wrt_pred);
  const auto report = run_gradcheck(f.options, gradient);
  for (const auto& k : report.kinds) {
    out << fmt::format("{:<8} max_rel_error={:.9g} checked={} {}\n", to_string(k.kind),
                       k.max_rel_error, k.checked, k.passed() ? "ok" : "FAIL");
  }
  if (report.passed()) return kOk;
  for (const auto& k : report.kinds) {
    for (std::size_t i = 0; i < k.failures.size() && i < f.max_listed; ++i) {
      const auto& c = k.failures[i];
      err << fmt::format("gradcheck failure: kind={} trial={} index={} analytic={:.9g} "
                         "numeric={:.9g} rel_error={:.3g}\n",
                         to_string(c.kind), c.trial, c.index, c.analytic, c.numeric, c.rel_error);
    }
    if (k.failures.size() > f.max_listed) {
      err << fmt::format("gradcheck: {} more {} failures not shown\n",
                         k.failures.size() - f.max_listed, to_string(k.kind));
    }
  }
  return kGradcheckFailure;
}

struct ProfileFlags {
  std::string loss = "noisy";
  std::vector<int> labels;
  int votes = 3;
  std::vector<double> r_values = {0.5, 0.6, 2.0 / 3.0, 0.8, 1.0};
  int grid = 1001;
  std::string out_path;
  std::string out_dir = ".";
};

int cmd_profile(const ProfileFlags& f, std::ostream& out) {
  LossKind kind;
  try {
    kind = parse_loss_kind(f.loss);
  } catch (const InvalidParameter& e) {
    throw InputError(e.what());
  }
  const std::vector<int> labels = f.labels.empty() ? std::vector<int>{0, 1} : f.labels;
  if (!f.out_path.empty() && labels.size() != 1) {
    throw InputError("--out needs exactly one --label");
  }

  for (const int label : labels) {
    std::vector<ProfilePoint> rows;
    try {
      rows = loss_profile(kind, label, f.votes, f.r_values, f.grid);
    } catch (const InvalidParameter& e) {
      throw InputError(e.what());
    }
    const fs::path path = !f.out_path.empty()
                              ? fs::path(f.out_path)
                              : fs::path(f.out_dir) /
                                    fmt::format("profile_{}_label{}.csv", f.loss, label);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ostringstream csv;
    write_profile_csv(rows, csv);
    write_text(path, csv.str());

    const auto argmins = profile_argmins(rows, f.grid);
    for (std::size_t c = 0; c < argmins.size(); ++c) {
      const auto& best = rows[c * f.grid + argmins[c]];
      out << fmt::format("{} label={} r={:.9g} argmin_y_pred={:.9g} loss={:.9g}\n", f.loss, label,
                         best.r, best.y_pred, best.loss);
    }
    out << "wrote " << path.string() << "\n";
  }
  return kOk;
}

struct CompareFlags {
  std::string data;
  std::vector<std::string> models;
  std::vector<std::string> reports;
  double threshold = 0.5;
  std::string out_path;
};

int cmd_compare(const CompareFlags& f, const DataOptions& data_opts, std::ostream& out) {
  std::map<LossKind, EvalReport> reports;
  auto insert = [&](LossKind kind, const EvalReport& r) {
    if (!reports.emplace(kind, r).second) {
      throw InputError(fmt::format("loss '{}' given more than once", to_string(kind)));
    }
  };
  if (!f.models.empty()) {
    if (f.data.empty()) throw InputError("compare --model needs --data");
    const Dataset ds = load_dataset(f.data, parse_format(data_opts.format), data_opts.columns);
    if (ds.empty()) throw EmptyDataset();
    for (const auto& spec : f.models) {
      const auto [kind, path] = split_kind_path(spec);
      insert(kind, evaluate_model(load_checkpoint(path), ds, f.threshold));
    }
  }
  for (const auto& spec : f.reports) {
    const auto [kind, path] = split_kind_path(spec);
    insert(kind, report_from_json(read_json(path)));
  }
  if (reports.size() < 2) throw InputError("compare needs at least two runs");

  const auto rows = compare_runs(reports);
  out << format_compare_table(rows);
  if (!f.out_path.empty()) {
    json j = json::array();
    for (const auto& row : rows) {
      json entry = to_json(row.report);
      entry["loss"] = std::string(to_string(row.kind));
      entry["tp_delta"] = row.tp_delta ? json(*row.tp_delta) : json(nullptr);
      j.push_back(std::move(entry));
    }
    write_text(f.out_path, j.dump(2) + "\n");
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Hooks& hooks) {
  configure_logging();

  CLI::App app{"Annotation-aware cross-entropy losses for binary causality detection",
               "agreeloss"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // train
  RunManifest train_flags;
  DataOptions train_data;
  std::string train_loss = "vanilla";
  std::string train_manifest;
  std::string train_out_dir = ".";
  bool no_shuffle = false;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier");
  train_cmd->add_option("--data", train_flags.data_path, "Training data file");
  train_cmd->add_option("--val", train_flags.val_path, "Optional validation file");
  train_cmd->add_option("--loss", train_loss, "Loss function")
      ->check(CLI::IsMember({"vanilla", "noisy", "refined"}));
  train_cmd->add_option("--epochs", train_flags.train.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--lr", train_flags.train.lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--seed", train_flags.train.seed, "Seed for shuffling")
      ->capture_default_str();
  train_cmd->add_option("--batch-size", train_flags.train.batch_size, "Mini-batch size")
      ->capture_default_str();
  train_cmd->add_flag("--no-shuffle", no_shuffle, "Visit examples in file order");
  train_cmd->add_option("--dim", train_flags.featurizer.dim, "Hashed feature dimension")
      ->capture_default_str();
  train_cmd->add_option("--ngram-min", train_flags.featurizer.ngram_min, "Smallest n-gram")
      ->capture_default_str();
  train_cmd->add_option("--ngram-max", train_flags.featurizer.ngram_max, "Largest n-gram")
      ->capture_default_str();
  train_cmd->add_option("--threshold", train_flags.threshold, "Decision threshold for --val");
  train_cmd->add_option("--manifest", train_manifest, "Rerun from a saved run manifest");
  train_cmd->add_option("--out-dir", train_out_dir, "Output directory")->capture_default_str();
  train_data.add_to(*train_cmd);

  // eval
  EvalFlags eval_flags;
  DataOptions eval_data;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on labeled data");
  eval_cmd->add_option("--model", eval_flags.model, "Checkpoint file")->required();
  eval_cmd->add_option("--data", eval_flags.data, "Labeled data file")->required();
  eval_cmd->add_option("--threshold", eval_flags.threshold, "Decision threshold")
      ->capture_default_str();
  eval_cmd->add_option("--dim", eval_flags.dim, "Expected feature dimension");
  eval_cmd->add_option("--ngram-max", eval_flags.ngram_max, "Expected largest n-gram");
  eval_cmd->add_option("--out", eval_flags.out_path, "Metrics JSON path");
  eval_cmd->add_option("--out-dir", eval_flags.out_dir, "Output directory")->capture_default_str();
  eval_data.add_to(*eval_cmd);

  // gradcheck
  GradcheckFlags grad_flags;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Check analytic gradients against central differences");
  grad_cmd->add_option("--trials", grad_flags.options.trials, "Random batches")
      ->capture_default_str();
  grad_cmd->add_option("--seed", grad_flags.options.seed, "Seed")->capture_default_str();
  grad_cmd->add_option("--max-batch", grad_flags.options.max_batch, "Largest batch size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  grad_cmd->add_option("--tolerance", grad_flags.options.tolerance, "Relative error bound")
      ->capture_default_str();

  // profile
  ProfileFlags prof_flags;
  auto* prof_cmd = app.add_subcommand("profile", "Single-sentence loss versus predicted probability");
  prof_cmd->add_option("--loss", prof_flags.loss, "Loss function")
      ->check(CLI::IsMember({"vanilla", "noisy", "refined"}))
      ->capture_default_str();
  prof_cmd->add_option("--label", prof_flags.labels, "Gold label(s); default both")
      ->check(CLI::IsMember({0, 1}));
  prof_cmd->add_option("--votes", prof_flags.votes, "Annotator count n")->capture_default_str();
  prof_cmd->add_option("--r", prof_flags.r_values, "Agreement values")->delimiter(',');
  prof_cmd->add_option("--grid", prof_flags.grid, "Grid points")->capture_default_str();
  prof_cmd->add_option("--out", prof_flags.out_path, "CSV path (single label only)");
  prof_cmd->add_option("--out-dir", prof_flags.out_dir, "Output directory")->capture_default_str();
  std::uint64_t unused_seed = 42;
  prof_cmd->add_option("--seed", unused_seed, "Accepted for uniformity; profiles are deterministic");

  // compare
  CompareFlags cmp_flags;
  DataOptions cmp_data;
  auto* cmp_cmd = app.add_subcommand("compare", "Rank runs trained with different losses by F1");
  cmp_cmd->add_option("--data", cmp_flags.data, "Labeled data for --model runs");
  cmp_cmd->add_option("--model", cmp_flags.models, "LOSS=CHECKPOINT");
  cmp_cmd->add_option("--report", cmp_flags.reports, "LOSS=METRICS_JSON");
  cmp_cmd->add_option("--threshold", cmp_flags.threshold, "Decision threshold")
      ->capture_default_str();
  cmp_cmd->add_option("--out", cmp_flags.out_path, "Write the ranking as JSON");
  cmp_data.add_to(*cmp_cmd);

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("agreeloss");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*train_cmd) {
      train_flags.train.loss = parse_loss_kind(train_loss);
      train_flags.train.shuffle = !no_shuffle;
      train_flags.format = parse_format(train_data.format);
      train_flags.columns = train_data.columns;
      return cmd_train(*train_cmd, train_flags, train_manifest, train_out_dir, out);
    }
    if (*eval_cmd) return cmd_eval(eval_flags, eval_data, out);
    if (*grad_cmd) return cmd_gradcheck(grad_flags, hooks, out, err);
    if (*prof_cmd) return cmd_profile(prof_flags, out);
    if (*cmp_cmd) return cmd_compare(cmp_flags, cmp_data, out);
  } catch (const NonFiniteLoss& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace agreeloss::cli
