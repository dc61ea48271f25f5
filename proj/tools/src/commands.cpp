#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "rumor/checkpoint.hpp"
#include "rumor/error.hpp"
#include "rumor/nn/random.hpp"
#include "rumor/text_normalizer.hpp"
#include "rumor/training.hpp"

namespace rumor::cli {
namespace fs = std::filesystem;

namespace {

std::string version_string() { return "0.1.0"; }

fs::path require_path(const RunConfig& config, const std::string& key) {
  const std::string p = config.str(key);
  if (p.empty()) throw ConfigError(key + " is not set");
  return p;
}

std::vector<Thread> load_split(const RunConfig& config, const std::string& key) {
  return load_dataset(require_path(config, key), config.load_options());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

// Holds out a seeded share of `pool` for model selection. Both parts are
// non-empty.
std::pair<std::vector<Thread>, std::vector<Thread>> split_dev(const std::vector<Thread>& pool, double fraction,
                                                              std::uint64_t seed) {
  if (pool.size() < 2) {
    throw DataError("need at least 2 training threads to hold out a dev split, got " + std::to_string(pool.size()));
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  nn::Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  const auto n = static_cast<double>(pool.size());
  const auto n_dev = std::clamp<std::size_t>(static_cast<std::size_t>(fraction * n + 0.5), 1, pool.size() - 1);
  std::vector<Thread> train_part;
  std::vector<Thread> dev_part;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_dev ? dev_part : train_part).push_back(pool[order[i]]);
  return {std::move(train_part), std::move(dev_part)};
}

Predictor make_predictor(std::shared_ptr<const Model> model, const EmbeddingSource& source) {
  return [model, &source](const Thread& t) { return predict(*model, featurize(t, source, model->config())); };
}

TrainFn make_train_fn(const RunConfig& config, const EmbeddingSource& source, const ModelConfig& model_config,
                      std::ostream& log, const std::string& label) {
  const double fraction = config.real("eval.dev_fraction");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("eval.dev_fraction must lie in (0, 1)");
  const TrainOptions base = config.train_options();
  return [=, &source, &log](const std::vector<Thread>& pool, std::size_t fold) -> Predictor {
    TrainOptions options = base;
    options.train.seed = base.train.seed + fold;
    const auto [train_part, dev_part] = split_dev(pool, fraction, derive_seed(options.train.seed, 3));
    const std::vector<LabeledInputs> train_set = featurize_all(train_part, source, model_config);
    const std::vector<LabeledInputs> dev_set = featurize_all(dev_part, source, model_config);
    TrainingRun run = train(train_set, dev_set, model_config, options);
    log << label << " fold " << fold << ": trained on " << train_part.size() << " threads, best epoch "
        << run.best.best_epoch << " (dev macro-F1 " << run.best.best_dev_macro_f1 << ")\n";
    return make_predictor(std::make_shared<const Model>(std::move(run.best.model)), source);
  };
}

std::vector<Thread> concat_unique(const std::vector<std::vector<Thread>>& parts) {
  std::vector<Thread> out;
  std::set<std::string> ids;
  for (const auto& part : parts) {
    for (const Thread& t : part) {
      if (!ids.insert(t.thread_id).second) {
        throw DataError("thread '" + t.thread_id + "' appears in more than one data file");
      }
      out.push_back(t);
    }
  }
  return out;
}

std::vector<std::string> reversed_args(const std::vector<std::string>& args) {
  return {args.rbegin(), args.rend()};
}

}  // namespace

Embeddings::Embeddings(const RunConfig& config) {
  const std::string path = config.str("embeddings.path");
  const bool fallback = config.flag("embeddings.fallback");
  if (!path.empty()) {
    store_ = std::make_unique<EmbeddingStore>(EmbeddingStore::open(path));
    source_.emplace(*store_, fallback);
  } else if (fallback) {
    const std::size_t dim = config.integer("embeddings.hash_dim");
    if (dim < 1) throw ConfigError("embeddings.hash_dim must be >= 1");
    source_.emplace(EmbeddingSource::hashing(dim));
  } else {
    throw ConfigError("no embeddings configured: set embeddings.path or embeddings.fallback");
  }
}

void write_config_echo(const RunConfig& config, const std::string& command, const json& args, const fs::path& dir) {
  ensure_dir(dir);
  const json echo = {{"tool", "rumorverify"},
                     {"version", version_string()},
                     {"command", command},
                     {"arguments", args},
                     {"config", config.to_json()}};
  const fs::path path = dir / "config_echo.json";
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << echo.dump(2) << '\n';
}

void cmd_preprocess(const RunConfig& config, const fs::path& in, const fs::path& out) {
  const NormalizationConfig norm = config.normalization();
  LoadOptions options;
  options.missing_stance = MissingStancePolicy::kKeep;
  std::vector<Thread> threads = load_dataset(in, options);
  for (Thread& t : threads) {
    t.source.text = normalize_text(t.source.text, norm);
    for (Post& r : t.replies) r.text = normalize_text(r.text, norm);
  }
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  save_dataset(out, threads);
}

TrainResult cmd_train(const RunConfig& config, const fs::path& dir) {
  const std::vector<Thread> train_threads = load_split(config, "data.train");
  const std::vector<Thread> dev_threads = load_split(config, "data.dev");
  const Embeddings embeddings(config);
  const ModelConfig model_config = config.model_config(embeddings.source().dim());
  const TrainOptions options = config.train_options();

  const std::vector<LabeledInputs> train_set = featurize_all(train_threads, embeddings.source(), model_config);
  const std::vector<LabeledInputs> dev_set = featurize_all(dev_threads, embeddings.source(), model_config);

  ensure_dir(dir);
  TrainResult result;
  result.log = dir / "train_log.tsv";
  std::ofstream log(result.log);
  if (!log) throw IoError("cannot write '" + result.log.string() + "'");
  log << "epoch\ttrain_loss\tdev_macro_f1\n";
  const TrainingRun run = train(train_set, dev_set, model_config, options, [&](const EpochLog& e) {
    char line[96];
    std::snprintf(line, sizeof line, "%zu\t%.9g\t%.9g\n", e.epoch, e.train_loss, e.dev_macro_f1);
    log << line << std::flush;
  });
  if (!log) throw IoError("write failed for '" + result.log.string() + "'");

  result.checkpoint = dir / "model.ckpt";
  save_checkpoint(run.best, result.checkpoint);
  result.best_epoch = run.best.best_epoch;
  result.best_dev_macro_f1 = run.best.best_dev_macro_f1;
  return result;
}

std::vector<EvalReport> cmd_eval(const RunConfig& config, const std::string& protocol,
                                 const std::optional<fs::path>& checkpoint, const EvalPaths& paths,
                                 std::ostream& log) {
  if (protocol != "standard" && protocol != "loeo" && protocol != "early" && protocol != "crossplat") {
    throw ConfigError("unknown protocol '" + protocol + "' (expected standard, loeo, early or crossplat)");
  }
  const Embeddings embeddings(config);
  const EmbeddingSource& source = embeddings.source();
  const ModelConfig model_config = config.model_config(source.dim());

  std::shared_ptr<const Model> trained;
  if (checkpoint) {
    trained = std::make_shared<const Model>(load_checkpoint(*checkpoint, model_config).model);
  } else if (protocol == "standard" || protocol == "early") {
    throw ConfigError("protocol '" + protocol + "' needs --checkpoint");
  }

  std::vector<EvalReport> reports;
  if (protocol == "standard") {
    reports.push_back(evaluate_standard(make_predictor(trained, source), load_split(config, "data.test")));
  } else if (protocol == "early") {
    const std::vector<double> hours = config.early_checkpoints();
    reports.push_back(early_detection_eval(make_predictor(trained, source), load_split(config, "data.test"), hours));
  } else if (protocol == "loeo") {
    std::vector<std::vector<Thread>> parts;
    for (const char* key : {"data.train", "data.dev", "data.test"}) {
      if (!config.str(key).empty()) parts.push_back(load_split(config, key));
    }
    if (parts.empty()) throw ConfigError("loeo needs at least one of data.train, data.dev, data.test");
    reports.push_back(leave_one_event_out(concat_unique(parts),
                                          make_train_fn(config, source, model_config, log, "loeo"),
                                          config.loeo_events()));
  } else {
    std::vector<std::vector<Thread>> train_parts = {load_split(config, "data.train")};
    if (!config.str("data.dev").empty()) train_parts.push_back(load_split(config, "data.dev"));
    reports = cross_platform_eval(concat_unique(train_parts), load_split(config, "data.test"),
                                  make_train_fn(config, source, model_config, log, "crossplat"),
                                  config.platform_pairs());
  }

  for (const EvalReport& r : reports) {
    for (const std::string& w : r.warnings) log << "warning: " << w << '\n';
  }
  for (const fs::path& p : {paths.json, paths.table}) {
    if (p.has_parent_path()) ensure_dir(p.parent_path());
  }
  write_report_json(reports, paths.json);
  write_report_table(reports, paths.table);
  return reports;
}

EmbedCheckResult cmd_embed_check(const fs::path& threads_path, const fs::path& embeddings_path,
                                 std::optional<std::size_t> expected_dim, std::ostream& out) {
  LoadOptions options;
  options.missing_stance = MissingStancePolicy::kKeep;
  const std::vector<Thread> threads = load_dataset(threads_path, options);
  const EmbeddingStore store = EmbeddingStore::open(embeddings_path);

  EmbedCheckResult result;
  result.dim = store.dim();
  auto check = [&](const Post& p) {
    ++result.posts;
    if (store.contains(p.post_id)) {
      ++result.covered;
    } else {
      result.missing.push_back(p.post_id);
    }
  };
  for (const Thread& t : threads) {
    check(t.source);
    for (const Post& r : t.replies) check(r);
  }

  out << "threads\t" << threads.size() << "\nposts\t" << result.posts << "\ncovered\t" << result.covered
      << "\nmissing\t" << result.missing.size() << "\ndim\t" << result.dim << "\nstore_records\t" << store.size()
      << '\n';
  if (!result.missing.empty()) {
    throw EmbeddingError(std::to_string(result.missing.size()) + " of " + std::to_string(result.posts) +
                         " posts have no embedding (first missing post_id '" + result.missing.front() + "')");
  }
  if (expected_dim && *expected_dim != result.dim) {
    throw EmbeddingError("embedding dim " + std::to_string(result.dim) + " differs from the expected " +
                         std::to_string(*expected_dim));
  }
  return result;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stance-aware structural rumor verification", "rumorverify"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  app.add_option("-c,--config", config_path, "JSON config file (comments allowed)");
  app.add_option("-s,--set", overrides, "override a config key: key=value (repeatable; wins over the file)");
  app.add_option("-o,--output-dir", output_dir, "output directory (same as --set output_dir=DIR)");

  CLI::App* pre = app.add_subcommand("preprocess", "normalize post texts of a thread file");
  pre->fallthrough();
  std::string pre_in;
  std::string pre_out;
  pre->add_option("--in", pre_in, "input thread file")->required();
  pre->add_option("--out", pre_out, "output thread file")->required();

  CLI::App* tr = app.add_subcommand("train", "train a model and save the best dev checkpoint");
  tr->fallthrough();

  CLI::App* ev = app.add_subcommand("eval", "evaluate under one protocol");
  ev->fallthrough();
  std::string protocol = "standard";
  std::string checkpoint;
  std::string report_json;
  std::string report_table;
  ev->add_option("-p,--protocol", protocol, "standard | loeo | early | crossplat")
      ->check(CLI::IsMember({"standard", "loeo", "early", "crossplat"}))
      ->capture_default_str();
  ev->add_option("--checkpoint", checkpoint, "checkpoint written by train");
  ev->add_option("--report-json", report_json, "structured report path (default <output>/report.json)");
  ev->add_option("--report-table", report_table, "tab-separated report path (default <output>/report.tsv)");

  CLI::App* ec = app.add_subcommand("embed-check", "check an embedding file against a thread file");
  ec->fallthrough();
  std::string ec_threads;
  std::string ec_embeddings;
  std::optional<std::size_t> ec_dim;
  ec->add_option("--threads", ec_threads, "thread file")->required();
  ec->add_option("--embeddings", ec_embeddings, "embedding file")->required();
  ec->add_option("--dim", ec_dim, "expected vector dimension");

  try {
    app.parse(reversed_args(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << '\n';
    return 2;
  }

  try {
    ConfigFile file;
    if (!config_path.empty()) file = load_config(config_path);
    if (!output_dir.empty()) overrides.push_back("output_dir=" + output_dir);
    const std::vector<RunConfig> runs = expand_grid(file.base, file.grid, overrides);

    for (std::size_t i = 0; i < runs.size(); ++i) {
      const RunConfig& config = runs[i];
      fs::path dir = config.output_dir();
      if (runs.size() > 1) {
        char name[32];
        std::snprintf(name, sizeof name, "run_%03zu", i);
        dir /= name;
      }

      if (pre->parsed()) {
        write_config_echo(config, "preprocess", {{"in", pre_in}, {"out", pre_out}}, dir);
        cmd_preprocess(config, pre_in, pre_out);
        out << "wrote " << pre_out << '\n';
      } else if (tr->parsed()) {
        write_config_echo(config, "train", json::object(), dir);
        const TrainResult r = cmd_train(config, dir);
        out << dir.string() << ": best epoch " << r.best_epoch << ", dev macro-F1 " << r.best_dev_macro_f1
            << ", checkpoint " << r.checkpoint.string() << '\n';
      } else if (ev->parsed()) {
        EvalPaths paths{report_json.empty() ? dir / "report.json" : fs::path(report_json),
                        report_table.empty() ? dir / "report.tsv" : fs::path(report_table)};
        if (runs.size() > 1 && !report_json.empty()) paths.json = dir / paths.json.filename();
        if (runs.size() > 1 && !report_table.empty()) paths.table = dir / paths.table.filename();
        write_config_echo(config, "eval",
                          {{"protocol", protocol},
                           {"checkpoint", checkpoint},
                           {"report_json", paths.json.string()},
                           {"report_table", paths.table.string()}},
                          dir);
        std::optional<fs::path> ckpt;
        if (!checkpoint.empty()) ckpt = checkpoint;
        const std::vector<EvalReport> reports = cmd_eval(config, protocol, ckpt, paths, err);
        for (const EvalReport& r : reports) {
          out << r.protocol << ": macro-F1 " << r.macro_f1 << ", accuracy " << r.accuracy << " over "
              << r.metrics.total << " threads\n";
        }
      } else if (ec->parsed()) {
        write_config_echo(config, "embed-check",
                          {{"threads", ec_threads}, {"embeddings", ec_embeddings},
                           {"dim", ec_dim ? json(*ec_dim) : json(nullptr)}},
                          dir);
        cmd_embed_check(ec_threads, ec_embeddings, ec_dim, out);
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: InternalError: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace rumor::cli
