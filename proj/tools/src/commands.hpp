#pragma once

// Subcommands of the rumorverify tool. Each writes config_echo.json with all
// effective settings into its output directory.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "rumor/embedding_store.hpp"
#include "rumor/evaluation.hpp"

namespace rumor::cli {

// Embedding source described by the embeddings.* keys. Keeps the backing
// store alive for as long as the source is used.
class Embeddings {
 public:
  explicit Embeddings(const RunConfig& config);
  const EmbeddingSource& source() const { return *source_; }

 private:
  std::unique_ptr<EmbeddingStore> store_;
  std::optional<EmbeddingSource> source_;
};

void write_config_echo(const RunConfig& config, const std::string& command, const json& args,
                       const std::filesystem::path& dir);

// Normalizes every post text of `in` and writes the result to `out`. All
// other fields are copied, including missing stance labels.
void cmd_preprocess(const RunConfig& config, const std::filesystem::path& in, const std::filesystem::path& out);

struct TrainResult {
  std::filesystem::path checkpoint;
  std::filesystem::path log;
  std::size_t best_epoch = 0;
  double best_dev_macro_f1 = 0.0;
};

// Trains on data.train with model selection on data.dev. Writes model.ckpt
// and train_log.tsv (header line, then one line per epoch) into `dir`.
TrainResult cmd_train(const RunConfig& config, const std::filesystem::path& dir);

struct EvalPaths {
  std::filesystem::path json;
  std::filesystem::path table;
};

// protocol is one of standard, loeo, early, crossplat. standard and early
// score a trained checkpoint on data.test. loeo and crossplat retrain per
// fold from the config; a checkpoint, if given, must match the configured
// model. Warnings go to `log`.
std::vector<EvalReport> cmd_eval(const RunConfig& config, const std::string& protocol,
                                 const std::optional<std::filesystem::path>& checkpoint, const EvalPaths& paths,
                                 std::ostream& log);

struct EmbedCheckResult {
  std::size_t posts = 0;
  std::size_t covered = 0;
  std::size_t dim = 0;
  std::vector<std::string> missing;  // post ids in file order
};

// Coverage and dimension check of an embedding file against a thread file.
// Prints a summary to `out`, then throws EmbeddingError if a post is missing
// or the dimension differs from `expected_dim`.
EmbedCheckResult cmd_embed_check(const std::filesystem::path& threads, const std::filesystem::path& embeddings,
                                 std::optional<std::size_t> expected_dim, std::ostream& out);

// Parses arguments and runs one subcommand. Returns the process exit status;
// failures print "error: <Kind>: <message>" as one line on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rumor::cli
