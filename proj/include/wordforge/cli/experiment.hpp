#pragma once

#include "json.hpp"
#include "wordforge/cli/checkpoint.hpp"
#include "wordforge/model/char_lm.hpp"
#include "wordforge/model/seq2seq.hpp"
#include "wordforge/model/style_transfer.hpp"
#include "wordforge/text/dataset.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wf::cli {

enum class ModelKind { kRnn, kSeq2Seq, kStyleTransfer };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);  // throws std::runtime_error on unknown

struct DatasetSpec {
  std::string pairs_path;         // source<TAB>target per line; optional for styletransfer
  std::string source_words_path;  // per-side surplus lists (non-parallel corpora)
  std::string target_words_path;
  std::string source_language = "src";
  std::string target_language = "tgt";
};

// Everything a run needs; archived next to its outputs so the experiment can
// be re-run from the archive alone.
struct ExperimentConfig {
  int schema_version = 1;
  ModelKind model = ModelKind::kSeq2Seq;
  DatasetSpec dataset;
  int holdout_count = 0;
  uint64_t seed = 0;
  std::string out_dir = ".";
  model::CharLMConfig rnn;
  model::Seq2SeqConfig seq2seq;
  model::TransferConfig styletransfer;
};

nlohmann::json to_json(const ExperimentConfig& c);
// Validates schema_version, model kind, and key spelling; unknown keys are
// rejected so a typo cannot silently fall back to a default.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// Loads the files named by the config: the parallel pair file and/or the
// per-side word lists (at least one must be set).
text::WordDataset load_configured_dataset(const ExperimentConfig& config);

// A trained generator of any of the three kinds. The naive baseline carries
// two char LMs: the source-side one only feeds the indicator mapping.
struct TrainedModel {
  ExperimentConfig config;
  std::unique_ptr<model::CharLM> rnn_source;
  std::unique_ptr<model::CharLM> rnn_target;
  std::unique_ptr<model::IndicatorMap> indicator;
  std::unique_ptr<model::Seq2SeqModel> seq2seq;
  std::unique_ptr<model::TransferModel> transfer;

  ModelKind kind() const { return config.model; }

  // One proposed target-style word for one source word. Only the baseline's
  // sampling consumes `rng`; the other kinds decode deterministically.
  std::string propose(std::string_view source_word, num::Rng& rng) const;

  // Role-prefixed stable ordering, e.g. "target/char_lm.emb.table".
  std::vector<std::pair<std::string, num::Parameter*>> named_parameters();
};

// Trains the configured kind on the dataset's train split (alphabets cover
// holdout words too). Parameters are narrowed to stored precision on
// completion, so a save/load round trip reproduces outputs exactly.
TrainedModel train_model(const ExperimentConfig& config, const text::WordDataset& data);

void save_model(TrainedModel& m, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace wf::cli
