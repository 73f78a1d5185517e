#include "wordforge/cli/experiment.hpp"

#include "wordforge/num/rng.hpp"

#include <fstream>
#include <initializer_list>
#include <iterator>
#include <optional>
#include <stdexcept>

namespace wf::cli {
namespace {

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

void require_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                  const std::string& where) {
  if (!j.is_object()) throw std::runtime_error(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (std::string_view a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known) throw std::runtime_error(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T def, const std::string& where) {
  if (!j.contains(key)) return def;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": bad value for '" + key + "'");
  }
}

nlohmann::json rnn_to_json(const model::CharLMConfig& c) {
  return {{"d_emb", c.d_emb},
          {"hidden", c.hidden},
          {"lr", c.lr},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"max_generated_len", c.max_generated_len},
          {"sample_temperature", c.sample_temperature}};
}

model::CharLMConfig rnn_from_json(const nlohmann::json& j, const std::string& where) {
  require_keys(j,
               {"d_emb", "hidden", "lr", "batch_size", "epochs", "max_generated_len",
                "sample_temperature"},
               where);
  model::CharLMConfig c;
  c.d_emb = get_or(j, "d_emb", c.d_emb, where);
  c.hidden = get_or(j, "hidden", c.hidden, where);
  c.lr = get_or(j, "lr", c.lr, where);
  c.batch_size = get_or(j, "batch_size", c.batch_size, where);
  c.epochs = get_or(j, "epochs", c.epochs, where);
  c.max_generated_len = get_or(j, "max_generated_len", c.max_generated_len, where);
  c.sample_temperature = get_or(j, "sample_temperature", c.sample_temperature, where);
  return c;
}

nlohmann::json seq2seq_to_json(const model::Seq2SeqConfig& c) {
  return {{"d_emb", c.d_emb},       {"hidden", c.hidden},
          {"lr", c.lr},             {"batch_size", c.batch_size},
          {"epochs", c.epochs},     {"max_decode_len", c.max_decode_len}};
}

model::Seq2SeqConfig seq2seq_from_json(const nlohmann::json& j, const std::string& where) {
  require_keys(j, {"d_emb", "hidden", "lr", "batch_size", "epochs", "max_decode_len"}, where);
  model::Seq2SeqConfig c;
  c.d_emb = get_or(j, "d_emb", c.d_emb, where);
  c.hidden = get_or(j, "hidden", c.hidden, where);
  c.lr = get_or(j, "lr", c.lr, where);
  c.batch_size = get_or(j, "batch_size", c.batch_size, where);
  c.epochs = get_or(j, "epochs", c.epochs, where);
  c.max_decode_len = get_or(j, "max_decode_len", c.max_decode_len, where);
  return c;
}

nlohmann::json transfer_to_json(const model::TransferConfig& c) {
  return {{"d_emb", c.d_emb},
          {"d_z", c.d_z},
          {"d_style", c.d_style},
          {"hidden", c.hidden},
          {"lr", c.lr},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"lambda_adv", c.lambda_adv},
          {"label_smoothing", c.label_smoothing},
          {"max_generated_len", c.max_generated_len},
          {"conv_widths", c.conv_widths},
          {"conv_filters", c.conv_filters}};
}

model::TransferConfig transfer_from_json(const nlohmann::json& j, const std::string& where) {
  require_keys(j,
               {"d_emb", "d_z", "d_style", "hidden", "lr", "batch_size", "epochs", "lambda_adv",
                "label_smoothing", "max_generated_len", "conv_widths", "conv_filters"},
               where);
  model::TransferConfig c;
  c.d_emb = get_or(j, "d_emb", c.d_emb, where);
  c.d_z = get_or(j, "d_z", c.d_z, where);
  c.d_style = get_or(j, "d_style", c.d_style, where);
  c.hidden = get_or(j, "hidden", c.hidden, where);
  c.lr = get_or(j, "lr", c.lr, where);
  c.batch_size = get_or(j, "batch_size", c.batch_size, where);
  c.epochs = get_or(j, "epochs", c.epochs, where);
  c.lambda_adv = get_or(j, "lambda_adv", c.lambda_adv, where);
  c.label_smoothing = get_or(j, "label_smoothing", c.label_smoothing, where);
  c.max_generated_len = get_or(j, "max_generated_len", c.max_generated_len, where);
  c.conv_widths = get_or(j, "conv_widths", c.conv_widths, where);
  c.conv_filters = get_or(j, "conv_filters", c.conv_filters, where);
  return c;
}

std::optional<std::string> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

void narrow_model(TrainedModel& m) {
  for (auto& [name, p] : m.named_parameters()) narrow_tensor(p->value);
}

}  // namespace

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kRnn: return "rnn";
    case ModelKind::kSeq2Seq: return "seq2seq";
    case ModelKind::kStyleTransfer: return "styletransfer";
  }
  throw std::logic_error("bad ModelKind");
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "rnn") return ModelKind::kRnn;
  if (s == "seq2seq") return ModelKind::kSeq2Seq;
  if (s == "styletransfer") return ModelKind::kStyleTransfer;
  throw std::runtime_error("unknown model kind '" + std::string(s) +
                           "' (expected rnn, seq2seq, or styletransfer)");
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"schema_version", c.schema_version},
          {"model", to_string(c.model)},
          {"dataset",
           {{"pairs", c.dataset.pairs_path},
            {"source_words", c.dataset.source_words_path},
            {"target_words", c.dataset.target_words_path},
            {"source_language", c.dataset.source_language},
            {"target_language", c.dataset.target_language}}},
          {"holdout_count", c.holdout_count},
          {"seed", c.seed},
          {"out_dir", c.out_dir},
          {"rnn", rnn_to_json(c.rnn)},
          {"seq2seq", seq2seq_to_json(c.seq2seq)},
          {"styletransfer", transfer_to_json(c.styletransfer)}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  require_keys(j,
               {"schema_version", "model", "dataset", "holdout_count", "seed", "out_dir", "rnn",
                "seq2seq", "styletransfer"},
               "config");
  ExperimentConfig c;
  if (!j.contains("schema_version")) throw std::runtime_error("config: missing 'schema_version'");
  c.schema_version = get_or(j, "schema_version", 0, "config");
  if (c.schema_version != 1)
    throw std::runtime_error("config: unsupported schema_version " +
                             std::to_string(c.schema_version));
  if (!j.contains("model")) throw std::runtime_error("config: missing 'model'");
  c.model = parse_model_kind(get_or<std::string>(j, "model", "", "config"));

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    require_keys(d, {"pairs", "source_words", "target_words", "source_language",
                     "target_language"},
                 "config.dataset");
    c.dataset.pairs_path = get_or<std::string>(d, "pairs", "", "config.dataset");
    c.dataset.source_words_path = get_or<std::string>(d, "source_words", "", "config.dataset");
    c.dataset.target_words_path = get_or<std::string>(d, "target_words", "", "config.dataset");
    c.dataset.source_language =
        get_or<std::string>(d, "source_language", c.dataset.source_language, "config.dataset");
    c.dataset.target_language =
        get_or<std::string>(d, "target_language", c.dataset.target_language, "config.dataset");
  }

  c.holdout_count = get_or(j, "holdout_count", 0, "config");
  if (c.holdout_count < 0) throw std::runtime_error("config: holdout_count must be >= 0");
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (s.is_number_integer() && s.get<int64_t>() < 0)
      throw std::runtime_error("config: seed must be >= 0");
    c.seed = get_or<uint64_t>(j, "seed", 0, "config");
  }
  c.out_dir = get_or<std::string>(j, "out_dir", c.out_dir, "config");
  if (j.contains("rnn")) c.rnn = rnn_from_json(j.at("rnn"), "config.rnn");
  if (j.contains("seq2seq")) c.seq2seq = seq2seq_from_json(j.at("seq2seq"), "config.seq2seq");
  if (j.contains("styletransfer"))
    c.styletransfer = transfer_from_json(j.at("styletransfer"), "config.styletransfer");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open config");
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed config: " + one_line(e.what()));
  }
  try {
    return config_from_json(j);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

text::WordDataset load_configured_dataset(const ExperimentConfig& config) {
  const auto& d = config.dataset;
  if (d.pairs_path.empty() && d.source_words_path.empty() && d.target_words_path.empty())
    throw std::runtime_error("config names no dataset files");
  return text::load_dataset(opt_path(d.pairs_path), opt_path(d.source_words_path),
                            opt_path(d.target_words_path));
}

std::string TrainedModel::propose(std::string_view source_word, num::Rng& rng) const {
  switch (config.model) {
    case ModelKind::kRnn:
      return model::translate_rnn(source_word, *indicator, *rnn_target,
                                  config.rnn.sample_temperature, rng)
          .word;
    case ModelKind::kSeq2Seq: return seq2seq->translate_greedy(source_word).word;
    case ModelKind::kStyleTransfer:
      return transfer->transfer(source_word, model::StyleId::kY1, model::StyleId::kY2);
  }
  throw std::logic_error("bad ModelKind");
}

std::vector<std::pair<std::string, num::Parameter*>> TrainedModel::named_parameters() {
  std::vector<std::pair<std::string, num::Parameter*>> out;
  auto add = [&out](const char* role, std::vector<num::Parameter*> ps) {
    for (num::Parameter* p : ps) out.emplace_back(std::string(role) + "/" + p->name, p);
  };
  switch (config.model) {
    case ModelKind::kRnn:
      add("source", rnn_source->parameters());
      add("target", rnn_target->parameters());
      break;
    case ModelKind::kSeq2Seq: add("model", seq2seq->parameters()); break;
    case ModelKind::kStyleTransfer: add("model", transfer->parameters()); break;
  }
  return out;
}

TrainedModel train_model(const ExperimentConfig& config, const text::WordDataset& data) {
  TrainedModel m;
  m.config = config;

  std::vector<std::string> train_src, train_tgt;
  for (const auto& p : data.pairs) {
    if (p.split != text::Split::kTrain) continue;
    train_src.push_back(p.source);
    train_tgt.push_back(p.target);
  }
  train_src.insert(train_src.end(), data.extra_source.begin(), data.extra_source.end());
  train_tgt.insert(train_tgt.end(), data.extra_target.begin(), data.extra_target.end());

  // Alphabets span the whole dataset (holdout included) so held-out source
  // words encode without UNK at generation time.
  const auto all_src = data.source_words();
  const auto all_tgt = data.target_words();
  const num::Rng root(config.seed, "train");

  switch (config.model) {
    case ModelKind::kRnn: {
      if (train_src.size() < 2 || train_tgt.size() < 2)
        throw std::runtime_error("rnn training needs at least two words per side");
      auto src_alpha = text::Alphabet::build(all_src, config.dataset.source_language);
      auto tgt_alpha = text::Alphabet::build(all_tgt, config.dataset.target_language);
      m.rnn_source = std::make_unique<model::CharLM>(
          model::train_char_lm(train_src, src_alpha, config.rnn, root.fork("source-lm").key()));
      m.rnn_target = std::make_unique<model::CharLM>(
          model::train_char_lm(train_tgt, tgt_alpha, config.rnn, root.fork("target-lm").key()));
      m.indicator = std::make_unique<model::IndicatorMap>(
          model::make_indicator_map(*m.rnn_source, *m.rnn_target));
      break;
    }
    case ModelKind::kSeq2Seq: {
      std::vector<text::WordPair> train = data.train_pairs();
      if (train.size() < 2) throw std::runtime_error("seq2seq training needs at least two pairs");
      auto src_alpha = text::Alphabet::build(all_src, config.dataset.source_language);
      auto tgt_alpha = text::Alphabet::build(all_tgt, config.dataset.target_language);
      m.seq2seq = std::make_unique<model::Seq2SeqModel>(model::train_seq2seq(
          train, src_alpha, tgt_alpha, config.seq2seq, root.fork("seq2seq").key()));
      break;
    }
    case ModelKind::kStyleTransfer: {
      if (train_src.empty() || train_tgt.empty())
        throw std::runtime_error("style transfer training needs words on both sides");
      std::vector<std::string> everything = all_src;
      everything.insert(everything.end(), all_tgt.begin(), all_tgt.end());
      auto alpha = text::Alphabet::build(
          everything, config.dataset.source_language + "+" + config.dataset.target_language);
      m.transfer = std::make_unique<model::TransferModel>(
          alpha, config.dataset.source_language, config.dataset.target_language,
          config.styletransfer, root.fork("transfer").key());
      m.transfer->train(train_src, train_tgt, root.fork("transfer-train").key());
      break;
    }
  }
  narrow_model(m);
  return m;
}

void save_model(TrainedModel& m, const std::string& path) {
  Checkpoint c;
  c.config = to_json(m.config);
  switch (m.config.model) {
    case ModelKind::kRnn:
      c.alphabets = {m.rnn_source->alphabet(), m.rnn_target->alphabet()};
      break;
    case ModelKind::kSeq2Seq:
      c.alphabets = {m.seq2seq->source_alphabet(), m.seq2seq->target_alphabet()};
      break;
    case ModelKind::kStyleTransfer: c.alphabets = {m.transfer->alphabet()}; break;
  }
  for (auto& [name, p] : m.named_parameters()) c.arrays.push_back({name, p->value});
  save_checkpoint(c, path);
}

TrainedModel load_model(const std::string& path) {
  Checkpoint c = load_checkpoint(path);
  ExperimentConfig cfg;
  try {
    cfg = config_from_json(c.config);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": checkpoint config: " + e.what());
  }

  TrainedModel m;
  m.config = cfg;
  switch (cfg.model) {
    case ModelKind::kRnn: {
      if (c.alphabets.size() != 2)
        throw std::runtime_error(path + ": rnn checkpoint must carry two alphabets");
      m.rnn_source = std::make_unique<model::CharLM>(c.alphabets[0], cfg.rnn, 0);
      m.rnn_target = std::make_unique<model::CharLM>(c.alphabets[1], cfg.rnn, 0);
      break;
    }
    case ModelKind::kSeq2Seq: {
      if (c.alphabets.size() != 2)
        throw std::runtime_error(path + ": seq2seq checkpoint must carry two alphabets");
      m.seq2seq =
          std::make_unique<model::Seq2SeqModel>(c.alphabets[0], c.alphabets[1], cfg.seq2seq, 0);
      break;
    }
    case ModelKind::kStyleTransfer: {
      if (c.alphabets.size() != 1)
        throw std::runtime_error(path + ": styletransfer checkpoint must carry one alphabet");
      m.transfer = std::make_unique<model::TransferModel>(c.alphabets[0],
                                                          cfg.dataset.source_language,
                                                          cfg.dataset.target_language,
                                                          cfg.styletransfer, 0);
      break;
    }
  }

  auto params = m.named_parameters();
  if (params.size() != c.arrays.size())
    throw std::runtime_error(path + ": checkpoint carries " + std::to_string(c.arrays.size()) +
                             " arrays, model expects " + std::to_string(params.size()));
  for (auto& [name, p] : params) {
    const CheckpointArray* a = c.find(name);
    if (!a) throw std::runtime_error(path + ": checkpoint missing array " + name);
    if (a->values.shape() != p->value.shape())
      throw std::runtime_error(path + ": array " + name + " shape mismatch: stored " +
                               num::shape_str(a->values.shape()) + ", model expects " +
                               num::shape_str(p->value.shape()));
    p->value = a->values;
    p->value.set_requires_grad(true);
  }
  if (cfg.model == ModelKind::kRnn)
    m.indicator = std::make_unique<model::IndicatorMap>(
        model::make_indicator_map(*m.rnn_source, *m.rnn_target));
  return m;
}

}  // namespace wf::cli
