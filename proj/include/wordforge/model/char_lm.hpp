#pragma once

#include "wordforge/model/layers.hpp"
#include "wordforge/text/alphabet.hpp"
#include "wordforge/text/dataset.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wf::model {

struct CharLMConfig {
  int d_emb = 32;
  int hidden = 128;
  double lr = 1e-3;
  int batch_size = 32;
  int epochs = 300;
  // Generated words stop here even without EOS; matches the loader's cap.
  int max_generated_len = text::kMaxWordScalars;
  double sample_temperature = 0.8;
};

// Character-level GRU language model over one alphabet. Words are modeled as
// [BOS, c1..cn, EOS] with next-symbol cross-entropy.
class CharLM {
 public:
  CharLM(text::Alphabet alphabet, const CharLMConfig& config, uint64_t seed);

  // One pass of the full training schedule. Records mean per-character loss
  // per epoch; throws std::runtime_error naming epoch and step if the loss
  // turns non-finite.
  void train(std::span<const std::string> words, uint64_t seed);

  struct Generated {
    std::string word;
    bool truncated = false;
  };

  // Autoregressive generation starting from a regular seed symbol.
  // temperature <= 0 selects greedy argmax decoding. Specials other than EOS
  // are never emitted.
  Generated generate(int seed_symbol, double temperature, num::Rng& rng) const;
  Generated generate_greedy(int seed_symbol) const;

  // Distribution over the next symbol given prefix ids (no BOS framing;
  // pass regular symbol indices). Sums to 1.
  std::vector<double> next_distribution(std::span<const int> prefix) const;

  // Mean per-character next-symbol cross-entropy over the given words as one
  // graph on the caller's tape. Exposed for gradient verification.
  num::Value training_loss(num::Tape& t, std::span<const std::string> words) const;

  const text::Alphabet& alphabet() const { return alphabet_; }
  const CharLMConfig& config() const { return config_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }
  const num::Tensor& embedding_table() const { return emb_.table.value; }

  std::vector<num::Parameter*> parameters();

 private:
  num::Tensor run_to_state(std::span<const int> symbols_after_bos) const;
  int pick_next(const num::Tensor& h, double temperature, num::Rng* rng) const;

  text::Alphabet alphabet_;
  CharLMConfig config_;
  Embedding emb_;
  GruCell gru_;
  Linear out_;
  std::vector<double> epoch_losses_;
};

// Trains a model on the given (already normalized) words. Requires at least
// two distinct words.
CharLM train_char_lm(std::span<const std::string> words, const text::Alphabet& alphabet,
                     const CharLMConfig& config, uint64_t seed);

// Embedding tables used to pick a seed symbol for a source word: the mean of
// the word's character embeddings is matched to the nearest regular target
// symbol.
struct IndicatorMap {
  text::Alphabet source_alphabet;
  text::Alphabet target_alphabet;
  num::Tensor source_table;  // |source alphabet| × d
  num::Tensor target_table;  // |target alphabet| × d
  std::string metric = "euclidean";
};

IndicatorMap make_indicator_map(const CharLM& source_lm, const CharLM& target_lm);

// Nearest regular target symbol to the mean source-character embedding,
// Euclidean distance, ties broken by lowest index. Specials never enter the
// mean and are never returned. Throws std::invalid_argument("… no indicator
// basis …") when the word is empty or entirely unknown.
int indicator_char(std::string_view source_word, const IndicatorMap& map);

// Full naive pipeline: indicator seed then autoregressive generation.
// temperature <= 0 is greedy.
CharLM::Generated translate_rnn(std::string_view source_word, const IndicatorMap& map,
                                const CharLM& lm, double temperature, num::Rng& rng);

}  // namespace wf::model
