#pragma once

#include "wordforge/model/layers.hpp"
#include "wordforge/text/alphabet.hpp"
#include "wordforge/text/batch.hpp"
#include "wordforge/text/dataset.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wf::model {

struct Seq2SeqConfig {
  int d_emb = 32;
  int hidden = 128;
  double lr = 1e-3;
  int batch_size = 32;
  int epochs = 400;
  int max_decode_len = text::kMaxWordScalars;
};

// GRU encoder–decoder with additive attention, trained by teacher forcing on
// parallel word pairs.
//
// Decoding step t (state s, encoder outputs H, previous symbol g):
//   a_t = softmax_i(vᵀ tanh(H_i W1 + s W2))   (PAD positions masked out)
//   c_t = Σ_i a_t[i] · H_i
//   s'  = GRU([emb(g); c_t], s)
//   logits = W_out [s'; c_t] + b
class Seq2SeqModel {
 public:
  Seq2SeqModel(text::Alphabet source_alphabet, text::Alphabet target_alphabet,
               const Seq2SeqConfig& config, uint64_t seed);

  // Full training schedule over the given train-split pairs. Deterministic
  // for a fixed seed. Aborts (std::runtime_error) on non-finite loss or when
  // a batch loss exceeds 10× the initial one.
  void train(std::span<const text::WordPair> train_pairs, uint64_t seed);

  // Mean next-character cross-entropy over non-PAD target positions under
  // teacher forcing. Width floors let tests prove padding changes nothing.
  double teacher_forced_loss(std::span<const text::WordPair> pairs, int min_src_width = 0,
                             int min_tgt_width = 0) const;
  // Fraction of non-PAD target positions whose argmax equals the truth.
  double teacher_forced_accuracy(std::span<const text::WordPair> pairs) const;

  // Teacher-forced loss as one graph on the caller's tape. Exposed for
  // gradient verification.
  Value training_loss(Tape& t, std::span<const text::WordPair> pairs) const;

  struct Translation {
    std::string word;
    bool truncated = false;
    // one row per decode step: attention over source positions, sums to 1
    std::vector<std::vector<double>> attention;
  };

  // Argmax decoding from BOS until EOS or max length. Pure function of
  // (model, source word).
  Translation translate_greedy(std::string_view source_word) const;
  // Same, over an explicit padded id row + mask (mask[i] ∈ {0,1}).
  Translation translate_ids(std::span<const int> src_ids, std::span<const double> src_mask) const;

  // One attention step in isolation: decoder_state B×h, encoder_outputs a
  // list of B×h tensors (one per source position), pad_mask B×T.
  // Throws std::invalid_argument if some row of pad_mask is all zero.
  num::Tensor attention_weights(const num::Tensor& decoder_state,
                                std::span<const num::Tensor> encoder_outputs,
                                const num::Tensor& pad_mask) const;

  const text::Alphabet& source_alphabet() const { return src_alphabet_; }
  const text::Alphabet& target_alphabet() const { return tgt_alphabet_; }
  const Seq2SeqConfig& config() const { return config_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }
  const std::vector<double>& step_losses() const { return step_losses_; }

  const num::Tensor& attn_w1() const { return attn_w1_.value; }
  const num::Tensor& attn_w2() const { return attn_w2_.value; }
  const num::Tensor& attn_v() const { return attn_v_.value; }

  std::vector<num::Parameter*> parameters();

 private:
  struct Encoded {
    std::vector<Value> outputs;  // per source position, B×h
    std::vector<Value> proj;     // H_i W1, precomputed per position
    Value final_state;           // B×h after masked steps
    Tensor additive_mask;        // B×T: 0 on real, -1e30 on PAD
  };

  Encoded encode(Tape& t, const text::Batch& src) const;
  Value attend(Tape& t, const Encoded& enc, Value state) const;       // B×T weights
  Value context_of(Tape& t, const Encoded& enc, Value weights) const; // B×h
  // teacher-forced loss graph for one batch; returns {mean loss, char count}
  std::pair<Value, double> batch_loss(Tape& t, const text::Batch& src,
                                      const text::Batch& tgt) const;

  text::Alphabet src_alphabet_;
  text::Alphabet tgt_alphabet_;
  Seq2SeqConfig config_;

  Embedding src_emb_, tgt_emb_;
  GruCell encoder_, decoder_;
  Linear bridge_;
  num::Parameter attn_w1_, attn_w2_, attn_v_;
  Linear out_;

  std::vector<double> epoch_losses_;
  std::vector<double> step_losses_;
};

// Factory mirroring the training entry point: requires >= 2 pairs.
Seq2SeqModel train_seq2seq(std::span<const text::WordPair> pairs_train,
                           const text::Alphabet& source_alphabet,
                           const text::Alphabet& target_alphabet, const Seq2SeqConfig& config,
                           uint64_t seed);

}  // namespace wf::model
