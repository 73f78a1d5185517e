#pragma once

#include "wordforge/model/layers.hpp"
#include "wordforge/num/adam.hpp"
#include "wordforge/text/alphabet.hpp"
#include "wordforge/text/batch.hpp"
#include "wordforge/text/dataset.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wf::model {

enum class StyleId { kY1, kY2 };

struct TransferConfig {
  int d_emb = 32;
  int d_z = 64;
  int d_style = 16;
  int hidden = 128;
  double lr = 5e-4;  // both players
  int batch_size = 64;
  int epochs = 300;
  double lambda_adv = 1.0;
  double label_smoothing = 0.1;
  int max_generated_len = text::kMaxWordScalars;
  std::vector<int> conv_widths = {2, 3, 4};
  int conv_filters = 32;
};

struct TrainStats {
  std::vector<double> rec_loss;      // per epoch, char-weighted mean
  std::vector<double> adv_loss_d1;   // per epoch, mean discriminator BCE
  std::vector<double> adv_loss_d2;
  std::vector<double> d1_accuracy;   // per epoch, threshold-0.5 accuracy
  std::vector<double> d2_accuracy;
  std::vector<double> step_rec_loss;  // one entry per generator step
};

// Cross-aligned autoencoder over two non-parallel corpora: a shared encoder
// maps words from either style into a content code z; a shared generator
// renders a code under a style embedding; per-style CNN discriminators push
// free-run transfers toward the target style's teacher-forced distribution.
class TransferModel {
 public:
  TransferModel(text::Alphabet union_alphabet, std::string y1_language_id,
                std::string y2_language_id, const TransferConfig& config, uint64_t seed);

  // Alternating adversarial training; the smaller corpus is resampled each
  // epoch to the larger one's size. Deterministic for fixed seed. Aborts
  // via std::runtime_error on non-finite loss or reconstruction divergence;
  // stats() keeps whatever was recorded up to the abort.
  const TrainStats& train(std::span<const std::string> y1_words,
                          std::span<const std::string> y2_words, uint64_t seed);

  // Content code for one word: 1 × d_z, deterministic.
  num::Tensor encode_content(std::string_view word, StyleId style) const;

  struct Generation {
    std::string word;
    bool truncated = false;
    // teacher-forced mode: one next-symbol distribution per target position
    std::vector<std::vector<double>> step_distributions;
  };

  // Teacher-forced rendering against a given target (for inspection/losses).
  Generation generate_teacher_forced(const num::Tensor& z, StyleId style,
                                     std::string_view target) const;
  // Free-run rendering: feeds back its own softmax as a soft embedding
  // mixture; the hard word is the per-step argmax, EOS-stopped.
  Generation generate_free_run(const num::Tensor& z, StyleId style) const;

  // transfer(w, s, s) and reconstruct(w, s) are the same code path.
  std::string transfer(std::string_view word, StyleId from_style, StyleId to_style) const;
  std::string reconstruct(std::string_view word, StyleId style) const;

  // Teacher-forced generator hidden states for one word (each 1 × hidden).
  std::vector<num::Tensor> teacher_forced_hiddens(std::string_view word, StyleId style) const;

  // P(sequence is a real rendering of `which`'s style). Throws
  // std::invalid_argument when the sequence is shorter than the smallest
  // conv window.
  double discriminate(StyleId which, std::span<const num::Tensor> hidden_seq) const;

  // One optimizer step of a single discriminator on labeled hidden
  // sequences (label 1 = real; smoothing applied internally). Returns the
  // mean BCE. Exposed for discriminator diagnostics.
  double discriminator_step(StyleId which,
                            const std::vector<std::vector<num::Tensor>>& sequences,
                            std::span<const double> labels, num::Adam& opt);

  // Composite encoder/generator objective (L_rec + λ·L_adv) on one batch
  // from each corpus, with every parameter watched trainable. Exposed for
  // gradient verification and objective inspection.
  Value training_loss(Tape& t, std::span<const std::string> y1_words,
                      std::span<const std::string> y2_words) const;

  const text::Alphabet& alphabet() const { return alphabet_; }
  const std::string& language_of(StyleId s) const {
    return s == StyleId::kY1 ? y1_language_ : y2_language_;
  }
  const TransferConfig& config() const { return config_; }
  const TrainStats& stats() const { return stats_; }

  std::vector<num::Parameter*> generator_parameters();
  std::vector<num::Parameter*> discriminator_parameters();
  std::vector<num::Parameter*> parameters();  // both groups, stable order

 private:
  struct Disc {
    std::vector<Linear> convs;  // one per width: (width·hidden) → filters
    Linear head;                // (filters·n_widths) → 1
  };

  struct Unroll {
    std::vector<Value> hiddens;     // per step, B × hidden
    std::vector<Value> step_probs;  // free-run only: per-step softmax rows
    num::Tensor hidden_mask;        // B × L, 1 where the state predicts a real symbol
    Value ce_total;                 // teacher-forced only
    double chars = 0.0;
  };

  struct GenObjective {
    Value loss;
    Value l_rec;
    Value l_adv;
    double chars = 0.0;
  };

  Value style_rows(Tape& t, StyleId style, int rows, bool trainable) const;
  Value encode_block(Tape& t, const text::Batch& block, StyleId style, bool trainable) const;
  Unroll teacher_forced_unroll(Tape& t, Value z, StyleId style, const text::Batch& target,
                               bool trainable) const;
  Unroll free_run_unroll(Tape& t, Value z, StyleId style, int steps, bool trainable) const;
  Value disc_logits(Tape& t, StyleId which, std::span<const Value> hiddens,
                    const num::Tensor& hidden_mask, bool trainable) const;
  GenObjective generator_objective(Tape& t, const text::Batch& b1, const text::Batch& b2,
                                   bool trainable_disc) const;
  text::Batch one_word_block(std::string_view word) const;

  text::Alphabet alphabet_;
  std::string y1_language_;
  std::string y2_language_;
  TransferConfig config_;

  Embedding emb_;           // shared across styles
  Parameter style_emb_[2];  // 1 × d_style each
  GruCell encoder_;
  Linear enc_init_;  // d_style → hidden
  Linear z_proj_;    // hidden → d_z
  Linear gen_init_;  // d_z + d_style → hidden
  GruCell generator_;
  Linear out_;  // hidden → |alphabet|
  Disc disc_[2];

  TrainStats stats_;
};

// Entry point matching the training op: builds the union alphabet from both
// corpora and trains. Both corpora must be non-empty.
TransferModel train_cross_aligned(std::span<const std::string> y1_words,
                                  std::span<const std::string> y2_words,
                                  const std::string& y1_language_id,
                                  const std::string& y2_language_id,
                                  const TransferConfig& config, uint64_t seed);

}  // namespace wf::model
