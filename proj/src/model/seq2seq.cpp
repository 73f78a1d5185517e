#include "wordforge/model/seq2seq.hpp"

#include "wordforge/num/adam.hpp"
#include "wordforge/text/unicode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wf::model {

using text::Alphabet;

namespace {
constexpr double kMaskPenalty = 1e30;

Tensor zeros(int rows, int cols) { return Tensor({rows, cols}); }
}  // namespace

Seq2SeqModel::Seq2SeqModel(text::Alphabet source_alphabet, text::Alphabet target_alphabet,
                           const Seq2SeqConfig& config, uint64_t seed)
    : src_alphabet_(std::move(source_alphabet)),
      tgt_alphabet_(std::move(target_alphabet)),
      config_(config) {
  Rng rng = Rng(seed).fork("seq2seq-init");
  const int h = config_.hidden;
  const double k = 1.0 / std::sqrt(static_cast<double>(h));
  src_emb_ = Embedding("seq2seq.src_emb", src_alphabet_.size(), config_.d_emb, rng);
  tgt_emb_ = Embedding("seq2seq.tgt_emb", tgt_alphabet_.size(), config_.d_emb, rng);
  encoder_ = GruCell("seq2seq.enc", config_.d_emb, h, rng);
  decoder_ = GruCell("seq2seq.dec", config_.d_emb + h, h, rng);
  bridge_ = Linear("seq2seq.bridge", h, h, rng);
  attn_w1_ = Parameter("seq2seq.attn.w1", Tensor::uniform({h, h}, -k, k, rng));
  attn_w2_ = Parameter("seq2seq.attn.w2", Tensor::uniform({h, h}, -k, k, rng));
  attn_v_ = Parameter("seq2seq.attn.v", Tensor::uniform({h, 1}, -k, k, rng));
  out_ = Linear("seq2seq.out", 2 * h, tgt_alphabet_.size(), rng);
}

std::vector<num::Parameter*> Seq2SeqModel::parameters() {
  std::vector<num::Parameter*> ps;
  collect(ps, src_emb_);
  collect(ps, tgt_emb_);
  collect(ps, encoder_);
  collect(ps, decoder_);
  collect(ps, bridge_);
  ps.push_back(&attn_w1_);
  ps.push_back(&attn_w2_);
  ps.push_back(&attn_v_);
  collect(ps, out_);
  return ps;
}

Seq2SeqModel::Encoded Seq2SeqModel::encode(Tape& t, const text::Batch& src) const {
  const int rows = src.size();
  const int width = src.width();
  Encoded enc;
  enc.additive_mask = zeros(rows, width);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < width; ++c) {
      enc.additive_mask.at(r, c) =
          (src.mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] - 1.0) *
          kMaskPenalty;
    }
  }

  Value w1 = t.watch(attn_w1_);
  Value h = t.constant(zeros(rows, config_.hidden));
  for (int pos = 0; pos < width; ++pos) {
    std::vector<int32_t> ids(static_cast<std::size_t>(rows));
    Tensor mask_col({rows, 1});
    for (int r = 0; r < rows; ++r) {
      ids[static_cast<std::size_t>(r)] =
          src.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)];
      mask_col.at(r, 0) = src.mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)];
    }
    Value x = src_emb_.rows_for(t, ids);
    h = encoder_.masked_step(t, x, h, t.constant(mask_col));
    enc.outputs.push_back(h);
    enc.proj.push_back(num::matmul(h, w1));
  }
  enc.final_state = h;
  return enc;
}

Value Seq2SeqModel::attend(Tape& t, const Encoded& enc, Value state) const {
  Value sw2 = num::matmul(state, t.watch(attn_w2_));
  Value v = t.watch(attn_v_);
  std::vector<Value> score_cols;
  score_cols.reserve(enc.outputs.size());
  for (const Value& proj : enc.proj) {
    score_cols.push_back(num::matmul(num::tanh(proj + sw2), v));  // B×1
  }
  Value scores = num::concat_cols(score_cols);  // B×T
  return num::softmax_rows(scores + t.constant(enc.additive_mask));
}

Value Seq2SeqModel::context_of(Tape& t, const Encoded& enc, Value weights) const {
  Value ctx;
  for (std::size_t i = 0; i < enc.outputs.size(); ++i) {
    Value term = num::slice_cols(weights, static_cast<int64_t>(i), static_cast<int64_t>(i) + 1) *
                 enc.outputs[i];
    ctx = i == 0 ? term : ctx + term;
  }
  (void)t;
  return ctx;
}

std::pair<Value, double> Seq2SeqModel::batch_loss(Tape& t, const text::Batch& src,
                                                  const text::Batch& tgt) const {
  const int rows = src.size();
  Encoded enc = encode(t, src);
  Value state = num::tanh(bridge_.apply(t, enc.final_state));

  std::vector<Value> losses;
  double chars = 0.0;
  for (int pos = 0; pos + 1 < tgt.width(); ++pos) {
    std::vector<int32_t> in_ids(static_cast<std::size_t>(rows));
    std::vector<int32_t> targets(static_cast<std::size_t>(rows));
    std::vector<double> weights(static_cast<std::size_t>(rows));
    double live = 0.0;
    for (int r = 0; r < rows; ++r) {
      in_ids[static_cast<std::size_t>(r)] =
          tgt.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)];
      targets[static_cast<std::size_t>(r)] =
          tgt.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)];
      const double w = tgt.mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)];
      weights[static_cast<std::size_t>(r)] = w;
      live += w;
    }
    if (live == 0.0) break;
    chars += live;

    Value attn = attend(t, enc, state);
    Value ctx = context_of(t, enc, attn);
    Value x = num::concat_cols(std::vector<Value>{tgt_emb_.rows_for(t, in_ids), ctx});
    state = decoder_.step(t, x, state);
    Value logits = out_.apply(t, num::concat_cols(std::vector<Value>{state, ctx}));
    losses.push_back(num::cross_entropy_sum(logits, targets, weights));
  }
  if (losses.empty()) {
    return {num::scale(t.constant(Tensor::scalar(0.0)), 1.0), 0.0};
  }
  Value total = losses[0];
  for (std::size_t i = 1; i < losses.size(); ++i) total = total + losses[i];
  return {num::scale(total, 1.0 / chars), chars};
}

namespace {

// Pads one side of a pair list into a batch, optionally forcing a width.
text::Batch pair_side_block(std::span<const text::WordPair> pairs, const text::Alphabet& alphabet,
                            bool source_side, std::span<const int> items, int min_width) {
  std::vector<text::EncodedWord> enc;
  enc.reserve(pairs.size());
  for (const text::WordPair& p : pairs) {
    enc.push_back(text::encode_word(source_side ? p.source : p.target, alphabet));
  }
  return text::pad_block(enc, items, min_width);
}

std::vector<int> iota_items(std::size_t n) {
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
  return v;
}

}  // namespace

double Seq2SeqModel::teacher_forced_loss(std::span<const text::WordPair> pairs, int min_src_width,
                                         int min_tgt_width) const {
  if (pairs.empty()) throw std::invalid_argument("teacher_forced_loss: empty batch");
  const std::vector<int> items = iota_items(pairs.size());
  text::Batch src = pair_side_block(pairs, src_alphabet_, true, items, min_src_width);
  text::Batch tgt = pair_side_block(pairs, tgt_alphabet_, false, items, min_tgt_width);
  Tape t;
  auto [loss, chars] = batch_loss(t, src, tgt);
  return t.val(loss).item();
}

Value Seq2SeqModel::training_loss(Tape& t, std::span<const text::WordPair> pairs) const {
  if (pairs.empty()) throw std::invalid_argument("training_loss: empty batch");
  const std::vector<int> items = iota_items(pairs.size());
  text::Batch src = pair_side_block(pairs, src_alphabet_, true, items, 0);
  text::Batch tgt = pair_side_block(pairs, tgt_alphabet_, false, items, 0);
  return batch_loss(t, src, tgt).first;
}

double Seq2SeqModel::teacher_forced_accuracy(std::span<const text::WordPair> pairs) const {
  if (pairs.empty()) throw std::invalid_argument("teacher_forced_accuracy: empty batch");
  const std::vector<int> items = iota_items(pairs.size());
  text::Batch src = pair_side_block(pairs, src_alphabet_, true, items, 0);
  text::Batch tgt = pair_side_block(pairs, tgt_alphabet_, false, items, 0);

  const int rows = src.size();
  Tape t;
  Encoded enc = encode(t, src);
  Value state = num::tanh(bridge_.apply(t, enc.final_state));
  double correct = 0.0;
  double total = 0.0;
  for (int pos = 0; pos + 1 < tgt.width(); ++pos) {
    std::vector<int32_t> in_ids(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      in_ids[static_cast<std::size_t>(r)] =
          tgt.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)];
    }
    Value attn = attend(t, enc, state);
    Value ctx = context_of(t, enc, attn);
    Value x = num::concat_cols(std::vector<Value>{tgt_emb_.rows_for(t, in_ids), ctx});
    state = decoder_.step(t, x, state);
    const Tensor& logits =
        t.val(out_.apply(t, num::concat_cols(std::vector<Value>{state, ctx})));
    for (int r = 0; r < rows; ++r) {
      if (tgt.mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)] == 0.0) {
        continue;
      }
      int best = 0;
      for (int c = 1; c < tgt_alphabet_.size(); ++c) {
        if (logits.at(r, c) > logits.at(r, best)) best = c;
      }
      total += 1.0;
      if (best == tgt.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)]) {
        correct += 1.0;
      }
    }
  }
  return total > 0 ? correct / total : 0.0;
}

void Seq2SeqModel::train(std::span<const text::WordPair> train_pairs, uint64_t seed) {
  std::vector<text::EncodedWord> src_enc, tgt_enc;
  src_enc.reserve(train_pairs.size());
  tgt_enc.reserve(train_pairs.size());
  for (const text::WordPair& p : train_pairs) {
    src_enc.push_back(text::encode_word(p.source, src_alphabet_));
    tgt_enc.push_back(text::encode_word(p.target, tgt_alphabet_));
  }

  num::Adam opt({.lr = config_.lr});
  std::vector<num::Parameter*> params = parameters();
  double initial_loss = -1.0;

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    double epoch_ce = 0.0;
    double epoch_chars = 0.0;
    int step_no = 0;
    for (const std::vector<int>& items : text::batch_order(
             static_cast<int>(train_pairs.size()), config_.batch_size, seed, epoch)) {
      ++step_no;
      text::Batch src = text::pad_block(src_enc, items);
      text::Batch tgt = text::pad_block(tgt_enc, items);
      Tape t;
      auto [loss, chars] = batch_loss(t, src, tgt);
      const double loss_val = t.val(loss).item();
      if (!std::isfinite(loss_val)) {
        throw std::runtime_error("seq2seq training aborted: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", step " + std::to_string(step_no));
      }
      if (initial_loss < 0) initial_loss = loss_val;
      if (loss_val > 10.0 * initial_loss) {
        throw std::runtime_error(
            "seq2seq training aborted: divergence at epoch " + std::to_string(epoch) + ", step " +
            std::to_string(step_no) + " (loss " + std::to_string(loss_val) + " vs initial " +
            std::to_string(initial_loss) + ")");
      }
      step_losses_.push_back(loss_val);
      epoch_ce += loss_val * chars;
      epoch_chars += chars;
      t.backward(loss);
      opt.step(params, t);
    }
    epoch_losses_.push_back(epoch_chars > 0 ? epoch_ce / epoch_chars : 0.0);
  }
}

num::Tensor Seq2SeqModel::attention_weights(const num::Tensor& decoder_state,
                                            std::span<const num::Tensor> encoder_outputs,
                                            const num::Tensor& pad_mask) const {
  const int rows = static_cast<int>(pad_mask.rows());
  const int width = static_cast<int>(pad_mask.cols());
  if (static_cast<int>(encoder_outputs.size()) != width) {
    throw std::invalid_argument("attention_weights: mask width " + std::to_string(width) +
                                " does not match " + std::to_string(encoder_outputs.size()) +
                                " encoder outputs");
  }
  for (int r = 0; r < rows; ++r) {
    double live = 0.0;
    for (int c = 0; c < width; ++c) live += pad_mask.at(r, c);
    if (live == 0.0) {
      throw std::invalid_argument("attention_weights: row " + std::to_string(r) +
                                  " of the source batch is entirely PAD");
    }
  }

  Tape t;
  Encoded enc;
  enc.additive_mask = zeros(rows, width);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < width; ++c) {
      enc.additive_mask.at(r, c) = (pad_mask.at(r, c) - 1.0) * kMaskPenalty;
    }
  }
  Value w1 = t.watch(attn_w1_);
  for (const num::Tensor& h : encoder_outputs) {
    Value hv = t.constant(h);
    enc.outputs.push_back(hv);
    enc.proj.push_back(num::matmul(hv, w1));
  }
  return t.val(attend(t, enc, t.constant(decoder_state)));
}

Seq2SeqModel::Translation Seq2SeqModel::translate_ids(std::span<const int> src_ids,
                                                      std::span<const double> src_mask) const {
  if (src_ids.size() != src_mask.size()) {
    throw std::invalid_argument("translate_ids: ids/mask size mismatch");
  }
  text::Batch src;
  src.items = {0};
  src.ids.emplace_back(src_ids.begin(), src_ids.end());
  src.mask.emplace_back(src_mask.begin(), src_mask.end());

  Tape t;
  Encoded enc = encode(t, src);
  Value state = num::tanh(bridge_.apply(t, enc.final_state));

  Translation result;
  result.truncated = true;
  std::u32string word;
  int prev = Alphabet::kBos;
  while (static_cast<int>(word.size()) < config_.max_decode_len) {
    Value attn = attend(t, enc, state);
    const Tensor& a = t.val(attn);
    std::vector<double> row(static_cast<std::size_t>(a.cols()));
    for (int64_t c = 0; c < a.cols(); ++c) row[static_cast<std::size_t>(c)] = a.at(0, c);
    result.attention.push_back(std::move(row));

    Value ctx = context_of(t, enc, attn);
    const int32_t prev32[1] = {static_cast<int32_t>(prev)};
    Value x = num::concat_cols(std::vector<Value>{tgt_emb_.rows_for(t, prev32), ctx});
    state = decoder_.step(t, x, state);
    const Tensor& logits =
        t.val(out_.apply(t, num::concat_cols(std::vector<Value>{state, ctx})));

    int best = Alphabet::kEos;
    for (int c = 0; c < tgt_alphabet_.size(); ++c) {
      if (c == Alphabet::kPad || c == Alphabet::kBos || c == Alphabet::kUnk) continue;
      if (logits.at(0, c) > logits.at(0, best)) best = c;
    }
    if (best == Alphabet::kEos) {
      result.truncated = false;
      break;
    }
    word.push_back(tgt_alphabet_.symbol_at(best));
    prev = best;
  }
  result.word = text::utf32_to_utf8(word);
  return result;
}

Seq2SeqModel::Translation Seq2SeqModel::translate_greedy(std::string_view source_word) const {
  text::EncodedWord enc = text::encode_word(source_word, src_alphabet_);
  std::vector<double> mask(enc.ids.size(), 1.0);
  return translate_ids(enc.ids, mask);
}

Seq2SeqModel train_seq2seq(std::span<const text::WordPair> pairs_train,
                           const text::Alphabet& source_alphabet,
                           const text::Alphabet& target_alphabet, const Seq2SeqConfig& config,
                           uint64_t seed) {
  if (pairs_train.size() < 2) {
    throw std::invalid_argument("train_seq2seq: need at least 2 pairs, got " +
                                std::to_string(pairs_train.size()));
  }
  Seq2SeqModel model(source_alphabet, target_alphabet, config, seed);
  model.train(pairs_train, seed);
  return model;
}

}  // namespace wf::model
