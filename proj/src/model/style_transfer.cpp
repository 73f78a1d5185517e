#include "wordforge/model/style_transfer.hpp"

#include "wordforge/text/unicode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wf::model {

using text::Alphabet;

namespace {

int idx(StyleId s) { return s == StyleId::kY1 ? 0 : 1; }

double host_sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

Value chain_add(const std::vector<Value>& vs) {
  Value total = vs.front();
  for (std::size_t i = 1; i < vs.size(); ++i) total = total + vs[i];
  return total;
}

}  // namespace

TransferModel::TransferModel(text::Alphabet union_alphabet, std::string y1_language_id,
                             std::string y2_language_id, const TransferConfig& config,
                             uint64_t seed)
    : alphabet_(std::move(union_alphabet)),
      y1_language_(std::move(y1_language_id)),
      y2_language_(std::move(y2_language_id)),
      config_(config) {
  if (config_.conv_widths.empty() ||
      *std::min_element(config_.conv_widths.begin(), config_.conv_widths.end()) < 1) {
    throw std::invalid_argument("transfer model: conv widths must be positive");
  }
  Rng rng = Rng(seed).fork("transfer-init");
  const int h = config_.hidden;
  const int v = alphabet_.size();
  const double ks = 1.0 / std::sqrt(static_cast<double>(config_.d_style));

  emb_ = Embedding("st.emb", v, config_.d_emb, rng);
  style_emb_[0] = Parameter("st.style_y1", Tensor::uniform({1, config_.d_style}, -ks, ks, rng));
  style_emb_[1] = Parameter("st.style_y2", Tensor::uniform({1, config_.d_style}, -ks, ks, rng));
  encoder_ = GruCell("st.enc", config_.d_emb, h, rng);
  enc_init_ = Linear("st.enc_init", config_.d_style, h, rng);
  z_proj_ = Linear("st.z_proj", h, config_.d_z, rng);
  gen_init_ = Linear("st.gen_init", config_.d_z + config_.d_style, h, rng);
  generator_ = GruCell("st.gen", config_.d_emb, h, rng);
  out_ = Linear("st.out", h, v, rng);

  for (int d = 0; d < 2; ++d) {
    const std::string dn = "st.d" + std::to_string(d + 1);
    for (int w : config_.conv_widths) {
      disc_[d].convs.push_back(Linear(dn + ".conv" + std::to_string(w), w * h,
                                      config_.conv_filters, rng));
    }
    disc_[d].head = Linear(dn + ".head",
                           config_.conv_filters * static_cast<int>(config_.conv_widths.size()),
                           1, rng);
  }
}

std::vector<num::Parameter*> TransferModel::generator_parameters() {
  std::vector<num::Parameter*> ps;
  collect(ps, emb_);
  ps.push_back(&style_emb_[0]);
  ps.push_back(&style_emb_[1]);
  collect(ps, encoder_);
  collect(ps, enc_init_);
  collect(ps, z_proj_);
  collect(ps, gen_init_);
  collect(ps, generator_);
  collect(ps, out_);
  return ps;
}

std::vector<num::Parameter*> TransferModel::discriminator_parameters() {
  std::vector<num::Parameter*> ps;
  for (int d = 0; d < 2; ++d) {
    for (Linear& c : disc_[d].convs) collect(ps, c);
    collect(ps, disc_[d].head);
  }
  return ps;
}

std::vector<num::Parameter*> TransferModel::parameters() {
  std::vector<num::Parameter*> ps = generator_parameters();
  for (num::Parameter* p : discriminator_parameters()) ps.push_back(p);
  return ps;
}

Value TransferModel::style_rows(Tape& t, StyleId style, int rows, bool trainable) const {
  Value ones = t.constant(Tensor({rows, 1}, 1.0));
  return num::matmul(ones, t.watch(style_emb_[idx(style)], trainable));
}

Value TransferModel::encode_block(Tape& t, const text::Batch& block, StyleId style,
                                  bool trainable) const {
  const int rows = block.size();
  Value sty = style_rows(t, style, rows, trainable);
  Value h = num::tanh(num::matmul(sty, t.watch(enc_init_.w, trainable)) +
                      t.watch(enc_init_.b, trainable));
  for (int pos = 0; pos < block.width(); ++pos) {
    std::vector<int32_t> ids(static_cast<std::size_t>(rows));
    Tensor mask_col({rows, 1});
    for (int r = 0; r < rows; ++r) {
      ids[static_cast<std::size_t>(r)] =
          block.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)];
      mask_col.at(r, 0) = block.mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)];
    }
    Value x = num::embedding_lookup(t.watch(emb_.table, trainable), ids);
    h = encoder_.masked_step(t, x, h, t.constant(mask_col));
  }
  return num::tanh(num::matmul(h, t.watch(z_proj_.w, trainable)) + t.watch(z_proj_.b, trainable));
}

TransferModel::Unroll TransferModel::teacher_forced_unroll(Tape& t, Value z, StyleId style,
                                                           const text::Batch& target,
                                                           bool trainable) const {
  const int rows = target.size();
  const int width = target.width();
  Value sty = style_rows(t, style, rows, trainable);
  Value s = num::tanh(
      num::matmul(num::concat_cols(std::vector<Value>{z, sty}), t.watch(gen_init_.w, trainable)) +
      t.watch(gen_init_.b, trainable));

  Unroll u;
  u.hidden_mask = Tensor({rows, std::max(width - 1, 0)});
  std::vector<Value> losses;
  for (int pos = 0; pos + 1 < width; ++pos) {
    std::vector<int32_t> in_ids(static_cast<std::size_t>(rows));
    std::vector<int32_t> targets(static_cast<std::size_t>(rows));
    std::vector<double> weights(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
      in_ids[static_cast<std::size_t>(r)] =
          target.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)];
      targets[static_cast<std::size_t>(r)] =
          target.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)];
      const double w =
          target.mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)];
      weights[static_cast<std::size_t>(r)] = w;
      u.hidden_mask.at(r, pos) = w;
      u.chars += w;
    }
    Value x = num::embedding_lookup(t.watch(emb_.table, trainable), in_ids);
    s = generator_.step(t, x, s);
    u.hiddens.push_back(s);
    Value logits = num::matmul(s, t.watch(out_.w, trainable)) + t.watch(out_.b, trainable);
    losses.push_back(num::cross_entropy_sum(logits, targets, weights));
  }
  if (!losses.empty()) u.ce_total = chain_add(losses);
  return u;
}

TransferModel::Unroll TransferModel::free_run_unroll(Tape& t, Value z, StyleId style, int steps,
                                                     bool trainable) const {
  const int rows = static_cast<int>(t.val(z).rows());
  Value sty = style_rows(t, style, rows, trainable);
  Value s = num::tanh(
      num::matmul(num::concat_cols(std::vector<Value>{z, sty}), t.watch(gen_init_.w, trainable)) +
      t.watch(gen_init_.b, trainable));
  Value table = t.watch(emb_.table, trainable);

  Unroll u;
  u.hidden_mask = Tensor({rows, steps}, 1.0);
  std::vector<int32_t> bos(static_cast<std::size_t>(rows), Alphabet::kBos);
  Value x = num::embedding_lookup(table, bos);
  for (int k = 0; k < steps; ++k) {
    s = generator_.step(t, x, s);
    u.hiddens.push_back(s);
    Value logits = num::matmul(s, t.watch(out_.w, trainable)) + t.watch(out_.b, trainable);
    Value probs = num::softmax_rows(logits);
    u.step_probs.push_back(probs);
    x = num::matmul(probs, table);  // soft feedback keeps the path differentiable
  }
  return u;
}

Value TransferModel::disc_logits(Tape& t, StyleId which, std::span<const Value> hiddens,
                                 const num::Tensor& hidden_mask, bool trainable) const {
  const int min_w = *std::min_element(config_.conv_widths.begin(), config_.conv_widths.end());
  const int length = static_cast<int>(hiddens.size());
  if (length < min_w) {
    throw std::invalid_argument("discriminator: sequence length " + std::to_string(length) +
                                " is shorter than the smallest conv window " +
                                std::to_string(min_w));
  }
  const int rows = static_cast<int>(hidden_mask.rows());
  const Disc& d = disc_[idx(which)];

  std::vector<Value> features;
  for (std::size_t wi = 0; wi < config_.conv_widths.size(); ++wi) {
    const int w = config_.conv_widths[wi];
    if (w > length) {
      // No window fits: this width contributes the max-pool floor.
      features.push_back(t.constant(Tensor({rows, config_.conv_filters})));
      continue;
    }
    Value pooled = t.constant(Tensor({rows, config_.conv_filters}));
    for (int start = 0; start + w <= length; ++start) {
      Tensor valid({rows, 1}, 1.0);
      for (int r = 0; r < rows; ++r) {
        for (int k = 0; k < w; ++k) valid.at(r, 0) *= hidden_mask.at(r, start + k);
      }
      std::vector<Value> window(hiddens.begin() + start, hiddens.begin() + start + w);
      Value conv = num::relu(num::matmul(num::concat_cols(window), t.watch(d.convs[wi].w, trainable)) +
                             t.watch(d.convs[wi].b, trainable));
      conv = conv * t.constant(valid);  // PAD-covering windows contribute nothing
      pooled = pooled + num::relu(conv - pooled);  // elementwise max
    }
    features.push_back(pooled);
  }
  return num::matmul(num::concat_cols(features), t.watch(d.head.w, trainable)) +
         t.watch(d.head.b, trainable);
}

text::Batch TransferModel::one_word_block(std::string_view word) const {
  std::vector<text::EncodedWord> enc = {text::encode_word(word, alphabet_)};
  const int items[1] = {0};
  return text::pad_block(enc, items);
}

num::Tensor TransferModel::encode_content(std::string_view word, StyleId style) const {
  Tape t;
  return t.val(encode_block(t, one_word_block(word), style, false));
}

TransferModel::Generation TransferModel::generate_teacher_forced(const num::Tensor& z,
                                                                 StyleId style,
                                                                 std::string_view target) const {
  text::Batch block = one_word_block(target);
  Tape t;
  Unroll u = teacher_forced_unroll(t, t.constant(z), style, block, false);

  Generation g;
  g.truncated = false;
  std::u32string word;
  bool stopped = false;
  for (const Value& s : u.hiddens) {
    Value probs = num::softmax_rows(num::matmul(s, t.watch(out_.w, false)) + t.watch(out_.b, false));
    const Tensor& p = t.val(probs);
    std::vector<double> row(static_cast<std::size_t>(p.cols()));
    int best = Alphabet::kEos;
    for (int c = 0; c < static_cast<int>(p.cols()); ++c) {
      row[static_cast<std::size_t>(c)] = p.at(0, c);
      if (c == Alphabet::kPad || c == Alphabet::kBos || c == Alphabet::kUnk) continue;
      if (p.at(0, c) > p.at(0, best)) best = c;
    }
    g.step_distributions.push_back(std::move(row));
    if (!stopped) {
      if (best == Alphabet::kEos) {
        stopped = true;
      } else {
        word.push_back(alphabet_.symbol_at(best));
      }
    }
  }
  g.word = text::utf32_to_utf8(word);
  return g;
}

TransferModel::Generation TransferModel::generate_free_run(const num::Tensor& z,
                                                           StyleId style) const {
  Tape t;
  // One extra step so a word of exactly max length can still close with EOS.
  Unroll u = free_run_unroll(t, t.constant(z), style, config_.max_generated_len + 1, false);

  Generation g;
  g.truncated = true;
  std::u32string word;
  for (const Value& pv : u.step_probs) {
    const Tensor& p = t.val(pv);
    int best = Alphabet::kEos;
    for (int c = 0; c < static_cast<int>(p.cols()); ++c) {
      if (c == Alphabet::kPad || c == Alphabet::kBos || c == Alphabet::kUnk) continue;
      if (p.at(0, c) > p.at(0, best)) best = c;
    }
    if (best == Alphabet::kEos) {
      g.truncated = false;
      break;
    }
    if (static_cast<int>(word.size()) == config_.max_generated_len) break;
    word.push_back(alphabet_.symbol_at(best));
  }
  g.word = text::utf32_to_utf8(word);
  return g;
}

std::string TransferModel::transfer(std::string_view word, StyleId from_style,
                                    StyleId to_style) const {
  return generate_free_run(encode_content(word, from_style), to_style).word;
}

std::string TransferModel::reconstruct(std::string_view word, StyleId style) const {
  return transfer(word, style, style);
}

std::vector<num::Tensor> TransferModel::teacher_forced_hiddens(std::string_view word,
                                                               StyleId style) const {
  text::Batch block = one_word_block(word);
  Tape t;
  Value z = encode_block(t, block, style, false);
  Unroll u = teacher_forced_unroll(t, z, style, block, false);
  std::vector<num::Tensor> out;
  out.reserve(u.hiddens.size());
  for (const Value& s : u.hiddens) out.push_back(t.val(s));
  return out;
}

double TransferModel::discriminate(StyleId which, std::span<const num::Tensor> hidden_seq) const {
  Tape t;
  std::vector<Value> hs;
  hs.reserve(hidden_seq.size());
  for (const num::Tensor& h : hidden_seq) hs.push_back(t.constant(h));
  Tensor mask({1, static_cast<int64_t>(hidden_seq.size())}, 1.0);
  Value logit = disc_logits(t, which, hs, mask, false);
  return host_sigmoid(t.val(logit).item());
}

double TransferModel::discriminator_step(StyleId which,
                                         const std::vector<std::vector<num::Tensor>>& sequences,
                                         std::span<const double> labels, num::Adam& opt) {
  if (sequences.size() != labels.size() || sequences.empty()) {
    throw std::invalid_argument("discriminator_step: need equally many sequences and labels");
  }
  Tape t;
  std::vector<Value> logits;
  std::vector<double> targets;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    std::vector<Value> hs;
    for (const num::Tensor& h : sequences[i]) hs.push_back(t.constant(h));
    Tensor mask({1, static_cast<int64_t>(hs.size())}, 1.0);
    logits.push_back(disc_logits(t, which, hs, mask, true));
    targets.push_back(labels[i] > 0.5 ? 1.0 - config_.label_smoothing : config_.label_smoothing);
  }
  Value all = num::concat_rows(logits);
  Value loss = num::scale(num::bce_with_logits_sum(all, targets),
                          1.0 / static_cast<double>(targets.size()));
  const double loss_val = t.val(loss).item();
  t.backward(loss);
  std::vector<num::Parameter*> ps;
  for (Linear& c : disc_[idx(which)].convs) collect(ps, c);
  collect(ps, disc_[idx(which)].head);
  opt.step(ps, t);
  return loss_val;
}

TransferModel::GenObjective TransferModel::generator_objective(Tape& t, const text::Batch& b1,
                                                               const text::Batch& b2,
                                                               bool trainable_disc) const {
  const int rows = b1.size();
  Value z1 = encode_block(t, b1, StyleId::kY1, true);
  Value z2 = encode_block(t, b2, StyleId::kY2, true);
  Unroll rec1 = teacher_forced_unroll(t, z1, StyleId::kY1, b1, true);
  Unroll rec2 = teacher_forced_unroll(t, z2, StyleId::kY2, b2, true);

  GenObjective obj;
  obj.chars = rec1.chars + rec2.chars;
  obj.l_rec = num::scale(rec1.ce_total + rec2.ce_total, 1.0 / obj.chars);

  // Transfers: y2 content rendered as y1 judged by D1, and vice versa; each
  // free run is unrolled to its judging side's real batch width.
  Unroll fake1 = free_run_unroll(t, z2, StyleId::kY1, b1.width() - 1, true);
  Unroll fake2 = free_run_unroll(t, z1, StyleId::kY2, b2.width() - 1, true);
  Value lf1 = disc_logits(t, StyleId::kY1, fake1.hiddens, fake1.hidden_mask, trainable_disc);
  Value lf2 = disc_logits(t, StyleId::kY2, fake2.hiddens, fake2.hidden_mask, trainable_disc);
  std::vector<double> fool1(static_cast<std::size_t>(b2.size()), 1.0);
  std::vector<double> fool2(static_cast<std::size_t>(rows), 1.0);
  obj.l_adv = num::scale(
      num::bce_with_logits_sum(lf1, fool1) + num::bce_with_logits_sum(lf2, fool2),
      1.0 / static_cast<double>(rows + b2.size()));
  obj.loss = obj.l_rec + num::scale(obj.l_adv, config_.lambda_adv);
  return obj;
}

Value TransferModel::training_loss(Tape& t, std::span<const std::string> y1_words,
                                   std::span<const std::string> y2_words) const {
  if (y1_words.empty() || y2_words.empty()) {
    throw std::invalid_argument("training_loss: both word lists must be non-empty");
  }
  auto block_of = [&](std::span<const std::string> words) {
    std::vector<text::EncodedWord> enc;
    std::vector<int> items;
    for (const std::string& w : words) {
      items.push_back(static_cast<int>(enc.size()));
      enc.push_back(text::encode_word(w, alphabet_));
    }
    return text::pad_block(enc, items);
  };
  return generator_objective(t, block_of(y1_words), block_of(y2_words), /*trainable_disc=*/true)
      .loss;
}

const TrainStats& TransferModel::train(std::span<const std::string> y1_words,
                                       std::span<const std::string> y2_words, uint64_t seed) {
  if (y1_words.empty() || y2_words.empty()) {
    throw std::invalid_argument("transfer training: both style corpora must be non-empty");
  }
  std::vector<text::EncodedWord> enc1, enc2;
  for (const std::string& w : y1_words) enc1.push_back(text::encode_word(w, alphabet_));
  for (const std::string& w : y2_words) enc2.push_back(text::encode_word(w, alphabet_));

  num::Adam opt_g({.lr = config_.lr});
  num::Adam opt_d({.lr = config_.lr});
  std::vector<num::Parameter*> gen_params = generator_parameters();
  std::vector<num::Parameter*> disc_params = discriminator_parameters();

  const int n1 = static_cast<int>(enc1.size());
  const int n2 = static_cast<int>(enc2.size());
  const int n = std::max(n1, n2);
  double initial_rec = -1.0;

  auto check_finite = [&](double v, const char* what, int epoch, int step) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("transfer training aborted: non-finite " + std::string(what) +
                               " at epoch " + std::to_string(epoch) + ", step " +
                               std::to_string(step));
    }
  };

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    // Item schedule: shuffle each side; resample the smaller side with
    // replacement up to the larger side's size.
    auto side_items = [&](int side_n, const char* name) {
      std::vector<int> items;
      items.reserve(static_cast<std::size_t>(n));
      if (side_n == n) {
        for (const std::vector<int>& chunk : text::batch_order(
                 side_n, side_n, Rng(seed).fork(name).key(), epoch)) {
          items.insert(items.end(), chunk.begin(), chunk.end());
        }
      } else {
        Rng r = Rng(seed).fork(std::string(name) + "-resample-epoch-" + std::to_string(epoch));
        for (int i = 0; i < n; ++i) {
          items.push_back(static_cast<int>(r.next_below(static_cast<uint64_t>(side_n))));
        }
      }
      return items;
    };
    const std::vector<int> items1 = side_items(n1, "order-y1");
    const std::vector<int> items2 = side_items(n2, "order-y2");

    double ep_rec = 0.0, ep_rec_chars = 0.0;
    double ep_d1 = 0.0, ep_d2 = 0.0;
    double ep_d1_correct = 0.0, ep_d2_correct = 0.0;
    double ep_d_samples = 0.0;
    int steps_in_epoch = 0;

    for (int start = 0; start < n; start += config_.batch_size) {
      const int end = std::min(n, start + config_.batch_size);
      const int rows = end - start;
      ++steps_in_epoch;
      std::span<const int> span1(items1.data() + start, static_cast<std::size_t>(rows));
      std::span<const int> span2(items2.data() + start, static_cast<std::size_t>(rows));
      text::Batch b1 = text::pad_block(enc1, span1);
      text::Batch b2 = text::pad_block(enc2, span2);
      const int steps1 = b1.width() - 1;
      const int steps2 = b2.width() - 1;

      // --- discriminator step ---
      {
        Tape t;
        Value z1 = encode_block(t, b1, StyleId::kY1, false);
        Value z2 = encode_block(t, b2, StyleId::kY2, false);
        Unroll real1 = teacher_forced_unroll(t, z1, StyleId::kY1, b1, false);
        Unroll real2 = teacher_forced_unroll(t, z2, StyleId::kY2, b2, false);
        Unroll fake1 = free_run_unroll(t, z2, StyleId::kY1, steps1, false);
        Unroll fake2 = free_run_unroll(t, z1, StyleId::kY2, steps2, false);

        auto d_loss = [&](StyleId which, const Unroll& real, const Unroll& fake, double& acc) {
          Value lr_ = disc_logits(t, which, real.hiddens, real.hidden_mask, true);
          Value lf_ = disc_logits(t, which, fake.hiddens, fake.hidden_mask, true);
          const Tensor& lrv = t.val(lr_);
          const Tensor& lfv = t.val(lf_);
          for (int r = 0; r < rows; ++r) {
            if (lrv.at(r, 0) > 0) acc += 1.0;
            if (lfv.at(r, 0) < 0) acc += 1.0;
          }
          std::vector<double> tr(static_cast<std::size_t>(rows), 1.0 - config_.label_smoothing);
          std::vector<double> tf(static_cast<std::size_t>(rows), config_.label_smoothing);
          return num::scale(num::bce_with_logits_sum(lr_, tr) + num::bce_with_logits_sum(lf_, tf),
                            1.0 / (2.0 * rows));
        };
        Value ld1 = d_loss(StyleId::kY1, real1, fake1, ep_d1_correct);
        Value ld2 = d_loss(StyleId::kY2, real2, fake2, ep_d2_correct);
        const double d1v = t.val(ld1).item();
        const double d2v = t.val(ld2).item();
        check_finite(d1v, "discriminator loss", epoch, steps_in_epoch);
        check_finite(d2v, "discriminator loss", epoch, steps_in_epoch);
        ep_d1 += d1v * 2.0 * rows;
        ep_d2 += d2v * 2.0 * rows;
        ep_d_samples += 2.0 * rows;

        Value ld = ld1 + ld2;
        t.backward(ld);
        opt_d.step(disc_params, t);
      }

      // --- generator / encoder step ---
      {
        Tape t;
        GenObjective obj = generator_objective(t, b1, b2, /*trainable_disc=*/false);
        const double rec_v = t.val(obj.l_rec).item();
        check_finite(rec_v, "reconstruction loss", epoch, steps_in_epoch);
        check_finite(t.val(obj.l_adv).item(), "adversarial loss", epoch, steps_in_epoch);
        if (initial_rec < 0) initial_rec = rec_v;
        if (rec_v > 10.0 * initial_rec) {
          throw std::runtime_error("transfer training aborted: reconstruction divergence at epoch " +
                                   std::to_string(epoch) + ", step " +
                                   std::to_string(steps_in_epoch) + " (loss " +
                                   std::to_string(rec_v) + " vs initial " +
                                   std::to_string(initial_rec) + ")");
        }
        stats_.step_rec_loss.push_back(rec_v);
        ep_rec += rec_v * obj.chars;
        ep_rec_chars += obj.chars;

        t.backward(obj.loss);
        opt_g.step(gen_params, t);
      }
    }

    stats_.rec_loss.push_back(ep_rec_chars > 0 ? ep_rec / ep_rec_chars : 0.0);
    stats_.adv_loss_d1.push_back(ep_d_samples > 0 ? ep_d1 / ep_d_samples : 0.0);
    stats_.adv_loss_d2.push_back(ep_d_samples > 0 ? ep_d2 / ep_d_samples : 0.0);
    stats_.d1_accuracy.push_back(ep_d_samples > 0 ? ep_d1_correct / ep_d_samples : 0.0);
    stats_.d2_accuracy.push_back(ep_d_samples > 0 ? ep_d2_correct / ep_d_samples : 0.0);
  }
  return stats_;
}

TransferModel train_cross_aligned(std::span<const std::string> y1_words,
                                  std::span<const std::string> y2_words,
                                  const std::string& y1_language_id,
                                  const std::string& y2_language_id,
                                  const TransferConfig& config, uint64_t seed) {
  if (y1_words.empty() || y2_words.empty()) {
    throw std::invalid_argument("train_cross_aligned: both style corpora must be non-empty");
  }
  std::vector<std::string> all(y1_words.begin(), y1_words.end());
  all.insert(all.end(), y2_words.begin(), y2_words.end());
  text::Alphabet uni = text::Alphabet::build(all, y1_language_id + "+" + y2_language_id);
  TransferModel model(std::move(uni), y1_language_id, y2_language_id, config, seed);
  model.train(y1_words, y2_words, seed);
  return model;
}

}  // namespace wf::model
