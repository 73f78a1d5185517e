#include "wordforge/model/char_lm.hpp"

#include "wordforge/num/adam.hpp"
#include "wordforge/text/batch.hpp"
#include "wordforge/text/unicode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace wf::model {

using text::Alphabet;

CharLM::CharLM(text::Alphabet alphabet, const CharLMConfig& config, uint64_t seed)
    : alphabet_(std::move(alphabet)), config_(config) {
  Rng rng = Rng(seed).fork("char-lm-init");
  const int v = alphabet_.size();
  emb_ = Embedding("char_lm.emb", v, config_.d_emb, rng);
  gru_ = GruCell("char_lm.gru", config_.d_emb, config_.hidden, rng);
  out_ = Linear("char_lm.out", config_.hidden, v, rng);
}

std::vector<num::Parameter*> CharLM::parameters() {
  std::vector<num::Parameter*> ps;
  collect(ps, emb_);
  collect(ps, gru_);
  collect(ps, out_);
  return ps;
}

void CharLM::train(std::span<const std::string> words, uint64_t seed) {
  std::vector<text::EncodedWord> encoded;
  encoded.reserve(words.size());
  for (const std::string& w : words) encoded.push_back(text::encode_word(w, alphabet_));

  num::Adam opt({.lr = config_.lr});
  std::vector<num::Parameter*> params = parameters();

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    double epoch_ce = 0.0;
    double epoch_chars = 0.0;
    int step_no = 0;
    for (const text::Batch& batch :
         text::make_batches(encoded, config_.batch_size, true, seed, epoch)) {
      ++step_no;
      const int rows = batch.size();
      const int width = batch.width();

      Tape t;
      Value h = t.constant(Tensor({rows, config_.hidden}));
      std::vector<Value> step_losses;
      double batch_chars = 0.0;
      for (int pos = 0; pos + 1 < width; ++pos) {
        std::vector<int32_t> in_ids(static_cast<std::size_t>(rows));
        std::vector<int32_t> targets(static_cast<std::size_t>(rows));
        std::vector<double> weights(static_cast<std::size_t>(rows));
        double live = 0.0;
        for (int r = 0; r < rows; ++r) {
          in_ids[static_cast<std::size_t>(r)] = batch.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)];
          targets[static_cast<std::size_t>(r)] =
              batch.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)];
          const double w = batch.mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)];
          weights[static_cast<std::size_t>(r)] = w;
          live += w;
        }
        if (live == 0.0) break;  // padding is left-aligned: nothing real remains
        batch_chars += live;

        Value x = emb_.rows_for(t, in_ids);
        h = gru_.step(t, x, h);
        Value logits = out_.apply(t, h);
        step_losses.push_back(num::cross_entropy_sum(logits, targets, weights));
      }
      if (step_losses.empty()) continue;

      Value total = step_losses[0];
      for (std::size_t i = 1; i < step_losses.size(); ++i) total = total + step_losses[i];
      const double total_ce = t.val(total).item();
      if (!std::isfinite(total_ce)) {
        throw std::runtime_error("char-lm training aborted: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", step " + std::to_string(step_no));
      }
      epoch_ce += total_ce;
      epoch_chars += batch_chars;

      Value objective = num::scale(total, 1.0 / batch_chars);
      t.backward(objective);
      opt.step(params, t);
    }
    epoch_losses_.push_back(epoch_chars > 0 ? epoch_ce / epoch_chars : 0.0);
  }
}

Value CharLM::training_loss(Tape& t, std::span<const std::string> words) const {
  if (words.empty()) throw std::invalid_argument("training_loss: empty word list");
  std::vector<text::EncodedWord> encoded;
  encoded.reserve(words.size());
  for (const std::string& w : words) encoded.push_back(text::encode_word(w, alphabet_));
  std::vector<int> items(words.size());
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = static_cast<int>(i);
  const text::Batch batch = text::pad_block(encoded, items, 0);

  const int rows = batch.size();
  Value h = t.constant(Tensor({rows, config_.hidden}));
  std::vector<Value> step_losses;
  double chars = 0.0;
  for (int pos = 0; pos + 1 < batch.width(); ++pos) {
    std::vector<int32_t> in_ids(static_cast<std::size_t>(rows));
    std::vector<int32_t> targets(static_cast<std::size_t>(rows));
    std::vector<double> weights(static_cast<std::size_t>(rows));
    double live = 0.0;
    for (int r = 0; r < rows; ++r) {
      in_ids[static_cast<std::size_t>(r)] =
          batch.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos)];
      targets[static_cast<std::size_t>(r)] =
          batch.ids[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)];
      const double w = batch.mask[static_cast<std::size_t>(r)][static_cast<std::size_t>(pos + 1)];
      weights[static_cast<std::size_t>(r)] = w;
      live += w;
    }
    if (live == 0.0) break;
    chars += live;

    Value x = emb_.rows_for(t, in_ids);
    h = gru_.step(t, x, h);
    Value logits = out_.apply(t, h);
    step_losses.push_back(num::cross_entropy_sum(logits, targets, weights));
  }
  Value total = step_losses[0];
  for (std::size_t i = 1; i < step_losses.size(); ++i) total = total + step_losses[i];
  return num::scale(total, 1.0 / chars);
}

num::Tensor CharLM::run_to_state(std::span<const int> symbols_after_bos) const {
  Tensor h({1, config_.hidden});
  std::vector<int> seq;
  seq.reserve(symbols_after_bos.size() + 1);
  seq.push_back(Alphabet::kBos);
  seq.insert(seq.end(), symbols_after_bos.begin(), symbols_after_bos.end());
  for (int id : seq) {
    Tape t;
    const int32_t id32[1] = {static_cast<int32_t>(id)};
    Value x = emb_.rows_for(t, id32);
    h = t.val(gru_.step(t, x, t.constant(h)));
  }
  return h;
}

int CharLM::pick_next(const num::Tensor& h, double temperature, num::Rng* rng) const {
  Tape t;
  Tensor lg = t.val(out_.apply(t, t.constant(h)));

  // Only regular symbols and EOS may be emitted.
  const int v = alphabet_.size();
  for (int i : {Alphabet::kPad, Alphabet::kBos, Alphabet::kUnk}) {
    lg.at(0, i) = -std::numeric_limits<double>::infinity();
  }

  if (temperature <= 0.0) {
    int best = Alphabet::kEos;
    for (int i = 0; i < v; ++i) {
      if (lg.at(0, i) > lg.at(0, best)) best = i;
    }
    return best;
  }

  double max_lg = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < v; ++i) max_lg = std::max(max_lg, lg.at(0, i) / temperature);
  std::vector<double> p(static_cast<std::size_t>(v), 0.0);
  double z = 0.0;
  for (int i = 0; i < v; ++i) {
    const double e = std::isinf(lg.at(0, i)) ? 0.0 : std::exp(lg.at(0, i) / temperature - max_lg);
    p[static_cast<std::size_t>(i)] = e;
    z += e;
  }
  double u = rng->next_double() * z;
  for (int i = 0; i < v; ++i) {
    u -= p[static_cast<std::size_t>(i)];
    if (u <= 0.0) return i;
  }
  return Alphabet::kEos;  // numerical fallthrough
}

CharLM::Generated CharLM::generate(int seed_symbol, double temperature, num::Rng& rng) const {
  if (seed_symbol < Alphabet::kFirstSymbol || seed_symbol >= alphabet_.size()) {
    throw std::invalid_argument("generate: seed symbol " + std::to_string(seed_symbol) +
                                " is not a regular alphabet symbol");
  }
  std::vector<int> out_ids = {seed_symbol};
  Tensor h = run_to_state(out_ids);
  bool truncated = true;
  while (static_cast<int>(out_ids.size()) < config_.max_generated_len) {
    const int next = pick_next(h, temperature, &rng);
    if (next == Alphabet::kEos) {
      truncated = false;
      break;
    }
    out_ids.push_back(next);
    Tape t;
    const int32_t id32[1] = {static_cast<int32_t>(next)};
    Value x = emb_.rows_for(t, id32);
    h = t.val(gru_.step(t, x, t.constant(h)));
  }
  std::u32string w;
  for (int id : out_ids) w.push_back(alphabet_.symbol_at(id));
  return {text::utf32_to_utf8(w), truncated};
}

CharLM::Generated CharLM::generate_greedy(int seed_symbol) const {
  num::Rng unused(0);
  return generate(seed_symbol, 0.0, unused);
}

std::vector<double> CharLM::next_distribution(std::span<const int> prefix) const {
  Tensor h = run_to_state(prefix);
  Tape t;
  Value probs = num::softmax_rows(out_.apply(t, t.constant(h)));
  const Tensor& p = t.val(probs);
  std::vector<double> out(static_cast<std::size_t>(alphabet_.size()));
  for (int i = 0; i < alphabet_.size(); ++i) out[static_cast<std::size_t>(i)] = p.at(0, i);
  return out;
}

CharLM train_char_lm(std::span<const std::string> words, const text::Alphabet& alphabet,
                     const CharLMConfig& config, uint64_t seed) {
  std::set<std::string> distinct(words.begin(), words.end());
  if (distinct.size() < 2) {
    throw std::invalid_argument("train_char_lm: need at least 2 distinct words, got " +
                                std::to_string(distinct.size()));
  }
  CharLM lm(alphabet, config, seed);
  lm.train(words, seed);
  return lm;
}

IndicatorMap make_indicator_map(const CharLM& source_lm, const CharLM& target_lm) {
  if (source_lm.embedding_table().cols() != target_lm.embedding_table().cols()) {
    throw std::invalid_argument("indicator map: embedding widths differ (" +
                                std::to_string(source_lm.embedding_table().cols()) + " vs " +
                                std::to_string(target_lm.embedding_table().cols()) + ")");
  }
  return IndicatorMap{source_lm.alphabet(), target_lm.alphabet(), source_lm.embedding_table(),
                      target_lm.embedding_table(), "euclidean"};
}

int indicator_char(std::string_view source_word, const IndicatorMap& map) {
  const std::u32string cs = text::utf8_to_utf32(source_word);
  const int64_t d = map.source_table.cols();
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  int known = 0;
  for (char32_t c : cs) {
    const int idx = map.source_alphabet.index_of(c);
    if (idx == Alphabet::kUnk) continue;  // unknowns carry no signal
    for (int64_t j = 0; j < d; ++j) {
      mean[static_cast<std::size_t>(j)] += map.source_table.at(idx, j);
    }
    ++known;
  }
  if (known == 0) {
    throw std::invalid_argument("indicator_char: no indicator basis for \"" +
                                std::string(source_word) +
                                "\" (empty or entirely unknown source word)");
  }
  for (double& m : mean) m /= known;

  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = Alphabet::kFirstSymbol; i < map.target_alphabet.size(); ++i) {
    double d2 = 0.0;
    for (int64_t j = 0; j < d; ++j) {
      const double diff = map.target_table.at(i, j) - mean[static_cast<std::size_t>(j)];
      d2 += diff * diff;
    }
    if (d2 < best_d2) {  // strict: ties keep the lowest index
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

CharLM::Generated translate_rnn(std::string_view source_word, const IndicatorMap& map,
                                const CharLM& lm, double temperature, num::Rng& rng) {
  return lm.generate(indicator_char(source_word, map), temperature, rng);
}

}  // namespace wf::model
