#include "wordforge/model/seq2seq.hpp"
#include "wordforge/text/unicode.hpp"

#include "doctest.h"

#include <cmath>
#include <map>
#include <string>
#include <vector>

using namespace wf::model;
using wf::num::Parameter;
using wf::num::Rng;
using wf::num::Tensor;
using wf::text::Alphabet;
using wf::text::WordPair;

namespace {

// 20 short pairs with a deterministic letter mapping; "cat" gets the real
// Hebrew translation so the overfit check exercises a non-Latin target.
std::vector<WordPair> overfit_pairs() {
  const std::map<char, std::string> to_hebrew = {
      {'a', "\xD7\x90"}, {'b', "\xD7\x91"}, {'c', "\xD7\x92"}, {'d', "\xD7\x93"},
      {'f', "\xD7\x95"}, {'g', "\xD7\x96"}, {'h', "\xD7\x97"}, {'j', "\xD7\x98"},
      {'l', "\xD7\x9C"}, {'m', "\xD7\x9E"}, {'n', "\xD7\xA0"}, {'p', "\xD7\xA4"},
      {'r', "\xD7\xA8"}, {'s', "\xD7\xA1"}, {'t', "\xD7\xAA"}, {'v', "\xD7\x95"},
      {'w', "\xD7\xA9"}, {'y', "\xD7\x99"}, {'z', "\xD7\x96"}, {'k', "\xD7\xA7"},
      {'o', "\xD7\xA2"}, {'e', "\xD7\x94"}};
  const std::vector<std::string> sources = {"bad", "cab", "dab", "fad", "gab", "had", "jab",
                                            "lad", "mad", "nag", "pad", "rag", "sad", "tag",
                                            "vat", "wag", "yak", "zog", "bag", "cat"};
  std::vector<WordPair> pairs;
  for (const std::string& s : sources) {
    if (s == "cat") {
      pairs.push_back({s, "\xD7\x97\xD7\xAA\xD7\x95\xD7\x9C"});  // the real word
      continue;
    }
    std::string t;
    for (char c : s) t += to_hebrew.at(c);
    pairs.push_back({s, t});
  }
  return pairs;
}

Seq2SeqModel make_tiny(const std::vector<WordPair>& pairs, const Seq2SeqConfig& cfg,
                       uint64_t seed) {
  std::vector<std::string> src, tgt;
  for (const WordPair& p : pairs) {
    src.push_back(p.source);
    tgt.push_back(p.target);
  }
  return Seq2SeqModel(Alphabet::build(src, "sl"), Alphabet::build(tgt, "tl"), cfg, seed);
}

void zero_param(Seq2SeqModel& m, const std::string& name) {
  for (Parameter* p : m.parameters()) {
    if (p->name == name) {
      for (int64_t i = 0; i < p->value.size(); ++i) p->value.at(i) = 0.0;
      return;
    }
  }
  FAIL("no parameter named ", name);
}

}  // namespace

TEST_CASE("attention: degenerate cases are exact") {
  auto pairs = overfit_pairs();
  Seq2SeqConfig cfg{.d_emb = 8, .hidden = 6, .epochs = 0};
  Seq2SeqModel m = make_tiny(pairs, cfg, 5);
  Rng rng(17);

  // One real position among pads → weight exactly 1 there, 0 elsewhere.
  std::vector<Tensor> outs;
  for (int i = 0; i < 3; ++i) outs.push_back(Tensor::uniform({1, 6}, -1, 1, rng));
  Tensor state = Tensor::uniform({1, 6}, -1, 1, rng);
  Tensor mask({1, 3}, std::vector<double>{0.0, 1.0, 0.0});
  Tensor w = m.attention_weights(state, outs, mask);
  CHECK(w.at(0, 0) == 0.0);
  CHECK(w.at(0, 1) == 1.0);
  CHECK(w.at(0, 2) == 0.0);

  // Two identical encoder outputs → identical scores → exactly [0.5, 0.5].
  std::vector<Tensor> twin = {outs[0], outs[0]};
  Tensor full({1, 2}, std::vector<double>{1.0, 1.0});
  Tensor w2 = m.attention_weights(state, twin, full);
  CHECK(w2.at(0, 0) == 0.5);
  CHECK(w2.at(0, 1) == 0.5);

  // All-PAD row is an error.
  Tensor dead({1, 3}, std::vector<double>{0.0, 0.0, 0.0});
  CHECK_THROWS_AS(m.attention_weights(state, outs, dead), std::invalid_argument);
}

TEST_CASE("attention: matches a direct recomputation") {
  auto pairs = overfit_pairs();
  Seq2SeqConfig cfg{.d_emb = 8, .hidden = 10, .epochs = 0};
  Seq2SeqModel m = make_tiny(pairs, cfg, 23);
  const Tensor& w1 = m.attn_w1();
  const Tensor& w2 = m.attn_w2();
  const Tensor& v = m.attn_v();
  const int h = 10;

  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int batch = 1 + static_cast<int>(rng.next_below(3));
    const int width = 2 + static_cast<int>(rng.next_below(5));
    std::vector<Tensor> outs;
    for (int i = 0; i < width; ++i) outs.push_back(Tensor::uniform({batch, h}, -2, 2, rng));
    Tensor state = Tensor::uniform({batch, h}, -2, 2, rng);
    Tensor mask({batch, width}, 1.0);
    for (int r = 0; r < batch; ++r) {
      const int real = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(width)));
      for (int c = real; c < width; ++c) mask.at(r, c) = 0.0;
    }

    Tensor got = m.attention_weights(state, outs, mask);

    for (int r = 0; r < batch; ++r) {
      // score_i = vᵀ tanh(H_i W1 + s W2), recomputed with plain loops
      std::vector<double> scores(static_cast<std::size_t>(width), 0.0);
      for (int i = 0; i < width; ++i) {
        double dot = 0.0;
        for (int a = 0; a < h; ++a) {
          double pre = 0.0;
          for (int b = 0; b < h; ++b) {
            pre += outs[static_cast<std::size_t>(i)].at(r, b) * w1.at(b, a);
            pre += state.at(r, b) * w2.at(b, a);
          }
          dot += std::tanh(pre) * v.at(a, 0);
        }
        scores[static_cast<std::size_t>(i)] = dot;
      }
      double max_s = -1e300;
      for (int i = 0; i < width; ++i) {
        if (mask.at(r, i) == 1.0) max_s = std::max(max_s, scores[static_cast<std::size_t>(i)]);
      }
      double z = 0.0;
      std::vector<double> expe(static_cast<std::size_t>(width), 0.0);
      for (int i = 0; i < width; ++i) {
        if (mask.at(r, i) == 1.0) {
          expe[static_cast<std::size_t>(i)] = std::exp(scores[static_cast<std::size_t>(i)] - max_s);
          z += expe[static_cast<std::size_t>(i)];
        }
      }
      double sum = 0.0;
      for (int i = 0; i < width; ++i) {
        const double want = expe[static_cast<std::size_t>(i)] / z;
        CHECK(std::abs(got.at(r, i) - want) < 1e-10);
        CHECK(got.at(r, i) >= 0.0);
        sum += got.at(r, i);
      }
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("teacher forcing: uniform logits give ln(alphabet size)") {
  auto pairs = overfit_pairs();
  Seq2SeqConfig cfg{.d_emb = 8, .hidden = 12, .epochs = 0};
  Seq2SeqModel m = make_tiny(pairs, cfg, 3);
  zero_param(m, "seq2seq.out.w");
  zero_param(m, "seq2seq.out.b");
  const double loss = m.teacher_forced_loss(pairs);
  CHECK(std::abs(loss - std::log(static_cast<double>(m.target_alphabet().size()))) < 1e-9);
}

TEST_CASE("teacher forcing: padding never changes the loss") {
  auto pairs = overfit_pairs();
  Seq2SeqConfig cfg{.d_emb = 8, .hidden = 12, .epochs = 0};
  Seq2SeqModel m = make_tiny(pairs, cfg, 3);
  const double tight = m.teacher_forced_loss(pairs);
  const double padded = m.teacher_forced_loss(pairs, 15, 18);
  CHECK(std::abs(tight - padded) < 1e-9);
}

TEST_CASE("seq2seq: overfit to 99% accuracy and exact recall") {
  auto pairs = overfit_pairs();
  Seq2SeqConfig cfg{.d_emb = 16, .hidden = 48, .lr = 3e-3, .batch_size = 32, .epochs = 1200};
  Seq2SeqModel m = train_seq2seq(pairs, make_tiny(pairs, cfg, 0).source_alphabet(),
                                 make_tiny(pairs, cfg, 0).target_alphabet(), cfg, 42);

  CHECK(m.teacher_forced_accuracy(pairs) >= 0.99);

  Seq2SeqModel::Translation tr = m.translate_greedy("cat");
  CHECK(tr.word == "\xD7\x97\xD7\xAA\xD7\x95\xD7\x9C");
  CHECK_FALSE(tr.truncated);

  // Pure function: repeated calls agree.
  CHECK(m.translate_greedy("cat").word == tr.word);

  // Attention trace is a distribution per decode step.
  for (const std::vector<double>& row : tr.attention) {
    double sum = 0.0;
    for (double x : row) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }

  // Padding the source changes nothing, and PAD attention is exactly zero.
  wf::text::EncodedWord enc = wf::text::encode_word("cat", m.source_alphabet());
  std::vector<int> ids = enc.ids;
  std::vector<double> mask(ids.size(), 1.0);
  for (int i = 0; i < 4; ++i) {
    ids.push_back(Alphabet::kPad);
    mask.push_back(0.0);
  }
  Seq2SeqModel::Translation padded = m.translate_ids(ids, mask);
  CHECK(padded.word == tr.word);
  for (const std::vector<double>& row : padded.attention) {
    for (std::size_t i = enc.ids.size(); i < row.size(); ++i) CHECK(row[i] == 0.0);
  }

  // Outputs stay inside the regular target alphabet.
  for (char32_t c : wf::text::utf8_to_utf32(tr.word)) CHECK(m.target_alphabet().contains(c));
}

TEST_CASE("seq2seq: windowed training loss is non-increasing (seeds 1,2,3)") {
  auto pairs = overfit_pairs();
  Seq2SeqConfig cfg{.epochs = 120};  // default sizes, shorter schedule
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    Seq2SeqModel m = make_tiny(pairs, cfg, seed);
    m.train(pairs, seed);
    const std::vector<double>& steps = m.step_losses();
    REQUIRE(steps.size() == 120);
    const int w = 50;
    double prev = 1e300;
    for (std::size_t i = 0; i + w <= steps.size(); ++i) {
      double mean = 0.0;
      for (int k = 0; k < w; ++k) mean += steps[i + static_cast<std::size_t>(k)];
      mean /= w;
      CHECK(mean <= prev + 1e-3);
      prev = mean;
    }
  }
}

TEST_CASE("seq2seq: fixed seed reproduces bit-identical parameters") {
  auto pairs = overfit_pairs();
  Seq2SeqConfig cfg{.d_emb = 8, .hidden = 16, .epochs = 25};
  Seq2SeqModel a = make_tiny(pairs, cfg, 9);
  Seq2SeqModel b = make_tiny(pairs, cfg, 9);
  a.train(pairs, 9);
  b.train(pairs, 9);
  auto pa = a.parameters();
  auto pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    REQUIRE(pa[i]->value.size() == pb[i]->value.size());
    for (int64_t j = 0; j < pa[i]->value.size(); ++j) {
      CHECK(pa[i]->value.at(j) == pb[i]->value.at(j));
    }
  }
}

TEST_CASE("seq2seq: divergence aborts with a trace") {
  auto pairs = overfit_pairs();
  Seq2SeqConfig cfg{.d_emb = 8, .hidden = 12, .lr = 30.0, .epochs = 80};
  Seq2SeqModel m = make_tiny(pairs, cfg, 4);
  CHECK_THROWS_WITH_AS(m.train(pairs, 4), doctest::Contains("divergence"), std::runtime_error);

  std::vector<WordPair> one = {{"a", "b", wf::text::Split::kTrain}};
  CHECK_THROWS_AS(train_seq2seq(one, m.source_alphabet(), m.target_alphabet(), cfg, 1),
                  std::invalid_argument);
}
