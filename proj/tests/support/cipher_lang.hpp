#pragma once

// A small constructed language for end-to-end checks. Words are one or two
// CV(C) syllables drawn from fixed single-letter inventories, so the set of
// well-formed words is finite and enumerable (~300k). A per-letter cipher
// renders any word in Hebrew script, giving a parallel "foreign" twin whose
// character-level mapping a sequence model can genuinely learn.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "wordforge/num/rng.hpp"
#include "wordforge/text/dataset.hpp"

namespace cipherlang {

inline const std::vector<std::string>& onsets() {
  static const std::vector<std::string> v = {"",  "b", "d", "f", "g", "k", "l",
                                             "m", "n", "p", "r", "s", "t", "v"};
  return v;
}

inline const std::vector<std::string>& vowels() {
  static const std::vector<std::string> v = {"a", "e", "i", "o", "u"};
  return v;
}

inline const std::vector<std::string>& codas() {
  static const std::vector<std::string> v = {"", "l", "m", "n", "r", "s", "t", "k"};
  return v;
}

// Letter-for-letter Hebrew rendering; bijective over the 18 letters used.
inline std::string encipher(const std::string& latin) {
  static const std::map<char, const char*> to_hebrew = {
      {'a', "\xD7\x90"}, {'b', "\xD7\x91"}, {'d', "\xD7\x93"}, {'e', "\xD7\x94"},
      {'f', "\xD7\xA4"}, {'g', "\xD7\x92"}, {'i', "\xD7\x99"}, {'k', "\xD7\x9B"},
      {'l', "\xD7\x9C"}, {'m', "\xD7\x9E"}, {'n', "\xD7\xA0"}, {'o', "\xD7\x95"},
      {'p', "\xD7\xA6"}, {'r', "\xD7\xA8"}, {'s', "\xD7\xA1"}, {'t', "\xD7\xAA"},
      {'u', "\xD7\xA2"}, {'v', "\xD7\x96"}};
  std::string out;
  for (char c : latin) {
    auto it = to_hebrew.find(c);
    if (it == to_hebrew.end()) throw std::invalid_argument("encipher: unmapped letter");
    out += it->second;
  }
  return out;
}

// All 560 distinct syllables, in a fixed order.
inline const std::vector<std::string>& syllables() {
  static const std::vector<std::string> v = [] {
    std::vector<std::string> s;
    for (const std::string& o : onsets())
      for (const std::string& n : vowels())
        for (const std::string& c : codas()) s.push_back(o + n + c);
    return s;
  }();
  return v;
}

// Every distinct one- or two-syllable word, sorted. Distinct syllable
// sequences can collide as strings ("a"+"ka" and "ak"+"a"), hence the set.
inline const std::vector<std::string>& universe() {
  static const std::vector<std::string> words = [] {
    const auto& syl = syllables();
    std::unordered_set<std::string> seen(syl.begin(), syl.end());
    for (const std::string& a : syl)
      for (const std::string& b : syl) seen.insert(a + b);
    std::vector<std::string> out(seen.begin(), seen.end());
    std::sort(out.begin(), out.end());
    return out;
  }();
  return words;
}

// Zipf-ish inventory draw: P(i) ∝ 1/(1+i). Early entries dominate, the way
// real lexicons reuse a handful of favorite sounds.
inline int zipf_index(wf::num::Rng& rng, int n) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += 1.0 / (1.0 + i);
  double x = rng.uniform(0.0, total);
  for (int i = 0; i < n; ++i) {
    x -= 1.0 / (1.0 + i);
    if (x <= 0.0) return i;
  }
  return n - 1;
}

// One word from the skewed coinage process: 1 or 2 syllables, Zipf-weighted
// inventories. Always well-formed.
inline std::string random_word(wf::num::Rng& rng) {
  const int n_syll = rng.next_double() < 0.75 ? 2 : 1;
  std::string w;
  for (int s = 0; s < n_syll; ++s) {
    w += onsets()[static_cast<size_t>(zipf_index(rng, static_cast<int>(onsets().size())))];
    w += vowels()[static_cast<size_t>(zipf_index(rng, static_cast<int>(vowels().size())))];
    w += codas()[static_cast<size_t>(zipf_index(rng, static_cast<int>(codas().size())))];
  }
  return w;
}

// `count` distinct words in draw order (deterministic per seed), so a prefix
// of a larger sample is itself a valid smaller sample.
inline std::vector<std::string> sample_lexicon(int count, uint64_t seed) {
  wf::num::Rng rng(seed, "cipherlang-lexicon");
  std::unordered_set<std::string> seen;
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    std::string w = random_word(rng);
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

// Parallel foreign→latin pairs: distinct latin words plus their ciphered
// twins. Unique on both sides because the cipher is a bijection.
inline std::vector<wf::text::WordPair> make_pairs(int count, uint64_t seed) {
  std::vector<wf::text::WordPair> pairs;
  for (const std::string& w : sample_lexicon(count, seed)) {
    pairs.push_back({encipher(w), w, wf::text::Split::kTrain});
  }
  return pairs;
}

// True iff `word` parses as one or two onset+vowel+coda syllables — i.e. it
// belongs to the universe, checked without materializing it.
inline bool well_formed(const std::string& word) {
  const auto& all = universe();
  return std::binary_search(all.begin(), all.end(), word);
}

}  // namespace cipherlang
