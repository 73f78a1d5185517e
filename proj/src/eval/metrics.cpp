#include "wordforge/eval/metrics.hpp"

#include "wordforge/num/rng.hpp"
#include "wordforge/text/unicode.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace wf::eval {

EvalReport compute_vocab_metrics(std::span<const std::string> generated,
                                 std::span<const std::string> training_targets,
                                 std::span<const std::string> reference_vocab) {
  const std::unordered_set<std::string> training(training_targets.begin(),
                                                 training_targets.end());
  const std::unordered_set<std::string> reference(reference_vocab.begin(),
                                                  reference_vocab.end());
  const std::set<std::string> unique(generated.begin(), generated.end());

  EvalReport r;
  r.generated_total = static_cast<int64_t>(generated.size());
  for (const std::string& w : unique) {
    if (training.count(w)) {
      r.seen_words.push_back(w);
    } else if (reference.count(w)) {
      r.ewns_words.push_back(w);
    } else {
      r.pnw_words.push_back(w);
    }
  }
  r.seen_in_training = static_cast<int64_t>(r.seen_words.size());
  r.ewns = static_cast<int64_t>(r.ewns_words.size());
  r.pnw = static_cast<int64_t>(r.pnw_words.size());
  r.tuw = r.ewns + r.pnw;
  return r;
}

WordShapeStats word_shape_stats(std::span<const std::string> words,
                                const std::optional<std::u32string>& vowels) {
  WordShapeStats s;
  s.word_count = static_cast<int64_t>(words.size());
  if (words.empty()) return s;

  std::vector<int64_t> lengths;
  lengths.reserve(words.size());
  int64_t total_scalars = 0;
  int64_t vowel_scalars = 0;
  std::unordered_set<std::string> seen;
  for (const std::string& w : words) {
    const std::u32string u = text::utf8_to_utf32(w);
    lengths.push_back(static_cast<int64_t>(u.size()));
    total_scalars += static_cast<int64_t>(u.size());
    if (vowels) {
      for (char32_t c : u) {
        if (vowels->find(c) != std::u32string::npos) ++vowel_scalars;
      }
    }
    seen.insert(w);
  }
  s.repetition_count = static_cast<int64_t>(words.size()) - static_cast<int64_t>(seen.size());
  s.mean_length = static_cast<double>(total_scalars) / static_cast<double>(words.size());

  std::sort(lengths.begin(), lengths.end());
  const size_t n = lengths.size();
  s.median_length = n % 2 == 1 ? static_cast<double>(lengths[n / 2])
                               : (static_cast<double>(lengths[n / 2 - 1]) +
                                  static_cast<double>(lengths[n / 2])) /
                                     2.0;
  if (vowels && total_scalars > 0) {
    s.vowel_ratio = static_cast<double>(vowel_scalars) / static_cast<double>(total_scalars);
  }
  return s;
}

std::optional<std::u32string> default_vowels(std::string_view script) {
  if (script == "latin") return std::u32string(U"aeiou");
  if (script == "cyrillic") return std::u32string(U"аеёиоуыэюя");
  return std::nullopt;
}

std::optional<std::string> detect_vowel_script(std::span<const std::string> words) {
  int64_t latin = 0, cyrillic = 0, alphabetic = 0;
  for (const std::string& w : words) {
    for (char32_t c : text::utf8_to_utf32(w)) {
      if (!u_isalpha(static_cast<UChar32>(c))) continue;
      ++alphabetic;
      if ((c >= U'A' && c <= U'Z') || (c >= U'a' && c <= U'z') ||
          (c >= 0x00C0 && c <= 0x024F)) {
        ++latin;
      } else if (c >= 0x0400 && c <= 0x04FF) {
        ++cyrillic;
      }
    }
  }
  if (alphabetic == 0) return std::nullopt;
  if (latin * 10 >= alphabetic * 9) return "latin";
  if (cyrillic * 10 >= alphabetic * 9) return "cyrillic";
  return std::nullopt;
}

double normalized_lcp(std::string_view a, std::string_view b) {
  const std::u32string ua = text::utf8_to_utf32(a);
  const std::u32string ub = text::utf8_to_utf32(b);
  if (ua.empty() || ub.empty()) return 0.0;
  const size_t shorter = std::min(ua.size(), ub.size());
  size_t lcp = 0;
  while (lcp < shorter && ua[lcp] == ub[lcp]) ++lcp;
  return static_cast<double>(lcp) / static_cast<double>(shorter);
}

RootConsistency root_consistency(std::span<const RootFamily> families,
                                 std::span<const std::string> background, int trials,
                                 uint64_t seed) {
  if (families.empty()) throw std::invalid_argument("root_consistency: no families");
  double family_sum = 0.0;
  for (const RootFamily& f : families) {
    if (f.proposals.size() < 2) {
      throw std::invalid_argument("root_consistency: family \"" + f.family_id +
                                  "\" has fewer than 2 proposals");
    }
    double pair_sum = 0.0;
    int64_t pairs = 0;
    for (size_t i = 0; i < f.proposals.size(); ++i) {
      for (size_t j = i + 1; j < f.proposals.size(); ++j) {
        pair_sum += normalized_lcp(f.proposals[i], f.proposals[j]);
        ++pairs;
      }
    }
    family_sum += pair_sum / static_cast<double>(pairs);
  }

  RootConsistency rc;
  rc.score = family_sum / static_cast<double>(families.size());
  rc.trials = trials;
  if (trials > 0) {
    if (background.size() < 2) {
      throw std::invalid_argument("root_consistency: background needs at least 2 words");
    }
    num::Rng rng = num::Rng(seed).fork("root-baseline");
    double base_sum = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto i = rng.next_below(background.size());
      auto j = rng.next_below(background.size() - 1);
      if (j >= i) ++j;  // distinct pair
      base_sum += normalized_lcp(background[i], background[j]);
    }
    rc.baseline = base_sum / static_cast<double>(trials);
  }
  rc.gap = rc.score - rc.baseline;
  return rc;
}

std::map<std::string, RatingSummary> summarize_ratings(std::span<const Rating> ratings) {
  std::map<std::string, std::vector<int>> groups;
  for (size_t i = 0; i < ratings.size(); ++i) {
    const Rating& r = ratings[i];
    if (r.rating < 0 || r.rating > 5) {
      throw std::invalid_argument("rating out of range at record " + std::to_string(i) +
                                  ": " + std::to_string(r.rating));
    }
    groups[r.group].push_back(r.rating);
  }
  std::map<std::string, RatingSummary> out;
  for (auto& [group, values] : groups) {
    std::sort(values.begin(), values.end());
    RatingSummary s;
    s.count = static_cast<int64_t>(values.size());
    double sum = 0;
    for (int v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.median = values[(values.size() - 1) / 2];  // lower median for even counts
    out[group] = s;
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::vector<Rating> load_ratings_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string line;
  size_t line_no = 0;
  std::vector<Rating> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "word,rating,judge,group") {
        throw std::runtime_error(path + ": line 1: expected header word,rating,judge,group");
      }
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 4) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": expected 4 fields, found " +
                               std::to_string(f.size()));
    }
    Rating r;
    r.word = f[0];
    size_t used = 0;
    try {
      r.rating = std::stoi(f[1], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f[1].size()) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": rating is not an integer: " + f[1]);
    }
    r.judge = f[2];
    r.group = f[3];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace wf::eval
