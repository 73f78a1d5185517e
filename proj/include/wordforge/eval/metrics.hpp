#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wf::eval {

// Vocabulary novelty counts for a batch of generated words, measured against
// the training targets and a reference dictionary.
//   unique(generated) splits three ways:
//     seen_in_training — words the model saw as targets
//     ewns             — real dictionary words the model never saw
//     pnw              — words in neither set
//   tuw = ewns + pnw (unique words not seen in training).
struct EvalReport {
  int64_t generated_total = 0;
  int64_t seen_in_training = 0;
  int64_t ewns = 0;
  int64_t pnw = 0;
  int64_t tuw = 0;
  std::vector<std::string> ewns_words;
  std::vector<std::string> pnw_words;
  std::vector<std::string> seen_words;

  // provenance, filled by callers that know it
  std::string model_id;
  std::string dataset_id;
  uint64_t seed = 0;
};

EvalReport compute_vocab_metrics(std::span<const std::string> generated,
                                 std::span<const std::string> training_targets,
                                 std::span<const std::string> reference_vocab);

// Surface statistics of a word list. Lengths count Unicode scalars.
// vowel_ratio is vowels/total-scalars and is absent when no vowel set is
// supplied; median is absent for an empty list.
struct WordShapeStats {
  int64_t word_count = 0;
  double mean_length = 0.0;
  std::optional<double> median_length;
  std::optional<double> vowel_ratio;
  int64_t repetition_count = 0;  // duplicates within the list
};

WordShapeStats word_shape_stats(std::span<const std::string> words,
                                const std::optional<std::u32string>& vowels);

// Built-in vowel inventories; scripts without one report no vowel ratio.
std::optional<std::u32string> default_vowels(std::string_view script);  // "latin", "cyrillic"

// Script detection over a corpus: returns "latin" or "cyrillic" when at
// least 90% of alphabetic scalars belong to that script, otherwise nullopt.
std::optional<std::string> detect_vowel_script(std::span<const std::string> words);

// A set of source words sharing a morphological root, with the model's
// proposed translations for each.
struct RootFamily {
  std::string family_id;
  std::vector<std::string> source_words;
  std::vector<std::string> proposals;
};

struct RootConsistency {
  double score = 0.0;     // mean over families of mean pairwise normalized LCP
  double baseline = 0.0;  // same statistic over random background pairs
  double gap = 0.0;       // score - baseline
  int64_t trials = 0;
};

// Normalized longest common prefix: |LCP| / min(|a|, |b|) in Unicode
// scalars; 0 when either word is empty.
double normalized_lcp(std::string_view a, std::string_view b);

// score: each family contributes the mean normalized LCP over all proposal
// pairs; baseline: `trials` random pairs of distinct background words.
// Errors: any family with fewer than 2 proposals; background smaller than 2
// when trials > 0.
RootConsistency root_consistency(std::span<const RootFamily> families,
                                 std::span<const std::string> background, int trials,
                                 uint64_t seed);

// One user-study judgment; ratings are integers 0..5.
struct Rating {
  std::string word;
  int rating = 0;
  std::string judge;
  std::string group;
};

struct RatingSummary {
  int64_t count = 0;
  double mean = 0.0;
  int median = 0;  // lower median for even counts
};

// Per-group mean and lower-convention median. Errors on an out-of-range
// rating, naming the record index.
std::map<std::string, RatingSummary> summarize_ratings(std::span<const Rating> ratings);

// CSV with header `word,rating,judge,group`. Errors name the line.
std::vector<Rating> load_ratings_csv(const std::string& path);

}  // namespace wf::eval
