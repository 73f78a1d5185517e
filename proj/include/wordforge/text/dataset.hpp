#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wf::text {

enum class Split { kTrain, kHoldout };

struct WordPair {
  std::string source;
  std::string target;
  Split split = Split::kTrain;

  bool operator==(const WordPair&) const = default;
};

// A loaded corpus: aligned pairs plus any non-parallel surplus on either
// side. Immutable after construction; share freely across threads.
struct WordDataset {
  std::vector<WordPair> pairs;
  std::vector<std::string> extra_source;  // source words with no target
  std::vector<std::string> extra_target;  // target words with no source
  int duplicate_pairs_dropped = 0;
  int duplicate_words_dropped = 0;

  bool operator==(const WordDataset&) const = default;

  // Training code takes these views only; holdout rows stay out of reach.
  std::vector<WordPair> train_pairs() const;
  std::vector<WordPair> holdout_pairs() const;

  // All words of one side (pair members plus that side's surplus),
  // train and holdout alike — alphabets must cover the holdout too.
  std::vector<std::string> source_words() const;
  std::vector<std::string> target_words() const;
};

// Parse a parallel file (source<TAB>target per line) and/or per-side word
// lists. `#` lines are comments; blank lines are skipped; every word is
// normalized (NFC, case fold, trim). Throws std::runtime_error with file,
// line, and where relevant byte-offset context on malformed input, and when
// any word exceeds kMaxWordScalars.
WordDataset load_dataset(const std::optional<std::string>& parallel_path,
                         const std::optional<std::string>& source_list_path,
                         const std::optional<std::string>& target_list_path);

inline constexpr int kMaxWordScalars = 24;  // excludes BOS/EOS framing

// Tag `holdout_count` uniformly sampled pairs as holdout, the rest as train.
// Deterministic for a fixed seed. Throws std::invalid_argument when
// holdout_count is negative or >= the pair count (unless both are zero).
WordDataset split_holdout(WordDataset dataset, int holdout_count, uint64_t seed);

}  // namespace wf::text
