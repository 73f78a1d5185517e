#pragma once

#include "wordforge/text/alphabet.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace wf::text {

// One padded minibatch. ids is rectangular: every row padded with PAD to the
// same width. mask holds 1.0 on real positions (BOS, characters, EOS) and
// 0.0 on padding, so losses can zero out PAD contributions.
struct Batch {
  std::vector<int> items;                 // indices into the source word list
  std::vector<std::vector<int>> ids;      // rows × width
  std::vector<std::vector<double>> mask;  // rows × width

  int size() const { return static_cast<int>(ids.size()); }
  int width() const { return ids.empty() ? 0 : static_cast<int>(ids[0].size()); }
};

// Deterministic shuffled batch membership for (seed, epoch): a permutation of
// [0, item_count) chunked into batch_size groups (last may be short).
std::vector<std::vector<int>> batch_order(int item_count, int batch_size, uint64_t seed,
                                          int epoch);

// Pads the selected words into one rectangular block, at least min_width wide.
Batch pad_block(std::span<const EncodedWord> words, std::span<const int> items,
                int min_width = 0);

// Shuffle + chunk + pad in one step. pad_to_longest=true pads each batch to
// its own longest member; false pads every batch to the longest word overall
// (uniform width across batches).
std::vector<Batch> make_batches(std::span<const EncodedWord> words, int batch_size,
                                bool pad_to_longest, uint64_t seed, int epoch);

}  // namespace wf::text
