#include "wordforge/text/batch.hpp"

#include "wordforge/num/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace wf::text {

std::vector<std::vector<int>> batch_order(int item_count, int batch_size, uint64_t seed,
                                          int epoch) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (item_count < 0) throw std::invalid_argument("item_count must be non-negative");

  std::vector<int> order(static_cast<std::size_t>(item_count));
  std::iota(order.begin(), order.end(), 0);
  num::Rng rng = num::Rng(seed).fork("batch-epoch-" + std::to_string(epoch));
  rng.shuffle(order);

  std::vector<std::vector<int>> batches;
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

Batch pad_block(std::span<const EncodedWord> words, std::span<const int> items, int min_width) {
  Batch b;
  b.items.assign(items.begin(), items.end());
  std::size_t width = static_cast<std::size_t>(std::max(min_width, 0));
  for (int item : items) {
    width = std::max(width, words[static_cast<std::size_t>(item)].ids.size());
  }
  b.ids.reserve(items.size());
  b.mask.reserve(items.size());
  for (int item : items) {
    const std::vector<int>& ids = words[static_cast<std::size_t>(item)].ids;
    std::vector<int> row(width, Alphabet::kPad);
    std::vector<double> mrow(width, 0.0);
    std::copy(ids.begin(), ids.end(), row.begin());
    std::fill(mrow.begin(), mrow.begin() + static_cast<std::ptrdiff_t>(ids.size()), 1.0);
    b.ids.push_back(std::move(row));
    b.mask.push_back(std::move(mrow));
  }
  return b;
}

std::vector<Batch> make_batches(std::span<const EncodedWord> words, int batch_size,
                                bool pad_to_longest, uint64_t seed, int epoch) {
  int global_width = 0;
  if (!pad_to_longest) {
    for (const EncodedWord& w : words) {
      global_width = std::max(global_width, static_cast<int>(w.ids.size()));
    }
  }
  std::vector<Batch> out;
  for (const std::vector<int>& items :
       batch_order(static_cast<int>(words.size()), batch_size, seed, epoch)) {
    out.push_back(pad_block(words, items, pad_to_longest ? 0 : global_width));
  }
  return out;
}

}  // namespace wf::text
