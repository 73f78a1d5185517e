#pragma once

#include "json.hpp"

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wf::text {

// Character-index mapping shared by every model operating on one language.
// Indices 0..3 are reserved specials; regular symbols start at 4, sorted
// ascending by code point so construction is order-independent.
class Alphabet {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kFirstSymbol = 4;

  Alphabet() = default;
  Alphabet(std::string language_id, std::vector<char32_t> symbols);

  // Collect every Unicode scalar appearing in any word. Words must be
  // normalized UTF-8. Throws std::invalid_argument on an empty corpus.
  static Alphabet build(std::span<const std::string> words, std::string language_id);

  const std::string& language_id() const { return language_id_; }
  const std::vector<char32_t>& symbols() const { return symbols_; }
  int size() const { return kFirstSymbol + static_cast<int>(symbols_.size()); }

  bool contains(char32_t c) const { return index_.count(c) != 0; }
  // Index for a code point; unknown characters map to kUnk.
  int index_of(char32_t c) const;
  // Code point for a regular-symbol index. Throws std::out_of_range on
  // specials or indices past the table.
  char32_t symbol_at(int index) const;

  // Text form: four special-token header lines then one symbol per line in
  // index order. import_text() inverts export_text().
  std::string export_text() const;
  static Alphabet import_text(std::string_view text, std::string language_id);

  bool operator==(const Alphabet& other) const = default;

 private:
  std::string language_id_;
  std::vector<char32_t> symbols_;
  std::unordered_map<char32_t, int> index_;

  void rebuild_index();
};

void to_json(nlohmann::json& j, const Alphabet& a);
void from_json(const nlohmann::json& j, Alphabet& a);

struct EncodedWord {
  std::vector<int> ids;  // [BOS, c1..cn, EOS]
  std::string original;
  int unk_count = 0;
};

// Frame a word with BOS/EOS; characters outside the alphabet become UNK and
// are tallied in unk_count.
EncodedWord encode_word(std::string_view word, const Alphabet& alphabet);

// Inverse of encode_word for in-alphabet content: skips BOS/PAD, stops at the
// first EOS, renders UNK as U+FFFD. Throws std::out_of_range on indices the
// alphabet cannot name.
std::string decode_word(std::span<const int> ids, const Alphabet& alphabet);

}  // namespace wf::text
