#include "wordforge/text/dataset.hpp"

#include "wordforge/num/rng.hpp"
#include "wordforge/text/unicode.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wf::text {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RawLine {
  std::string text;       // without trailing newline
  int number;             // 1-based
  std::size_t byte_start; // offset of the line's first byte in the file
};

// Splits on LF. A trailing CR is kept in the text; normalization trims it
// from word content and it never affects TAB counting.
std::vector<RawLine> split_lines(const std::string& content) {
  std::vector<RawLine> lines;
  std::size_t start = 0;
  int number = 1;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) {
      if (start < content.size()) {
        lines.push_back({content.substr(start), number, start});
      }
      break;
    }
    lines.push_back({content.substr(start, end - start), number, start});
    start = end + 1;
    ++number;
  }
  return lines;
}

bool is_blank_or_comment(const std::string& line) {
  if (!line.empty() && line[0] == '#') return true;
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
  });
}

void check_utf8(const std::string& path, const RawLine& line) {
  try {
    utf8_to_utf32(line.text);
  } catch (const Utf8Error& e) {
    throw std::runtime_error(path + ": undecodable bytes at byte offset " +
                             std::to_string(line.byte_start + e.byte_offset) + " (line " +
                             std::to_string(line.number) + ")");
  }
}

struct Offenders {
  std::vector<std::string> entries;  // "word (path:line)"

  void add(const std::string& word, const std::string& path, int line) {
    entries.push_back(word + " (" + path + ":" + std::to_string(line) + ")");
  }
  void raise_if_any() const {
    if (entries.empty()) return;
    std::string msg = std::to_string(entries.size()) + " word(s) exceed " +
                      std::to_string(kMaxWordScalars) + " symbols: ";
    const std::size_t shown = std::min<std::size_t>(entries.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
      if (i) msg += ", ";
      msg += entries[i];
    }
    if (entries.size() > shown) {
      msg += ", … and " + std::to_string(entries.size() - shown) + " more";
    }
    throw std::runtime_error(msg);
  }
};

// Normalizes one field; rejects words that vanish under normalization.
std::string normalize_field(const std::string& raw, const std::string& path, int line_no,
                            Offenders& offenders) {
  std::string w = normalize_word(raw);
  if (w.empty()) {
    throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                             " holds a word that is empty after normalization");
  }
  if (scalar_count(w) > static_cast<std::size_t>(kMaxWordScalars)) {
    offenders.add(w, path, line_no);
  }
  return w;
}

void load_parallel(const std::string& path, WordDataset& ds, Offenders& offenders) {
  const std::string content = read_file(path);
  std::set<std::pair<std::string, std::string>> seen;
  for (const RawLine& line : split_lines(content)) {
    if (is_blank_or_comment(line.text)) continue;
    check_utf8(path, line);
    const auto tabs = std::count(line.text.begin(), line.text.end(), '\t');
    if (tabs != 1) {
      throw std::runtime_error(path + ": line " + std::to_string(line.number) +
                               " is malformed: expected source<TAB>target, found " +
                               std::to_string(tabs) + " tab(s)");
    }
    const std::size_t tab = line.text.find('\t');
    WordPair pair;
    pair.source = normalize_field(line.text.substr(0, tab), path, line.number, offenders);
    pair.target = normalize_field(line.text.substr(tab + 1), path, line.number, offenders);
    if (!seen.insert({pair.source, pair.target}).second) {
      ++ds.duplicate_pairs_dropped;
      continue;
    }
    ds.pairs.push_back(std::move(pair));
  }
}

void load_list(const std::string& path, std::vector<std::string>& out, WordDataset& ds,
               Offenders& offenders) {
  const std::string content = read_file(path);
  std::set<std::string> seen;
  for (const RawLine& line : split_lines(content)) {
    if (is_blank_or_comment(line.text)) continue;
    check_utf8(path, line);
    if (line.text.find('\t') != std::string::npos) {
      throw std::runtime_error(path + ": line " + std::to_string(line.number) +
                               " is malformed: word lists must not contain tabs");
    }
    std::string w = normalize_field(line.text, path, line.number, offenders);
    if (!seen.insert(w).second) {
      ++ds.duplicate_words_dropped;
      continue;
    }
    out.push_back(std::move(w));
  }
}

}  // namespace

std::vector<WordPair> WordDataset::train_pairs() const {
  std::vector<WordPair> out;
  for (const WordPair& p : pairs) {
    if (p.split == Split::kTrain) out.push_back(p);
  }
  return out;
}

std::vector<WordPair> WordDataset::holdout_pairs() const {
  std::vector<WordPair> out;
  for (const WordPair& p : pairs) {
    if (p.split == Split::kHoldout) out.push_back(p);
  }
  return out;
}

std::vector<std::string> WordDataset::source_words() const {
  std::vector<std::string> out;
  out.reserve(pairs.size() + extra_source.size());
  for (const WordPair& p : pairs) out.push_back(p.source);
  out.insert(out.end(), extra_source.begin(), extra_source.end());
  return out;
}

std::vector<std::string> WordDataset::target_words() const {
  std::vector<std::string> out;
  out.reserve(pairs.size() + extra_target.size());
  for (const WordPair& p : pairs) out.push_back(p.target);
  out.insert(out.end(), extra_target.begin(), extra_target.end());
  return out;
}

WordDataset load_dataset(const std::optional<std::string>& parallel_path,
                         const std::optional<std::string>& source_list_path,
                         const std::optional<std::string>& target_list_path) {
  if (!parallel_path && !source_list_path && !target_list_path) {
    throw std::invalid_argument("load_dataset: at least one input path is required");
  }
  WordDataset ds;
  Offenders offenders;
  if (parallel_path) load_parallel(*parallel_path, ds, offenders);
  if (source_list_path) load_list(*source_list_path, ds.extra_source, ds, offenders);
  if (target_list_path) load_list(*target_list_path, ds.extra_target, ds, offenders);
  offenders.raise_if_any();
  return ds;
}

WordDataset split_holdout(WordDataset dataset, int holdout_count, uint64_t seed) {
  if (holdout_count < 0) {
    throw std::invalid_argument("split_holdout: holdout_count must be non-negative");
  }
  const int n = static_cast<int>(dataset.pairs.size());
  if (holdout_count > 0 && holdout_count >= n) {
    throw std::invalid_argument("split_holdout: holdout_count " + std::to_string(holdout_count) +
                                " must be smaller than the pair count " + std::to_string(n));
  }
  for (WordPair& p : dataset.pairs) p.split = Split::kTrain;
  if (holdout_count == 0) return dataset;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  num::Rng rng = num::Rng(seed).fork("holdout-split");
  rng.shuffle(order);
  for (int i = 0; i < holdout_count; ++i) {
    dataset.pairs[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].split =
        Split::kHoldout;
  }
  return dataset;
}

}  // namespace wf::text
