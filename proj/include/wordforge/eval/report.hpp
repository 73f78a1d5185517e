#pragma once

#include "wordforge/eval/metrics.hpp"

#include <map>
#include <span>
#include <string>

namespace wf::eval {

// Machine-readable report: counts, word lists, shape stats, provenance.
std::string vocab_report_json(const EvalReport& report, const WordShapeStats* shape = nullptr);

// Human-readable counts table; includes shape stats when given.
std::string vocab_report_text(const EvalReport& report, const WordShapeStats* shape = nullptr);

// One generated word per line, annotated: `*` words seen during training,
// `xN` words occurring N>1 times in the list.
std::string word_table_text(std::span<const std::string> generated,
                            std::span<const std::string> training_targets);

// Per-group mean (one decimal) and median table.
std::string ratings_table_text(const std::map<std::string, RatingSummary>& groups);

}  // namespace wf::eval
