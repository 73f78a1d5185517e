#include "wordforge/eval/report.hpp"

#include "json.hpp"

#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace wf::eval {

namespace {

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace

std::string vocab_report_json(const EvalReport& report, const WordShapeStats* shape) {
  nlohmann::json j;
  j["generated_total"] = report.generated_total;
  j["seen_in_training"] = report.seen_in_training;
  j["ewns"] = report.ewns;
  j["pnw"] = report.pnw;
  j["tuw"] = report.tuw;
  j["ewns_words"] = report.ewns_words;
  j["pnw_words"] = report.pnw_words;
  j["seen_words"] = report.seen_words;
  if (!report.model_id.empty()) j["model_id"] = report.model_id;
  if (!report.dataset_id.empty()) j["dataset_id"] = report.dataset_id;
  j["seed"] = report.seed;
  if (shape != nullptr) {
    nlohmann::json s;
    s["word_count"] = shape->word_count;
    s["mean_length"] = shape->mean_length;
    if (shape->median_length) {
      s["median_length"] = *shape->median_length;
    } else {
      s["median_length"] = nullptr;
    }
    if (shape->vowel_ratio) {
      s["vowel_ratio"] = *shape->vowel_ratio;
    } else {
      s["vowel_ratio"] = nullptr;
    }
    s["repetition_count"] = shape->repetition_count;
    j["shape"] = s;
  }
  return j.dump(2) + "\n";
}

std::string vocab_report_text(const EvalReport& report, const WordShapeStats* shape) {
  std::ostringstream out;
  out << "generated total      " << report.generated_total << "\n";
  out << "seen in training     " << report.seen_in_training << "\n";
  out << "EWNS (real, unseen)  " << report.ewns << "\n";
  out << "PNW  (novel)         " << report.pnw << "\n";
  out << "TUW  (unique unseen) " << report.tuw << "\n";
  if (!report.model_id.empty()) out << "model                " << report.model_id << "\n";
  if (!report.dataset_id.empty()) out << "dataset              " << report.dataset_id << "\n";
  if (shape != nullptr) {
    out << "mean length          " << one_decimal(shape->mean_length) << "\n";
    out << "median length        "
        << (shape->median_length ? one_decimal(*shape->median_length) : std::string("n/a"))
        << "\n";
    out << "vowel ratio          "
        << (shape->vowel_ratio ? one_decimal(100.0 * *shape->vowel_ratio) + "%"
                               : std::string("n/a"))
        << "\n";
    out << "repeated words       " << shape->repetition_count << "\n";
  }
  return out.str();
}

std::string word_table_text(std::span<const std::string> generated,
                            std::span<const std::string> training_targets) {
  const std::unordered_set<std::string> training(training_targets.begin(),
                                                 training_targets.end());
  std::unordered_map<std::string, int> counts;
  for (const std::string& w : generated) ++counts[w];

  std::ostringstream out;
  std::unordered_set<std::string> printed;
  for (const std::string& w : generated) {
    if (!printed.insert(w).second) continue;
    out << w;
    if (training.count(w)) out << " *";
    if (counts[w] > 1) out << " x" << counts[w];
    out << "\n";
  }
  return out.str();
}

std::string ratings_table_text(const std::map<std::string, RatingSummary>& groups) {
  std::ostringstream out;
  out << "group\tcount\tmean\tmedian\n";
  for (const auto& [name, s] : groups) {
    out << (name.empty() ? "(all)" : name) << "\t" << s.count << "\t" << one_decimal(s.mean)
        << "\t" << s.median << "\n";
  }
  return out.str();
}

}  // namespace wf::eval
