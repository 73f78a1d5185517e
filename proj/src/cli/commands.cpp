#include "wordforge/cli/commands.hpp"

#include "CLI11.hpp"
#include "json.hpp"
#include "wordforge/cli/experiment.hpp"
#include "wordforge/eval/metrics.hpp"
#include "wordforge/eval/report.hpp"
#include "wordforge/num/rng.hpp"
#include "wordforge/text/dataset.hpp"
#include "wordforge/text/unicode.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace wf::cli {
namespace {

namespace fs = std::filesystem;

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open");
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.flush();
  if (!f) throw std::runtime_error(path + ": write failed");
}

// One normalized word per line; `#` comments and blank lines are skipped,
// duplicates and order are preserved. tab_field selects a column of a TSV
// line (a line without tabs passes through whole), so pair files work
// wherever a word list is expected.
std::vector<std::string> read_word_lines(const std::string& path, std::optional<int> tab_field) {
  std::istringstream in(read_file(path));
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::string_view field = line;
    if (tab_field) {
      std::string_view rest = line;
      for (int i = 0; i < *tab_field; ++i) {
        const size_t tab = rest.find('\t');
        if (tab == std::string_view::npos) break;  // plain list: keep the line
        rest = rest.substr(tab + 1);
      }
      const size_t tab = rest.find('\t');
      field = tab == std::string_view::npos ? rest : rest.substr(0, tab);
    }
    std::string w = text::normalize_word(field);
    if (!w.empty()) words.push_back(std::move(w));
  }
  return words;
}

std::string loss_trace_text(TrainedModel& m) {
  std::string s;
  auto series = [&s](const char* name, std::span<const double> vals) {
    for (size_t i = 0; i < vals.size(); ++i)
      s += std::string(name) + "\t" + std::to_string(i) + "\t" + fmt_double(vals[i]) + "\n";
  };
  switch (m.kind()) {
    case ModelKind::kRnn:
      series("source_lm_epoch_loss", m.rnn_source->epoch_losses());
      series("target_lm_epoch_loss", m.rnn_target->epoch_losses());
      break;
    case ModelKind::kSeq2Seq:
      series("epoch_loss", m.seq2seq->epoch_losses());
      series("step_loss", m.seq2seq->step_losses());
      break;
    case ModelKind::kStyleTransfer: {
      const auto& st = m.transfer->stats();
      series("rec_loss", st.rec_loss);
      series("adv_loss_d1", st.adv_loss_d1);
      series("adv_loss_d2", st.adv_loss_d2);
      series("d1_accuracy", st.d1_accuracy);
      series("d2_accuracy", st.d2_accuracy);
      series("step_rec_loss", st.step_rec_loss);
      break;
    }
  }
  return s;
}

int cmd_split(const std::string& pairs_path, int holdout, uint64_t seed,
              const std::string& out_dir, std::ostream& out) {
  auto data = text::load_dataset(pairs_path, std::nullopt, std::nullopt);
  data = text::split_holdout(std::move(data), holdout, seed);
  fs::create_directories(out_dir);

  std::string train_text, hold_text;
  int n_train = 0, n_hold = 0;
  for (const auto& p : data.pairs) {
    const std::string line = p.source + "\t" + p.target + "\n";
    if (p.split == text::Split::kHoldout) {
      hold_text += line;
      ++n_hold;
    } else {
      train_text += line;
      ++n_train;
    }
  }
  const std::string train_path = out_dir + "/train_pairs.tsv";
  const std::string hold_path = out_dir + "/holdout_pairs.tsv";
  write_file(train_path, train_text);
  write_file(hold_path, hold_text);
  const nlohmann::json manifest = {{"schema_version", 1},
                                   {"input", pairs_path},
                                   {"seed", seed},
                                   {"holdout_count", n_hold},
                                   {"train_count", n_train},
                                   {"duplicate_pairs_dropped", data.duplicate_pairs_dropped}};
  write_file(out_dir + "/split_manifest.json", manifest.dump(2) + "\n");
  out << "train: " << train_path << " (" << n_train << " pairs)\n";
  out << "holdout: " << hold_path << " (" << n_hold << " pairs)\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::optional<uint64_t>& seed,
              const std::optional<std::string>& out_dir, std::ostream& out) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.out_dir = *out_dir;

  auto data = load_configured_dataset(cfg);
  if (cfg.holdout_count > 0)
    data = text::split_holdout(std::move(data), cfg.holdout_count, cfg.seed);

  TrainedModel m = train_model(cfg, data);

  fs::create_directories(cfg.out_dir);
  const std::string ckpt = cfg.out_dir + "/checkpoint.cwf";
  save_model(m, ckpt);
  write_file(cfg.out_dir + "/loss_trace.txt", loss_trace_text(m));
  // The input config verbatim, plus the effective one (seed/out overrides
  // applied) that re-runs the experiment as-is.
  write_file(cfg.out_dir + "/config_input.json", read_file(config_path));
  write_file(cfg.out_dir + "/config.json", to_json(cfg).dump(2) + "\n");

  out << "model: " << to_string(cfg.model) << "\n";
  out << "train pairs: " << data.train_pairs().size() << "\n";
  out << "source words: " << data.source_words().size() << "\n";
  out << "target words: " << data.target_words().size() << "\n";
  out << "checkpoint: " << ckpt << "\n";
  return 0;
}

int cmd_generate(const std::string& ckpt_path, const std::string& words_path,
                 const std::optional<int64_t>& count, const std::optional<uint64_t>& seed,
                 const std::string& out_dir, std::ostream& out) {
  TrainedModel m = load_model(ckpt_path);
  const auto sources = read_word_lines(words_path, 0);
  if (sources.empty()) throw std::runtime_error(words_path + ": no source words");
  if (count && *count <= 0) throw std::runtime_error("--count must be positive");
  const size_t n = count ? static_cast<size_t>(*count) : sources.size();

  const num::Rng root(seed ? *seed : m.config.seed, "generate");
  std::string proposals;
  for (size_t i = 0; i < n; ++i) {
    num::Rng rng = root.fork("proposal-" + std::to_string(i));
    proposals += m.propose(sources[i % sources.size()], rng) + "\n";
  }
  fs::create_directories(out_dir);
  const std::string path = out_dir + "/proposals.txt";
  write_file(path, proposals);
  out << "proposals: " << path << " (" << n << " words)\n";
  return 0;
}

std::vector<eval::RootFamily> load_root_families(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed root-family file: " + one_line(e.what()));
  }
  if (!j.is_array()) throw std::runtime_error(path + ": expected a JSON array of families");
  std::vector<eval::RootFamily> families;
  try {
    for (const auto& f : j) {
      eval::RootFamily fam;
      fam.family_id = f.at("family_id").get<std::string>();
      if (f.contains("source_words"))
        for (const auto& w : f.at("source_words"))
          fam.source_words.push_back(text::normalize_word(w.get<std::string>()));
      for (const auto& w : f.at("proposals"))
        fam.proposals.push_back(text::normalize_word(w.get<std::string>()));
      families.push_back(std::move(fam));
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": malformed root-family file: " + one_line(e.what()));
  }
  return families;
}

int cmd_evaluate(const std::string& props_path, const std::string& train_path,
                 const std::string& ref_path, const std::string& vowels_mode,
                 const std::string& model_id, const std::string& dataset_id, uint64_t seed,
                 const std::string& ratings_path, const std::string& roots_path, int root_trials,
                 const std::string& out_dir, std::ostream& out) {
  const auto generated = read_word_lines(props_path, std::nullopt);
  // A pair file passes for --training: the target column is what the model
  // saw as words to produce.
  const auto training = read_word_lines(train_path, 1);
  const auto reference = read_word_lines(ref_path, std::nullopt);

  eval::EvalReport r = eval::compute_vocab_metrics(generated, training, reference);
  r.model_id = model_id;
  r.dataset_id = dataset_id;
  r.seed = seed;

  std::optional<std::u32string> vowels;
  if (vowels_mode == "latin" || vowels_mode == "cyrillic") {
    vowels = eval::default_vowels(vowels_mode);
  } else if (vowels_mode == "auto") {
    if (auto script = eval::detect_vowel_script(generated)) vowels = eval::default_vowels(*script);
  } else if (vowels_mode != "none") {
    throw std::runtime_error("unknown --vowels mode '" + vowels_mode +
                             "' (expected auto, latin, cyrillic, or none)");
  }
  const auto shape = eval::word_shape_stats(generated, vowels);

  std::string text_report = eval::vocab_report_text(r, &shape);
  nlohmann::json jr = nlohmann::json::parse(eval::vocab_report_json(r, &shape));

  if (!roots_path.empty()) {
    const auto families = load_root_families(roots_path);
    std::vector<std::string> background;
    for (const auto& f : families)
      background.insert(background.end(), f.proposals.begin(), f.proposals.end());
    const auto probe = eval::root_consistency(families, background, root_trials, seed);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "root consistency:\n  families: %zu\n  score: %.4f\n  baseline: %.4f\n"
                  "  gap: %.4f\n",
                  families.size(), probe.score, probe.baseline, probe.gap);
    text_report += "\n" + std::string(buf);
    jr["root_consistency"] = {{"families", families.size()},
                              {"score", probe.score},
                              {"baseline", probe.baseline},
                              {"gap", probe.gap},
                              {"trials", probe.trials}};
  }

  if (!ratings_path.empty()) {
    const auto ratings = eval::load_ratings_csv(ratings_path);
    const auto groups = eval::summarize_ratings(ratings);
    text_report += "\n" + eval::ratings_table_text(groups);
    nlohmann::json jg = nlohmann::json::object();
    for (const auto& [group, s] : groups)
      jg[group] = {{"count", s.count}, {"mean", s.mean}, {"median", s.median}};
    jr["ratings"] = jg;
  }

  fs::create_directories(out_dir);
  write_file(out_dir + "/report.json", jr.dump(2) + "\n");
  write_file(out_dir + "/report.txt", text_report);
  write_file(out_dir + "/words.txt", eval::word_table_text(generated, training));
  out << text_report;
  return 0;
}

int cmd_inspect(const std::string& ckpt_path, std::ostream& out) {
  const Checkpoint c = load_checkpoint(ckpt_path);
  out << "checkpoint: " << ckpt_path << "\n";
  out << "format: CWF" << kCheckpointVersion << "\n";
  out << "model: " << c.config.value("model", std::string("?")) << "\n";
  out << "alphabets:\n";
  for (const auto& a : c.alphabets)
    out << "  " << a.language_id() << ": " << a.symbols().size() << " symbols (+4 specials)\n";
  out << "arrays:\n";
  int64_t offset = 0, total = 0;
  for (const auto& a : c.arrays) {
    out << "  " << a.name << "  " << num::shape_str(a.values.shape()) << "  f32  offset "
        << offset << "\n";
    offset += a.values.size() * 4;
    total += a.values.size();
  }
  out << "total parameters: " << total << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"learn the orthographic style of a small vocabulary and coin new words"};
  app.name("wordforge");
  app.require_subcommand(1);

  std::string sp_pairs, sp_out = ".";
  int sp_holdout = 0;
  uint64_t sp_seed = 0;
  CLI::App* split = app.add_subcommand("split", "tag a parallel pair file into train/holdout");
  split->add_option("--pairs", sp_pairs, "source<TAB>target file")->required();
  split->add_option("--holdout", sp_holdout, "number of pairs to hold out")->required();
  split->add_option("--seed", sp_seed, "sampling seed");
  split->add_option("--out", sp_out, "output directory");

  std::string tr_config;
  std::optional<uint64_t> tr_seed;
  std::optional<std::string> tr_out;
  CLI::App* train = app.add_subcommand("train", "train the configured model");
  train->add_option("--config", tr_config, "experiment config (JSON)")->required();
  train->add_option("--seed", tr_seed, "override config seed");
  train->add_option("--out", tr_out, "override config output directory");

  std::string g_ckpt, g_words, g_out = ".";
  std::optional<int64_t> g_count;
  std::optional<uint64_t> g_seed;
  CLI::App* gen = app.add_subcommand("generate", "propose words for a source word list");
  gen->add_option("--checkpoint", g_ckpt, "trained model checkpoint")->required();
  gen->add_option("--words", g_words, "source word list (or pair file; first column)")
      ->required();
  gen->add_option("--count", g_count, "proposals to emit (cycles the list; default list size)");
  gen->add_option("--seed", g_seed, "sampling seed (default: the checkpoint's)");
  gen->add_option("--out", g_out, "output directory");

  std::string e_props, e_train, e_ref, e_out = ".", e_vowels = "auto";
  std::string e_model_id, e_dataset_id, e_ratings, e_roots;
  uint64_t e_seed = 0;
  int e_root_trials = 1000;
  CLI::App* ev = app.add_subcommand("evaluate", "score proposals against a reference vocabulary");
  ev->add_option("--proposals", e_props, "generated words, one per line")->required();
  ev->add_option("--training", e_train, "training words (or pair file; target column)")
      ->required();
  ev->add_option("--reference", e_ref, "reference vocabulary word list")->required();
  ev->add_option("--vowels", e_vowels, "vowel set: auto|latin|cyrillic|none");
  ev->add_option("--model-id", e_model_id, "provenance: model id");
  ev->add_option("--dataset-id", e_dataset_id, "provenance: dataset id");
  ev->add_option("--seed", e_seed, "provenance seed; also seeds the root-probe baseline");
  ev->add_option("--ratings", e_ratings, "user-study CSV (word,rating,judge,group)");
  ev->add_option("--roots", e_roots, "root families (JSON) for the consistency probe");
  ev->add_option("--root-trials", e_root_trials, "baseline pairs for the root probe");
  ev->add_option("--out", e_out, "output directory");

  std::string i_ckpt;
  CLI::App* ins = app.add_subcommand("inspect", "print a checkpoint's manifest");
  ins->add_option("--checkpoint", i_ckpt, "checkpoint to describe")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (split->parsed()) return cmd_split(sp_pairs, sp_holdout, sp_seed, sp_out, out);
    if (train->parsed()) return cmd_train(tr_config, tr_seed, tr_out, out);
    if (gen->parsed()) return cmd_generate(g_ckpt, g_words, g_count, g_seed, g_out, out);
    if (ev->parsed())
      return cmd_evaluate(e_props, e_train, e_ref, e_vowels, e_model_id, e_dataset_id, e_seed,
                          e_ratings, e_roots, e_root_trials, e_out, out);
    if (ins->parsed()) return cmd_inspect(i_ckpt, out);
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 1;
  }
  err << "error: usage: no subcommand given\n";
  return 2;
}

}  // namespace wf::cli
