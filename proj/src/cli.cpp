#include "dialseg/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dialseg/coherence.hpp"
#include "dialseg/corpus_io.hpp"
#include "dialseg/errors.hpp"
#include "dialseg/heads.hpp"
#include "dialseg/metrics.hpp"
#include "dialseg/parallel.hpp"
#include "dialseg/pipeline.hpp"
#include "dialseg/selfsup.hpp"
#include "dialseg/similarity.hpp"
#include "dialseg/trainer.hpp"

namespace dialseg::cli {

using json = nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProviderOptions {
  std::string spec = "lexical";
  Eigen::Index dimension = 256;
  std::uint64_t hash_seed = 0;
};

struct TilingOptions {
  int smoothing = 1;
  double alpha = 0.5;
  int min_segment = 1;
  std::string stats_over = "positive";

  TilingConfig config() const {
    TilingConfig c;
    c.smoothing_window = smoothing;
    c.threshold_alpha = alpha;
    c.min_segment_utterances = min_segment;
    c.stats_over = parse_depth_stats(stats_over);
    return c;
  }
};

struct ScoringOptions {
  std::string corpus;
  std::string head;
  std::string coherence = "auto";
  bool no_topic = false;
};

void add_provider_flags(CLI::App& app, ProviderOptions& p) {
  app.add_option("--provider", p.spec, "Base embeddings: lexical, file:PATH or http:URL")
      ->capture_default_str();
  app.add_option("--dim", p.dimension, "Lexical provider dimension")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--hash-seed", p.hash_seed, "Lexical provider hash seed")->capture_default_str();
}

void add_tiling_flags(CLI::App& app, TilingOptions& t) {
  app.add_option("--smoothing", t.smoothing, "Odd moving-average width over relevance (1 = off)")
      ->capture_default_str();
  app.add_option("--alpha", t.alpha, "Boundary threshold: mean + alpha * std of depths")
      ->capture_default_str();
  app.add_option("--min-segment", t.min_segment, "Minimum utterances per segment")
      ->capture_default_str();
  app.add_option("--stats-over", t.stats_over, "Depth statistics over 'positive' or 'all' depths")
      ->capture_default_str()
      ->check(CLI::IsMember({"positive", "all"}));
}

void add_scoring_flags(CLI::App& app, ScoringOptions& s) {
  app.add_option("--corpus", s.corpus, "Dialogue corpus (JSON Lines)")->required();
  app.add_option("--head", s.head, "Head parameter file from `train` (default: untrained base vectors)");
  app.add_option("--coherence", s.coherence,
                 "Coherence scores: auto (head if --head, else zero), zero, head or file:PATH")
      ->capture_default_str();
  app.add_flag("--no-topic", s.no_topic, "Drop the topic term (coherence-only relevance)");
}

std::unique_ptr<EmbeddingProvider> build_provider(const ProviderOptions& p) {
  return make_provider(p.spec, p.dimension, p.hash_seed);
}

std::unique_ptr<CoherenceScorer> build_coherence(const std::string& spec,
                                                 const std::optional<Heads>& heads) {
  if (spec == "zero" || (spec == "auto" && !heads)) return std::make_unique<ZeroCoherence>();
  if (spec == "head" || spec == "auto") {
    if (!heads) throw UsageError("--coherence head needs --head");
    return std::make_unique<HeadCoherence>(heads->coherence);
  }
  if (spec.rfind("file:", 0) == 0) return std::make_unique<FileCoherence>(spec.substr(5));
  throw UsageError("unknown --coherence '" + spec + "' (expected auto, zero, head or file:PATH)");
}

std::optional<Heads> load_optional_heads(const std::string& path, const EmbeddingProvider& provider) {
  if (path.empty()) return std::nullopt;
  Heads heads = load_heads(path);
  if (heads.base_dimension() != provider.dimension()) {
    throw InvalidArgument("head file '" + path + "' expects d_base " +
                          std::to_string(heads.base_dimension()) + " but provider " +
                          provider.describe() + " yields " + std::to_string(provider.dimension()) +
                          "; pass the --provider/--dim used for training");
  }
  return heads;
}

// Writes to `path`, or to `out` when path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write '" + path + "'");
  file << text;
}

std::string format_double(double v) {
  // Shortest text that round-trips; keeps outputs byte-stable.
  return json(v).dump();
}

void warn_degenerate(std::ostream& err) {
  if (const auto count = degenerate_cosine_count(); count > 0) {
    err << "warning: " << count
        << " cosine evaluation(s) involved a zero vector and scored 0 "
           "(utterances without alphanumeric tokens?)\n";
  }
}

const char* remediation(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "check that the path exists and is readable/writable";
    case ErrorKind::Parse: return "fix the reported line or regenerate the file";
    case ErrorKind::DuplicateId: return "dialogue ids must be unique within a file";
    case ErrorKind::BoundaryOutOfRange: return "boundaries must be strictly increasing within [1, n-1]";
    case ErrorKind::InvalidDialogue: return "every dialogue needs at least one non-blank utterance";
    case ErrorKind::MissingEmbedding: return "re-export embeddings for this corpus (keys are dialogue_id:index, 1-based)";
    case ErrorKind::MissingScore: return "re-export coherence scores for every interval of the corpus";
    case ErrorKind::Transport: return "check that the embedding service is reachable and answers POST /embed";
    case ErrorKind::Generation: return "use a larger corpus or adjust the generation settings";
    case ErrorKind::Evaluation: return "reference and hypothesis must cover the same dialogue ids and lengths";
    case ErrorKind::Numeric: return "lower --lr or check input embeddings for extreme values";
    case ErrorKind::InvalidArgument: return "check that dimensions and flags are consistent";
  }
  return "";
}

// --- subcommands ----------------------------------------------------------------

struct SynthOptions {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> dialogues;
  std::optional<double> overlap;
};

int run_synth(const SynthOptions& o, std::ostream& out) {
  SyntheticSpec spec = o.spec.empty() ? SyntheticSpec{} : load_synthetic_spec(o.spec);
  if (o.seed) spec.seed = *o.seed;
  if (o.dialogues) spec.dialogues = *o.dialogues;
  if (o.overlap) spec.adjacent_overlap = *o.overlap;
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  emit(o.out, format_corpus(generate_synthetic(spec)), out);
  return kOk;
}

struct SegmentOptions {
  ProviderOptions provider;
  TilingOptions tiling;
  ScoringOptions scoring;
  std::string out;
  std::string dump_depth;
  int jobs = default_jobs();
};

struct ScoredCorpus {
  std::vector<Dialogue> corpus;
  std::vector<DialogueAnalysis> analyses;
};

ScoredCorpus score_corpus(const ProviderOptions& p, const TilingOptions& t, const ScoringOptions& s,
                          int jobs) {
  TilingConfig tiling;
  try {
    tiling = t.config();
    tiling.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  auto corpus = load_corpus(s.corpus);
  auto provider = build_provider(p);
  auto heads = load_optional_heads(s.head, *provider);
  auto coherence = build_coherence(s.coherence, heads);
  std::optional<ProjectionHeadd> projection;
  if (heads) projection = heads->projection;
  Segmenter segmenter(*provider, projection, *coherence, {tiling, !s.no_topic});
  auto analyses = segmenter.analyze_corpus(corpus, jobs);
  return {std::move(corpus), std::move(analyses)};
}

int run_segment(const SegmentOptions& o, std::ostream& out, std::ostream& err) {
  const auto scored = score_corpus(o.provider, o.tiling, o.scoring, o.jobs);
  std::vector<LabeledSegmentation> predictions;
  for (std::size_t d = 0; d < scored.corpus.size(); ++d) {
    predictions.push_back({scored.corpus[d].id(), scored.analyses[d].segmentation});
  }
  emit(o.out, format_predictions(predictions), out);
  if (!o.dump_depth.empty()) {
    std::string dump;
    for (std::size_t d = 0; d < scored.corpus.size(); ++d) {
      const auto& a = scored.analyses[d];
      for (Eigen::Index i = 0; i < a.relevance.size(); ++i) {
        json obj;
        obj["dialogue_id"] = scored.corpus[d].id();
        obj["interval"] = i + 1;
        obj["r"] = a.relevance.scores(i);
        obj["topic_sim"] = a.relevance.topic_sim(i);
        obj["coherence"] = a.relevance.coherence(i);
        obj["depth"] = a.depths(i);
        dump += obj.dump() + "\n";
      }
    }
    emit(o.dump_depth, dump, out);
  }
  warn_degenerate(err);
  return kOk;
}

struct ScoreDumpOptions {
  ProviderOptions provider;
  TilingOptions tiling;
  ScoringOptions scoring;
  std::string out;
  int jobs = default_jobs();
};

int run_score_dump(const ScoreDumpOptions& o, std::ostream& out, std::ostream& err) {
  const auto scored = score_corpus(o.provider, o.tiling, o.scoring, o.jobs);
  std::string csv = "dialogue_id,interval,r,topic_sim,coherence,depth\n";
  for (std::size_t d = 0; d < scored.corpus.size(); ++d) {
    const auto& a = scored.analyses[d];
    for (Eigen::Index i = 0; i < a.relevance.size(); ++i) {
      csv += json(scored.corpus[d].id()).dump() + "," + std::to_string(i + 1) + "," +
             format_double(a.relevance.scores(i)) + "," + format_double(a.relevance.topic_sim(i)) +
             "," + format_double(a.relevance.coherence(i)) + "," + format_double(a.depths(i)) + "\n";
    }
  }
  emit(o.out, csv, out);
  warn_degenerate(err);
  return kOk;
}

struct EvalOptions {
  std::string ref;
  std::string hyp;
  bool verbose = false;
};

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
  return buf;
}

int run_eval(const EvalOptions& o, std::ostream& out) {
  const auto references = gold_segmentations(load_corpus(o.ref));
  const auto hypotheses = bind_predictions(load_predictions(o.hyp), references);
  const auto metrics = evaluate_corpus(references, hypotheses);
  if (o.verbose) {
    for (const auto& d : metrics.per_dialogue) {
      out << d.id << "\tpk=" << percent(d.result.pk) << "\twd=" << percent(d.result.window_diff)
          << "\tk=" << d.result.window_size << "\n";
    }
    if (metrics.skipped > 0) {
      out << "skipped " << metrics.skipped << " single-utterance dialogue(s)\n";
    }
  }
  out << "pk: " << percent(metrics.pk) << "\n";
  out << "wd: " << percent(metrics.window_diff) << "\n";
  return kOk;
}

struct MineOptions {
  ProviderOptions provider;
  TilingOptions tiling;
  ScoringOptions scoring;
  int w = 5;
  std::uint64_t seed = 0;
  int per_interval = 1;
  bool no_pseudo = false;
  bool no_cross = false;
  std::string out;
  int jobs = default_jobs();
};

int run_mine(const MineOptions& o, std::ostream& out, std::ostream& err) {
  if (o.w < 1) throw UsageError("--w must be >= 1");
  if (o.per_interval < 1) throw UsageError("--per-interval must be >= 1");
  const auto scored = score_corpus(o.provider, o.tiling, o.scoring, o.jobs);
  std::string text;
  for (std::size_t d = 0; d < scored.corpus.size(); ++d) {
    const auto& dialogue = scored.corpus[d];
    const auto pairs = o.no_pseudo ? neighbor_pairs(dialogue.size(), o.w)
                                   : refined_pairs(dialogue.size(), o.w, scored.analyses[d].segmentation);
    for (const auto& p : pairs) {
      json obj;
      obj["anchor"] = {{"dialogue_id", dialogue.id()}, {"i", p.anchor}};
      obj["pos"] = p.positives;
      obj["neg"] = p.negatives;
      text += obj.dump() + "\n";
    }
  }
  for (const auto& f : rm_fragments(scored.corpus, o.seed, {o.per_interval, !o.no_cross})) {
    json obj;
    obj["interval"] = {{"dialogue_id", scored.corpus[f.dialogue].id()}, {"i", f.interval}};
    obj["scheme"] = to_string(f.scheme);
    obj["real_right"] = {f.interval + 1, f.interval + 2};
    obj["synthetic_right"] = {{"dialogue_id", scored.corpus[f.synthetic_dialogue].id()},
                              {"utterances", {f.synthetic_start, f.synthetic_start + 1}}};
    text += obj.dump() + "\n";
  }
  emit(o.out, text, out);
  warn_degenerate(err);
  return kOk;
}

struct TrainOptions {
  ProviderOptions provider;
  TilingOptions tiling;
  std::string corpus;
  std::string out;
  std::string report;
  std::string init;
  TrainConfig config;
  int jobs = default_jobs();
};

int run_train(TrainOptions o, std::ostream& out, std::ostream& err) {
  try {
    o.config.tiling = o.tiling.config();
    o.config.jobs = o.jobs;
    o.config.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto corpus = load_corpus(o.corpus);
  auto provider = build_provider(o.provider);
  const auto initial = load_optional_heads(o.init, *provider);
  const auto result = train(corpus, *provider, o.config, initial);

  json report = json::array();
  for (std::size_t e = 0; e < result.report.epochs.size(); ++e) {
    const auto& r = result.report.epochs[e];
    err << "epoch " << e + 1 << ": L_NUM=" << format_double(r.num_loss)
        << " L_RM=" << format_double(r.rm_loss) << " L=" << format_double(r.total_loss)
        << " anchors=" << r.num_anchors << " fragments=" << r.rm_fragments
        << " pseudo_boundaries=" << r.pseudo_boundaries
        << " grad_check=" << to_string(r.gradient_check) << "\n";
    report.push_back({{"epoch", e + 1},
                      {"num_loss", r.num_loss},
                      {"rm_loss", r.rm_loss},
                      {"total_loss", r.total_loss},
                      {"num_anchors", r.num_anchors},
                      {"rm_fragments", r.rm_fragments},
                      {"pseudo_boundaries", r.pseudo_boundaries},
                      {"gradient_check", to_string(r.gradient_check)}});
  }
  emit(o.out, format_heads(result.heads), out);
  if (!o.report.empty()) emit(o.report, report.dump(2) + "\n", out);
  for (const auto& r : result.report.epochs) {
    if (r.gradient_check == GradientCheck::Failed) {
      err << "warning: analytic gradient disagreed with finite differences\n";
      break;
    }
  }
  warn_degenerate(err);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised dialogue topic segmentation", "dialseg"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic topic-block corpus");
  synth_cmd->add_option("--spec", synth.spec, "Synthetic spec JSON (missing keys take defaults)");
  synth_cmd->add_option("--out", synth.out, "Output corpus (default: stdout)");
  synth_cmd->add_option("--seed", synth.seed, "Override the spec seed");
  synth_cmd->add_option("--dialogues", synth.dialogues, "Override the dialogue count");
  synth_cmd->add_option("--overlap", synth.overlap, "Override the adjacent-topic vocabulary overlap [0, 0.5]");

  SegmentOptions segment_opts;
  auto* segment_cmd = app.add_subcommand("segment", "Segment every dialogue of a corpus");
  add_scoring_flags(*segment_cmd, segment_opts.scoring);
  add_provider_flags(*segment_cmd, segment_opts.provider);
  add_tiling_flags(*segment_cmd, segment_opts.tiling);
  segment_cmd->add_option("--out", segment_opts.out, "Predictions {\"id\", \"boundaries\"} (default: stdout)");
  segment_cmd->add_option("--dump-depth", segment_opts.dump_depth,
                          "Also write per-interval relevance/depth JSON Lines here");
  segment_cmd->add_option("--jobs", segment_opts.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  ScoreDumpOptions dump_opts;
  auto* dump_cmd = app.add_subcommand("score-dump", "Write per-interval relevance and depth curves as CSV");
  add_scoring_flags(*dump_cmd, dump_opts.scoring);
  add_provider_flags(*dump_cmd, dump_opts.provider);
  add_tiling_flags(*dump_cmd, dump_opts.tiling);
  dump_cmd->add_option("--out", dump_opts.out, "CSV output (default: stdout)");
  dump_cmd->add_option("--jobs", dump_opts.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  EvalOptions eval_opts;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold boundaries (Pk, WindowDiff)");
  eval_cmd->add_option("--ref", eval_opts.ref, "Gold corpus with boundaries")->required();
  eval_cmd->add_option("--hyp", eval_opts.hyp, "Predictions from `segment`")->required();
  eval_cmd->add_flag("--verbose", eval_opts.verbose, "Per-dialogue breakdown");

  MineOptions mine_opts;
  auto* mine_cmd = app.add_subcommand("mine", "Dump NUM pairs and RM fragments for inspection");
  add_scoring_flags(*mine_cmd, mine_opts.scoring);
  add_provider_flags(*mine_cmd, mine_opts.provider);
  add_tiling_flags(*mine_cmd, mine_opts.tiling);
  mine_cmd->add_option("--w", mine_opts.w, "Neighbor window")->capture_default_str();
  mine_cmd->add_option("--seed", mine_opts.seed, "Fragment sampling seed")->capture_default_str();
  mine_cmd->add_option("--per-interval", mine_opts.per_interval, "RM fragments per interval")->capture_default_str();
  mine_cmd->add_flag("--no-pseudo", mine_opts.no_pseudo, "Skip pseudo-segmentation refinement");
  mine_cmd->add_flag("--no-cross", mine_opts.no_cross, "Only sample synthetic fragments within a dialogue");
  mine_cmd->add_option("--out", mine_opts.out, "Output JSON Lines (default: stdout)");
  mine_cmd->add_option("--jobs", mine_opts.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  TrainOptions train_opts;
  auto& tc = train_opts.config;
  auto* train_cmd = app.add_subcommand("train", "Train the projection and coherence heads");
  train_cmd->add_option("--corpus", train_opts.corpus, "Unlabeled (or labeled) corpus")->required();
  add_provider_flags(*train_cmd, train_opts.provider);
  add_tiling_flags(*train_cmd, train_opts.tiling);
  train_cmd->add_option("--epochs", tc.epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--lr", tc.learning_rate, "SGD learning rate")->capture_default_str();
  train_cmd->add_option("--margin", tc.margin, "Ranking margin eta")->capture_default_str();
  train_cmd->add_option("--w", tc.neighbor_window, "Neighbor window for NUM pairs")->capture_default_str();
  train_cmd->add_option("--seed", tc.seed, "Seed for initialization and sampling")->capture_default_str();
  train_cmd->add_option("--num-weight", tc.num_weight, "Weight of the NUM loss")->capture_default_str();
  train_cmd->add_option("--rm-weight", tc.rm_weight, "Weight of the RM loss")->capture_default_str();
  train_cmd->add_option("--batch-size", tc.batch_size, "Samples per SGD step")->capture_default_str();
  train_cmd->add_option("--refresh-every", tc.refresh_pseudo_every,
                        "Epochs between pseudo-segmentation refreshes")->capture_default_str();
  train_cmd->add_option("--d-topic", tc.topic_dimension, "Topic vector dimension")->capture_default_str();
  train_cmd->add_option("--per-interval", tc.rm_per_interval, "RM fragments per interval")->capture_default_str();
  train_cmd->add_flag("--no-pseudo", [&tc](std::int64_t) { tc.use_pseudo = false; },
                      "NUM pairs from neighbor sets only (no pseudo-segmentation refinement)");
  train_cmd->add_flag("--no-topic", [&tc](std::int64_t) { tc.use_topic = false; },
                      "Coherence-only relevance");
  train_cmd->add_flag("--no-grad-check", [&tc](std::int64_t) { tc.gradient_check = false; },
                      "Skip the per-epoch finite-difference spot check");
  train_cmd->add_option("--init", train_opts.init, "Start from this head file instead of a fresh initialization");
  train_cmd->add_option("--out", train_opts.out, "Head parameter file (default: stdout)");
  train_cmd->add_option("--report", train_opts.report, "Per-epoch report as JSON");
  train_cmd->add_option("--jobs", train_opts.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "hint: run `dialseg --help` or `dialseg <command> --help` for usage\n";
    return kUsage;
  }

  try {
    reset_degenerate_cosine_count();
    if (synth_cmd->parsed()) return run_synth(synth, out);
    if (segment_cmd->parsed()) return run_segment(segment_opts, out, err);
    if (dump_cmd->parsed()) return run_score_dump(dump_opts, out, err);
    if (eval_cmd->parsed()) return run_eval(eval_opts, out);
    if (mine_cmd->parsed()) return run_mine(mine_opts, out, err);
    if (train_cmd->parsed()) return run_train(train_opts, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n" << "hint: " << remediation(e.kind()) << "\n";
    return kNumeric;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n"
        << "hint: " << remediation(e.kind()) << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace dialseg::cli
