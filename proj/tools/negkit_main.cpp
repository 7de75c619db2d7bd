// Unified command-line front end.  One binary, nine subcommands:
//
//   parse          caption lines -> parsed-caption JSONL
//   merge          parsed captions + embeddings -> boosted phrase rows
//   adapter-check  finite-difference self-test of the adapter gradients
//   eval           detections + queries -> AP/AR/FPR report
//   nms            class-ignored suppression over a detections file
//   build-dataset  annotation JSONL -> contrastive caption records
//   stats          caption corpus -> negation statistics
//   posthoc        model-assisted filtering of scored detections
//   diag-attn      per-word-class attention mass report
//
// Exit codes: 0 success, 1 domain error, 2 usage error.  Data goes to
// standard output (or --out); everything else goes to standard error.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "negkit/adapter.hpp"
#include "negkit/config.hpp"
#include "negkit/detections.hpp"
#include "negkit/emb_io.hpp"
#include "negkit/errors.hpp"
#include "negkit/eval.hpp"
#include "negkit/merge.hpp"
#include "negkit/nms.hpp"
#include "negkit/pipeline.hpp"
#include "negkit/stats.hpp"
#include "negkit/textparse.hpp"

namespace negkit {
namespace {

// Either an opened file or stdin.
class InputSource {
 public:
  explicit InputSource(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) fail(ErrKind::IoError, "cannot open input file " + path);
  }
  std::istream& stream() { return file_.is_open() ? file_ : std::cin; }

 private:
  std::ifstream file_;
};

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path);
  if (!out) fail(ErrKind::IoError, "cannot write output file " + out_path);
  out << payload;
}

std::vector<std::string> read_caption_stream(std::istream& in) {
  std::vector<std::string> captions;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) captions.push_back(line);
  }
  return captions;
}

std::vector<ParsedCaption> read_parsed_jsonl(std::istream& in, const std::string& name) {
  std::vector<ParsedCaption> parsed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      parsed.push_back(parsed_from_json(njson::parse(line)));
    } catch (const njson::exception& e) {
      fail(ErrKind::FormatError,
           name + " line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
  }
  return parsed;
}

struct CommandContext {
  ToolConfig config;
  Execution exec = Execution::Parallel;
  bool verbose = false;
};

// ---------------------------------------------------------------- parse ----

struct ParseArgs {
  std::string input;
  std::string out;
};

int run_parse(const CommandContext& ctx, const ParseArgs& args) {
  InputSource source(args.input);
  const std::vector<std::string> captions = read_caption_stream(source.stream());
  const Lexicons lex = lexicons_from_config(ctx.config);
  const std::vector<ParsedCaption> parsed = parse_batch(captions, lex, ctx.exec);
  std::string payload;
  for (const ParsedCaption& p : parsed) payload += parsed_to_json(p).dump() + "\n";
  emit(args.out, payload);
  std::cerr << "parsed " << parsed.size() << " captions\n";
  return 0;
}

// ---------------------------------------------------------------- merge ----

struct MergeArgs {
  std::string parsed;
  std::string embeddings;
  std::string format = "jsonl";  // jsonl | binary
  std::string out;
  double beta = 0.0;
  CLI::Option* beta_opt = nullptr;
};

int run_merge(const CommandContext& ctx, const MergeArgs& args) {
  if (args.format != "jsonl" && args.format != "binary") {
    fail(ErrKind::UsageError, "--format must be jsonl or binary");
  }
  InputSource source(args.parsed);
  const std::vector<ParsedCaption> parsed = read_parsed_jsonl(
      source.stream(), args.parsed.empty() ? "standard input" : args.parsed);
  const std::vector<CaptionEmbedding> embeddings = read_embeddings_any(args.embeddings);
  if (parsed.size() != embeddings.size()) {
    fail(ErrKind::DimensionMismatch,
         "parsed caption count (" + std::to_string(parsed.size()) +
             ") does not match embedding record count (" +
             std::to_string(embeddings.size()) + ")");
  }
  std::vector<Matrix> mats;
  mats.reserve(embeddings.size());
  for (const CaptionEmbedding& e : embeddings) mats.push_back(e.embedding);

  BoostConfig boost;
  boost.beta = ctx.config.beta;
  const std::vector<MergedSequence> merged = merge_batch(parsed, mats, boost, ctx.exec);

  if (args.format == "binary") {
    if (args.out.empty()) fail(ErrKind::UsageError, "binary output requires --out");
    std::vector<Matrix> rows;
    rows.reserve(merged.size());
    for (const MergedSequence& m : merged) rows.push_back(m.rows);
    write_emb_file(args.out, rows);
  } else {
    std::string payload;
    for (std::size_t i = 0; i < merged.size(); ++i) {
      payload += merged_to_json(parsed[i].raw, merged[i]).dump() + "\n";
    }
    emit(args.out, payload);
  }
  std::cerr << "merged " << merged.size() << " captions (beta " << ctx.config.beta
            << ")\n";
  return 0;
}

// -------------------------------------------------------- adapter-check ----

struct AdapterCheckArgs {
  int trials = 50;
  std::string placement;
  std::string out;
};

int run_adapter_check(const CommandContext& ctx, const AdapterCheckArgs& args) {
  if (args.trials < 1) fail(ErrKind::UsageError, "--trials must be >= 1");
  const double threshold = 1e-4;
  const double max_err = gradcheck_max_rel_error(ctx.config.seed, args.trials);
  const bool pass = max_err < threshold;

  njson j;
  j["trials"] = args.trials;
  j["max_rel_error"] = max_err;
  j["threshold"] = threshold;
  j["pass"] = pass;
  if (!args.placement.empty()) {
    j["placement"] = njson{{"scheme", args.placement},
                           {"blocks", placement(placement_from_string(args.placement))}};
  }
  emit(args.out, j.dump(2) + "\n");
  std::cerr << "gradient check over " << args.trials << " layers: max relative error "
            << max_err << (pass ? " (pass)\n" : " (FAIL)\n");
  return pass ? 0 : 1;
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string detections;
  std::string queries;
  std::string out;
  bool nms = true;
  int max_dets = 100;
};

int run_eval(const CommandContext& ctx, const EvalArgs& args) {
  const std::vector<Detection> dets = read_detections_jsonl(args.detections);
  const QuerySet queries = read_query_set(args.queries);

  EvalOptions opts;
  opts.iou_thresh = ctx.config.iou_thresh;
  opts.score_thresh = ctx.config.score_thresh;
  opts.protocol = protocol_from_string(ctx.config.protocol);
  opts.run_nms = args.nms;
  opts.max_dets_per_image = args.max_dets;
  opts.exec = ctx.exec;

  const EvalReport report = evaluate(dets, queries, opts);
  emit(args.out, report_to_json(report).dump(2) + "\n");
  std::cerr << report_table(report);
  return 0;
}

// ------------------------------------------------------------------ nms ----

struct NmsArgs {
  std::string detections;
  std::string out;
};

int run_nms_cmd(const CommandContext& ctx, const NmsArgs& args) {
  const std::vector<Detection> dets = read_detections_jsonl(args.detections);
  const std::vector<Detection> kept =
      nms_batch(dets, ctx.config.iou_thresh, ctx.exec);
  std::string payload;
  for (const Detection& det : kept) payload += detection_to_json(det).dump() + "\n";
  emit(args.out, payload);
  std::cerr << "kept " << kept.size() << " of " << dets.size() << " detections (iou "
            << ctx.config.iou_thresh << ")\n";
  return 0;
}

// -------------------------------------------------------- build-dataset ----

struct BuildArgs {
  std::string annotations;
  std::string out;
  std::string mock_fixtures;
  std::string call_log;
};

int run_build_dataset(const CommandContext& ctx, const BuildArgs& args) {
  const std::vector<ImageAnnotation> annotations =
      read_annotations_jsonl(args.annotations);

  std::unique_ptr<ModelClient> client;
  MockModelClient* mock = nullptr;
  if (!args.mock_fixtures.empty()) {
    auto owned = std::make_unique<MockModelClient>(args.mock_fixtures);
    mock = owned.get();
    client = std::move(owned);
  } else {
    client = std::make_unique<HttpModelClient>(ctx.config.endpoint_env,
                                               ctx.config.api_key_env,
                                               ctx.config.request_timeout_s);
  }

  const PipelineConfig pc = pipeline_config(ctx.config, ctx.exec);
  const BuildResult result = build_dataset(*client, *client, annotations, pc);
  write_records_jsonl(args.out, result.records);
  if (!args.call_log.empty()) {
    if (!mock) {
      fail(ErrKind::UsageError, "--call-log needs --mock-fixtures");
    }
    mock->write_call_summary(args.call_log);
  }
  std::cout << dataset_summary(result.records, result.counters, pc.split).dump(2) << "\n";
  std::cerr << "wrote " << result.records.size() << " records to " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- stats ----

struct StatsArgs {
  std::string input;
  std::string out;
};

int run_stats(const CommandContext& ctx, const StatsArgs& args) {
  InputSource source(args.input);
  const std::vector<std::string> captions = read_caption_stream(source.stream());
  const CorpusStats stats =
      corpus_stats(captions, lexicons_from_config(ctx.config), ctx.exec);
  emit(args.out, stats_to_json(stats).dump(2) + "\n");
  std::cerr << "scanned " << stats.caption_count << " captions, " << stats.token_count
            << " tokens, " << stats.cue_token_count << " cue tokens\n";
  return 0;
}

// -------------------------------------------------------------- posthoc ----

struct PosthocArgs {
  std::string detections;
  std::string query;
  std::string mode;
  int k = 10;
  std::string mock_fixtures;
  std::string model;
  std::string out;
};

int run_posthoc(const CommandContext& ctx, const PosthocArgs& args) {
  if (args.mode != "crop" && args.mode != "coordinate") {
    fail(ErrKind::UsageError, "--mode must be crop or coordinate");
  }
  const std::vector<Detection> dets = read_detections_jsonl(args.detections);

  std::unique_ptr<ModelClient> client;
  if (!args.mock_fixtures.empty()) {
    client = std::make_unique<MockModelClient>(args.mock_fixtures);
  } else {
    client = std::make_unique<HttpModelClient>(ctx.config.endpoint_env,
                                               ctx.config.api_key_env,
                                               ctx.config.request_timeout_s);
  }
  const std::string model = args.model.empty() ? ctx.config.vqa_model : args.model;

  const std::vector<Detection> kept =
      args.mode == "crop"
          ? posthoc_crop_verify(*client, model, dets, args.query, args.k)
          : posthoc_coordinate_prompt(*client, model, dets, args.query, args.k);
  std::string payload;
  for (const Detection& det : kept) payload += detection_to_json(det).dump() + "\n";
  emit(args.out, payload);
  std::cerr << args.mode << " filter kept " << kept.size() << " of "
            << std::min<std::size_t>(dets.size(), static_cast<std::size_t>(args.k))
            << " candidate detections\n";
  return 0;
}

// ------------------------------------------------------------- diag-attn ----

struct DiagAttnArgs {
  std::string input;
  std::string out;
};

int run_diag_attn(const CommandContext&, const DiagAttnArgs& args) {
  std::ifstream in(args.input);
  if (!in) fail(ErrKind::IoError, "cannot open attention file " + args.input);
  njson j;
  try {
    in >> j;
  } catch (const njson::exception& e) {
    fail(ErrKind::FormatError, args.input + " is not valid JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("classes") || !j["classes"].is_array() ||
      !j.contains("blocks") || !j["blocks"].is_array()) {
    fail(ErrKind::FormatError, "attention file needs 'classes' and 'blocks' arrays");
  }
  std::vector<WordTag> classes;
  for (const njson& name : j["classes"]) {
    if (!name.is_string()) fail(ErrKind::FormatError, "class names must be strings");
    classes.push_back(word_tag_from_string(name.get<std::string>()));
  }
  std::vector<Matrix> blocks;
  for (const njson& rows : j["blocks"]) blocks.push_back(matrix_from_json_rows(rows));

  const AttentionDiagnostics diag = attention_by_class(blocks, classes);
  emit(args.out, attention_to_json(diag).dump(2) + "\n");
  std::cerr << "aggregated " << blocks.size() << " blocks over " << classes.size()
            << " token classes\n";
  return 0;
}

}  // namespace
}  // namespace negkit

int main(int argc, char** argv) {
  using namespace negkit;

  CLI::App app{"negation-aware grounding toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  bool verbose = false;
  bool serial = false;
  app.add_option("--config", config_path, "JSON config file (flat object)");
  app.add_flag("--verbose", verbose, "echo the effective configuration to stderr");
  app.add_flag("--serial", serial, "disable parallel execution");

  // Options shared through the config precedence chain: flag > file > default.
  ToolConfig flag_values;  // flag storage; merged only where the flag was given

  ParseArgs parse_args;
  auto* parse_cmd = app.add_subcommand("parse", "caption lines -> parsed JSONL");
  parse_cmd->add_option("--input", parse_args.input, "caption file (default: stdin)");
  parse_cmd->add_option("--out", parse_args.out, "output path (default: stdout)");
  auto* parse_cues = parse_cmd->add_option("--cue-lexicon", flag_values.cue_lexicon,
                                           "term file overriding the builtin cues");
  auto* parse_unex = parse_cmd->add_option("--un-exclusions", flag_values.un_exclusions,
                                           "term file overriding the un- exclusions");

  MergeArgs merge_args;
  auto* merge_cmd =
      app.add_subcommand("merge", "parsed captions + embeddings -> phrase rows");
  merge_cmd->add_option("--parsed", merge_args.parsed,
                        "parse-subcommand JSONL (default: stdin)");
  merge_cmd->add_option("--embeddings", merge_args.embeddings,
                        "embedding file, binary or JSONL")
      ->required();
  merge_cmd->add_option("--format", merge_args.format, "output format: jsonl | binary");
  merge_cmd->add_option("--out", merge_args.out, "output path (default: stdout)");
  auto* merge_beta = merge_cmd->add_option("--beta", flag_values.beta,
                                           "cue boost factor (>= 1)");

  AdapterCheckArgs adapter_args;
  auto* adapter_cmd =
      app.add_subcommand("adapter-check", "finite-difference gradient self-test");
  adapter_cmd->add_option("--trials", adapter_args.trials, "random layers to test");
  adapter_cmd->add_option("--placement", adapter_args.placement,
                          "also print the block set: shallow | strided | deep");
  adapter_cmd->add_option("--out", adapter_args.out, "output path (default: stdout)");
  auto* adapter_seed =
      adapter_cmd->add_option("--seed", flag_values.seed, "RNG seed for the suite");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "detections + queries -> metric report");
  eval_cmd->add_option("--detections", eval_args.detections, "detections JSONL")
      ->required();
  eval_cmd->add_option("--queries", eval_args.queries, "query-set JSON")->required();
  eval_cmd->add_option("--out", eval_args.out, "report path (default: stdout)");
  eval_cmd->add_flag("--nms,!--no-nms", eval_args.nms,
                     "also score the suppressed detection set (default on)");
  eval_cmd->add_option("--max-dets", eval_args.max_dets,
                       "per-image detection cap before matching");
  auto* eval_iou =
      eval_cmd->add_option("--iou-thresh", flag_values.iou_thresh, "match threshold");
  auto* eval_score = eval_cmd->add_option("--score-thresh", flag_values.score_thresh,
                                          "absent-object firing threshold");
  auto* eval_protocol = eval_cmd->add_option("--protocol", flag_values.protocol,
                                             "AP protocol: coco | ap50");

  NmsArgs nms_args;
  auto* nms_cmd = app.add_subcommand("nms", "class-ignored suppression");
  nms_cmd->add_option("--detections", nms_args.detections, "detections JSONL")
      ->required();
  nms_cmd->add_option("--out", nms_args.out, "output path (default: stdout)");
  auto* nms_iou =
      nms_cmd->add_option("--iou-thresh", flag_values.iou_thresh, "suppression threshold");

  BuildArgs build_args;
  auto* build_cmd =
      app.add_subcommand("build-dataset", "annotations -> contrastive caption records");
  build_cmd->add_option("--annotations", build_args.annotations, "annotation JSONL")
      ->required();
  build_cmd->add_option("--out", build_args.out, "dataset JSONL path")->required();
  build_cmd->add_option("--mock-fixtures", build_args.mock_fixtures,
                        "serve model responses from this fixture directory");
  build_cmd->add_option("--call-log", build_args.call_log,
                        "write the mock client's sorted call summary here");
  auto* build_split =
      build_cmd->add_option("--split", flag_values.split, "dataset split: S | M | L");
  auto* build_seed = build_cmd->add_option("--seed", flag_values.seed, "base RNG seed");
  auto* build_retry = build_cmd->add_option("--retry-limit", flag_values.retry_limit,
                                            "generation retries per region");
  auto* build_ratio = build_cmd->add_option(
      "--max-area-ratio", flag_values.max_area_ratio, "box/image area eligibility cap");
  auto* build_par = build_cmd->add_option("--parallelism", flag_values.parallelism,
                                          "worker thread count");
  auto* build_gen = build_cmd->add_option("--generator-model", flag_values.generator_model,
                                          "generator model name");
  auto* build_vqa =
      build_cmd->add_option("--vqa-model", flag_values.vqa_model, "VQA model name");

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "caption corpus -> negation statistics");
  stats_cmd->add_option("--input", stats_args.input, "caption file (default: stdin)");
  stats_cmd->add_option("--out", stats_args.out, "output path (default: stdout)");
  auto* stats_cues = stats_cmd->add_option("--cue-lexicon", flag_values.cue_lexicon,
                                           "term file overriding the builtin cues");

  PosthocArgs posthoc_args;
  auto* posthoc_cmd =
      app.add_subcommand("posthoc", "model-assisted detection filtering");
  posthoc_cmd->add_option("--detections", posthoc_args.detections, "detections JSONL")
      ->required();
  posthoc_cmd->add_option("--query", posthoc_args.query, "query text")->required();
  posthoc_cmd->add_option("--mode", posthoc_args.mode, "crop | coordinate")->required();
  posthoc_cmd->add_option("--k", posthoc_args.k, "top-k cut (default 10)");
  posthoc_cmd->add_option("--mock-fixtures", posthoc_args.mock_fixtures,
                          "serve model responses from this fixture directory");
  posthoc_cmd->add_option("--model", posthoc_args.model, "model name for requests");
  posthoc_cmd->add_option("--out", posthoc_args.out, "output path (default: stdout)");

  DiagAttnArgs diag_args;
  auto* diag_cmd =
      app.add_subcommand("diag-attn", "attention mass per word class");
  diag_cmd->add_option("--input", diag_args.input, "attention JSON file")->required();
  diag_cmd->add_option("--out", diag_args.out, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return 2;
  }

  try {
    CommandContext ctx;
    if (!config_path.empty()) ctx.config = load_config_file(config_path);

    // Layer explicitly-given flags over the file/default values.
    auto take_if = [](const CLI::Option* opt, auto& target, const auto& value) {
      if (opt->count() > 0) target = value;
    };
    take_if(parse_cues, ctx.config.cue_lexicon, flag_values.cue_lexicon);
    take_if(parse_unex, ctx.config.un_exclusions, flag_values.un_exclusions);
    take_if(stats_cues, ctx.config.cue_lexicon, flag_values.cue_lexicon);
    take_if(merge_beta, ctx.config.beta, flag_values.beta);
    take_if(adapter_seed, ctx.config.seed, flag_values.seed);
    take_if(eval_iou, ctx.config.iou_thresh, flag_values.iou_thresh);
    take_if(eval_score, ctx.config.score_thresh, flag_values.score_thresh);
    take_if(eval_protocol, ctx.config.protocol, flag_values.protocol);
    take_if(nms_iou, ctx.config.iou_thresh, flag_values.iou_thresh);
    take_if(build_split, ctx.config.split, flag_values.split);
    take_if(build_seed, ctx.config.seed, flag_values.seed);
    take_if(build_retry, ctx.config.retry_limit, flag_values.retry_limit);
    take_if(build_ratio, ctx.config.max_area_ratio, flag_values.max_area_ratio);
    take_if(build_par, ctx.config.parallelism, flag_values.parallelism);
    take_if(build_gen, ctx.config.generator_model, flag_values.generator_model);
    take_if(build_vqa, ctx.config.vqa_model, flag_values.vqa_model);
    validate_config(ctx.config);

    ctx.exec = serial ? Execution::Serial : Execution::Parallel;
    ctx.verbose = verbose;
#ifdef _OPENMP
    if (!serial) omp_set_num_threads(ctx.config.parallelism);
#endif
    if (verbose) {
      std::cerr << "effective config:\n" << config_to_json(ctx.config).dump(2) << "\n";
    }

    if (parse_cmd->parsed()) return run_parse(ctx, parse_args);
    if (merge_cmd->parsed()) return run_merge(ctx, merge_args);
    if (adapter_cmd->parsed()) return run_adapter_check(ctx, adapter_args);
    if (eval_cmd->parsed()) return run_eval(ctx, eval_args);
    if (nms_cmd->parsed()) return run_nms_cmd(ctx, nms_args);
    if (build_cmd->parsed()) return run_build_dataset(ctx, build_args);
    if (stats_cmd->parsed()) return run_stats(ctx, stats_args);
    if (posthoc_cmd->parsed()) return run_posthoc(ctx, posthoc_args);
    if (diag_cmd->parsed()) return run_diag_attn(ctx, diag_args);
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrKind::UsageError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
