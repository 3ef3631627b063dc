#include "synthaudit/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "synthaudit/corpus.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/hashing.hpp"
#include "synthaudit/projection.hpp"
#include "synthaudit/report.hpp"

namespace synthaudit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

const fs::path& require_real(const RunConfig& config) {
  if (!config.paths.real) {
    throw Error(ErrorCode::kConfig, "no real corpus given (--real or paths.real)");
  }
  return *config.paths.real;
}

void require_synthetic(const RunConfig& config) {
  if (config.paths.synthetic.empty()) {
    throw Error(ErrorCode::kConfig,
                "no synthetic corpus given (--synthetic or paths.synthetic)");
  }
}

fs::path yields_path_for(const fs::path& corpus) {
  auto p = corpus;
  p.replace_extension(".yields.json");
  return p;
}

EmbeddingSet subset(const EmbeddingSet& set, const Corpus& corpus, const fs::path& origin) {
  EmbeddingSet result(set.dim(), set.granularity());
  for (const auto& report : corpus.reports()) {
    if (!set.contains(report.id)) {
      throw Error(ErrorCode::kNotFound,
                  fmt::format("{}: no embedding for report {}", origin.string(), report.id));
    }
    if (set.granularity() == Granularity::kText) {
      result.add(report.id, set.vector(report.id));
    } else {
      result.add_tokens(report.id, set.tokens(report.id));
    }
  }
  return result;
}

void merge_into(EmbeddingSet& target, const EmbeddingSet& source) {
  for (const auto& id : source.ids()) {
    if (source.granularity() == Granularity::kText) {
      target.add(id, source.vector(id));
    } else {
      target.add_tokens(id, source.tokens(id));
    }
  }
}

// Loads the embedding file for `corpus_path` when present; otherwise computes
// the set in memory with the configured provider.
EmbeddingSet obtain_embeddings(const RunConfig& config, const fs::path& corpus_path,
                               const Corpus& corpus, Granularity granularity,
                               const EmbeddingProvider& provider,
                               std::vector<fs::path>& inputs) {
  const auto file = granularity == Granularity::kText
                        ? text_embedding_path(config, corpus_path)
                        : token_embedding_path(config, corpus_path);
  if (fs::exists(file)) {
    auto set = load_embeddings(file);
    if (!set.empty() && set.granularity() != granularity) {
      throw Error(ErrorCode::kFormat, file.string() + ": unexpected embedding granularity");
    }
    inputs.push_back(file);
    if (corpus.empty()) return EmbeddingSet(set.dim(), granularity);
    return subset(set, corpus, file);
  }
  if (granularity == Granularity::kToken && !provider.embeds_free_text()) {
    throw Error(ErrorCode::kNotFound,
                fmt::format("{} is missing and provider {} cannot embed tokens",
                            file.string(), provider.describe()));
  }
  spdlog::info("embedding {} in memory ({})", corpus_path.string(), provider.describe());
  return embed_corpus(provider, corpus, granularity, config.tokenizer);
}

void check_dim(const EmbeddingSet& set, std::size_t expected, const fs::path& file,
               const fs::path& reference) {
  if (set.dim() != expected) {
    throw Error(ErrorCode::kDimMismatch,
                fmt::format("{}: dimension {} does not match {} ({})", file.string(),
                            set.dim(), reference.string(), expected));
  }
}

struct SyntheticInputs {
  std::map<std::string, std::vector<ClinicalReport>> by_generator;
  std::map<std::string, std::map<std::string, CodeYield>> yields;
  std::vector<std::pair<fs::path, Corpus>> files;
};

SyntheticInputs load_synthetic(const RunConfig& config, std::vector<fs::path>& inputs) {
  SyntheticInputs result;
  for (const auto& path : config.paths.synthetic) {
    auto corpus = load_corpus(path, Source::kSynthetic);
    inputs.push_back(path);
    std::set<std::string> generators;
    for (const auto& report : corpus.reports()) {
      const auto generator = report.generator.value_or("unknown");
      generators.insert(generator);
      result.by_generator[generator].push_back(report);
    }
    const auto yields_file = yields_path_for(path);
    if (fs::exists(yields_file)) {
      inputs.push_back(yields_file);
      const auto yields = yields_from_json(read_json(yields_file));
      for (const auto& generator : generators) {
        auto& target = result.yields[generator];
        target.insert(yields.begin(), yields.end());
      }
    }
    result.files.emplace_back(path, std::move(corpus));
  }
  return result;
}

// ---- subcommands ----

struct IngestOptions {
  std::string path;
  std::string source = "real";
};

void cmd_ingest(const RunConfig& config, const IngestOptions& options, std::ostream& out) {
  fs::path input = options.path.empty() ? require_real(config) : fs::path(options.path);
  const auto source = parse_source(options.source);
  const auto corpus = load_corpus(input, source);
  const auto stats = corpus_stats(corpus);

  const auto name = source == Source::kReal ? std::string("real") : input.stem().string();
  const auto corpus_out = config.paths.out / (name + ".jsonl");
  const auto stats_out = config.paths.out / (name + ".stats.json");
  fs::create_directories(config.paths.out);
  const auto serialized = serialize_corpus(corpus);
  ordered_json stats_doc;
  stats_doc["report_count"] = stats.report_count;
  stats_doc["mean_chars"] = stats.mean_chars;
  stats_doc["min_chars"] = stats.min_chars;
  stats_doc["max_chars"] = stats.max_chars;
  stats_doc["code_count"] = stats.code_histogram.size();
  stats_doc["code_histogram"] = stats.code_histogram;
  // Input may be the output itself when re-normalizing in place.
  const auto input_hash = sha256_file(input);
  write_text(corpus_out, serialized);
  write_text(stats_out, stats_doc.dump(2) + "\n");

  out << fmt::format("ingested {} reports ({} codes, mean {:.1f} chars) -> {}\n",
                     stats.report_count, stats.code_histogram.size(), stats.mean_chars,
                     corpus_out.string());
  Manifest manifest{"ingest", config, {}, {corpus_out, stats_out}};
  auto doc = manifest_json(manifest);
  doc["inputs"] = ordered_json{{input.generic_string(), input_hash}};
  write_text(config.paths.out / "manifest_ingest.json", doc.dump(2) + "\n");
}

void cmd_generate(const RunConfig& config, const ChatTransport& transport,
                  std::ostream& out) {
  config.generation.validate();
  const auto& real_path = require_real(config);
  if (!config.paths.code_names) {
    throw Error(ErrorCode::kConfig, "generation needs a code-name catalog (paths.code_names)");
  }
  std::vector<fs::path> inputs{real_path, *config.paths.code_names};
  const auto real = load_corpus(real_path, Source::kReal);
  const auto names = load_code_names(*config.paths.code_names);
  auto templates = PromptTemplateSet::defaults();
  if (config.paths.templates) {
    templates = load_templates(*config.paths.templates);
    inputs.push_back(*config.paths.templates);
  }

  const auto result = run_pipeline(config.generation, templates, real, names, transport);
  const auto stem = "synthetic_" + sanitize_name(config.generation.model);
  const auto corpus_out = config.paths.out / (stem + ".jsonl");
  const auto yields_out = config.paths.out / (stem + ".yields.json");
  fs::create_directories(config.paths.out);
  save_corpus(result.synthetic, corpus_out);
  write_text(yields_out, yields_to_json(result.yields).dump(2) + "\n");

  std::size_t failed = 0;
  for (const auto& [code, yield] : result.yields) failed += yield.failure ? 1 : 0;
  out << fmt::format("generated {} reports for {} codes ({} failed) -> {}\n",
                     result.synthetic.size(), result.yields.size(), failed,
                     corpus_out.string());
  write_manifest({"generate", config, inputs, {corpus_out, yields_out}});
}

void cmd_embed(const RunConfig& config, const std::vector<std::string>& corpora,
               std::ostream& out) {
  std::vector<fs::path> targets(corpora.begin(), corpora.end());
  if (targets.empty()) {
    if (config.paths.real) targets.push_back(*config.paths.real);
    targets.insert(targets.end(), config.paths.synthetic.begin(), config.paths.synthetic.end());
  }
  if (targets.empty()) throw Error(ErrorCode::kConfig, "no corpus to embed");
  const auto provider = make_provider(config.embedding, config.tokenizer);

  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  for (const auto& path : targets) {
    const auto corpus = load_corpus(path);
    inputs.push_back(path);
    const auto text = embed_corpus(*provider, corpus, Granularity::kText, config.tokenizer);
    const auto text_out = text_embedding_path(config, path);
    fs::create_directories(text_out.parent_path());
    save_embeddings(text, text_out);
    outputs.push_back(text_out);
    std::string token_note = "no token set";
    if (provider->embeds_free_text()) {
      const auto tokens =
          embed_corpus(*provider, corpus, Granularity::kToken, config.tokenizer);
      const auto tokens_out = token_embedding_path(config, path);
      save_embeddings(tokens, tokens_out);
      outputs.push_back(tokens_out);
      token_note = tokens_out.string();
    }
    out << fmt::format("embedded {} reports (dim {}) -> {}, {}\n", corpus.size(),
                       text.dim(), text_out.string(), token_note);
  }
  if (config.embedding.kind == EmbeddingProviderConfig::Kind::kFile) {
    inputs.push_back(config.embedding.path);
  }
  write_manifest({"embed", config, inputs, outputs});
}

void cmd_evaluate(const RunConfig& config, std::ostream& out) {
  const auto& real_path = require_real(config);
  require_synthetic(config);
  std::vector<fs::path> inputs{real_path};
  const auto real = load_corpus(real_path, Source::kReal);
  const auto synthetic = load_synthetic(config, inputs);

  const auto provider = make_provider(config.embedding, config.tokenizer);
  if (!provider->embeds_free_text()) {
    throw Error(ErrorCode::kConfig,
                "sentence and token embeddings need a hash or http embedding provider");
  }

  const auto real_text_file = text_embedding_path(config, real_path);
  const auto real_token_file = token_embedding_path(config, real_path);
  const auto real_text =
      obtain_embeddings(config, real_path, real, Granularity::kText, *provider, inputs);
  const auto real_tokens =
      obtain_embeddings(config, real_path, real, Granularity::kToken, *provider, inputs);

  EmbeddingSet synthetic_text(real_text.dim(), Granularity::kText);
  EmbeddingSet synthetic_tokens(real_tokens.dim(), Granularity::kToken);
  for (const auto& [path, corpus] : synthetic.files) {
    const auto text = obtain_embeddings(config, path, corpus, Granularity::kText,
                                        *provider, inputs);
    check_dim(text, real_text.dim(), text_embedding_path(config, path), real_text_file);
    merge_into(synthetic_text, text);
    const auto tokens = obtain_embeddings(config, path, corpus, Granularity::kToken,
                                          *provider, inputs);
    check_dim(tokens, real_tokens.dim(), token_embedding_path(config, path),
              real_token_file);
    merge_into(synthetic_tokens, tokens);
  }

  FidelityConfig fidelity_config;
  fidelity_config.pairing = config.pairing;
  fidelity_config.kernel = config.kernel;
  fidelity_config.tokenizer = config.tokenizer;
  fidelity_config.sms = config.sms;
  fidelity_config.few_shot_m = config.generation.m;
  fidelity_config.few_shot_seed = config.generation.seed;
  fidelity_config.threads = config.threads;

  fs::create_directories(config.paths.out);
  std::map<std::string, MetricValues> scores;
  std::map<std::string, GeneratorAnnex> annexes;
  ReportMetadata metadata;
  metadata.real_count = real.size();
  metadata.config_fingerprint = config_fingerprint(config);
  metadata.created_at = run_timestamp();
  std::vector<fs::path> outputs;

  for (const auto& [generator, reports] : synthetic.by_generator) {
    const Corpus corpus(reports);
    metadata.synthetic_counts[generator] = corpus.size();
    const auto text = subset(synthetic_text, corpus, "synthetic text embeddings");
    const auto tokens = subset(synthetic_tokens, corpus, "synthetic token embeddings");

    const FidelityInputs fidelity_inputs{corpus, real, text, real_text,
                                         tokens, real_tokens, *provider};
    const auto fidelity = corpus_fidelity(fidelity_inputs, fidelity_config);
    const auto diversity = diversity_scores(corpus, config.diversity, config.tokenizer);
    const auto privacy = privacy_scores(nnd(text, real_text, config.threads), config.privacy);
    scores[generator] = collect_metrics(fidelity, diversity, privacy);

    GeneratorAnnex annex;
    annex.bertscore_precision = fidelity.bertscore_p;
    annex.bertscore_recall = fidelity.bertscore_r;
    annex.flagged = privacy.flagged;
    annex.top_ngrams = diversity.top_ngrams;
    if (const auto it = synthetic.yields.find(generator); it != synthetic.yields.end()) {
      annex.yields = it->second;
    }
    annexes[generator] = std::move(annex);

    const auto name = sanitize_name(generator);
    const auto audit_out = config.paths.out / ("plagiarism_" + name + ".tsv");
    const auto ngrams_out = config.paths.out / ("top_ngrams_" + name + ".tsv");
    write_text(audit_out, audit_tsv(privacy, corpus, real));
    write_text(ngrams_out, ngrams_to_tsv(diversity.top_ngrams));
    outputs.push_back(audit_out);
    outputs.push_back(ngrams_out);
    out << fmt::format("{}: mmd {:.4f}, bertscore f1 {:.4f}, self-bleu {:.4f}, "
                       "mean nnd {:.4f}, plagiarism {:.4f}\n",
                       generator, fidelity.mmd, fidelity.bertscore_f1,
                       diversity.self_bleu, privacy.mean_nnd, privacy.plagiarism_rate);
  }

  const auto report = build_report(scores, metadata, annexes);
  const auto evaluation_out = config.paths.out / "evaluation.json";
  render_structured(report, evaluation_out);
  outputs.insert(outputs.begin(), evaluation_out);
  write_manifest({"evaluate", config, inputs, outputs});
}

void cmd_project(const RunConfig& config, bool svg, std::ostream& out) {
  const auto& real_path = require_real(config);
  std::vector<fs::path> inputs{real_path};
  const auto real = load_corpus(real_path, Source::kReal);
  const auto provider = make_provider(config.embedding, config.tokenizer);
  auto pooled = obtain_embeddings(config, real_path, real, Granularity::kText, *provider, inputs);
  const auto real_text_file = text_embedding_path(config, real_path);

  std::vector<Corpus> synthetic;
  for (const auto& path : config.paths.synthetic) {
    synthetic.push_back(load_corpus(path, Source::kSynthetic));
    inputs.push_back(path);
    const auto text = obtain_embeddings(config, path, synthetic.back(), Granularity::kText,
                                        *provider, inputs);
    check_dim(text, pooled.dim(), text_embedding_path(config, path), real_text_file);
    merge_into(pooled, text);
  }

  std::vector<const ClinicalReport*> reports;
  for (const auto& report : real.reports()) reports.push_back(&report);
  for (const auto& corpus : synthetic) {
    for (const auto& report : corpus.reports()) reports.push_back(&report);
  }
  TsneResult details;
  const auto points = project_reports(reports, pooled, config.tsne, &details);

  const auto tsv_out = config.paths.out / "projection.tsv";
  std::optional<fs::path> svg_out;
  if (svg) svg_out = config.paths.out / "projection.svg";
  fs::create_directories(config.paths.out);
  export_scatter(points, tsv_out, svg_out);
  out << fmt::format("projected {} points (perplexity {:.3f}, KL {:.4f} -> {:.4f}) -> {}\n",
                     points.size(), details.perplexity, details.initial_kl,
                     details.final_kl, tsv_out.string());
  std::vector<fs::path> outputs{tsv_out};
  if (svg_out) outputs.push_back(*svg_out);
  write_manifest({"project", config, inputs, outputs});
}

void cmd_report(const RunConfig& config, const std::string& evaluation, bool print,
                std::ostream& out) {
  const fs::path input =
      evaluation.empty() ? config.paths.out / "evaluation.json" : fs::path(evaluation);
  const auto report = load_structured(input);
  const auto markdown = render_markdown(report);
  const auto md_out = config.paths.out / "report.md";
  const auto json_out = config.paths.out / "report.json";
  write_text(md_out, markdown);
  render_structured(report, json_out);
  if (print) {
    out << markdown;
  } else {
    out << fmt::format("report for {} generator(s) -> {}\n", report.rows.size(),
                       md_out.string());
  }
  write_manifest({"report", config, {input}, {md_out, json_out}});
}

std::shared_ptr<spdlog::logger> cli_logger() {
  if (auto existing = spdlog::get("synthaudit")) return existing;
  auto logger = spdlog::stderr_color_mt("synthaudit");
  logger->set_pattern("[%l] %v");
  return logger;
}

std::string single_line(std::string text) {
  for (auto& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

}  // namespace

std::string run_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch) {
    try {
      now = static_cast<std::time_t>(std::stoll(epoch));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "SOURCE_DATE_EPOCH is not an integer");
    }
  }
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

std::string sanitize_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    out.push_back(safe ? c : '_');
  }
  return out.empty() ? "_" : out;
}

fs::path text_embedding_path(const RunConfig& config, const fs::path& corpus) {
  return config.embeddings_dir() / (corpus.stem().string() + ".text.emb.jsonl");
}

fs::path token_embedding_path(const RunConfig& config, const fs::path& corpus) {
  return config.embeddings_dir() / (corpus.stem().string() + ".tokens.emb.jsonl");
}

ordered_json manifest_json(const Manifest& manifest) {
  ordered_json doc;
  doc["tool"] = "synthaudit";
  doc["version"] = kToolVersion;
  doc["command"] = manifest.command;
  doc["created_at"] = run_timestamp();
  doc["config_fingerprint"] = config_fingerprint(manifest.config);
  doc["config"] = config_to_json(manifest.config);
  doc["seeds"] = {{"generation", manifest.config.generation.seed},
                  {"embedding", manifest.config.embedding.seed},
                  {"tsne", manifest.config.tsne.seed}};
  ordered_json inputs = ordered_json::object();
  for (const auto& path : manifest.inputs) inputs[path.generic_string()] = sha256_file(path);
  doc["inputs"] = std::move(inputs);
  ordered_json outputs = ordered_json::object();
  for (const auto& path : manifest.outputs) outputs[path.generic_string()] = sha256_file(path);
  doc["outputs"] = std::move(outputs);
  return doc;
}

fs::path write_manifest(const Manifest& manifest) {
  const auto path = manifest.config.paths.out / ("manifest_" + manifest.command + ".json");
  write_text(path, manifest_json(manifest).dump(2) + "\n");
  return path;
}

int run_cli(const std::vector<std::string>& args, const CliContext& context) {
  CLI::App app{"Generate synthetic clinical-style reports and audit them against a real corpus",
               "synthaudit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::optional<std::string> config_file;
  ConfigOverrides overrides;
  std::vector<std::string> synthetic;
  std::optional<std::string> real, out_dir;
  bool quiet = false;
  bool verbose = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON run configuration");
    cmd->add_option("--real", real, "Real corpus (JSONL)");
    cmd->add_option("--synthetic", synthetic, "Synthetic corpus (JSONL), repeatable");
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", overrides.seed, "Seed for example sampling and t-SNE");
    cmd->add_option("--model", overrides.model, "Generator model name");
    cmd->add_option("--base-url", overrides.base_url, "Chat endpoint base URL");
    cmd->add_option("--threshold", overrides.threshold, "Plagiarism distance threshold");
    cmd->add_option("--pairing", overrides.pairing, "Reference pool")
        ->check(CLI::IsMember({"same-code", "few-shot", "all"}));
    cmd->add_option("--ttr-mode", overrides.ttr_mode, "TTR aggregation")
        ->check(CLI::IsMember({"per-doc", "corpus"}));
    cmd->add_flag("-q,--quiet", quiet, "Only log warnings and errors");
    cmd->add_flag("-v,--verbose", verbose, "Debug logging");
  };

  IngestOptions ingest_options;
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a corpus");
  add_common(ingest);
  ingest->add_option("path", ingest_options.path, "Corpus to ingest (defaults to --real)");
  ingest->add_option("--source", ingest_options.source, "Expected source")
      ->check(CLI::IsMember({"real", "synthetic"}));

  auto* generate = app.add_subcommand("generate", "Generate synthetic reports per code");
  add_common(generate);

  std::vector<std::string> embed_targets;
  auto* embed = app.add_subcommand("embed", "Write embedding files for corpora");
  add_common(embed);
  embed->add_option("corpora", embed_targets, "Corpora to embed (defaults to configured)");

  auto* evaluate = app.add_subcommand("evaluate", "Score synthetic corpora");
  add_common(evaluate);

  bool svg = false;
  auto* project = app.add_subcommand("project", "2D t-SNE projection of embeddings");
  add_common(project);
  project->add_flag("--svg", svg, "Also write an SVG scatter plot");

  std::string evaluation;
  bool print = false;
  auto* report = app.add_subcommand("report", "Render the comparison report");
  add_common(report);
  report->add_option("--evaluation", evaluation, "Evaluation file (defaults to out)");
  report->add_flag("--print", print, "Print the markdown report to stdout");

  std::vector<std::string> reversed(args.size() > 0 ? args.begin() + 1 : args.begin(),
                                    args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    context.out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    context.out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    context.out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    context.err << "synthaudit: error[usage]: " << single_line(e.what()) << "\n";
    return 2;
  }
  auto logger = cli_logger();
  logger->set_level(quiet ? spdlog::level::warn
                          : verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_default_logger(logger);

  try {
    if (real) overrides.real = *real;
    if (out_dir) overrides.out = *out_dir;
    for (const auto& s : synthetic) overrides.synthetic.emplace_back(s);
    std::optional<fs::path> file;
    if (config_file) file = *config_file;
    const auto config = resolve_config(file, overrides);
    config.validate();

    if (ingest->parsed()) cmd_ingest(config, ingest_options, context.out);
    else if (generate->parsed()) cmd_generate(config, context.transport, context.out);
    else if (embed->parsed()) cmd_embed(config, embed_targets, context.out);
    else if (evaluate->parsed()) cmd_evaluate(config, context.out);
    else if (project->parsed()) cmd_project(config, svg, context.out);
    else if (report->parsed()) cmd_report(config, evaluation, print, context.out);
    return 0;
  } catch (const Error& e) {
    context.err << "synthaudit: error[" << error_code_name(e.code())
                << "]: " << single_line(e.what()) << "\n";
  } catch (const fs::filesystem_error& e) {
    context.err << "synthaudit: error[io]: " << single_line(e.what()) << "\n";
  } catch (const std::exception& e) {
    context.err << "synthaudit: error[internal]: " << single_line(e.what()) << "\n";
  }
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, CliContext{std::cout, std::cerr});
}

}  // namespace synthaudit
