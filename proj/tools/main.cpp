// dreb — debiased relation-extraction benchmark construction and debiased
// training, end to end: synthetic corpus generation, entity-bias evaluator
// training, benchmark building, classifier training, evaluation, and
// analysis reports.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dreb/bias_eval.hpp"
#include "dreb/builder.hpp"
#include "dreb/io.hpp"
#include "dreb/lm.hpp"
#include "dreb/manifest.hpp"
#include "dreb/metrics.hpp"
#include "dreb/reports.hpp"
#include "dreb/synthetic.hpp"
#include "dreb/train.hpp"
#include "dreb/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;

std::uint64_t env_seed() {
  const char* v = std::getenv("DREB_SEED");
  return v == nullptr ? 0 : std::strtoull(v, nullptr, 10);
}

std::size_t env_workers() {
  const char* v = std::getenv("DREB_WORKERS");
  return v == nullptr ? 1 : std::max<std::size_t>(1, std::strtoull(v, nullptr, 10));
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

fs::path manifest_path_for(const fs::path& out) {
  if (fs::is_directory(out)) return out / "manifest.json";
  fs::path p = out;
  p += ".manifest.json";
  return p;
}

void write_json_file(const json& doc, const fs::path& path, int indent = 2) {
  std::ofstream out(path);
  if (!out) {
    throw dreb::Error("cannot open '" + path.string() + "' for writing");
  }
  out << doc.dump(indent) << "\n";
}

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw dreb::Error("cannot open '" + path.string() + "' for reading");
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw dreb::ParseError(path.string() + ": invalid json");
  }
  return doc;
}

// Build-or-load of the language model shared by score-ppl and
// build-benchmark.
struct LmOptions {
  std::string kind = "ngram";
  std::string train_file;
  std::string counts_file;
  std::string url;
  std::string save_counts;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--lm", kind, "language model backend")
        ->check(CLI::IsMember({"ngram", "external"}))
        ->capture_default_str();
    cmd->add_option("--lm-train", train_file,
                    "dataset used to fit the built-in n-gram model");
    cmd->add_option("--lm-counts", counts_file, "pre-fitted n-gram counts file");
    cmd->add_option("--lm-url", url, "base url of an external model endpoint");
    cmd->add_option("--save-counts", save_counts,
                    "write the fitted n-gram counts to this file");
  }

  std::unique_ptr<dreb::LanguageModel> build(const dreb::Dataset* fallback_corpus,
                                             std::vector<fs::path>& inputs) const {
    if (kind == "external") {
      if (url.empty()) {
        throw dreb::ConfigError("--lm external requires --lm-url");
      }
      return std::make_unique<dreb::RemoteLm>(url);
    }
    if (!counts_file.empty()) {
      inputs.push_back(counts_file);
      return std::make_unique<dreb::NgramLm>(dreb::NgramLm::load_counts(counts_file));
    }
    auto lm = std::make_unique<dreb::NgramLm>(3);
    const dreb::Dataset* corpus = fallback_corpus;
    dreb::Dataset loaded;
    if (!train_file.empty()) {
      inputs.push_back(train_file);
      loaded = dreb::load_dataset(train_file, dreb::DatasetFormat::Jsonl);
      corpus = &loaded;
    }
    if (corpus == nullptr) {
      throw dreb::ConfigError("n-gram model needs --lm-train or --lm-counts");
    }
    std::vector<dreb::TokenList> sentences;
    sentences.reserve(corpus->size());
    for (const auto& s : corpus->samples) sentences.push_back(s.tokens);
    lm->fit(sentences);
    if (!save_counts.empty()) {
      lm->save_counts(save_counts);
    }
    return lm;
  }
};

// ---------------------------------------------------------------------------
// gen-synthetic
// ---------------------------------------------------------------------------

int cmd_gen_synthetic(const std::string& spec_file, const std::string& out_dir) {
  Stopwatch timer;
  dreb::GeneratorSpec spec = dreb::GeneratorSpec::from_json_file(spec_file);
  dreb::GeneratedCorpus corpus = dreb::generate(spec);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  dreb::save_dataset(corpus.train, out / "train.jsonl", dreb::DatasetFormat::Jsonl);
  dreb::save_dataset(corpus.dev, out / "dev.jsonl", dreb::DatasetFormat::Jsonl);
  dreb::save_dataset(corpus.test_biased, out / "test_biased.jsonl",
                     dreb::DatasetFormat::Jsonl);
  dreb::save_dataset(corpus.test_debiased, out / "test_debiased.jsonl",
                     dreb::DatasetFormat::Jsonl);
  dreb::save_pool_records(corpus.pool, out / "pool.jsonl");

  dreb::RunManifest m;
  m.command = "gen-synthetic";
  m.seed = spec.seed;
  m.resolved_config = {{"spec", spec_file},
                       {"n_labels", spec.n_labels},
                       {"n_entities_per_type", spec.n_entities_per_type},
                       {"templates_per_label", spec.templates_per_label},
                       {"bias_rate", spec.bias_rate},
                       {"train_size", spec.train_size},
                       {"dev_size", spec.dev_size},
                       {"test_size", spec.test_size},
                       {"seed", spec.seed},
                       {"out", out_dir}};
  m.inputs = {spec_file};
  m.outputs = {out / "train.jsonl", out / "dev.jsonl", out / "test_biased.jsonl",
               out / "test_debiased.jsonl", out / "pool.jsonl"};
  m.wall_clock_seconds = timer.seconds();
  m.write(manifest_path_for(out));

  std::cout << "wrote 4 splits + pool to " << out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train-bias-eval
// ---------------------------------------------------------------------------

int cmd_train_bias_eval(const std::string& train_file, const std::string& format,
                        const std::string& out_file, dreb::BiasEvalConfig cfg) {
  Stopwatch timer;
  dreb::Dataset train =
      dreb::load_dataset(train_file, dreb::format_from_name(format));
  dreb::Dataset d_bias = dreb::build_entity_bias_dataset(train);
  dreb::BiasEvaluator ev = dreb::BiasEvaluator::train(d_bias, cfg);
  ev.save(out_file);

  dreb::RunManifest m;
  m.command = "train-bias-eval";
  m.seed = cfg.seed;
  m.resolved_config = {{"train", train_file}, {"format", format},
                       {"out", out_file},     {"seed", cfg.seed},
                       {"epochs", cfg.epochs}, {"embed_dim", cfg.embed_dim},
                       {"lr", cfg.lr}};
  m.inputs = {train_file};
  m.outputs = {out_file};
  m.wall_clock_seconds = timer.seconds();
  m.write(manifest_path_for(fs::path(out_file)));

  std::cout << "bias evaluator held-out accuracy: " << ev.heldout_accuracy() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// score-ppl
// ---------------------------------------------------------------------------

int cmd_score_ppl(const std::string& in_file, const std::string& out_file,
                  const LmOptions& lm_opts) {
  Stopwatch timer;
  dreb::Dataset data = dreb::load_dataset(in_file, dreb::DatasetFormat::Jsonl);
  std::vector<fs::path> inputs{in_file};
  std::unique_ptr<dreb::LanguageModel> lm = lm_opts.build(&data, inputs);

  std::ofstream out(out_file);
  if (!out) {
    throw dreb::Error("cannot open '" + out_file + "' for writing");
  }
  for (const auto& s : data.samples) {
    json rec;
    rec["id"] = s.id;
    rec["log_ppl"] = dreb::log_ppl(*lm, s.tokens);
    out << rec.dump() << "\n";
  }
  out.close();

  dreb::RunManifest m;
  m.command = "score-ppl";
  m.resolved_config = {{"in", in_file},
                       {"out", out_file},
                       {"lm", lm_opts.kind},
                       {"lm_train", lm_opts.train_file},
                       {"lm_counts", lm_opts.counts_file}};
  m.inputs = std::move(inputs);
  m.outputs = {out_file};
  if (!lm_opts.save_counts.empty()) m.outputs.push_back(lm_opts.save_counts);
  m.wall_clock_seconds = timer.seconds();
  m.write(manifest_path_for(fs::path(out_file)));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// build-benchmark
// ---------------------------------------------------------------------------

int cmd_build_benchmark(const std::string& test_file, const std::string& pool_file,
                        const std::string& bias_eval_file,
                        const std::string& type_map_file, const std::string& out_dir,
                        dreb::BuildPolicy policy, const LmOptions& lm_opts,
                        std::size_t workers) {
  Stopwatch timer;
  dreb::Dataset test = dreb::load_dataset(test_file, dreb::DatasetFormat::Jsonl);

  std::map<std::string, std::string> type_map;
  if (!type_map_file.empty()) {
    type_map = dreb::load_type_map(type_map_file);
  }
  dreb::EntityDict pool = dreb::EntityDict::from_pool_records(
      dreb::load_pool_records(pool_file),
      type_map_file.empty() ? nullptr : &type_map);

  dreb::BiasEvaluator bias_ev = dreb::BiasEvaluator::load(bias_eval_file);

  std::vector<fs::path> inputs{test_file, pool_file, bias_eval_file};
  if (!type_map_file.empty()) inputs.push_back(type_map_file);
  std::unique_ptr<dreb::LanguageModel> lm = lm_opts.build(&test, inputs);

  auto [benchmark, report] =
      dreb::build_benchmark(test, pool, bias_ev, *lm, policy, workers);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  dreb::save_dataset(benchmark, out / "benchmark.jsonl", dreb::DatasetFormat::Jsonl);
  report.save(out / "build_report.json");

  dreb::RunManifest m;
  m.command = "build-benchmark";
  m.seed = policy.seed;
  m.resolved_config = {{"test", test_file},
                       {"pool", pool_file},
                       {"bias_eval", bias_eval_file},
                       {"type_map", type_map_file},
                       {"lm", lm_opts.kind},
                       {"k", policy.k},
                       {"top_m", policy.effective_top_m()},
                       {"seed", policy.seed},
                       {"fail_policy", dreb::fail_policy_name(policy.fail_policy)},
                       {"distinct", policy.distinct},
                       {"workers", workers},
                       {"out", out_dir}};
  m.inputs = std::move(inputs);
  m.outputs = {out / "benchmark.jsonl", out / "build_report.json"};
  m.wall_clock_seconds = timer.seconds();
  m.write(manifest_path_for(out));

  std::cout << "benchmark size " << benchmark.size() << ", mean bias "
            << report.mean_bias_original << " -> " << report.mean_bias_chosen
            << ", histogram preserved: "
            << (report.histogram_preserved ? "yes" : "no") << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainCliConfig {
  std::string train_file;
  std::string dev_file;
  std::string out_dir = "run";
  std::string bias_eval_file;
  dreb::LossConfig loss;
  dreb::RunConfig run;

  json resolved() const {
    return {{"train", train_file},
            {"dev", dev_file},
            {"out", out_dir},
            {"bias_eval", bias_eval_file},
            {"loss", dreb::loss_name(loss.kind)},
            {"lambda", loss.debias.lambda},
            {"beta", loss.debias.beta},
            {"focal_gamma", loss.debias.focal_gamma},
            {"rdrop_weight", loss.debias.rdrop_weight},
            {"core_strength", loss.debias.core_strength},
            {"clamp_bias", loss.debias.clamp_bias},
            {"seed", run.seed},
            {"epochs", run.epochs},
            {"batch_size", run.batch_size},
            {"lr", run.lr},
            {"embed_dim", run.model.embed_dim},
            {"hidden_dim", run.model.hidden_dim},
            {"dropout", run.model.dropout}};
  }
};

void apply_config_file(TrainCliConfig& c, const json& doc) {
  c.train_file = doc.value("train", c.train_file);
  c.dev_file = doc.value("dev", c.dev_file);
  c.out_dir = doc.value("out", c.out_dir);
  c.bias_eval_file = doc.value("bias_eval", c.bias_eval_file);
  if (doc.contains("loss")) c.loss.kind = dreb::loss_from_name(doc["loss"]);
  c.loss.debias.lambda = doc.value("lambda", c.loss.debias.lambda);
  c.loss.debias.beta = doc.value("beta", c.loss.debias.beta);
  c.loss.debias.focal_gamma = doc.value("focal_gamma", c.loss.debias.focal_gamma);
  c.loss.debias.rdrop_weight = doc.value("rdrop_weight", c.loss.debias.rdrop_weight);
  c.loss.debias.core_strength = doc.value("core_strength", c.loss.debias.core_strength);
  c.loss.debias.clamp_bias = doc.value("clamp_bias", c.loss.debias.clamp_bias);
  c.run.seed = doc.value("seed", c.run.seed);
  c.run.epochs = doc.value("epochs", c.run.epochs);
  c.run.batch_size = doc.value("batch_size", c.run.batch_size);
  c.run.lr = doc.value("lr", c.run.lr);
  c.run.model.embed_dim = doc.value("embed_dim", c.run.model.embed_dim);
  c.run.model.hidden_dim = doc.value("hidden_dim", c.run.model.hidden_dim);
  c.run.model.dropout = doc.value("dropout", c.run.model.dropout);
}

int cmd_train(const TrainCliConfig& c) {
  Stopwatch timer;
  if (c.train_file.empty() || c.dev_file.empty()) {
    throw dreb::ConfigError("train requires 'train' and 'dev' dataset paths");
  }
  dreb::Dataset train_ds = dreb::load_dataset(c.train_file, dreb::DatasetFormat::Jsonl);
  dreb::Dataset dev_ds = dreb::load_dataset(c.dev_file, dreb::DatasetFormat::Jsonl);

  std::vector<fs::path> inputs{c.train_file, c.dev_file};

  std::optional<dreb::EntityDict> dict;
  if (c.loss.needs_augmentation()) {
    // Train-time augmentation draws from the train split only; pulling in
    // external surfaces here would plant new lexical bias.
    dict = dreb::EntityDict::from_dataset(train_ds);
  }

  std::optional<dreb::BiasEvaluator> bias_model;
  if (c.loss.needs_bias_model()) {
    if (!c.bias_eval_file.empty()) {
      inputs.push_back(c.bias_eval_file);
      bias_model = dreb::BiasEvaluator::load(c.bias_eval_file);
    } else {
      dreb::BiasEvalConfig bcfg;
      bcfg.seed = c.run.seed;
      bias_model = dreb::BiasEvaluator::train(dreb::build_entity_bias_dataset(train_ds),
                                              bcfg);
    }
  }

  dreb::RunConfig run_cfg = c.run;
  if (c.loss.needs_dropout() && run_cfg.model.dropout <= 0.0) {
    run_cfg.model.dropout = 0.1;
  }

  dreb::TrainResult result =
      dreb::train(train_ds, dev_ds, dict ? &*dict : nullptr,
                  bias_model ? &*bias_model : nullptr, c.loss, run_cfg);

  fs::create_directories(c.out_dir);
  const fs::path out(c.out_dir);
  result.model.save(out / "model.json");
  json run_doc = result.run.to_json();
  run_doc["config"] = c.resolved();
  write_json_file(run_doc, out / "train_run.json");

  dreb::RunManifest m;
  m.command = "train";
  m.seed = c.run.seed;
  m.resolved_config = c.resolved();
  m.inputs = std::move(inputs);
  m.outputs = {out / "model.json", out / "train_run.json"};
  m.wall_clock_seconds = timer.seconds();
  m.write(manifest_path_for(out));

  std::cout << "best dev F1 " << result.run.best_dev_f1 << " at epoch "
            << result.run.best_epoch << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int cmd_evaluate(const std::string& model_file, const std::string& test_file,
                 const std::string& dreb_file, const std::string& baseline_file,
                 const std::string& out_file, double alpha, bool include_negative,
                 double core_strength, const std::string& core_dev_file) {
  Stopwatch timer;
  dreb::RelationClassifier model = dreb::RelationClassifier::load(model_file);
  dreb::Dataset test = dreb::load_dataset(test_file, dreb::DatasetFormat::Jsonl);

  dreb::EvalConfig eval_cfg;
  eval_cfg.bme_alpha = alpha;
  eval_cfg.exclude_negative_from_f1 = !include_negative;
  eval_cfg.validate();

  std::vector<fs::path> inputs{model_file, test_file};

  if (!core_dev_file.empty()) {
    inputs.push_back(core_dev_file);
    dreb::Dataset core_dev =
        dreb::load_dataset(core_dev_file, dreb::DatasetFormat::Jsonl);
    core_strength = dreb::select_core_strength(
        model, core_dev, {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0},
        eval_cfg.exclude_negative_from_f1);
  }

  auto score = [&](const dreb::Dataset& d) {
    return dreb::micro_f1(dreb::predict_all(model, d, core_strength),
                          dreb::gold_labels(d), model.schema(),
                          eval_cfg.exclude_negative_from_f1);
  };

  json doc;
  const double f1_origin = score(test);
  doc["f1_origin"] = f1_origin;
  doc["core_strength"] = core_strength;

  double f1_dreb = 0.0;
  if (!dreb_file.empty()) {
    inputs.push_back(dreb_file);
    dreb::Dataset dreb_ds = dreb::load_dataset(dreb_file, dreb::DatasetFormat::Jsonl);
    f1_dreb = score(dreb_ds);
    doc["f1_dreb"] = f1_dreb;
  }

  if (!baseline_file.empty()) {
    inputs.push_back(baseline_file);
    json base = load_json_file(baseline_file);
    doc["bme"] = dreb::bme(base.at("f1_origin").get<double>(),
                           base.at("f1_dreb").get<double>(), f1_origin, f1_dreb,
                           alpha);
  }

  std::cout << doc.dump(2) << "\n";
  if (!out_file.empty()) {
    write_json_file(doc, out_file);

    dreb::RunManifest m;
    m.command = "evaluate";
    m.resolved_config = {{"model", model_file},
                         {"test", test_file},
                         {"dreb", dreb_file},
                         {"baseline_scores", baseline_file},
                         {"alpha", alpha},
                         {"exclude_negative", eval_cfg.exclude_negative_from_f1},
                         {"core_strength", core_strength},
                         {"out", out_file}};
    m.inputs = std::move(inputs);
    m.outputs = {out_file};
    m.wall_clock_seconds = timer.seconds();
    m.write(manifest_path_for(fs::path(out_file)));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

int cmd_analyze(const std::string& original_file, const std::string& benchmark_file,
                const std::string& model_file, const std::string& out_dir) {
  Stopwatch timer;
  dreb::Dataset original =
      dreb::load_dataset(original_file, dreb::DatasetFormat::Jsonl);
  dreb::Dataset benchmark =
      dreb::load_dataset(benchmark_file, dreb::DatasetFormat::Jsonl);

  std::vector<fs::path> inputs{original_file, benchmark_file};

  dreb::DistributionReport dist = dreb::distribution_report(original, benchmark);

  std::unique_ptr<dreb::SentenceEmbedder> embedder;
  if (!model_file.empty()) {
    inputs.push_back(model_file);
    auto model = std::make_shared<dreb::RelationClassifier>(
        dreb::RelationClassifier::load(model_file));
    embedder = std::make_unique<dreb::ClassifierEmbedder>(model);
  } else {
    embedder = std::make_unique<dreb::HashEmbedder>(32, 0);
  }
  dreb::SemanticReport sem = dreb::semantic_report(original, benchmark, *embedder);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  json doc;
  doc["distribution"] = dist.to_json();
  doc["semantic"] = {{"overlap_ratio", sem.overlap_ratio},
                     {"explained_variance", sem.explained_variance}};
  write_json_file(doc, out / "report.json");
  dist.save_csv(out / "distribution.csv");
  sem.save_csv(out / "semantic.csv");

  dreb::RunManifest m;
  m.command = "analyze";
  m.resolved_config = {{"original", original_file},
                       {"benchmark", benchmark_file},
                       {"model", model_file},
                       {"out", out_dir}};
  m.inputs = std::move(inputs);
  m.outputs = {out / "report.json", out / "distribution.csv", out / "semantic.csv"};
  m.wall_clock_seconds = timer.seconds();
  m.write(manifest_path_for(out));

  std::cout << "total variation " << dist.total_variation << ", overlap ratio "
            << sem.overlap_ratio << "\n";
  return kExitOk;
}

json error_json(const char* type, const std::string& message) {
  return {{"error", {{"type", type}, {"message", message}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"debiased relation-extraction benchmarks and training"};
  app.set_version_flag("--version", std::string(dreb::kToolVersion));
  app.require_subcommand(1);

  // gen-synthetic ------------------------------------------------------
  std::string gs_spec, gs_out;
  auto* gen = app.add_subcommand("gen-synthetic", "generate a planted-bias corpus");
  gen->add_option("--spec", gs_spec, "generator spec json")->required();
  gen->add_option("--out", gs_out, "output directory")->required();

  // train-bias-eval ----------------------------------------------------
  std::string tbe_train, tbe_out, tbe_format = "jsonl";
  dreb::BiasEvalConfig tbe_cfg;
  tbe_cfg.seed = env_seed();
  auto* tbe = app.add_subcommand("train-bias-eval",
                                 "train the entity-bias evaluator");
  tbe->add_option("--train", tbe_train, "training dataset")->required();
  tbe->add_option("--format", tbe_format, "dataset format")
      ->check(CLI::IsMember({"jsonl", "tacred-json"}));
  tbe->add_option("--out", tbe_out, "evaluator output file")->required();
  tbe->add_option("--seed", tbe_cfg.seed, "rng seed");
  tbe->add_option("--epochs", tbe_cfg.epochs, "training epochs");
  tbe->add_option("--embed-dim", tbe_cfg.embed_dim, "embedding width");
  tbe->add_option("--lr", tbe_cfg.lr, "learning rate");

  // score-ppl ----------------------------------------------------------
  std::string sp_in, sp_out;
  LmOptions sp_lm;
  auto* sp = app.add_subcommand("score-ppl", "log-perplexity per sample");
  sp->add_option("--in", sp_in, "input dataset (jsonl)")->required();
  sp->add_option("--out", sp_out, "output jsonl of {id, log_ppl}")->required();
  sp_lm.add_flags(sp);

  // build-benchmark ------------------------------------------------------
  std::string bb_test, bb_pool, bb_bias_eval, bb_type_map, bb_out;
  std::string bb_fail = "keep-original";
  dreb::BuildPolicy bb_policy;
  bb_policy.seed = env_seed();
  std::size_t bb_workers = env_workers();
  LmOptions bb_lm;
  auto* bb = app.add_subcommand("build-benchmark",
                                "build the debiased benchmark from a test set");
  bb->add_option("--test", bb_test, "source test set (jsonl)")->required();
  bb->add_option("--pool", bb_pool, "entity pool file")->required();
  bb->add_option("--bias-eval", bb_bias_eval, "trained bias evaluator")->required();
  bb->add_option("--type-map", bb_type_map, "pool-to-dataset type mapping json");
  bb->add_option("--k", bb_policy.k, "candidates per sample")->capture_default_str();
  bb->add_option("--top-m", bb_policy.bias_top_m,
                 "low-bias survivors kept for the ppl stage (default ceil(k/2))");
  bb->add_option("--seed", bb_policy.seed, "rng seed");
  bb->add_option("--fail-policy", bb_fail, "when the pool misses a type")
      ->check(CLI::IsMember({"keep-original", "drop", "error"}))
      ->capture_default_str();
  bb->add_flag("--distinct", bb_policy.distinct,
               "sample candidate pairs without replacement");
  bb->add_option("--workers", bb_workers, "parallel workers");
  bb->add_option("--out", bb_out, "output directory")->required();
  bb_lm.add_flags(bb);

  // train ----------------------------------------------------------------
  std::string tr_config;
  TrainCliConfig tr;
  tr.run.seed = env_seed();
  auto* trc = app.add_subcommand("train", "train a relation classifier");
  trc->add_option("--config", tr_config, "run config json");
  auto* tr_train = trc->add_option("--train", tr.train_file, "training set (jsonl)");
  auto* tr_dev = trc->add_option("--dev", tr.dev_file, "dev set (jsonl)");
  auto* tr_out = trc->add_option("--out", tr.out_dir, "output directory");
  std::string tr_loss;
  auto* tr_loss_opt = trc->add_option("--loss", tr_loss,
                                      "ce|focal|rdrop|dfl|poe|cda|rda|mixdebias");
  auto* tr_lambda = trc->add_option("--lambda", tr.loss.debias.lambda, "cda lambda");
  auto* tr_beta = trc->add_option("--beta", tr.loss.debias.beta, "rda weight beta");
  auto* tr_gamma =
      trc->add_option("--focal-gamma", tr.loss.debias.focal_gamma, "focal exponent");
  auto* tr_rdw =
      trc->add_option("--rdrop-weight", tr.loss.debias.rdrop_weight, "rdrop kl weight");
  auto* tr_seed = trc->add_option("--seed", tr.run.seed, "rng seed");
  auto* tr_epochs = trc->add_option("--epochs", tr.run.epochs, "training epochs");
  auto* tr_bias_eval =
      trc->add_option("--bias-eval", tr.bias_eval_file, "bias evaluator for dfl/poe");

  // evaluate ---------------------------------------------------------------
  std::string ev_model, ev_test, ev_dreb, ev_baseline, ev_out, ev_core_dev;
  double ev_alpha = 0.5;
  double ev_core = 0.0;
  bool ev_include_negative = false;
  auto* ev = app.add_subcommand("evaluate", "score a model on origin + dreb");
  ev->add_option("--model", ev_model, "model file")->required();
  ev->add_option("--test", ev_test, "original test set (jsonl)")->required();
  ev->add_option("--dreb", ev_dreb, "debiased benchmark (jsonl)");
  ev->add_option("--baseline-scores", ev_baseline,
                 "json with the baseline model's f1_origin/f1_dreb");
  ev->add_option("--alpha", ev_alpha, "bme alpha")->capture_default_str();
  ev->add_flag("--include-negative", ev_include_negative,
               "score the negative label too");
  ev->add_option("--core-strength", ev_core, "core adjustment strength");
  ev->add_option("--core-select-dev", ev_core_dev,
                 "dev set for selecting the core strength");
  ev->add_option("--out", ev_out, "output json file");

  // analyze ----------------------------------------------------------------
  std::string an_orig, an_bench, an_model, an_out;
  auto* an = app.add_subcommand("analyze", "distribution and semantic reports");
  an->add_option("--original", an_orig, "original dataset (jsonl)")->required();
  an->add_option("--benchmark", an_bench, "benchmark dataset (jsonl)")->required();
  an->add_option("--model", an_model, "classifier whose embeddings to use");
  an->add_option("--out", an_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help / --version
    }
    app.exit(e);
    std::cerr << error_json("usage", e.what()).dump() << "\n";
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_synthetic(gs_spec, gs_out);
    if (*tbe) return cmd_train_bias_eval(tbe_train, tbe_format, tbe_out, tbe_cfg);
    if (*sp) return cmd_score_ppl(sp_in, sp_out, sp_lm);
    if (*bb) {
      bb_policy.fail_policy = dreb::fail_policy_from_name(bb_fail);
      return cmd_build_benchmark(bb_test, bb_pool, bb_bias_eval, bb_type_map, bb_out,
                                 bb_policy, bb_lm, bb_workers);
    }
    if (*trc) {
      // File config first, explicit flags on top.
      TrainCliConfig merged;
      merged.run.seed = env_seed();
      if (!tr_config.empty()) {
        apply_config_file(merged, load_json_file(tr_config));
      }
      if (tr_train->count()) merged.train_file = tr.train_file;
      if (tr_dev->count()) merged.dev_file = tr.dev_file;
      if (tr_out->count()) merged.out_dir = tr.out_dir;
      if (tr_loss_opt->count()) merged.loss.kind = dreb::loss_from_name(tr_loss);
      if (tr_lambda->count()) merged.loss.debias.lambda = tr.loss.debias.lambda;
      if (tr_beta->count()) merged.loss.debias.beta = tr.loss.debias.beta;
      if (tr_gamma->count()) merged.loss.debias.focal_gamma = tr.loss.debias.focal_gamma;
      if (tr_rdw->count()) merged.loss.debias.rdrop_weight = tr.loss.debias.rdrop_weight;
      if (tr_seed->count()) merged.run.seed = tr.run.seed;
      if (tr_epochs->count()) merged.run.epochs = tr.run.epochs;
      if (tr_bias_eval->count()) merged.bias_eval_file = tr.bias_eval_file;
      return cmd_train(merged);
    }
    if (*ev) {
      return cmd_evaluate(ev_model, ev_test, ev_dreb, ev_baseline, ev_out, ev_alpha,
                          ev_include_negative, ev_core, ev_core_dev);
    }
    if (*an) return cmd_analyze(an_orig, an_bench, an_model, an_out);
  } catch (const dreb::ParseError& e) {
    std::cerr << error_json("parse", e.what()).dump() << "\n";
    return kExitValidation;
  } catch (const dreb::ValidationError& e) {
    std::cerr << error_json("validation", e.what()).dump() << "\n";
    return kExitValidation;
  } catch (const dreb::ConfigError& e) {
    std::cerr << error_json("config", e.what()).dump() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << error_json("runtime", e.what()).dump() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
