#include "metafill_cli/dispatch.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metafill/builtin_lm.hpp"
#include "metafill/embedder.hpp"
#include "metafill/errors.hpp"
#include "metafill/hin.hpp"
#include "metafill/induction.hpp"
#include "metafill/path_sampler.hpp"
#include "metafill/random.hpp"
#include "metafill/remote_backend.hpp"
#include "metafill/tasks.hpp"
#include "metafill/type_classifier.hpp"
#include "metafill_cli/config.hpp"

namespace metafill::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Per-stage seed streams derived from run.seed.
enum Stream : std::uint64_t {
  kLmSeed = 1,
  kClassifierSeed,
  kSamplerSeed,
  kWalkSeed,
  kSkipGramSeed,
  kLpSplitSeed,
  kNcSeed,
  kZeroShotSeed,
  kHypothesisSeed,
  kFineTuneSeed,
};

struct Stage {
  std::string name;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
};

class Runner {
 public:
  Runner(Config cfg, std::ostream& out) : cfg_(std::move(cfg)), out_(out) {
    out_dir_ = cfg_.get_string("run.out_dir");
    seed_ = static_cast<std::uint64_t>(cfg_.get_int("run.seed"));
    workers_ = std::max<std::size_t>(1, cfg_.get_size("run.workers"));
  }

  void run(const std::string& command);

 private:
  void train_lm();
  void train_classifier();
  void sample_paths();
  void induce();
  void embed();
  void eval_lp();
  void eval_nc();
  void zero_shot();
  void hypothesis();
  void pipeline();

  // Wraps a stage: times it and writes <out_dir>/<name>.manifest.json.
  template <class F>
  void staged(const std::string& name, F&& body);

  std::uint64_t seed(Stream s) const { return derive_seed(seed_, s); }
  fs::path artifact(const std::string& key, const std::string& fallback) const;
  fs::path embeddings_path() const;
  fs::path require_input(const fs::path& p, const std::string& what);
  void output(const fs::path& p) { stage_->outputs.push_back(p); }

  const Hin& full_graph();
  // The graph the generation stages see: the full graph minus held-out
  // link-prediction test edges when lp.target is set.
  const Hin& working_graph();
  const LinkPredictionSplit& lp_split();
  const ScorerBackend& backend();
  BuiltinLm& builtin_lm();
  NodeLabels labels();
  std::vector<std::string> metapath_names();

  Config cfg_;
  std::ostream& out_;
  fs::path out_dir_;
  std::uint64_t seed_ = 1;
  std::size_t workers_ = 1;
  Stage* stage_ = nullptr;

  std::optional<Hin> full_;
  std::optional<LinkPredictionSplit> split_;
  std::unique_ptr<ScorerBackend> backend_;
  std::optional<BuiltinLm> lm_;
};

fs::path Runner::artifact(const std::string& key, const std::string& fallback) const {
  auto v = cfg_.get_string(key);
  return v.empty() ? out_dir_ / fallback : fs::path(v);
}

fs::path Runner::embeddings_path() const {
  const auto fmt = cfg_.get_string("embed.format");
  if (fmt != "text" && fmt != "binary") throw UsageError("embed.format must be text or binary");
  return artifact("paths.embeddings", fmt == "binary" ? "embeddings.bin" : "embeddings.tsv");
}

fs::path Runner::require_input(const fs::path& p, const std::string& what) {
  if (p.empty()) throw UsageError(what + " path is not set");
  if (!fs::exists(p)) throw DataError(what + " not found: " + p.string());
  if (stage_) stage_->inputs.push_back(p);
  return p;
}

const Hin& Runner::full_graph() {
  if (!full_) {
    auto nodes = require_input(cfg_.get_string("data.nodes"), "nodes file");
    auto edges = require_input(cfg_.get_string("data.edges"), "edges file");
    full_ = load_hin_files(nodes, edges);
  } else if (stage_) {
    stage_->inputs.push_back(cfg_.get_string("data.nodes"));
    stage_->inputs.push_back(cfg_.get_string("data.edges"));
  }
  return *full_;
}

const LinkPredictionSplit& Runner::lp_split() {
  const auto target = cfg_.get_string("lp.target");
  if (target.empty()) throw UsageError("lp.target is not set");
  if (!split_) {
    LpSplitOptions o;
    o.test_fraction = cfg_.get_real("lp.test_fraction");
    o.seed = seed(kLpSplitSeed);
    split_ = split_link_prediction(full_graph(), target, o);
  }
  return *split_;
}

const Hin& Runner::working_graph() {
  if (cfg_.get_string("lp.target").empty()) return full_graph();
  full_graph();  // records the inputs
  return lp_split().train_graph;
}

BuiltinLm& Runner::builtin_lm() {
  if (!lm_) lm_ = BuiltinLm::load(require_input(artifact("paths.lm", "lm.json"), "language model"));
  return *lm_;
}

const ScorerBackend& Runner::backend() {
  const auto kind = cfg_.get_string("backend.kind");
  if (kind == "builtin") return builtin_lm();
  if (kind != "remote") throw UsageError("backend.kind must be builtin or remote");
  if (!backend_) {
    std::string url = cfg_.get_string("backend.url");
    if (const char* env = std::getenv(kScorerUrlEnv); env && *env) url = env;
    if (url.empty()) throw UsageError("remote backend needs backend.url or " + std::string(kScorerUrlEnv));
    const auto timeout = std::chrono::milliseconds(static_cast<long>(cfg_.get_real("backend.timeout") * 1000));
    backend_ = std::make_unique<RemoteBackend>(url, timeout);
  }
  return *backend_;
}

NodeLabels Runner::labels() {
  auto file = require_input(cfg_.get_string("data.labels"), "labels file");
  return read_labels(file, full_graph());
}

std::vector<std::string> Runner::metapath_names() {
  auto file = artifact("paths.metapaths", "metapaths.json");
  if (!fs::exists(file)) return {};
  const auto& g = working_graph();
  std::vector<std::string> out;
  for (const auto& e : read_metapaths_file(g, file).entries) out.push_back(describe(g, e.metapath));
  return out;
}

template <class F>
void Runner::staged(const std::string& name, F&& body) {
  Stage stage{name, {}, {}};
  Stage* outer = stage_;
  stage_ = &stage;
  const auto start = std::chrono::steady_clock::now();
  body();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  stage_ = outer;

  auto files = [](const std::vector<fs::path>& list) {
    json arr = json::array();
    std::set<std::string> seen;
    for (const auto& p : list) {
      if (!seen.insert(p.string()).second) continue;
      arr.push_back({{"path", p.string()}, {"sha256", fs::is_regular_file(p) ? sha256_file(p) : ""}});
    }
    return arr;
  };
  json manifest = {{"command", name},
                   {"config_hash", cfg_.hash()},
                   {"seed", seed_},
                   {"workers", workers_},
                   {"deterministic", cfg_.get_bool("run.deterministic")},
                   {"inputs", files(stage.inputs)},
                   {"outputs", files(stage.outputs)},
                   {"wall_time_s", wall},
                   {"config", json::parse(cfg_.to_json())}};
  std::ofstream(out_dir_ / (name + ".manifest.json"), std::ios::binary) << manifest.dump(2) << '\n';
  if (outer) {
    outer->inputs.insert(outer->inputs.end(), stage.inputs.begin(), stage.inputs.end());
    outer->outputs.insert(outer->outputs.end(), stage.outputs.begin(), stage.outputs.end());
  }
}

void Runner::train_lm() {
  if (cfg_.get_string("backend.kind") != "builtin")
    throw UsageError("train-lm applies to the builtin backend only");
  BuiltinLmOptions o;
  o.order = static_cast<int>(cfg_.get_int("lm.order"));
  o.smoothing = cfg_.get_real("lm.smoothing");
  o.dim = cfg_.get_size("lm.dim");
  o.epochs = cfg_.get_size("lm.epochs");
  o.window = cfg_.get_size("lm.window");
  o.negatives = cfg_.get_size("lm.negatives");
  o.lr = cfg_.get_real("lm.lr");
  o.unk_rate = cfg_.get_real("lm.unk_rate");
  o.seed = seed(kLmSeed);
  lm_ = BuiltinLm::train(working_graph(), o);
  const auto file = artifact("paths.lm", "lm.json");
  lm_->save(file);
  output(file);
  out_ << "train-lm: vocabulary " << lm_->vocabulary().size() << ", corpus " << lm_->corpus().size()
       << " sentences -> " << file.string() << '\n';
}

void Runner::train_classifier() {
  ClassifierTrainOptions o;
  o.lambda = cfg_.get_real("classifier.lambda");
  o.lr = cfg_.get_real("classifier.lr");
  o.epochs = cfg_.get_size("classifier.epochs");
  o.batch_size = cfg_.get_size("classifier.batch_size");
  o.patience = cfg_.get_size("classifier.patience");
  o.seed = seed(kClassifierSeed);
  o.fine_tune_backend = cfg_.get_bool("classifier.fine_tune");
  const auto& g = working_graph();
  ClassifierTraining t;
  if (o.fine_tune_backend) {
    if (cfg_.get_string("backend.kind") != "builtin")
      throw UsageError("classifier.fine_tune needs the builtin backend");
    t = metafill::train_classifier_joint(g, builtin_lm(), o);
    const auto lm_file = artifact("paths.lm", "lm.json");
    lm_->save(lm_file);
    output(lm_file);
  } else {
    t = metafill::train_classifier(g, backend(), o);
  }
  const auto file = artifact("paths.classifier", "classifier.bin");
  save_classifier(t.params, file);
  output(file);
  out_ << "train-classifier: best epoch " << t.history.best_epoch + 1 << ", validation loss "
       << t.history.validation_total.at(t.history.best_epoch) << " -> " << file.string() << '\n';
}

namespace {

std::vector<std::pair<NodeIndex, NodeIndex>> read_pairs(const fs::path& file, const Hin& hin) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open pairs file " + file.string());
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    NodeId u = 0, v = 0;
    if (!(ls >> u >> v)) throw DataError(file.string() + ":" + std::to_string(lineno) + ": expected two node ids");
    out.emplace_back(hin.require_index(u), hin.require_index(v));
  }
  return out;
}

}  // namespace

void Runner::sample_paths() {
  SamplerConfig sc;
  sc.min_hops = static_cast<int>(cfg_.get_int("sampler.min_hops"));
  sc.max_hops = static_cast<int>(cfg_.get_int("sampler.max_hops"));
  sc.repeats = cfg_.get_size("sampler.repeats");
  sc.pairs = cfg_.get_size("sampler.pairs");
  sc.temperature = cfg_.get_real("sampler.temperature");
  sc.top_k = cfg_.get_size("sampler.top_k");
  sc.policy = parse_subset_policy(cfg_.get_string("sampler.policy"));
  sc.retries = cfg_.get_size("sampler.retries");
  sc.graph_type_override = cfg_.get_bool("sampler.graph_type_override");
  const auto scoring = cfg_.get_string("sampler.fill_scoring");
  if (scoring == "left-context") sc.fill_scoring = FillScoring::kLeftContext;
  else if (scoring == "full-sequence") sc.fill_scoring = FillScoring::kFullSequence;
  else throw UsageError("sampler.fill_scoring must be left-context or full-sequence");
  sc.seed = seed(kSamplerSeed);
  sc.workers = workers_;
  sc.validate();

  const auto& g = working_graph();
  PairSource source;
  if (sc.policy == SubsetPolicy::kLpTrainingEdges) {
    if (auto pf = cfg_.get_string("sampler.pairs_file"); !pf.empty()) {
      source.positive_edges = read_pairs(require_input(pf, "pairs file"), g);
    } else {
      for (const auto& [u, v] : lp_split().data.train_positives)
        source.positive_edges.emplace_back(g.require_index(u), g.require_index(v));
    }
  } else if (sc.policy == SubsetPolicy::kNcLabelSimilar) {
    source.label_vectors = label_vectors(g, labels());
  }

  const auto& be = backend();
  auto params = load_classifier(require_input(artifact("paths.classifier", "classifier.bin"), "classifier"));
  auto result = metafill::sample_paths(g, be, &params, sc, source);
  const auto file = artifact("paths.paths", "paths.jsonl");
  write_paths_file(g, result.paths, file);
  output(file);
  out_ << "sample-paths: " << result.stats.sampled << " paths, " << result.stats.dead_ends << " dead ends, "
       << result.stats.skipped << " skipped -> " << file.string() << '\n';
}

void Runner::induce() {
  const auto& g = working_graph();
  auto paths = read_paths_file(g, require_input(artifact("paths.paths", "paths.jsonl"), "paths file"));
  auto ranked = metafill::induce(paths, cfg_.get_size("induce.q"), g.schema());
  const auto file = artifact("paths.metapaths", "metapaths.json");
  write_metapaths_file(g, ranked, file);
  output(file);
  out_ << "induce: " << ranked.entries.size() << " meta-paths from " << paths.size() << " paths -> "
       << file.string() << '\n';
  for (const auto& e : ranked.entries)
    out_ << "  " << e.count << '\t' << describe(g, e.metapath) << (e.off_schema ? "\t(off-schema)" : "") << '\n';
}

void Runner::embed() {
  const auto& g = working_graph();
  auto ranked = read_metapaths_file(g, require_input(artifact("paths.metapaths", "metapaths.json"), "metapaths file"));
  EmbedOptions o;
  o.walks.walk_length = cfg_.get_size("embed.walk_length");
  o.walks.walks_per_node = cfg_.get_size("embed.walks_per_node");
  o.walks.seed = seed(kWalkSeed);
  o.walks.workers = workers_;
  o.skipgram.dim = cfg_.get_size("embed.dim");
  o.skipgram.window = cfg_.get_size("embed.window");
  o.skipgram.negatives = cfg_.get_size("embed.negatives");
  o.skipgram.lr = cfg_.get_real("embed.lr");
  o.skipgram.epochs = cfg_.get_size("embed.epochs");
  o.skipgram.seed = seed(kSkipGramSeed);
  o.skipgram.deterministic = cfg_.get_bool("run.deterministic");
  o.skipgram.workers = o.skipgram.deterministic ? 1 : workers_;
  auto table = embed_hin(g, ranked, o);
  const auto file = embeddings_path();
  if (cfg_.get_string("embed.format") == "binary") {
    write_embeddings_binary(table, file);
  } else {
    write_embeddings_text(table, file);
    output(file.string() + ".json");
  }
  output(file);
  out_ << "embed: " << table.size() << " nodes x " << table.dim() << ", " << table.meta().walks << " walks, "
       << table.meta().unvisited.size() << " unvisited -> " << file.string() << '\n';
}

void Runner::eval_lp() {
  const auto& split = lp_split();
  auto table = read_embeddings(require_input(embeddings_path(), "embeddings file"));
  if (auto epochs = cfg_.get_size("lp.finetune_epochs"); epochs > 0) {
    LpFineTuneOptions o;
    o.epochs = epochs;
    o.lr = cfg_.get_real("lp.finetune_lr");
    o.seed = seed(kFineTuneSeed);
    finetune_link_prediction(table, split.data.train_positives, split.data.train_negatives, o);
  }
  auto result = eval_link_prediction(table, split.data);
  EvalReport report{"link-prediction", {{"auc", result.auc}, {"ap", result.ap}}, cfg_.to_json(), metapath_names()};
  const auto report_file = out_dir_ / "lp_report.json";
  std::ofstream(report_file, std::ios::binary) << eval_report_to_json(report) << '\n';
  const auto split_file = out_dir_ / "lp_split.json";
  write_lp_data(split.data, split_file);
  write_scores_csv(result, out_dir_ / "lp_scores.csv");
  write_roc_csv(result, out_dir_ / "lp_roc.csv");
  for (const auto& f : {report_file, split_file, out_dir_ / "lp_scores.csv", out_dir_ / "lp_roc.csv"}) output(f);
  out_ << "eval-lp: AUC " << result.auc << ", AP " << result.ap << " over " << split.data.test_positives.size()
       << " positives and " << split.data.test_negatives.size() << " negatives -> " << report_file.string() << '\n';
}

void Runner::eval_nc() {
  auto table = read_embeddings(require_input(embeddings_path(), "embeddings file"));
  NcSplitOptions so;
  so.test_fraction = cfg_.get_real("nc.test_fraction");
  so.seed = seed(kNcSeed);
  auto data = split_node_classification(labels(), so);
  NcTrainOptions o;
  o.lr = cfg_.get_real("nc.lr");
  o.epochs = cfg_.get_size("nc.epochs");
  o.patience = cfg_.get_size("nc.patience");
  o.seed = derive_seed(seed(kNcSeed), 1);
  auto training = train_nc_head(table, data, o);
  auto f1 = eval_node_classification(training.head, table, data);
  EvalReport report{"node-classification", {{"micro_f1", f1.micro}, {"macro_f1", f1.macro}}, cfg_.to_json(),
                    metapath_names()};
  const auto file = out_dir_ / "nc_report.json";
  std::ofstream(file, std::ios::binary) << eval_report_to_json(report) << '\n';
  output(file);
  out_ << "eval-nc: micro-F1 " << f1.micro << ", macro-F1 " << f1.macro << " over " << data.test_nodes.size()
       << " nodes -> " << file.string() << '\n';
}

void Runner::zero_shot() {
  auto relation = cfg_.get_string("zero_shot.relation");
  if (relation.empty()) relation = cfg_.get_string("lp.target");
  if (relation.empty()) throw UsageError("zero_shot.relation is not set");
  ZeroShotOptions o;
  o.n = cfg_.get_size("zero_shot.n");
  o.seed = seed(kZeroShotSeed);
  const auto& g = working_graph();
  auto pairs = zero_shot_pairs(g, backend(), tokenize(relation), o);
  const auto file = out_dir_ / "zero_shot_pairs.tsv";
  std::ofstream f(file, std::ios::binary);
  for (const auto& [u, v] : pairs) f << u << '\t' << v << '\n';
  output(file);
  out_ << "zero-shot: " << pairs.size() << " pairs for '" << relation << "' -> " << file.string() << '\n';
}

void Runner::hypothesis() {
  HypothesisOptions o;
  o.paths = cfg_.get_size("hypothesis.paths");
  o.seed = seed(kHypothesisSeed);
  const auto& g = working_graph();
  auto rep = hypothesis_study(g, backend(), o);
  const auto file = out_dir_ / "hypothesis.json";
  std::ofstream(file, std::ios::binary) << hypothesis_to_json(g, rep) << '\n';
  output(file);
  out_ << "hypothesis: " << rep.paths.size() << " paths, spearman(plm, name) " << rep.spearman_name
       << ", spearman(plm, connectivity) " << rep.spearman_connectivity << " -> " << file.string() << '\n';
}

void Runner::pipeline() {
  if (cfg_.get_string("backend.kind") == "builtin") staged("train-lm", [&] { train_lm(); });
  staged("train-classifier", [&] { train_classifier(); });
  staged("sample-paths", [&] { sample_paths(); });
  staged("induce", [&] { induce(); });
  staged("embed", [&] { embed(); });

  std::vector<std::string> tasks;
  const auto spec = cfg_.get_string("run.tasks");
  if (spec == "auto") {
    if (!cfg_.get_string("lp.target").empty()) tasks.push_back("lp");
    if (!cfg_.get_string("data.labels").empty()) tasks.push_back("nc");
  } else {
    std::stringstream ss(spec);
    for (std::string t; std::getline(ss, t, ',');)
      if (!t.empty()) tasks.push_back(t);
  }
  for (const auto& t : tasks) {
    if (t == "lp") staged("eval-lp", [&] { eval_lp(); });
    else if (t == "nc") staged("eval-nc", [&] { eval_nc(); });
    else if (t == "zero-shot") staged("zero-shot", [&] { zero_shot(); });
    else if (t == "hypothesis") staged("hypothesis", [&] { hypothesis(); });
    else throw UsageError("unknown task '" + t + "' in run.tasks");
  }
}

void Runner::run(const std::string& command) {
  fs::create_directories(out_dir_);
  if (command == "pipeline") return staged("pipeline", [&] { pipeline(); });
  static const std::map<std::string, void (Runner::*)()> table = {
      {"train-lm", &Runner::train_lm},         {"train-classifier", &Runner::train_classifier},
      {"sample-paths", &Runner::sample_paths}, {"induce", &Runner::induce},
      {"embed", &Runner::embed},               {"eval-lp", &Runner::eval_lp},
      {"eval-nc", &Runner::eval_nc},           {"zero-shot", &Runner::zero_shot},
      {"hypothesis", &Runner::hypothesis},
  };
  auto fn = table.at(command);
  staged(command, [&] { (this->*fn)(); });
}

const std::vector<std::pair<std::string, std::string>>& subcommands() {
  static const std::vector<std::pair<std::string, std::string>> list = {
      {"train-lm", "train the builtin language model on the graph's verbalised edges"},
      {"train-classifier", "train the context-aware node-type classifier"},
      {"sample-paths", "infill typed paths between node pairs"},
      {"induce", "rank meta-paths by frequency and keep the top q"},
      {"embed", "meta-path guided walks plus skip-gram node embeddings"},
      {"eval-lp", "link prediction AUC and AP on held-out target edges"},
      {"eval-nc", "node classification micro- and macro-F1"},
      {"zero-shot", "generate pseudo training pairs for a relation"},
      {"hypothesis", "correlate path likelihood with name and connectivity scores"},
      {"pipeline", "run all stages in order"},
  };
  return list;
}

std::string key_help() {
  std::ostringstream s;
  s << "\nConfig keys (file or --set key=value):\n";
  for (const auto& k : config_schema())
    s << "  " << k.key << " [" << (k.default_value.empty() ? "\"\"" : k.default_value) << "]  " << k.help << '\n';
  return s.str();
}

int report(std::ostream& err, int status, const std::string& message) {
  auto line = message;
  for (auto& c : line)
    if (c == '\n' || c == '\r') c = ' ';
  err << "ERROR " << status << ": " << line << '\n';
  return status;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Meta-path generation by language-model infilling over heterogeneous graphs", "metafill"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.footer(key_help());

  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::int64_t> seed;
  std::optional<std::int64_t> workers;
  bool deterministic = false;
  std::string out_dir;
  app.add_option("-c,--config", config_file, "config file (TOML subset)");
  app.add_option("--set", sets, "override a config key: section.key=value")->take_all();
  app.add_option("--seed", seed, "master seed (run.seed)");
  app.add_option("--workers", workers, "worker threads (run.workers)");
  app.add_flag("--deterministic", deterministic, "force single-threaded embedding updates");
  app.add_option("-o,--out", out_dir, "artifact directory (run.out_dir)");
  for (const auto& [name, help] : subcommands()) app.add_subcommand(name, help);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    return report(err, kExitUsage, e.what());
  }

  const auto command = app.get_subcommands().front()->get_name();
  try {
    Config cfg = config_file.empty() ? Config() : Config::load(config_file);
    for (const auto& s : sets) cfg.set(s);
    if (seed) cfg.set_value("run.seed", std::to_string(*seed));
    if (workers) cfg.set_value("run.workers", std::to_string(*workers));
    if (deterministic) cfg.set_value("run.deterministic", "true");
    if (!out_dir.empty()) cfg.set_value("run.out_dir", out_dir);
    Runner(std::move(cfg), out).run(command);
    return kExitOk;
  } catch (const UsageError& e) {
    return report(err, kExitUsage, e.what());
  } catch (const TransportError& e) {
    return report(err, kExitTransport, e.what());
  } catch (const std::exception& e) {
    return report(err, kExitData, e.what());
  }
}

}  // namespace metafill::cli
