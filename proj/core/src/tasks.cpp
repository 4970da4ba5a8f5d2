#include "metafill/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metafill/errors.hpp"
#include "metafill/random.hpp"
#include "metafill/skipgram.hpp"
#include "metafill/verbalizer.hpp"

namespace metafill {

using nlohmann::json;

double edge_score(const EmbeddingTable& table, NodeId u, NodeId v) {
  return sigmoid(dot(table.vector(u), table.vector(v)));
}

// ---- link prediction ----

namespace {

EdgeTypeId require_edge_type(const Hin& hin, const std::string& name) {
  auto r = hin.find_edge_type(name);
  if (!r) throw DataError("unknown edge type '" + name + "'");
  return *r;
}

std::string slurp(const std::filesystem::path& file, const std::string& what) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + what + " " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  return out;
}

}  // namespace

std::vector<NodePair> corrupt_tails(const Hin& hin, EdgeTypeId target, const std::vector<NodePair>& positives,
                                    std::uint64_t seed) {
  std::set<TypeId> tail_types;
  for (const auto& e : hin.edges())
    if (e.type == target) tail_types.insert(hin.node(e.dst).type);
  std::vector<NodeIndex> pool;
  for (NodeIndex v = 0; v < hin.num_nodes(); ++v)
    if (tail_types.contains(hin.node(v).type)) pool.push_back(v);
  if (pool.empty()) throw DataError("target relation has no observed tail types");

  constexpr int kTries = 100;
  Rng rng(seed);
  std::set<NodePair> seen(positives.begin(), positives.end());
  std::vector<NodePair> out;
  out.reserve(positives.size());
  for (const auto& [u, v] : positives) {
    const auto ui = hin.require_index(u);
    for (int t = 0; t < kTries; ++t) {
      const auto w = pool[uniform_index(rng, pool.size())];
      const NodePair cand{u, hin.node(w).id};
      if (w == ui || hin.has_edge(ui, target, w) || seen.contains(cand)) continue;
      seen.insert(cand);
      out.push_back(cand);
      break;
    }
  }
  return out;
}

LinkPredictionSplit split_link_prediction(const Hin& hin, const std::string& target,
                                          const LpSplitOptions& options) {
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0))
    throw UsageError("test fraction must be in (0, 1)");
  const auto r = require_edge_type(hin, target);
  std::vector<Edge> edges;
  for (const auto& e : hin.edges())
    if (e.type == r) edges.push_back(e);
  if (edges.size() < 2) throw DataError("link prediction needs at least two '" + target + "' edges");

  Rng rng(derive_seed(options.seed, 0x6c70));
  std::shuffle(edges.begin(), edges.end(), rng);
  auto n_test = static_cast<std::size_t>(std::llround(options.test_fraction * static_cast<double>(edges.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, edges.size() - 1);

  LinkPredictionSplit split;
  split.data.target = target;
  std::vector<Edge> removed(edges.begin(), edges.begin() + static_cast<long>(n_test));
  for (std::size_t i = 0; i < edges.size(); ++i) {
    NodePair p{hin.node(edges[i].src).id, hin.node(edges[i].dst).id};
    (i < n_test ? split.data.test_positives : split.data.train_positives).push_back(p);
  }
  // Negatives are checked against the full graph so they never hit a held-out positive.
  split.data.test_negatives = corrupt_tails(hin, r, split.data.test_positives, derive_seed(options.seed, 1));
  split.data.train_negatives = corrupt_tails(hin, r, split.data.train_positives, derive_seed(options.seed, 2));
  split.train_graph = hin.without_edges(removed);
  return split;
}

std::string lp_data_to_json(const LinkPredictionData& data) {
  json doc = {{"target", data.target},
              {"train_positives", data.train_positives},
              {"train_negatives", data.train_negatives},
              {"test_positives", data.test_positives},
              {"test_negatives", data.test_negatives}};
  return doc.dump(2);
}

LinkPredictionData lp_data_from_json(const std::string& text) {
  try {
    auto doc = json::parse(text);
    LinkPredictionData d;
    d.target = doc.at("target").get<std::string>();
    d.train_positives = doc.at("train_positives").get<std::vector<NodePair>>();
    d.train_negatives = doc.at("train_negatives").get<std::vector<NodePair>>();
    d.test_positives = doc.at("test_positives").get<std::vector<NodePair>>();
    d.test_negatives = doc.at("test_negatives").get<std::vector<NodePair>>();
    return d;
  } catch (const json::exception& e) {
    throw DataError(std::string("link prediction split: ") + e.what());
  }
}

void write_lp_data(const LinkPredictionData& data, const std::filesystem::path& file) {
  open_out(file) << lp_data_to_json(data) << '\n';
}

LinkPredictionData read_lp_data(const std::filesystem::path& file) {
  return lp_data_from_json(slurp(file, "link prediction split"));
}

LinkPredictionResult eval_link_prediction(const EmbeddingTable& table, const LinkPredictionData& data) {
  LinkPredictionResult res;
  for (const auto& p : data.test_positives) {
    res.pairs.push_back(p);
    res.labels.push_back(1);
  }
  for (const auto& p : data.test_negatives) {
    res.pairs.push_back(p);
    res.labels.push_back(0);
  }
  for (const auto& [u, v] : res.pairs) res.scores.push_back(edge_score(table, u, v));
  res.auc = roc_auc(res.scores, res.labels);
  res.ap = average_precision(res.scores, res.labels);
  return res;
}

void write_scores_csv(const LinkPredictionResult& result, const std::filesystem::path& file) {
  auto out = open_out(file);
  out.precision(17);
  out << "u,v,label,score\n";
  for (std::size_t i = 0; i < result.pairs.size(); ++i)
    out << result.pairs[i].first << ',' << result.pairs[i].second << ',' << result.labels[i] << ','
        << result.scores[i] << '\n';
}

void write_roc_csv(const LinkPredictionResult& result, const std::filesystem::path& file) {
  auto out = open_out(file);
  out.precision(17);
  out << "threshold,fpr,tpr\n";
  for (const auto& p : roc_curve(result.scores, result.labels))
    out << (std::isinf(p.threshold) ? std::string("inf") : std::to_string(p.threshold)) << ',' << p.fpr << ','
        << p.tpr << '\n';
}

namespace {

// -log sigma(sign * x), computed stably.
double log1p_exp_neg(double z) { return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

}  // namespace

double lp_loss(const EmbeddingTable& table, const std::vector<NodePair>& positives,
               const std::vector<NodePair>& negatives) {
  double loss = 0.0;
  for (const auto& [u, v] : positives) loss += log1p_exp_neg(dot(table.vector(u), table.vector(v)));
  for (const auto& [u, v] : negatives) loss += log1p_exp_neg(-dot(table.vector(u), table.vector(v)));
  return loss;
}

std::vector<double> finetune_link_prediction(EmbeddingTable& table, const std::vector<NodePair>& positives,
                                             const std::vector<NodePair>& negatives,
                                             const LpFineTuneOptions& options) {
  struct Item {
    std::size_t u, v;
    double sign;
  };
  std::vector<Item> items;
  auto row = [&](NodeId id) {
    auto r = table.row_of(id);
    if (!r) throw DataError("node " + std::to_string(id) + " has no embedding");
    return *r;
  };
  for (const auto& [u, v] : positives) items.push_back({row(u), row(v), 1.0});
  for (const auto& [u, v] : negatives) items.push_back({row(u), row(v), -1.0});
  if (items.empty()) throw DataError("no training pairs for link prediction fine-tuning");

  std::vector<double> history{lp_loss(table, positives, negatives)};
  auto& m = table.matrix();
  std::vector<double> gu(m.dim()), gv(m.dim());
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    Rng rng(derive_seed(options.seed, epoch));
    std::shuffle(items.begin(), items.end(), rng);
    for (const auto& it : items) {
      auto eu = m.row(it.u);
      auto ev = m.row(it.v);
      // d/dx of -log sigma(s x) = -s (1 - sigma(s x))
      const double g = -it.sign * (1.0 - sigmoid(it.sign * dot(eu, ev)));
      for (std::size_t k = 0; k < gu.size(); ++k) {
        gu[k] = g * ev[k];
        gv[k] = g * eu[k];
      }
      for (std::size_t k = 0; k < gu.size(); ++k) {
        eu[k] -= options.lr * gu[k];
        ev[k] -= options.lr * gv[k];
      }
    }
    history.push_back(lp_loss(table, positives, negatives));
  }
  return history;
}

// ---- node classification ----

NodeLabels read_labels(const std::filesystem::path& file, const Hin& hin) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open labels file " + file.string());
  NodeLabels labels;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto where = file.string() + ":" + std::to_string(lineno);
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(where + ": expected node_id<TAB>label");
    NodeId id = 0;
    try {
      std::size_t used = 0;
      id = std::stoll(line.substr(0, tab), &used);
      if (used != tab) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError(where + ": bad node id");
    }
    if (!hin.index_of(id)) throw DataError(where + ": unknown node " + std::to_string(id));
    auto label = line.substr(tab + 1);
    if (label.empty()) throw DataError(where + ": empty label");
    auto& list = labels[id];
    if (std::find(list.begin(), list.end(), label) == list.end()) list.push_back(label);
  }
  return labels;
}

std::vector<std::vector<double>> label_vectors(const Hin& hin, const NodeLabels& labels) {
  std::set<std::string> vocab;
  for (const auto& [id, ls] : labels) vocab.insert(ls.begin(), ls.end());
  std::vector<std::string> names(vocab.begin(), vocab.end());
  std::vector<std::vector<double>> out(hin.num_nodes());
  for (const auto& [id, ls] : labels) {
    auto& vec = out[hin.require_index(id)];
    vec.assign(names.size(), 0.0);
    for (const auto& l : ls)
      vec[static_cast<std::size_t>(std::lower_bound(names.begin(), names.end(), l) - names.begin())] = 1.0;
  }
  return out;
}

NodeClassificationData split_node_classification(const NodeLabels& labels, const NcSplitOptions& options) {
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0))
    throw UsageError("test fraction must be in (0, 1)");
  if (labels.size() < 2) throw DataError("node classification needs at least two labelled nodes");
  NodeClassificationData d;
  std::set<std::string> classes;
  for (const auto& [id, ls] : labels) classes.insert(ls.front());
  d.class_names.assign(classes.begin(), classes.end());
  auto class_of = [&](const std::string& name) {
    return static_cast<std::size_t>(std::lower_bound(d.class_names.begin(), d.class_names.end(), name) -
                                    d.class_names.begin());
  };
  std::vector<NodeId> ids;
  for (const auto& [id, ls] : labels) ids.push_back(id);
  Rng rng(derive_seed(options.seed, 0x6e63));
  std::shuffle(ids.begin(), ids.end(), rng);
  auto n_test = static_cast<std::size_t>(std::llround(options.test_fraction * static_cast<double>(ids.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, ids.size() - 1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto c = class_of(labels.at(ids[i]).front());
    if (i < n_test) {
      d.test_nodes.push_back(ids[i]);
      d.test_labels.push_back(c);
    } else {
      d.train_nodes.push_back(ids[i]);
      d.train_labels.push_back(c);
    }
  }
  return d;
}

double nc_loss(const LinearSoftmax& head, const EmbeddingTable& table, const std::vector<NodeId>& nodes,
               const std::vector<std::size_t>& labels) {
  if (nodes.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += head.loss(table.vector(nodes[i]), labels[i]);
  return sum / static_cast<double>(nodes.size());
}

double nc_gradient(const LinearSoftmax& head, const EmbeddingTable& table, const std::vector<NodeId>& nodes,
                   const std::vector<std::size_t>& labels, LinearSoftmax& grad) {
  grad = LinearSoftmax(head.classes, head.inputs);
  if (nodes.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(nodes.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += head.loss(table.vector(nodes[i]), labels[i], scale, &grad);
  return sum * scale;
}

NcTraining train_nc_head(const EmbeddingTable& table, const NodeClassificationData& data,
                         const NcTrainOptions& options) {
  if (data.train_nodes.size() != data.train_labels.size()) throw UsageError("train nodes and labels differ");
  if (std::set<std::size_t>(data.train_labels.begin(), data.train_labels.end()).size() < 2)
    throw DataError("node classification training data has a single class");
  if (options.batch_size < 1) throw UsageError("batch size must be >= 1");

  std::vector<std::size_t> order(data.train_nodes.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(options.seed, 0x76616c));
  std::shuffle(order.begin(), order.end(), split_rng);
  auto n_val = static_cast<std::size_t>(
      std::llround(options.validation_fraction * static_cast<double>(order.size())));
  if (order.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, order.size() - 1);
  else n_val = 0;
  std::vector<NodeId> val_nodes, train_nodes;
  std::vector<std::size_t> val_labels, train_labels;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& nodes = i < n_val ? val_nodes : train_nodes;
    auto& labels = i < n_val ? val_labels : train_labels;
    nodes.push_back(data.train_nodes[order[i]]);
    labels.push_back(data.train_labels[order[i]]);
  }

  NcTraining out;
  out.head = LinearSoftmax(data.classes(), table.dim());
  LinearSoftmax head = out.head, grad;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<std::size_t> idx(train_nodes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<NodeId> bn;
  std::vector<std::size_t> bl;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    Rng rng(derive_seed(options.seed, epoch + 1));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t b = 0; b < idx.size(); b += options.batch_size) {
      bn.clear();
      bl.clear();
      for (std::size_t i = b; i < std::min(idx.size(), b + options.batch_size); ++i) {
        bn.push_back(train_nodes[idx[i]]);
        bl.push_back(train_labels[idx[i]]);
      }
      nc_gradient(head, table, bn, bl, grad);
      head.axpy(-options.lr, grad);
    }
    out.train_loss.push_back(nc_loss(head, table, train_nodes, train_labels));
    const double v = val_nodes.empty() ? out.train_loss.back() : nc_loss(head, table, val_nodes, val_labels);
    out.validation_loss.push_back(v);
    if (v < best) {
      best = v;
      out.best_epoch = epoch;
      out.head = head;
      since_best = 0;
    } else if (++since_best >= options.patience) {
      break;
    }
  }
  return out;
}

std::vector<std::size_t> predict_classes(const LinearSoftmax& head, const EmbeddingTable& table,
                                         const std::vector<NodeId>& nodes) {
  std::vector<std::size_t> out;
  out.reserve(nodes.size());
  for (auto id : nodes) out.push_back(argmax(head.logits(table.vector(id))));
  return out;
}

F1Scores eval_node_classification(const LinearSoftmax& head, const EmbeddingTable& table,
                                  const NodeClassificationData& data) {
  if (data.test_nodes.empty()) throw DataError("empty node classification test set");
  auto pred = predict_classes(head, table, data.test_nodes);
  return f1_scores(data.test_labels, pred, data.classes());
}

// ---- zero-shot ----

std::vector<NodePair> zero_shot_pairs(const Hin& hin, const ScorerBackend& backend, const Tokens& relation,
                                      const ZeroShotOptions& options) {
  if (options.n == 0) return {};
  if (relation.empty()) throw UsageError("zero-shot relation name is empty");
  const auto& names = hin.distinct_names();
  if (names.empty()) throw DataError("graph has no nodes");

  MaskedTemplate tmpl;
  tmpl.slots.push_back(TemplateSlot::node_mask(1));
  for (const auto& t : relation) tmpl.slots.push_back(TemplateSlot::text(t));
  tmpl.slots.push_back(TemplateSlot::node_mask(2));

  auto scores_of = [&](const std::vector<Fill>& fills) {
    std::vector<double> s;
    s.reserve(fills.size());
    for (const auto& f : fills) s.push_back(f.log_score);
    return s;
  };
  const auto left_fills = fill_candidates(backend, tmpl, tmpl.position_of(MaskKind::kNode, 1), names,
                                          names.size(), FillScoring::kFullSequence);
  const auto left_scores = scores_of(left_fills);
  std::map<std::size_t, std::pair<std::vector<Fill>, std::vector<double>>> right_cache;

  const std::size_t attempts = options.max_attempts ? options.max_attempts : 20 * options.n;
  Rng rng(derive_seed(options.seed, 0x7a73));
  std::set<NodePair> seen;
  std::vector<NodePair> out;
  for (std::size_t a = 0; a < attempts && out.size() < options.n; ++a) {
    const auto li = sample_softmax(left_scores, options.temperature, rng);
    auto it = right_cache.find(li);
    if (it == right_cache.end()) {
      auto t2 = tmpl.filled(tmpl.position_of(MaskKind::kNode, 1), left_fills[li].tokens);
      auto fills = fill_candidates(backend, t2, t2.position_of(MaskKind::kNode, 2), names, names.size(),
                                   FillScoring::kFullSequence);
      auto s = scores_of(fills);
      it = right_cache.emplace(li, std::make_pair(std::move(fills), std::move(s))).first;
    }
    const auto ri = sample_softmax(it->second.second, options.temperature, rng);
    const auto& heads = hin.nodes_named(left_fills[li].tokens);
    const auto& tails = hin.nodes_named(it->second.first[ri].tokens);
    if (heads.empty() || tails.empty() || heads.front() == tails.front()) continue;
    NodePair p{hin.node(heads.front()).id, hin.node(tails.front()).id};
    if (seen.insert(p).second) out.push_back(p);
  }
  if (out.empty()) throw DataError("zero-shot generation produced no resolvable pairs");
  return out;
}

// ---- hypothesis study ----

Tokens verbalize_two_hop(const Hin& hin, const PathInstance& path) {
  if (path.nodes.size() != 3 || path.edges.size() != 2) throw UsageError("expected a 2-hop path");
  Tokens out = hin.node(path.nodes[0]).name;
  out = concat(out, hin.edge_type_name(path.edges[0]));
  out = concat(out, hin.node(path.nodes[1]).name);
  out.push_back(kPeriod);
  out.push_back(kConnective);
  out = concat(out, hin.edge_type_name(path.edges[1]));
  return concat(out, hin.node(path.nodes[2]).name);
}

double name_similarity(std::span<const double> head, std::span<const double> tail) {
  if (head.size() != tail.size()) throw UsageError("embedding sizes differ");
  double sq = 0.0;
  for (std::size_t i = 0; i < head.size(); ++i) sq += (head[i] - tail[i]) * (head[i] - tail[i]);
  return 1.0 / (1.0 + std::sqrt(sq));
}

HypothesisReport hypothesis_study(const Hin& hin, const ScorerBackend& backend, const HypothesisOptions& options) {
  std::vector<PathInstance> all;
  for (NodeIndex h = 0; h < hin.num_nodes(); ++h)
    for (const auto& a : hin.out_neighbors(h))
      for (const auto& b : hin.out_neighbors(a.node))
        if (b.node != h) all.push_back({{h, a.node, b.node}, {a.edge_type, b.edge_type}});
  if (all.size() < 2) throw DataError("graph has fewer than two distinct 2-hop paths");

  Rng rng(derive_seed(options.seed, 0x6879));
  const auto n = std::min(options.paths, all.size());
  // Partial Fisher-Yates: the first n entries become a uniform sample.
  for (std::size_t i = 0; i < n; ++i) std::swap(all[i], all[i + uniform_index(rng, all.size() - i)]);
  all.resize(n);

  HypothesisReport rep;
  rep.paths = all;
  std::vector<Tokens> sentences;
  sentences.reserve(n);
  for (const auto& p : rep.paths) sentences.push_back(verbalize_two_hop(hin, p));
  rep.plm = backend.score_batch(sentences);
  std::map<NodeIndex, std::vector<double>> emb;
  auto embed_node = [&](NodeIndex v) -> const std::vector<double>& {
    auto it = emb.find(v);
    if (it == emb.end()) it = emb.emplace(v, backend.embed(hin.node(v).name)).first;
    return it->second;
  };
  for (const auto& p : rep.paths) {
    const auto h = p.nodes.front(), t = p.nodes.back();
    rep.name.push_back(name_similarity(embed_node(h), embed_node(t)));
    rep.connectivity.push_back(hin.has_edge(h, t) || hin.has_edge(t, h) ? 1.0 : 0.0);
  }
  rep.spearman_name = spearman(rep.plm, rep.name);
  rep.spearman_connectivity = spearman(rep.plm, rep.connectivity);
  return rep;
}

std::string hypothesis_to_json(const Hin& hin, const HypothesisReport& report) {
  json paths = json::array();
  for (std::size_t i = 0; i < report.paths.size(); ++i) {
    const auto& p = report.paths[i];
    paths.push_back({{"nodes", {hin.node(p.nodes[0]).id, hin.node(p.nodes[1]).id, hin.node(p.nodes[2]).id}},
                     {"edge_types", {join(hin.edge_type_name(p.edges[0])), join(hin.edge_type_name(p.edges[1]))}},
                     {"plm", report.plm[i]},
                     {"name", report.name[i]},
                     {"connectivity", report.connectivity[i]}});
  }
  // NaN (a constant score list) serialises as null.
  json doc = {{"task", "hypothesis"},
              {"paths", paths.size()},
              {"spearman_plm_name", report.spearman_name},
              {"spearman_plm_connectivity", report.spearman_connectivity},
              {"items", paths}};
  return doc.dump(2);
}

std::string eval_report_to_json(const EvalReport& report) {
  json config = json::parse(report.config_json, nullptr, false);
  if (config.is_discarded()) config = report.config_json;
  json doc = {{"task", report.task}, {"metrics", report.metrics}, {"config", config}, {"metapaths", report.metapaths}};
  return doc.dump(2);
}

}  // namespace metafill
