#include "metafill/path_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "metafill/errors.hpp"
#include "metafill/verbalizer.hpp"

namespace metafill {

using nlohmann::json;

std::string to_string(SubsetPolicy policy) {
  switch (policy) {
    case SubsetPolicy::kLpTrainingEdges: return "lp-training-edges";
    case SubsetPolicy::kNcLabelSimilar: return "nc-label-similar";
    case SubsetPolicy::kAll: return "all";
  }
  return "all";
}

SubsetPolicy parse_subset_policy(const std::string& text) {
  if (text == "lp-training-edges") return SubsetPolicy::kLpTrainingEdges;
  if (text == "nc-label-similar") return SubsetPolicy::kNcLabelSimilar;
  if (text == "all") return SubsetPolicy::kAll;
  throw UsageError("unknown subset policy '" + text +
                   "' (expected lp-training-edges, nc-label-similar or all)");
}

void SamplerConfig::validate() const {
  if (min_hops < 1 || max_hops > 8 || min_hops > max_hops)
    throw UsageError("hop range must lie within 1..8, got " + std::to_string(min_hops) + ".." +
                     std::to_string(max_hops));
  if (repeats < 1) throw UsageError("repeats per pair must be >= 1");
  if (!(temperature > 0)) throw UsageError("temperature must be positive");
  if (top_k < 1) throw UsageError("top-k must be >= 1");
}

std::vector<double> label_partner_weights(const PairSource& source, NodeIndex first) {
  const auto& labels = source.label_vectors;
  std::vector<double> weights(labels.size(), 0.0);
  if (first >= labels.size()) return weights;
  const auto& a = labels[first];
  double na = 0.0;
  for (double x : a) na += x * x;
  if (na == 0.0) return weights;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j == first) continue;
    const auto& b = labels[j];
    double nb = 0.0;
    double ab = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) ab += a[k] * b[k];
    for (double x : b) nb += x * x;
    if (nb > 0.0) weights[j] = std::max(0.0, ab / std::sqrt(na * nb));
  }
  return weights;
}

std::pair<NodeIndex, NodeIndex> sample_pair(const Hin& hin, const SamplerConfig& config,
                                            const PairSource& source, Rng& rng) {
  switch (config.policy) {
    case SubsetPolicy::kLpTrainingEdges: {
      if (source.positive_edges.empty()) throw DataError("no positive training edges to sample pairs from");
      return source.positive_edges[uniform_index(rng, source.positive_edges.size())];
    }
    case SubsetPolicy::kAll: {
      if (hin.num_edges() == 0) throw DataError("graph has no edges to sample pairs from");
      const auto& e = hin.edges()[uniform_index(rng, hin.num_edges())];
      return {e.src, e.dst};
    }
    case SubsetPolicy::kNcLabelSimilar: {
      std::vector<NodeIndex> labeled;
      for (NodeIndex i = 0; i < source.label_vectors.size(); ++i) {
        const auto& v = source.label_vectors[i];
        if (std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; })) labeled.push_back(i);
      }
      if (labeled.size() < 2) throw DataError("need at least two labeled nodes to sample similar pairs");
      for (int attempt = 0; attempt < 64; ++attempt) {
        NodeIndex first = labeled[uniform_index(rng, labeled.size())];
        auto weights = label_partner_weights(source, first);
        if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) continue;
        std::discrete_distribution<std::size_t> partner(weights.begin(), weights.end());
        return {first, partner(rng)};
      }
      throw DataError("no labeled node has a label-similar partner");
    }
  }
  throw UsageError("unknown subset policy");
}

namespace {

struct NodeTyping {
  TypeId type;
  std::optional<NodeIndex> node;
};

NodeTyping type_filled_name(const Hin& hin, const ScorerBackend& backend,
                            const ClassifierParams* classifier, const SamplerConfig& config,
                            const Tokens& name, const Tokens& prev_name, const Tokens& prev_edge) {
  if (config.graph_type_override) {
    const auto& matches = hin.nodes_named(name);
    if (!matches.empty()) {
      TypeId t = hin.node(matches.front()).type;
      bool same = std::all_of(matches.begin(), matches.end(),
                              [&](NodeIndex i) { return hin.node(i).type == t; });
      if (same) return {t, matches.front()};
    }
  }
  if (!classifier)
    throw UsageError("node type classifier required to type the filled name '" + join(name) + "'");
  auto features = classifier_features(backend, name, prev_name, prev_edge);
  return {predict_type(*classifier, features.node, features.context), std::nullopt};
}

std::vector<Tokens> edge_names(const Hin& hin, const std::vector<EdgeTypeId>& ids) {
  std::vector<Tokens> out;
  out.reserve(ids.size());
  for (auto r : ids) out.push_back(hin.edge_type_name(r));
  return out;
}

// LM-weighted draw among edge types whose verbalized sentences are `sequences`.
EdgeTypeId draw_edge(const ScorerBackend& backend, const std::vector<EdgeTypeId>& ids,
                     const std::vector<Tokens>& sequences, double temperature, Rng& rng) {
  auto scores = backend.score_batch(sequences);
  return ids[sample_softmax(scores, temperature, rng)];
}

// Scores candidate edge types for the mask at `position` through the fill
// contract and draws one.
EdgeTypeId draw_edge_fill(const Hin& hin, const ScorerBackend& backend, const MaskedTemplate& tmpl,
                          std::size_t position, const std::vector<EdgeTypeId>& ids,
                          const SamplerConfig& config, Rng& rng) {
  auto names = edge_names(hin, ids);
  auto fills = fill_candidates(backend, tmpl, position, names, names.size(), config.fill_scoring);
  std::vector<double> scores;
  scores.reserve(fills.size());
  for (const auto& f : fills) scores.push_back(f.log_score);
  const auto& chosen = fills[sample_softmax(scores, config.temperature, rng)].tokens;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (names[i] == chosen) return ids[i];
  throw TransportError("backend returned an edge type that was not offered: " + join(chosen));
}

}  // namespace

TypedPath sample_path(const Hin& hin, const ScorerBackend& backend, const ClassifierParams* classifier,
                      NodeIndex head, NodeIndex tail, int hops, const SamplerConfig& config, Rng& rng) {
  if (hops < 1 || hops > 8) throw UsageError("hop count must lie within 1..8");
  const Schema& schema = hin.schema();
  const Node& h = hin.node(head);
  const Node& t = hin.node(tail);

  TypedPath path;
  path.names.push_back(h.name);
  path.types.push_back(h.type);
  path.provenance.emplace_back(head);

  if (hops == 1) {
    auto valid = schema.edges_between(h.type, t.type);
    if (valid.empty()) throw SamplingDeadEnd("no edge type connects the endpoint types");
    path.edge_types.push_back(valid[uniform_index(rng, valid.size())]);
    path.names.push_back(t.name);
    path.types.push_back(t.type);
    path.provenance.emplace_back(tail);
    return path;
  }

  // (a) first and last edge types, schema-valid for the endpoint types.
  auto first_ids = schema.edges_from(h.type);
  if (first_ids.empty()) throw SamplingDeadEnd("head type has no outgoing edge type");
  auto last_ids = schema.edges_into(t.type);
  if (last_ids.empty()) throw SamplingDeadEnd("tail type has no incoming edge type");

  std::vector<Tokens> seqs;
  for (auto r : first_ids) seqs.push_back(concat(h.name, hin.edge_type_name(r)));
  const EdgeTypeId first_edge = draw_edge(backend, first_ids, seqs, config.temperature, rng);
  seqs.clear();
  for (auto r : last_ids) seqs.push_back(concat(hin.edge_type_name(r), t.name));
  EdgeTypeId last_edge = draw_edge(backend, last_ids, seqs, config.temperature, rng);

  // (b) interior edge masks read as "relates to" until they are chosen; the
  // tail edge reads as its up-front draw. Both only matter to scoring that
  // looks right of the mask being filled.
  MaskedTemplate tmpl = build_infill_template(h.name, t.name, hops);
  tmpl = tmpl.filled(tmpl.position_of(MaskKind::kEdge, 1), hin.edge_type_name(first_edge));
  auto scoring_view = [&](std::size_t pos) {
    MaskedTemplate view = tmpl;
    auto masks = view.masks();
    for (auto it = masks.rbegin(); it != masks.rend(); ++it) {
      if (it->position <= pos || it->kind != MaskKind::kEdge) continue;
      view = view.filled(it->position,
                         it->index == hops ? hin.edge_type_name(last_edge) : relates_to());
    }
    return view;
  };
  std::vector<EdgeTypeId> edges{first_edge};

  const auto& candidates = hin.distinct_names();
  for (int k = 1; k < hops; ++k) {
    // (c) fill node k, then type it from its name and the preceding hop.
    auto pos = tmpl.position_of(MaskKind::kNode, k);
    auto fills = fill_candidates(backend, scoring_view(pos), pos, candidates, config.top_k,
                                 config.fill_scoring);
    if (fills.empty()) throw TransportError("backend returned no fills");
    std::vector<double> scores;
    for (const auto& f : fills) scores.push_back(f.log_score);
    const Fill& chosen = fills[sample_softmax(scores, config.temperature, rng)];
    auto typing = type_filled_name(hin, backend, classifier, config, chosen.tokens, path.names.back(),
                                   hin.edge_type_name(edges.back()));
    tmpl = tmpl.filled(pos, chosen.tokens);
    path.names.push_back(chosen.tokens);
    path.types.push_back(typing.type);
    path.provenance.push_back(typing.node);
    path.log_score += chosen.log_score;

    // (d) choose edge k+1 from the schema given the new node type.
    auto epos = tmpl.position_of(MaskKind::kEdge, k + 1);
    if (k + 1 < hops) {
      auto ids = schema.edges_from(typing.type);
      if (ids.empty()) throw SamplingDeadEnd("filled node type has no outgoing edge type");
      auto next = draw_edge_fill(hin, backend, scoring_view(epos), epos, ids, config, rng);
      tmpl = tmpl.filled(epos, hin.edge_type_name(next));
      edges.push_back(next);
    } else {
      if (!schema.contains(typing.type, last_edge, t.type)) {
        auto ids = schema.edges_between(typing.type, t.type);
        if (ids.empty()) throw SamplingDeadEnd("no edge type reaches the tail type");
        seqs.clear();
        for (auto r : ids)
          seqs.push_back(concat(tmpl.left_context_with(epos, hin.edge_type_name(r)), t.name));
        last_edge = draw_edge(backend, ids, seqs, config.temperature, rng);
      }
      tmpl = tmpl.filled(epos, hin.edge_type_name(last_edge));
      edges.push_back(last_edge);
    }
  }

  path.edge_types = std::move(edges);
  path.names.push_back(t.name);
  path.types.push_back(t.type);
  path.provenance.emplace_back(tail);
  return path;
}

SamplingRun sample_paths(const Hin& hin, const ScorerBackend& backend,
                         const ClassifierParams* classifier, const SamplerConfig& config,
                         const PairSource& source) {
  config.validate();
  struct PairResult {
    std::vector<TypedPath> paths;
    SamplingStats stats;
    std::exception_ptr error;
  };
  std::vector<PairResult> results(config.pairs);

  auto run_pair = [&](std::size_t p) {
    auto& out = results[p];
    try {
      Rng rng(derive_seed(config.seed, p));
      auto [head, tail] = sample_pair(hin, config, source, rng);
      for (int hops = config.min_hops; hops <= config.max_hops; ++hops) {
        std::size_t retries_left = config.retries;
        for (std::size_t rep = 0; rep < config.repeats; ++rep) {
          ++out.stats.attempts;
          while (true) {
            try {
              out.paths.push_back(sample_path(hin, backend, classifier, head, tail, hops, config, rng));
              ++out.stats.sampled;
              break;
            } catch (const SamplingDeadEnd&) {
              ++out.stats.dead_ends;
              if (retries_left == 0) {
                ++out.stats.skipped;
                break;
              }
              --retries_left;
            }
          }
        }
      }
    } catch (...) {
      out.error = std::current_exception();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, config.pairs));
  if (workers == 1) {
    for (std::size_t p = 0; p < config.pairs; ++p) run_pair(p);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w)
      threads.emplace_back([&, w] {
        for (std::size_t p = w; p < config.pairs; p += workers) run_pair(p);
      });
    for (auto& th : threads) th.join();
  }

  SamplingRun run;
  for (auto& r : results) {
    if (r.error) std::rethrow_exception(r.error);
    run.stats.attempts += r.stats.attempts;
    run.stats.dead_ends += r.stats.dead_ends;
    run.stats.skipped += r.stats.skipped;
    run.stats.sampled += r.stats.sampled;
    for (auto& path : r.paths) run.paths.push_back(std::move(path));
  }
  return run;
}

std::string typed_path_to_json(const Hin& hin, const TypedPath& path) {
  json names = json::array();
  for (const auto& n : path.names) names.push_back(join(n));
  json edge_types = json::array();
  for (auto r : path.edge_types) edge_types.push_back(join(hin.edge_type_name(r)));
  json type_names = json::array();
  for (auto a : path.types) type_names.push_back(join(hin.type_name(a)));
  json provenance = json::array();
  for (const auto& p : path.provenance) {
    if (p)
      provenance.push_back({{"kind", "graph"}, {"node_id", hin.node(*p).id}});
    else
      provenance.push_back({{"kind", "classifier"}});
  }
  json doc = {{"names", names},
              {"edge_types", edge_types},
              {"edge_type_ids", path.edge_types},
              {"types", path.types},
              {"type_names", type_names},
              {"provenance", provenance},
              {"log_score", path.log_score}};
  return doc.dump();
}

TypedPath typed_path_from_json(const Hin& hin, const std::string& line) {
  try {
    auto doc = json::parse(line);
    TypedPath path;
    for (const auto& n : doc.at("names")) path.names.push_back(tokenize(n.get<std::string>()));
    path.edge_types = doc.at("edge_type_ids").get<std::vector<EdgeTypeId>>();
    path.types = doc.at("types").get<std::vector<TypeId>>();
    for (const auto& p : doc.at("provenance")) {
      if (p.at("kind") == "graph")
        path.provenance.emplace_back(hin.require_index(p.at("node_id").get<NodeId>()));
      else
        path.provenance.emplace_back(std::nullopt);
    }
    path.log_score = doc.at("log_score").get<double>();
    for (auto r : path.edge_types)
      if (r >= hin.num_edge_types()) throw DataError("path references unknown edge type id");
    for (auto a : path.types)
      if (a >= hin.num_node_types()) throw DataError("path references unknown node type id");
    if (!path.well_formed()) throw DataError("malformed typed path");
    return path;
  } catch (const json::exception& e) {
    throw DataError(std::string("paths file: ") + e.what());
  }
}

void write_paths(const Hin& hin, const std::vector<TypedPath>& paths, std::ostream& out) {
  for (const auto& p : paths) out << typed_path_to_json(hin, p) << '\n';
}

std::vector<TypedPath> read_paths(const Hin& hin, std::istream& in) {
  std::vector<TypedPath> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(typed_path_from_json(hin, line));
    } catch (const DataError& e) {
      throw DataError("paths line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_paths_file(const Hin& hin, const std::vector<TypedPath>& paths, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  write_paths(hin, paths, out);
}

std::vector<TypedPath> read_paths_file(const Hin& hin, const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open paths file " + file.string());
  return read_paths(hin, in);
}

}  // namespace metafill
