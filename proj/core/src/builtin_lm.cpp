#include "metafill/builtin_lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metafill/errors.hpp"
#include "metafill/random.hpp"

namespace metafill {

using nlohmann::json;

BuiltinLm BuiltinLm::train(const Hin& hin, const BuiltinLmOptions& options) {
  std::vector<Tokens> corpus;
  corpus.reserve(hin.num_edges() * 4);
  for (const auto& e : hin.edges())
    for (auto& s : edge_sentences(hin, e)) corpus.push_back(std::move(s));
  return train_on_corpus(corpus, hin.distinct_names(), options);
}

BuiltinLm BuiltinLm::train_on_corpus(const std::vector<Tokens>& corpus,
                                     const std::vector<Tokens>& name_index,
                                     const BuiltinLmOptions& options) {
  if (options.order < 2) throw UsageError("n-gram order must be >= 2");
  if (!(options.smoothing > 0)) throw UsageError("smoothing constant must be > 0");
  std::size_t token_count = 0;
  for (const auto& s : corpus) token_count += s.size();
  if (token_count == 0) throw DataError("language model corpus is empty");

  BuiltinLm lm;
  lm.options_ = options;
  lm.corpus_ = corpus;
  lm.names_ = name_index;

  std::set<std::string> vocab;
  for (const auto& s : corpus)
    for (const auto& t : s)
      if (!transparent(t)) vocab.insert(t);
  lm.vocab_.assign(vocab.begin(), vocab.end());
  lm.rebuild_index();

  const std::size_t ctx_len = static_cast<std::size_t>(options.order - 1);
  std::vector<std::vector<std::size_t>> sequences;
  Rng rng(derive_seed(options.seed, 0x6c6d));
  const auto unk_row = lm.vocab_.size();
  for (const auto& sentence : corpus) {
    auto ids = lm.encode(sentence);
    std::vector<std::uint32_t> history(ctx_len, kBos);
    for (auto id : ids) {
      for (std::size_t m = 0; m <= ctx_len; ++m) {
        std::vector<std::uint32_t> ctx(history.end() - static_cast<long>(m), history.end());
        auto& c = lm.counts_[ctx];
        ++c.total;
        ++c.next[id];
      }
      history.erase(history.begin());
      history.push_back(id);
    }
    std::vector<std::size_t> seq;
    for (auto id : ids) seq.push_back(uniform01(rng) < options.unk_rate ? unk_row : id);
    if (!seq.empty()) sequences.push_back(std::move(seq));
  }

  SkipGramOptions sg;
  sg.dim = options.dim;
  sg.window = options.window;
  sg.negatives = options.negatives;
  sg.lr = options.lr;
  sg.epochs = options.epochs;
  sg.seed = derive_seed(options.seed, 0x656d62);
  lm.embeddings_ = train_sgns(sequences, lm.vocab_.size() + 1, sg).vectors;
  return lm;
}

void BuiltinLm::rebuild_index() {
  vocab_index_.clear();
  for (std::uint32_t i = 0; i < vocab_.size(); ++i) vocab_index_.emplace(vocab_[i], i);
}

bool BuiltinLm::transparent(const std::string& token) {
  return token == kPeriod || token == kConnective;
}

std::optional<std::uint32_t> BuiltinLm::token_id(const std::string& token) const {
  auto it = vocab_index_.find(token);
  if (it == vocab_index_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t BuiltinLm::id_or_unk(const std::string& token) const {
  auto id = token_id(token);
  return id ? *id : kUnk;
}

std::vector<std::uint32_t> BuiltinLm::encode(const Tokens& tokens) const {
  std::vector<std::uint32_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!transparent(t)) out.push_back(id_or_unk(t));
  return out;
}

const BuiltinLm::ContextCounts& BuiltinLm::resolve(const std::vector<std::uint32_t>& history) const {
  const std::size_t ctx_len = static_cast<std::size_t>(options_.order - 1);
  for (std::size_t m = std::min(ctx_len, history.size()) + 1; m-- > 0;) {
    std::vector<std::uint32_t> ctx(history.end() - static_cast<long>(m), history.end());
    auto it = counts_.find(ctx);
    if (it != counts_.end() && it->second.total > 0) return it->second;
  }
  // The empty context is always present for a non-empty corpus.
  return counts_.at({});
}

double BuiltinLm::log_prob_next(const std::vector<std::uint32_t>& history, std::uint32_t token) const {
  const auto& c = resolve(history);
  std::uint64_t count = 0;
  if (token != kUnk) {
    auto it = c.next.find(token);
    if (it != c.next.end()) count = it->second;
  }
  const double k = options_.smoothing;
  const double v = static_cast<double>(vocab_.size());
  return std::log((static_cast<double>(count) + k) / (static_cast<double>(c.total) + k * v));
}

double BuiltinLm::extend(std::vector<std::uint32_t>& history, const Tokens& tokens) const {
  double sum = 0.0;
  for (auto id : encode(tokens)) {
    sum += log_prob_next(history, id);
    history.push_back(id);
  }
  return sum;
}

BackendInfo BuiltinLm::info() const { return {embeddings_.dim(), {"score", "fill", "embed"}}; }

double BuiltinLm::score(const Tokens& tokens) const {
  if (tokens.empty()) throw UsageError("score: empty sequence");
  std::vector<std::uint32_t> history(static_cast<std::size_t>(options_.order - 1), kBos);
  double sum = 0.0;
  for (auto id : encode(tokens)) {
    sum += log_prob_next(history, id);
    history.push_back(id);
  }
  return sum;
}

std::vector<Fill> BuiltinLm::fill(const MaskedTemplate& tmpl, std::size_t mask_position,
                                  const std::vector<Tokens>* candidates, std::size_t k) const {
  const auto& pool = candidates ? *candidates : names_;
  if (pool.empty()) throw UsageError("fill: empty candidate set");
  // score(left + c) accumulates left to right, so continuing from the left
  // context's running sum reproduces it bit for bit.
  std::vector<std::uint32_t> history(static_cast<std::size_t>(options_.order - 1), kBos);
  double base = 0.0;
  for (auto id : encode(tmpl.left_context_with(mask_position, {}))) {
    base += log_prob_next(history, id);
    history.push_back(id);
  }
  std::vector<Fill> fills;
  fills.reserve(pool.size());
  for (const auto& cand : pool) {
    auto h = history;
    double s = base;
    for (auto id : encode(cand)) {
      s += log_prob_next(h, id);
      h.push_back(id);
    }
    fills.push_back({cand, s});
  }
  rank_fills(fills, k);
  return fills;
}

std::size_t BuiltinLm::embedding_row(const std::string& token) const {
  auto id = token_id(token);
  return id ? *id : vocab_.size();
}

std::vector<double> BuiltinLm::embed(const Tokens& tokens) const {
  if (tokens.empty()) throw UsageError("embed: empty sequence");
  std::vector<double> out(embeddings_.dim(), 0.0);
  for (const auto& t : tokens) {
    auto row = embeddings_.row(embedding_row(t));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += row[i];
  }
  for (auto& x : out) x /= static_cast<double>(tokens.size());
  return out;
}

double BuiltinLm::probability(const Tokens& context, const std::string& token) const {
  std::vector<std::uint32_t> history(static_cast<std::size_t>(options_.order - 1), kBos);
  for (auto id : encode(context)) history.push_back(id);
  return std::exp(log_prob_next(history, id_or_unk(token)));
}

std::vector<double> BuiltinLm::distribution_for_ids(const std::vector<std::uint32_t>& context) const {
  std::vector<std::uint32_t> history(static_cast<std::size_t>(options_.order - 1), kBos);
  history.insert(history.end(), context.begin(), context.end());
  const auto& c = resolve(history);
  const double k = options_.smoothing;
  const double denom = static_cast<double>(c.total) + k * static_cast<double>(vocab_.size());
  std::vector<double> p(vocab_.size(), k / denom);
  for (const auto& [id, count] : c.next) p[id] = (static_cast<double>(count) + k) / denom;
  return p;
}

std::vector<double> BuiltinLm::distribution(const Tokens& context) const {
  return distribution_for_ids(encode(context));
}

std::vector<std::vector<std::uint32_t>> BuiltinLm::observed_contexts() const {
  std::vector<std::vector<std::uint32_t>> out;
  out.reserve(counts_.size());
  for (const auto& [ctx, c] : counts_) out.push_back(ctx);
  return out;
}

std::string BuiltinLm::to_json() const {
  json counts = json::array();
  for (const auto& [ctx, c] : counts_) {
    json next = json::array();
    for (const auto& [id, n] : c.next) next.push_back({id, n});
    counts.push_back({{"context", ctx}, {"total", c.total}, {"next", next}});
  }
  json doc = {
      {"format", "metafill-builtin-lm"},
      {"version", 1},
      {"options",
       {{"order", options_.order},
        {"smoothing", options_.smoothing},
        {"dim", options_.dim},
        {"epochs", options_.epochs},
        {"window", options_.window},
        {"negatives", options_.negatives},
        {"lr", options_.lr},
        {"unk_rate", options_.unk_rate},
        {"seed", options_.seed}}},
      {"vocab", vocab_},
      {"names", names_},
      {"counts", counts},
      {"embeddings",
       {{"rows", embeddings_.rows()}, {"dim", embeddings_.dim()}, {"data", embeddings_.data()}}},
  };
  return doc.dump();
}

BuiltinLm BuiltinLm::from_json(const std::string& text) {
  try {
    auto doc = json::parse(text);
    if (doc.at("format") != "metafill-builtin-lm") throw DataError("not a metafill LM file");
    BuiltinLm lm;
    const auto& o = doc.at("options");
    lm.options_.order = o.at("order");
    lm.options_.smoothing = o.at("smoothing");
    lm.options_.dim = o.at("dim");
    lm.options_.epochs = o.at("epochs");
    lm.options_.window = o.at("window");
    lm.options_.negatives = o.at("negatives");
    lm.options_.lr = o.at("lr");
    lm.options_.unk_rate = o.at("unk_rate");
    lm.options_.seed = o.at("seed");
    lm.vocab_ = doc.at("vocab").get<std::vector<std::string>>();
    lm.names_ = doc.at("names").get<std::vector<Tokens>>();
    lm.rebuild_index();
    for (const auto& entry : doc.at("counts")) {
      ContextCounts c;
      c.total = entry.at("total");
      for (const auto& pair : entry.at("next")) c.next.emplace(pair.at(0), pair.at(1));
      lm.counts_.emplace(entry.at("context").get<std::vector<std::uint32_t>>(), std::move(c));
    }
    if (!lm.counts_.contains({})) throw DataError("LM file lacks unigram counts");
    const auto& emb = doc.at("embeddings");
    lm.embeddings_ = EmbeddingMatrix(emb.at("rows"), emb.at("dim"));
    lm.embeddings_.data() = emb.at("data").get<std::vector<double>>();
    if (lm.embeddings_.data().size() != lm.embeddings_.rows() * lm.embeddings_.dim() ||
        lm.embeddings_.rows() != lm.vocab_.size() + 1)
      throw DataError("LM file: embedding matrix has the wrong shape");
    return lm;
  } catch (const json::exception& e) {
    throw DataError(std::string("LM file: ") + e.what());
  }
}

void BuiltinLm::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  out << to_json() << '\n';
}

BuiltinLm BuiltinLm::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open language model " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace metafill
