#include "metafill_cli/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metafill/errors.hpp"

namespace metafill::cli {

namespace {

using K = ValueKind;

std::vector<KeySpec> make_schema() {
  return {
      {"data.nodes", K::kString, "", "nodes TSV (node_id, name, type)"},
      {"data.edges", K::kString, "", "edges TSV (src_id, dst_id, edge_type)"},
      {"data.labels", K::kString, "", "labels TSV (node_id, label); optional"},

      {"backend.kind", K::kString, "builtin", "builtin | remote"},
      {"backend.url", K::kString, "", "remote scorer base URL"},
      {"backend.timeout", K::kReal, "30", "remote request timeout, seconds"},

      {"lm.order", K::kInt, "4", "n-gram order"},
      {"lm.smoothing", K::kReal, "0.1", "add-k constant"},
      {"lm.dim", K::kInt, "32", "token embedding dimension"},
      {"lm.epochs", K::kInt, "5", "token embedding epochs"},
      {"lm.window", K::kInt, "2", "token embedding window"},
      {"lm.negatives", K::kInt, "5", "token embedding negatives"},
      {"lm.lr", K::kReal, "0.025", "token embedding learning rate"},
      {"lm.unk_rate", K::kReal, "0.05", "token dropout rate for the unknown-token row"},

      {"classifier.lambda", K::kReal, "1", "neighbour loss weight"},
      {"classifier.lr", K::kReal, "0.1", "learning rate"},
      {"classifier.epochs", K::kInt, "100", "maximum epochs"},
      {"classifier.batch_size", K::kInt, "32", "mini-batch size"},
      {"classifier.patience", K::kInt, "10", "early-stopping patience"},
      {"classifier.fine_tune", K::kBool, "false", "also update LM token embeddings (builtin only)"},

      {"sampler.min_hops", K::kInt, "1", "shortest path length"},
      {"sampler.max_hops", K::kInt, "4", "longest path length"},
      {"sampler.repeats", K::kInt, "10", "samples per pair and length"},
      {"sampler.pairs", K::kInt, "50", "node pairs per run"},
      {"sampler.temperature", K::kReal, "1", "sampling temperature"},
      {"sampler.top_k", K::kInt, "10", "fills kept per node mask"},
      {"sampler.policy", K::kString, "all", "all | lp-training-edges | nc-label-similar"},
      {"sampler.retries", K::kInt, "3", "retries per pair and length"},
      {"sampler.graph_type_override", K::kBool, "true", "type graph names by their graph type"},
      {"sampler.fill_scoring", K::kString, "left-context", "left-context | full-sequence"},
      {"sampler.pairs_file", K::kString, "", "TSV of node-id pairs used as lp-training-edges"},

      {"induce.q", K::kInt, "8", "meta-paths kept"},

      {"embed.dim", K::kInt, "128", "node embedding dimension"},
      {"embed.walk_length", K::kInt, "1", "transitions per walk"},
      {"embed.walks_per_node", K::kInt, "10", "walks per node and meta-path"},
      {"embed.window", K::kInt, "2", "skip-gram window"},
      {"embed.negatives", K::kInt, "5", "negatives per pair"},
      {"embed.lr", K::kReal, "0.001", "skip-gram learning rate"},
      {"embed.epochs", K::kInt, "5", "skip-gram epochs"},
      {"embed.format", K::kString, "text", "text | binary"},

      {"lp.target", K::kString, "", "edge type to predict; empty disables link prediction"},
      {"lp.test_fraction", K::kReal, "0.2", "held-out share of target edges"},
      {"lp.finetune_epochs", K::kInt, "0", "optional embedding fine-tuning epochs"},
      {"lp.finetune_lr", K::kReal, "0.001", "fine-tuning learning rate"},

      {"nc.test_fraction", K::kReal, "0.2", "held-out share of labelled nodes"},
      {"nc.lr", K::kReal, "0.1", "head learning rate"},
      {"nc.epochs", K::kInt, "200", "maximum epochs"},
      {"nc.patience", K::kInt, "10", "early-stopping patience"},

      {"zero_shot.relation", K::kString, "", "relation text; defaults to lp.target"},
      {"zero_shot.n", K::kInt, "50", "pairs to generate"},

      {"hypothesis.paths", K::kInt, "1000", "2-hop paths to sample"},

      {"run.seed", K::kInt, "1", "master seed"},
      {"run.workers", K::kInt, "1", "threads for sampling and walks"},
      {"run.deterministic", K::kBool, "true", "single-threaded embedding updates"},
      {"run.out_dir", K::kString, "out", "artifact directory"},
      {"run.tasks", K::kString, "auto", "pipeline evaluations: auto or a comma list of lp,nc,zero-shot,hypothesis"},

      {"paths.lm", K::kString, "", "LM file; default <out_dir>/lm.json"},
      {"paths.classifier", K::kString, "", "classifier file; default <out_dir>/classifier.bin"},
      {"paths.paths", K::kString, "", "sampled paths; default <out_dir>/paths.jsonl"},
      {"paths.metapaths", K::kString, "", "ranked meta-paths; default <out_dir>/metapaths.json"},
      {"paths.embeddings", K::kString, "", "embeddings; default <out_dir>/embeddings.tsv or .bin"},
  };
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unquote(const std::string& raw, const std::string& where) {
  if (raw.size() < 2 || raw.back() != '"') throw UsageError(where + ": unterminated string");
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c == '"') throw UsageError(where + ": stray quote in string");
    if (c != '\\') {
      out += c;
      continue;
    }
    if (++i + 1 >= raw.size()) throw UsageError(where + ": unterminated string");
    switch (raw[i]) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      default: throw UsageError(where + ": unknown escape \\" + std::string(1, raw[i]));
    }
  }
  return out;
}

std::string normalise(const KeySpec& spec, const std::string& text, const std::string& where) {
  const auto bad = [&](const char* what) {
    return UsageError(where + ": " + spec.key + " expects " + what + ", got '" + text + "'");
  };
  switch (spec.kind) {
    case K::kString:
      return text;
    case K::kBool:
      if (text == "true" || text == "1") return "true";
      if (text == "false" || text == "0") return "false";
      throw bad("true or false");
    case K::kInt: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size()) throw bad("an integer");
      return std::to_string(v);
    }
    case K::kReal: {
      double v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size()) throw bad("a number");
      char buf[64];
      auto r = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, r.ptr);
    }
  }
  return text;
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = make_schema();
  return schema;
}

Config::Config() {
  for (const auto& s : config_schema()) values_[s.key] = s.default_value;
}

const KeySpec& Config::spec(const std::string& key) const {
  const auto& schema = config_schema();
  auto it = std::find_if(schema.begin(), schema.end(), [&](const KeySpec& s) { return s.key == key; });
  if (it == schema.end()) throw UsageError("unknown config key '" + key + "'");
  return *it;
}

void Config::set_value(const std::string& key, const std::string& value) {
  values_[key] = normalise(spec(key), value, "config");
}

namespace {

// Parses the right-hand side of an assignment into its raw text.
std::string parse_value(const std::string& rhs, const std::string& where, bool allow_bare) {
  if (rhs.empty()) {
    // `--set lp.target=` clears a string key; files must spell out "".
    if (allow_bare) return {};
    throw UsageError(where + ": missing value");
  }
  if (rhs.front() == '"') return unquote(rhs, where);
  if (!allow_bare && rhs.find_first_of(" \t") != std::string::npos)
    throw UsageError(where + ": unquoted value contains spaces");
  return rhs;
}

}  // namespace

void Config::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto where = origin + ":" + std::to_string(lineno);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw UsageError(where + ": empty section name");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where + ": expected key = value");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError(where + ": empty key");
    if (!section.empty()) key = section + "." + key;
    auto value = parse_value(trim(line.substr(eq + 1)), where, false);
    values_[key] = normalise(spec(key), value, where);
  }
}

Config Config::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open config file " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Config c;
  c.merge_text(buf.str(), file.string());
  // Input paths in a config file are relative to the file itself.
  const auto base = std::filesystem::absolute(file).parent_path();
  for (const char* key : {"data.nodes", "data.edges", "data.labels", "sampler.pairs_file"}) {
    auto& v = c.values_[key];
    if (!v.empty() && std::filesystem::path(v).is_relative()) v = (base / v).lexically_normal().string();
  }
  return c;
}

void Config::set(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + assignment + "'");
  auto key = trim(assignment.substr(0, eq));
  auto value = parse_value(trim(assignment.substr(eq + 1)), "--set " + key, true);
  values_[key] = normalise(spec(key), value, "--set");
}

std::string Config::get_string(const std::string& key) const {
  spec(key);
  return values_.at(key);
}

std::int64_t Config::get_int(const std::string& key) const {
  if (spec(key).kind != K::kInt) throw std::logic_error(key + " is not an integer key");
  return std::stoll(values_.at(key));
}

std::size_t Config::get_size(const std::string& key) const {
  auto v = get_int(key);
  if (v < 0) throw UsageError(key + " must be >= 0");
  return static_cast<std::size_t>(v);
}

double Config::get_real(const std::string& key) const {
  if (spec(key).kind != K::kReal) throw std::logic_error(key + " is not a real key");
  double v = 0;
  std::from_chars(values_.at(key).data(), values_.at(key).data() + values_.at(key).size(), v);
  return v;
}

bool Config::get_bool(const std::string& key) const {
  if (spec(key).kind != K::kBool) throw std::logic_error(key + " is not a boolean key");
  return values_.at(key) == "true";
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string Config::hash() const { return sha256_hex(canonical()); }

std::string Config::to_json() const {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [k, v] : values_) doc[k] = v;
  return doc.dump(2);
}

namespace {

std::string hex(const unsigned char* data, unsigned len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += digits[data[i] >> 4];
    out += digits[data[i] & 0xf];
  }
  return out;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  return hex(md, len);
}

std::string sha256_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

}  // namespace metafill::cli
