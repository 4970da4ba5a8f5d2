#include "metafill/verbalizer.hpp"

#include <json.hpp>

#include "metafill/errors.hpp"

namespace metafill {

using nlohmann::json;

namespace {

void append_literals(std::vector<TemplateSlot>& slots, const Tokens& tokens) {
  for (const auto& t : tokens) slots.push_back(TemplateSlot::text(t));
}

std::string_view kind_name(MaskKind kind) { return kind == MaskKind::kEdge ? "edge" : "node"; }

}  // namespace

const Tokens& relates_to() {
  static const Tokens kRelatesTo{"relates", "to"};
  return kRelatesTo;
}

std::vector<MaskInfo> MaskedTemplate::masks() const {
  std::vector<MaskInfo> out;
  for (std::size_t p = 0; p < slots.size(); ++p)
    if (slots[p].is_mask()) out.push_back({slots[p].mask, slots[p].index, p});
  return out;
}

std::size_t MaskedTemplate::count(MaskKind kind) const {
  std::size_t n = 0;
  for (const auto& s : slots) n += s.is_mask() && s.mask == kind;
  return n;
}

std::size_t MaskedTemplate::position_of(MaskKind kind, int index) const {
  for (std::size_t p = 0; p < slots.size(); ++p)
    if (slots[p].is_mask() && slots[p].mask == kind && slots[p].index == index) return p;
  throw UsageError("template has no " + std::string(kind_name(kind)) + " mask " +
                   std::to_string(index));
}

Tokens MaskedTemplate::surface() const {
  Tokens out;
  out.reserve(slots.size());
  for (const auto& s : slots) out.push_back(s.is_mask() ? std::string(kMaskToken) : s.literal);
  return out;
}

MaskedTemplate MaskedTemplate::filled(std::size_t position, const Tokens& fill) const {
  if (position >= slots.size() || !slots[position].is_mask())
    throw UsageError("position " + std::to_string(position) + " is not a mask");
  MaskedTemplate out;
  out.target = target;
  out.slots.reserve(slots.size() + fill.size());
  out.slots.insert(out.slots.end(), slots.begin(), slots.begin() + static_cast<long>(position));
  append_literals(out.slots, fill);
  out.slots.insert(out.slots.end(), slots.begin() + static_cast<long>(position) + 1, slots.end());
  return out;
}

Tokens MaskedTemplate::left_context_with(std::size_t position, const Tokens& fill) const {
  if (position >= slots.size() || !slots[position].is_mask())
    throw UsageError("position " + std::to_string(position) + " is not a mask");
  Tokens out;
  for (std::size_t p = 0; p < position; ++p)
    if (!slots[p].is_mask()) out.push_back(slots[p].literal);
  out.insert(out.end(), fill.begin(), fill.end());
  return out;
}

Tokens MaskedTemplate::literal_tokens() const {
  Tokens out;
  for (const auto& s : slots)
    if (!s.is_mask()) out.push_back(s.literal);
  return out;
}

MaskedTemplate verbalize_edge(const Hin& hin, const Edge& edge, int template_id) {
  const auto& head = hin.node(edge.src).name;
  const auto& tail = hin.node(edge.dst).name;
  const auto& relation = hin.edge_type_name(edge.type);
  MaskedTemplate t;
  switch (template_id) {
    case 1:
      append_literals(t.slots, head);
      append_literals(t.slots, relates_to());
      t.slots.push_back(TemplateSlot::node_mask(1));
      t.target = tail;
      break;
    case 2:
      t.slots.push_back(TemplateSlot::node_mask(1));
      append_literals(t.slots, relates_to());
      append_literals(t.slots, tail);
      t.target = head;
      break;
    case 3:
      append_literals(t.slots, head);
      append_literals(t.slots, relation);
      t.slots.push_back(TemplateSlot::node_mask(1));
      t.target = tail;
      break;
    case 4:
      t.slots.push_back(TemplateSlot::node_mask(1));
      append_literals(t.slots, relation);
      append_literals(t.slots, tail);
      t.target = head;
      break;
    default:
      throw UsageError("unknown template id " + std::to_string(template_id));
  }
  return t;
}

std::vector<Tokens> edge_sentences(const Hin& hin, const Edge& edge) {
  std::vector<Tokens> out;
  out.reserve(4);
  for (int id = 1; id <= 4; ++id) {
    auto t = verbalize_edge(hin, edge, id);
    out.push_back(t.filled(t.position_of(MaskKind::kNode, 1), *t.target).literal_tokens());
  }
  return out;
}

MaskedTemplate build_infill_template(const Tokens& head, const Tokens& tail, int hops) {
  if (hops < 2) throw UsageError("infill templates need at least 2 hops, got " + std::to_string(hops));
  MaskedTemplate t;
  append_literals(t.slots, head);
  for (int i = 1; i <= hops; ++i) {
    if (i > 1) t.slots.push_back(TemplateSlot::text(kConnective));
    t.slots.push_back(TemplateSlot::edge_mask(i));
    if (i < hops) {
      t.slots.push_back(TemplateSlot::node_mask(i));
      t.slots.push_back(TemplateSlot::text(kPeriod));
    }
  }
  append_literals(t.slots, tail);
  return t;
}

Tokens verbalize_context(const Tokens& neighbor, const Tokens& edge_type, const Tokens& node) {
  if (edge_type.empty()) throw UsageError("context needs a non-empty edge type name");
  Tokens out;
  out.reserve(neighbor.size() + edge_type.size() + node.size() + 2);
  out.insert(out.end(), neighbor.begin(), neighbor.end());
  out.emplace_back(kSepToken);
  out.insert(out.end(), edge_type.begin(), edge_type.end());
  out.emplace_back(kSepToken);
  out.insert(out.end(), node.begin(), node.end());
  return out;
}

std::string template_to_json(const MaskedTemplate& tmpl) {
  json masks = json::array();
  for (const auto& m : tmpl.masks())
    masks.push_back({{"kind", kind_name(m.kind)}, {"index", m.index}, {"position", m.position}});
  json doc = {{"tokens", tmpl.surface()}, {"masks", masks}};
  doc["target"] = tmpl.target ? json(*tmpl.target) : json(nullptr);
  return doc.dump();
}

MaskedTemplate template_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("template JSON: ") + e.what());
  }
  try {
    MaskedTemplate t;
    for (const auto& tok : doc.at("tokens")) {
      auto s = tok.get<std::string>();
      t.slots.push_back(s == kSepToken ? TemplateSlot::sep() : TemplateSlot::text(s));
    }
    for (const auto& m : doc.at("masks")) {
      auto pos = m.at("position").get<std::size_t>();
      if (pos >= t.slots.size() || t.slots[pos].literal != kMaskToken)
        throw DataError("template JSON: mask position " + std::to_string(pos) +
                        " does not hold [MASK]");
      auto kind = m.at("kind").get<std::string>();
      if (kind != "edge" && kind != "node") throw DataError("template JSON: bad mask kind " + kind);
      int index = m.at("index").get<int>();
      t.slots[pos] = kind == "edge" ? TemplateSlot::edge_mask(index) : TemplateSlot::node_mask(index);
    }
    if (doc.contains("target") && !doc["target"].is_null())
      t.target = doc["target"].get<Tokens>();
    return t;
  } catch (const json::exception& e) {
    throw DataError(std::string("template JSON: ") + e.what());
  }
}

}  // namespace metafill
