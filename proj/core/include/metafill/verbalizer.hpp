#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "metafill/hin.hpp"
#include "metafill/tokens.hpp"

namespace metafill {

inline constexpr const char* kMaskToken = "[MASK]";
inline constexpr const char* kSepToken = "[SEP]";
// Template literals keep their capitalisation; names are lower-cased, so the
// connective can never collide with a name token.
inline constexpr const char* kConnective = "It";
inline constexpr const char* kPeriod = ".";

// The edge-type-agnostic relation used by templates 1 and 2 and as the
// initial value of interior edge masks during infilling.
const Tokens& relates_to();

enum class MaskKind { kEdge, kNode };

struct TemplateSlot {
  enum class Kind { kLiteral, kMask, kSep };
  Kind kind = Kind::kLiteral;
  std::string literal;           // kLiteral only
  MaskKind mask = MaskKind::kNode;  // kMask only
  int index = 0;                 // 1-based mask index within its kind

  static TemplateSlot text(std::string t) { return {Kind::kLiteral, std::move(t), {}, 0}; }
  static TemplateSlot sep() { return {Kind::kSep, kSepToken, {}, 0}; }
  static TemplateSlot edge_mask(int i) { return {Kind::kMask, {}, MaskKind::kEdge, i}; }
  static TemplateSlot node_mask(int i) { return {Kind::kMask, {}, MaskKind::kNode, i}; }

  bool is_mask() const { return kind == Kind::kMask; }
  friend bool operator==(const TemplateSlot&, const TemplateSlot&) = default;
};

struct MaskInfo {
  MaskKind kind;
  int index;
  std::size_t position;
};

struct MaskedTemplate {
  std::vector<TemplateSlot> slots;
  std::optional<Tokens> target;

  std::vector<MaskInfo> masks() const;
  std::size_t count(MaskKind kind) const;
  // Position of the given mask in `slots`; throws UsageError if absent.
  std::size_t position_of(MaskKind kind, int index) const;

  // Surface tokens with masks rendered as "[MASK]".
  Tokens surface() const;
  // Replaces the mask at `position` by a literal token run.
  MaskedTemplate filled(std::size_t position, const Tokens& fill) const;
  // Tokens of slots [0, position) followed by `fill`; unfilled masks in the
  // left context are dropped.
  Tokens left_context_with(std::size_t position, const Tokens& fill) const;
  // All tokens with remaining masks dropped.
  Tokens literal_tokens() const;

  friend bool operator==(const MaskedTemplate&, const MaskedTemplate&) = default;
};

// Templates 1..4 for an edge: 1 `v_h relates to [MASK]`, 2 `[MASK] relates to
// v_t`, 3 `v_h r [MASK]`, 4 `[MASK] r v_t`. The target is the masked name.
MaskedTemplate verbalize_edge(const Hin& hin, const Edge& edge, int template_id);

// The four templates with their targets substituted (the LM training corpus
// contribution of one edge).
std::vector<Tokens> edge_sentences(const Hin& hin, const Edge& edge);

// `v_h [E1] [V1] . It [E2] [V2] . It ... [El] v_t`, hops >= 2.
MaskedTemplate build_infill_template(const Tokens& head, const Tokens& tail, int hops);

// `v_j [SEP] a [SEP] v_i`
Tokens verbalize_context(const Tokens& neighbor, const Tokens& edge_type, const Tokens& node);

std::string template_to_json(const MaskedTemplate& tmpl);
MaskedTemplate template_from_json(const std::string& json);

}  // namespace metafill
