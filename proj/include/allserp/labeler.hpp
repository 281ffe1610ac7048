#pragma once

// HTML-side typing. The saved page is walked for result cards in document
// order and each card is labelled through an 8-tier priority chain:
//
//   1. widget heading text        (rules table, exact, case-insensitive)
//   2. ad class signatures        (ad candidate; binder refines via rects)
//   3. panel class signatures
//   4. data-attrid prefixes
//   5. organic structure          (h3 and cite both present)
//   6. unmatched heading          -> other_widget
//   7. chrome class signatures    -> chrome
//   8. default                    -> unknown_widget
//
// Tables for tiers 1-4 and 7 come from a versioned rules file; tiers 5, 6
// and 8 are structural.

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "allserp/core_model.hpp"

namespace allserp {

struct SignalRule {
  std::string signal;
  Etype etype = Etype::unknown_widget;
};

struct LabelRules {
  int version = 1;
  std::vector<std::string> card_roots;
  std::vector<std::string> composite_children;
  std::vector<SignalRule> headings;         // tier 1, stored lowercased
  std::vector<SignalRule> ad_classes;       // tier 2
  std::vector<SignalRule> panel_classes;    // tier 3
  std::vector<SignalRule> attrid_prefixes;  // tier 4
  std::vector<SignalRule> chrome_classes;   // tier 7
  std::vector<std::string> sweep_classes;
  std::vector<std::string> sweep_headings;  // lowercased
};

/// Parses a rules document (JSON). Throws std::invalid_argument on schema
/// errors, including tables attached to structural tiers 5, 6 or 8.
LabelRules parse_rules(std::string_view json_text);
LabelRules load_rules(const std::filesystem::path& path);
/// The rules file shipped in-repo (rules/default_rules.json), compiled in.
const LabelRules& default_rules();
std::string_view default_rules_text();

struct DocCard {
  int doc_index = 0;
  std::string heading_text;
  std::set<std::string> class_tokens;
  std::string data_attrid;
  bool has_cite = false;
  bool has_h3 = false;
  int anchor_count = 0;
  std::string snippet_text;
};

struct EtypeLabel {
  Etype etype = Etype::unknown_widget;
  int tier = 8;
  int doc_index = 0;
  // Tier-2 ad labels are provisional until matched against shipped rects.
  bool ad_candidate = false;

  friend bool operator==(const EtypeLabel&, const EtypeLabel&) = default;
};

/// Result cards in document order. Elements carrying a card-root class token
/// open a card; card roots never nest, so a new root closes the open one.
/// A card containing composite-child elements yields one DocCard per child,
/// each inheriting the parent's structural signals.
std::vector<DocCard> parse_doc_cards(std::string_view html,
                                     const LabelRules& rules = default_rules());

EtypeLabel classify_card(const DocCard& card, const LabelRules& rules = default_rules());

/// classify_card over all cards, then the chrome sweep: footer-ish cards in
/// the trailing run (after the last card that is main-axis and not
/// footer-ish) become chrome.
std::vector<EtypeLabel> label_sequence(const std::vector<DocCard>& cards,
                                       const LabelRules& rules = default_rules());

}  // namespace allserp
