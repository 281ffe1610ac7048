#include "allserp/labeler.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "allserp/html_tokenizer.hpp"

namespace allserp {
namespace {

using nlohmann::json;

// Class tokens are collected from the card root and descendants up to this
// many levels below it.
constexpr int kTokenDepth = 2;

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string heading_key(std::string_view s) {
  return html::ascii_lower(html::normalize_space(s));
}

std::vector<SignalRule> read_table(const json& tiers, const char* key, bool lower) {
  std::vector<SignalRule> out;
  if (!tiers.contains(key)) return out;
  for (const json& e : tiers.at(key)) {
    const std::string etype_name = e.at("etype").get<std::string>();
    const auto etype = etype_from_string(etype_name);
    if (!etype) throw std::invalid_argument("rules: unknown etype '" + etype_name + "'");
    std::string signal = e.at("signal").get<std::string>();
    out.push_back({lower ? heading_key(signal) : signal, *etype});
  }
  return out;
}

bool has_token(const std::set<std::string>& tokens, const std::vector<std::string>& wanted) {
  return std::any_of(wanted.begin(), wanted.end(),
                     [&](const std::string& w) { return tokens.count(w) > 0; });
}

struct OpenCard {
  std::size_t root_index = 0;
  DocCard card;
  std::string snippet_raw;
  std::string heading_raw;
  std::optional<std::size_t> heading_index;
  bool heading_done = false;
  std::optional<std::size_t> h3_index;
  std::optional<std::size_t> cite_index;

  struct Child {
    std::size_t index = 0;
    std::string snippet_raw;
    int anchors = 0;
  };
  std::vector<Child> children;
  std::optional<std::size_t> open_child;  // position in children
};

}  // namespace

LabelRules parse_rules(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("rules: not valid JSON: ") + e.what());
  }
  LabelRules rules;
  try {
    rules.version = doc.at("version").get<int>();
    if (rules.version != 1) {
      throw std::invalid_argument("rules: unsupported version " + std::to_string(rules.version));
    }
    rules.card_roots = doc.at("card_roots").get<std::vector<std::string>>();
    rules.composite_children = doc.value("composite_children", std::vector<std::string>{});
    const json& tiers = doc.at("tiers");
    for (const auto& [key, _] : tiers.items()) {
      if (key != "1" && key != "2" && key != "3" && key != "4" && key != "7") {
        throw std::invalid_argument("rules: tier '" + key + "' takes no table");
      }
    }
    rules.headings = read_table(tiers, "1", true);
    rules.ad_classes = read_table(tiers, "2", false);
    rules.panel_classes = read_table(tiers, "3", false);
    rules.attrid_prefixes = read_table(tiers, "4", false);
    rules.chrome_classes = read_table(tiers, "7", false);
    if (doc.contains("chrome_sweep")) {
      const json& sweep = doc.at("chrome_sweep");
      rules.sweep_classes = sweep.value("classes", std::vector<std::string>{});
      for (const auto& h : sweep.value("headings", std::vector<std::string>{})) {
        rules.sweep_headings.push_back(heading_key(h));
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("rules: schema error: ") + e.what());
  }
  if (rules.card_roots.empty()) throw std::invalid_argument("rules: card_roots is empty");
  for (const SignalRule& r : rules.ad_classes) {
    if (!is_ad(r.etype)) throw std::invalid_argument("rules: tier 2 entries must be ad etypes");
  }
  return rules;
}

LabelRules load_rules(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("rules: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

const LabelRules& default_rules() {
  static const LabelRules rules = parse_rules(default_rules_text());
  return rules;
}

std::vector<DocCard> parse_doc_cards(std::string_view html_text, const LabelRules& rules) {
  const std::string clean = html::sanitize_utf8(html_text);
  const std::vector<html::Token> tokens = html::tokenize(clean);

  std::vector<DocCard> cards;
  std::vector<std::string> stack;
  std::optional<OpenCard> open;

  auto finalize = [&]() {
    if (!open) return;
    OpenCard& oc = *open;
    oc.card.heading_text = html::normalize_space(oc.heading_raw);
    if (oc.children.empty()) {
      oc.card.snippet_text = html::normalize_space(oc.snippet_raw);
      oc.card.doc_index = static_cast<int>(cards.size());
      cards.push_back(std::move(oc.card));
    } else {
      for (const auto& child : oc.children) {
        DocCard c = oc.card;
        c.snippet_text = html::normalize_space(child.snippet_raw);
        c.anchor_count = child.anchors;
        c.doc_index = static_cast<int>(cards.size());
        cards.push_back(std::move(c));
      }
    }
    open.reset();
  };

  // Drops per-element state for everything at or above stack index `size`.
  auto on_popped = [&](std::size_t size) {
    if (!open) return;
    if (open->root_index >= size) {
      finalize();
      return;
    }
    if (open->heading_index && *open->heading_index >= size) {
      open->heading_index.reset();
      open->heading_done = true;
    }
    if (open->h3_index && *open->h3_index >= size) open->h3_index.reset();
    if (open->cite_index && *open->cite_index >= size) open->cite_index.reset();
    if (open->open_child && open->children[*open->open_child].index >= size) {
      open->open_child.reset();
    }
  };

  for (const html::Token& tok : tokens) {
    switch (tok.kind) {
      case html::Token::Kind::start_tag: {
        std::vector<std::string> classes;
        if (const std::string* cls = tok.attr("class")) classes = split_ws(*cls);
        const std::set<std::string> cls_set(classes.begin(), classes.end());

        if (has_token(cls_set, rules.card_roots)) {
          finalize();
          open.emplace();
          open->root_index = stack.size();
        }
        const bool is_void = html::is_void_element(tok.name) || tok.self_closing;
        const std::size_t index = stack.size();
        if (open) {
          OpenCard& oc = *open;
          const int depth = static_cast<int>(index - oc.root_index);
          if (depth <= kTokenDepth) oc.card.class_tokens.insert(classes.begin(), classes.end());
          if (const std::string* attrid = tok.attr("data-attrid");
              attrid && oc.card.data_attrid.empty()) {
            oc.card.data_attrid = *attrid;
          }
          if (tok.name == "a") {
            ++oc.card.anchor_count;
            if (oc.open_child) ++oc.children[*oc.open_child].anchors;
          }
          if (!is_void) {
            const std::string* role = tok.attr("role");
            const bool heading_like =
                tok.name == "h2" || (role && html::ascii_lower(*role) == "heading");
            if (heading_like && !oc.heading_done && !oc.heading_index) oc.heading_index = index;
            if (tok.name == "h3") {
              oc.card.has_h3 = true;
              if (!oc.h3_index) oc.h3_index = index;
            }
            if (tok.name == "cite") {
              oc.card.has_cite = true;
              if (!oc.cite_index) oc.cite_index = index;
            }
            if (depth > 0 && !oc.open_child && has_token(cls_set, rules.composite_children)) {
              oc.children.push_back({index, {}, 0});
              oc.open_child = oc.children.size() - 1;
            }
          } else {
            if (tok.name == "cite") oc.card.has_cite = true;
          }
        }
        if (!is_void) stack.push_back(tok.name);
        break;
      }
      case html::Token::Kind::end_tag: {
        // Pop to the nearest open element of the same name; ignore strays.
        auto it = std::find(stack.rbegin(), stack.rend(), tok.name);
        if (it == stack.rend()) break;
        const std::size_t new_size = static_cast<std::size_t>(stack.rend() - it) - 1;
        stack.resize(new_size);
        on_popped(new_size);
        break;
      }
      case html::Token::Kind::text: {
        if (!open) break;
        OpenCard& oc = *open;
        std::string* target = nullptr;
        if (oc.heading_index) {
          target = &oc.heading_raw;
        } else if (oc.h3_index || oc.cite_index) {
          target = nullptr;
        } else if (oc.open_child) {
          target = &oc.children[*oc.open_child].snippet_raw;
        } else {
          target = &oc.snippet_raw;
        }
        if (target) {
          *target += ' ';
          *target += tok.text;
        }
        break;
      }
    }
  }
  finalize();
  return cards;
}

EtypeLabel classify_card(const DocCard& card, const LabelRules& rules) {
  EtypeLabel label;
  label.doc_index = card.doc_index;

  if (!card.heading_text.empty()) {
    const std::string key = heading_key(card.heading_text);
    for (const SignalRule& r : rules.headings) {
      if (r.signal == key) {
        label.etype = r.etype;
        label.tier = 1;
        return label;
      }
    }
  }
  for (const SignalRule& r : rules.ad_classes) {
    if (card.class_tokens.count(r.signal)) {
      label.etype = r.etype;
      label.tier = 2;
      label.ad_candidate = true;
      return label;
    }
  }
  for (const SignalRule& r : rules.panel_classes) {
    if (card.class_tokens.count(r.signal)) {
      label.etype = r.etype;
      label.tier = 3;
      return label;
    }
  }
  if (!card.data_attrid.empty()) {
    for (const SignalRule& r : rules.attrid_prefixes) {
      if (card.data_attrid.rfind(r.signal, 0) == 0) {
        label.etype = r.etype;
        label.tier = 4;
        return label;
      }
    }
  }
  if (card.has_h3 && card.has_cite) {
    label.etype = Etype::organic;
    label.tier = 5;
    return label;
  }
  if (!card.heading_text.empty()) {
    label.etype = Etype::other_widget;
    label.tier = 6;
    return label;
  }
  for (const SignalRule& r : rules.chrome_classes) {
    if (card.class_tokens.count(r.signal)) {
      label.etype = r.etype;
      label.tier = 7;
      return label;
    }
  }
  label.etype = Etype::unknown_widget;
  label.tier = 8;
  return label;
}

std::vector<EtypeLabel> label_sequence(const std::vector<DocCard>& cards,
                                       const LabelRules& rules) {
  std::vector<EtypeLabel> labels;
  labels.reserve(cards.size());
  for (const DocCard& c : cards) labels.push_back(classify_card(c, rules));

  // The sweep walks back from the end over the trailing run of cards that are
  // off-axis or footer-ish; the first other main-axis card stops it.
  for (std::size_t i = labels.size(); i-- > 0;) {
    const bool footer =
        has_token(cards[i].class_tokens, rules.sweep_classes) ||
        std::find(rules.sweep_headings.begin(), rules.sweep_headings.end(),
                  heading_key(cards[i].heading_text)) != rules.sweep_headings.end();
    if (footer && labels[i].etype != Etype::chrome) {
      labels[i].etype = Etype::chrome;
      labels[i].tier = 7;
      labels[i].ad_candidate = false;
    }
    if (is_main_axis(labels[i].etype)) break;
  }
  return labels;
}

}  // namespace allserp
