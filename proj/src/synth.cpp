#include "allserp/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "allserp/ingest.hpp"

namespace allserp::synth {
namespace {

constexpr int kColumnWidth = kColumnX1 - kColumnX0;
constexpr int kRailWidth = kRailX1 - kRailX0;
constexpr int kBottomMargin = 80;

constexpr const char* kWords[] = {
    "alpha",  "beta",   "gamma",  "delta",   "harbor", "lantern", "meadow", "quartz",
    "river",  "summit", "timber", "velvet",  "willow", "amber",   "bridge", "cobalt",
    "dune",   "ember",  "fjord",  "granite", "hollow", "island",  "juniper", "kettle",
    "lumen",  "marble", "nectar", "orchid",  "pepper", "quill",   "raven",  "saffron",
    "tundra", "umber",  "violet", "walnut",  "yarrow", "zephyr",  "cedar",  "maple",
};
constexpr int kNumWords = static_cast<int>(std::size(kWords));

std::string words(Rng& rng, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kWords[rng.uniform(0, kNumWords - 1)];
  }
  return out;
}

// Bands of text lines filling [y0, y1) exactly: the first row and the last
// row are ink rows, interline gaps are 0-2 rows, the first line spans the
// full width.
void render_block(GrayRaster& r, int x0, int x1, int y0, int y1, Rng& rng) {
  const int width = x1 - x0;
  int y = y0;
  bool first = true;
  while (y < y1) {
    int lh = rng.uniform(10, 16);
    if (y1 - y - lh < 12) lh = y1 - y;
    const int line_x1 = first ? x1 : x0 + rng.uniform(width * 2 / 5, width);
    first = false;
    for (int row = y; row < y + lh; ++row) {
      for (int x = x0; x < line_x1; ++x) {
        if (rng.next() % 10 < 3) r.at(x, row) = kInk;
      }
    }
    y += lh;
    if (y < y1) y += rng.uniform(0, 2);
  }
}

struct Segment {
  std::size_t card = 0;
  int index = 0;  // within the card
  int text_y0 = 0;
  int text_y1 = 0;
  Box box;        // planted AOI geometry
};

std::vector<Segment> plant_segments(const std::vector<CardPlan>& cards) {
  std::vector<Segment> out;
  for (std::size_t c = 0; c < cards.size(); ++c) {
    const CardPlan& card = cards[c];
    int y = card.y;
    std::vector<Segment> segs;
    for (std::size_t k = 0; k < card.segments.size(); ++k) {
      Segment s;
      s.card = c;
      s.index = static_cast<int>(k);
      s.text_y0 = y;
      s.text_y1 = y + card.segments[k];
      y = s.text_y1 + (k < card.bands.size() ? card.bands[k] : 0);
      segs.push_back(s);
    }
    // Composite children meet at the floor midpoint of each quiet band.
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const int top = k == 0 ? segs[k].text_y0 : (segs[k - 1].text_y1 + segs[k].text_y0) / 2;
      const int bottom =
          k + 1 == segs.size() ? segs[k].text_y1 : (segs[k].text_y1 + segs[k + 1].text_y0) / 2;
      segs[k].box = {kColumnX0, top, kColumnWidth, bottom - top};
    }
    out.insert(out.end(), segs.begin(), segs.end());
  }
  return out;
}

void validate_spec(const LayoutSpec& spec) {
  int prev_bottom = 0;
  for (std::size_t i = 0; i < spec.cards.size(); ++i) {
    const CardPlan& c = spec.cards[i];
    if (c.segments.empty() || c.bands.size() + 1 != c.segments.size()) {
      throw std::invalid_argument(fmt::format("card {}: segments/bands mismatch", i));
    }
    for (int s : c.segments) {
      if (s <= 0) throw std::invalid_argument(fmt::format("card {}: empty segment", i));
    }
    for (int b : c.bands) {
      if (b <= 0) throw std::invalid_argument(fmt::format("card {}: empty band", i));
    }
    if (c.etype == Etype::dd_right) {
      throw std::invalid_argument("dd_right belongs in LayoutSpec::rail");
    }
    if (c.y < 0) throw std::invalid_argument(fmt::format("card {} starts above the page", i));
    if (i > 0 && c.y < prev_bottom) {
      throw std::invalid_argument(
          fmt::format("planted cards {} and {} overlap at y={}", i - 1, i, c.y));
    }
    prev_bottom = c.y + c.height();
  }
  if (spec.rail && (spec.rail->y < 0 || spec.rail->h <= 0)) {
    throw std::invalid_argument("rail ad has invalid geometry");
  }
  if (spec.n_fixations < 0) throw std::invalid_argument("negative fixation count");
  const ClickPlan& cp = spec.click;
  const bool needs_card = cp.target == ClickTarget::main_axis ||
                          cp.target == ClickTarget::tolerance || cp.target == ClickTarget::chrome;
  if (needs_card) {
    if (cp.card < 0 || cp.card >= static_cast<int>(spec.cards.size())) {
      throw std::invalid_argument("click plan names no card");
    }
    const Etype e = spec.cards[static_cast<std::size_t>(cp.card)].etype;
    if (cp.target == ClickTarget::chrome ? e != Etype::chrome : !is_main_axis(e)) {
      throw std::invalid_argument("click plan card has the wrong etype for its target");
    }
  }
  if (cp.target == ClickTarget::dd_right && !spec.rail) {
    throw std::invalid_argument("dd_right click planted without a rail ad");
  }
}

std::string card_html(const CardPlan& card, Rng& rng) {
  auto link = [&] {
    const std::string domain = fmt::format("www.{}.example", kWords[rng.uniform(0, kNumWords - 1)]);
    return std::make_pair(domain, fmt::format("https://{}/{}", domain, kWords[rng.uniform(0, kNumWords - 1)]));
  };
  auto result_body = [&](const char* snippet_tag) {
    // Draws are sequenced explicitly; argument evaluation order is unspecified.
    const auto [domain, href] = link();
    const std::string title = words(rng, rng.uniform(3, 6));
    const std::string lead = words(rng, rng.uniform(8, 20));
    const std::string tail = words(rng, rng.uniform(2, 6));
    return fmt::format("<a href=\"{}\"><h3>{}</h3></a><cite>{}</cite><{} class=\"VwiC3b\">{}<p>{}</{}>",
                       href, title, domain, snippet_tag, lead, tail, snippet_tag);
  };
  auto children = [&](auto&& body) {
    std::string out;
    for (std::size_t k = 0; k < card.segments.size(); ++k) {
      out += "<div class=\"serp-sub\">" + body() + "</div>";
    }
    return out;
  };
  const bool composite = card.segments.size() > 1;

  switch (card.etype) {
    case Etype::organic:
      if (composite) {
        return "<div class=\"serp-card g\">" + children([&] { return result_body("span"); }) + "</div>";
      }
      return "<div class=\"serp-card g\"><div class=\"yuRUbf\">" + result_body("div") + "</div></div>";
    case Etype::dd_top:
      return "<div class=\"serp-card ads-top\"><span>Sponsored</span>" + result_body("div") + "</div>";
    case Etype::native_ad:
      return "<div class=\"serp-card ads-native\"><span>Sponsored</span>" + result_body("div") + "</div>";
    case Etype::knowledge_panel:
    {
      const std::string a = words(rng, 3);
      const std::string b = words(rng, 12);
      const std::string c = words(rng, 1);
      if (card.via_attrid) {
        return fmt::format(
            "<div class=\"serp-card\"><div data-attrid=\"kc:/location/location:address\">"
            "<span>{}</span></div><div>{}</div></div>",
            a, b);
      }
      return fmt::format(
          "<div class=\"serp-card kp-wholepage\"><div data-attrid=\"title\">{}</div>"
          "<div>{}</div><a href=\"#\">{}</a></div>",
          a, b, c);
    }
    case Etype::top_places: {
      const std::string a = words(rng, 10);
      const std::string b = words(rng, 2);
      const std::string c = words(rng, 2);
      return fmt::format(
          "<div class=\"serp-card\"><h2 role=\"heading\">Places</h2><div>{}</div>"
          "<a href=\"#\">{}</a><a href=\"#\">{}</a></div>",
          a, b, c);
    }
    case Etype::paa: {
      std::string qs;
      for (int i = rng.uniform(2, 4); i > 0; --i) {
        qs += fmt::format("<div class=\"related-question-pair\">{}?</div>", words(rng, 5));
      }
      return "<div class=\"serp-card\"><h2>People also ask</h2>" + qs + "</div>";
    }
    case Etype::image_pack: {
      std::string imgs;
      for (int i = rng.uniform(3, 6); i > 0; --i) {
        imgs += fmt::format("<img src=\"/img/{}.png\" alt=\"{}\">", i, words(rng, 1));
      }
      return "<div class=\"serp-card\"><h2>Images</h2>" + imgs + "</div>";
    }
    case Etype::top_stories:
      if (composite) {
        return "<div class=\"serp-card\"><h2>Top stories</h2>" + children([&] {
                 return fmt::format("<a href=\"#\"><span>{}</span></a>", words(rng, 8));
               }) + "</div>";
      }
      return fmt::format("<div class=\"serp-card\"><h2>Top stories</h2><a href=\"#\">{}</a></div>",
                         words(rng, 10));
    case Etype::other_widget:
      return fmt::format("<div class=\"serp-card\"><h2>Things to know</h2><div>{}</div></div>",
                         words(rng, 12));
    case Etype::unknown_widget:
      return fmt::format("<div class=\"serp-card\"><div class=\"xpdopen\"><span>{}</span></div></div>",
                         words(rng, 9));
    case Etype::related_searches: {
      std::string links;
      for (int i = rng.uniform(4, 8); i > 0; --i) {
        links += fmt::format("<a href=\"#\">{}</a>", words(rng, 3));
      }
      return "<div class=\"serp-card\"><h2>Related searches</h2>" + links + "</div>";
    }
    case Etype::chrome:
      if (card.y < 200) {
        return "<div class=\"serp-card search-tools\"><a href=\"#\">All</a><a href=\"#\">News</a>"
               "<a href=\"#\">Maps</a><a href=\"#\">Tools</a></div>";
      }
      return "<div class=\"serp-card footer-links\"><a href=\"#\">Help</a><a href=\"#\">Privacy</a>"
             "<a href=\"#\">Terms</a></div>";
    case Etype::dd_right:
      break;
  }
  throw std::invalid_argument(fmt::format("no card template for {}", to_string(card.etype)));
}

std::string rail_html(Rng& rng) {
  const std::string title = words(rng, 4);
  const std::string body = words(rng, 14);
  return fmt::format(
      "<div class=\"serp-card ads-rhs\"><span>Sponsored</span><a href=\"#\"><h3>{}</h3></a>"
      "<cite>shop.example</cite><div>{}</div></div>",
      title, body);
}

// Whole pixel plus one decimal, drawn in that order.
double coord(Rng& rng, int lo, int hi) {
  const int whole = rng.uniform(lo, hi);
  return whole + rng.uniform(0, 9) / 10.0;
}

// A point inside b, at least `margin` px from every edge when b allows.
std::pair<double, double> interior_point(const Box& b, Rng& rng, int mx = 15, int my = 12) {
  mx = std::min(mx, (b.w - 1) / 2);
  my = std::min(my, (b.h - 1) / 2);
  const double x = coord(rng, b.x + mx, b.x1() - 1 - mx);
  const double y = coord(rng, b.y + my, b.y1() - 1 - my);
  return {x, y};
}

// Re-entry by brute force: some visit to the AOI, then a visit elsewhere,
// then a visit back.
bool reenters(const std::vector<std::size_t>& seq, std::size_t aoi) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] != aoi) continue;
    for (std::size_t j = i + 1; j < seq.size(); ++j) {
      if (seq[j] == aoi) continue;
      for (std::size_t k = j + 1; k < seq.size(); ++k) {
        if (seq[k] == aoi) return true;
      }
    }
  }
  return false;
}

}  // namespace

int Rng::uniform(int lo, int hi) {
  if (hi <= lo) return lo;
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
  return lo + static_cast<int>(engine_() % span);
}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = unit();
  while (u1 <= 0.0) u1 = unit();
  const double u2 = unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t trial_seed(std::uint64_t corpus_seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = corpus_seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int CardPlan::height() const {
  return std::accumulate(segments.begin(), segments.end(), 0) +
         std::accumulate(bands.begin(), bands.end(), 0);
}

std::string_view to_string(ClickTarget t) {
  switch (t) {
    case ClickTarget::main_axis: return "main_axis";
    case ClickTarget::tolerance: return "tolerance";
    case ClickTarget::dd_right: return "dd_right";
    case ClickTarget::chrome: return "chrome";
    case ClickTarget::far: return "far";
    case ClickTarget::none: return "none";
    case ClickTarget::pathological: return "pathological";
  }
  return "none";
}

LayoutSpec random_layout(Rng& rng, const std::string& trial_id) {
  LayoutSpec spec;
  spec.trial_id = trial_id;
  spec.query_text = words(rng, rng.uniform(2, 3));
  constexpr int kViewports[] = {768, 900, 1080};
  spec.viewport_height = kViewports[rng.uniform(0, 2)];

  int y = rng.uniform(100, 140);
  auto gap = [&] { return rng.uniform(8, 60); };
  auto push = [&](Etype e, std::vector<int> segments, std::vector<int> bands = {}) {
    CardPlan c;
    c.etype = e;
    c.y = y;
    c.segments = std::move(segments);
    c.bands = std::move(bands);
    y += c.height() + gap();
    spec.cards.push_back(std::move(c));
  };

  if (rng.chance(0.3)) push(Etype::chrome, {32});
  const int first_result_y = y;
  const int n_top_ads = std::max(0, rng.uniform(-2, 3));
  for (int i = 0; i < n_top_ads; ++i) push(Etype::dd_top, {rng.uniform(80, 140)});

  const int n_main = rng.uniform(6, 11);
  for (int i = 0; i < n_main; ++i) {
    const int roll = rng.uniform(0, 99);
    if (roll < 55) {
      push(Etype::organic, {rng.uniform(80, 320)});
    } else if (roll < 60) {
      // Composite: children sum well past the subdivision trigger.
      const Etype e = rng.chance(0.6) ? Etype::organic : Etype::top_stories;
      if (rng.chance(0.5)) {
        push(e, {rng.uniform(180, 240), rng.uniform(180, 240)}, {rng.uniform(4, 7)});
      } else {
        push(e, {rng.uniform(120, 200), rng.uniform(120, 200), rng.uniform(120, 200)},
             {rng.uniform(4, 7), rng.uniform(4, 7)});
      }
    } else {
      constexpr Etype kWidgets[] = {Etype::native_ad,    Etype::top_places,   Etype::knowledge_panel,
                                    Etype::paa,          Etype::image_pack,   Etype::top_stories,
                                    Etype::other_widget, Etype::unknown_widget};
      const Etype e = kWidgets[rng.uniform(0, 7)];
      push(e, {rng.uniform(80, 320)});
      if (e == Etype::knowledge_panel) spec.cards.back().via_attrid = rng.chance(0.5);
    }
  }
  if (rng.chance(0.5)) push(Etype::related_searches, {rng.uniform(100, 180)});
  if (rng.chance(0.7)) push(Etype::chrome, {rng.uniform(40, 80)});

  if (rng.chance(0.4)) spec.rail = RailAd{first_result_y + rng.uniform(0, 200), rng.uniform(150, 400)};

  spec.n_fixations = rng.uniform(12, 40);

  std::vector<int> main_cards, chrome_cards;
  for (std::size_t i = 0; i < spec.cards.size(); ++i) {
    if (is_main_axis(spec.cards[i].etype)) main_cards.push_back(static_cast<int>(i));
    if (spec.cards[i].etype == Etype::chrome) chrome_cards.push_back(static_cast<int>(i));
  }
  ClickPlan& cp = spec.click;
  const int roll = rng.uniform(0, 99);
  if (roll < 70) {
    cp.target = ClickTarget::main_axis;
  } else if (roll < 78) {
    cp.target = ClickTarget::tolerance;
  } else if (roll < 85) {
    cp.target = spec.rail ? ClickTarget::dd_right : ClickTarget::main_axis;
  } else if (roll < 90) {
    cp.target = chrome_cards.empty() ? ClickTarget::far : ClickTarget::chrome;
  } else if (roll < 93) {
    cp.target = ClickTarget::far;
  } else if (roll < 97) {
    cp.target = ClickTarget::none;
  } else {
    cp.target = ClickTarget::pathological;
  }
  if (cp.target == ClickTarget::main_axis || cp.target == ClickTarget::tolerance) {
    cp.card = main_cards[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(main_cards.size()) - 1))];
  } else if (cp.target == ClickTarget::chrome) {
    cp.card = chrome_cards[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(chrome_cards.size()) - 1))];
  }
  cp.n_intermediate = cp.target == ClickTarget::none ? 0 : rng.uniform(0, 2);
  cp.flag_final = rng.chance(0.8);
  return spec;
}

GeneratedTrial generate_trial(const LayoutSpec& spec, Rng& rng, double noise_sigma) {
  validate_spec(spec);
  const std::vector<Segment> segments = plant_segments(spec.cards);

  int height = std::max(spec.viewport_height, spec.min_page_height);
  if (!spec.cards.empty()) {
    height = std::max(height, spec.cards.back().y + spec.cards.back().height() + kBottomMargin);
  }
  if (spec.rail) height = std::max(height, spec.rail->y + spec.rail->h + kBottomMargin);

  GeneratedTrial out;
  TrialBundle& b = out.bundle;
  GroundTruth& gt = out.truth;
  gt.trial_id = spec.trial_id;

  TrialMeta meta;
  meta.trial_id = spec.trial_id;
  meta.viewport_width = spec.viewport_width;
  meta.viewport_height = spec.viewport_height;
  meta.screenshot_width = kPageWidth;
  meta.screenshot_height = height;
  meta.query_text = spec.query_text;
  meta.entry_timestamp = 1'700'000'000'000 + static_cast<std::int64_t>(rng.next() % 1'000'000'000);
  b.meta = meta;

  // Raster.
  b.screenshot = GrayRaster(kPageWidth, height, kBackground);
  for (const Segment& s : segments) {
    render_block(b.screenshot, kColumnX0, kColumnX1, s.text_y0, s.text_y1, rng);
  }
  if (spec.rail) {
    render_block(b.screenshot, kRailX0, kRailX1, spec.rail->y, spec.rail->y + spec.rail->h, rng);
  }

  // HTML in document order; the rail card follows the leading ad block.
  std::size_t rail_slot = 0;
  while (rail_slot < spec.cards.size() && (spec.cards[rail_slot].etype == Etype::dd_top ||
                                           spec.cards[rail_slot].etype == Etype::chrome)) {
    ++rail_slot;
  }
  std::vector<int> doc_index_of_segment(segments.size(), -1);
  std::string body;
  int doc = 0;
  std::size_t seg_cursor = 0;
  for (std::size_t c = 0; c <= spec.cards.size(); ++c) {
    if (c == rail_slot && spec.rail) {
      body += rail_html(rng) + "\n";
      gt.doc_labels.push_back(Etype::dd_right);
      ++doc;
    }
    if (c == spec.cards.size()) break;
    body += "<!-- result -->" + card_html(spec.cards[c], rng) + "\n";
    for (std::size_t k = 0; k < spec.cards[c].segments.size(); ++k) {
      doc_index_of_segment[seg_cursor++] = doc++;
      gt.doc_labels.push_back(spec.cards[c].etype);
    }
  }
  b.html = fmt::format(
      "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{0} - Search</title>"
      "<script>var tpl = \"<div class='serp-card'>\";</script></head>\n"
      "<body><div id=\"searchform\"><input name=\"q\" value=\"{0}\"></div>\n<div id=\"search\">\n{1}"
      "</div></body></html>\n",
      spec.query_text, body);

  // Shipped ad rects.
  for (const Segment& s : segments) {
    const Etype e = spec.cards[s.card].etype;
    if (e == Etype::dd_top || e == Etype::native_ad) b.ad_rects.push_back({e, s.box});
  }
  std::optional<Box> rail_box;
  if (spec.rail) {
    rail_box = Box{kRailX0, spec.rail->y, kRailWidth, spec.rail->h};
    b.ad_rects.push_back({Etype::dd_right, *rail_box});
  }

  // Typed ground truth in pipeline order: off-axis by (y, x), then
  // main-axis by position.
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    const CardPlan& card = spec.cards[s.card];
    TypedAoi a;
    a.etype = card.etype;
    a.box = s.box;
    a.doc_index = doc_index_of_segment[i];
    a.source = is_ad(card.etype)          ? AoiSource::shipped_ad
               : card.segments.size() > 1 ? AoiSource::subdivision
                                          : AoiSource::cv_span;
    gt.typed.push_back(a);
  }
  if (rail_box) {
    TypedAoi a;
    a.etype = Etype::dd_right;
    a.box = *rail_box;
    a.source = AoiSource::shipped_ad;
    gt.typed.push_back(a);
  }
  std::stable_sort(gt.typed.begin(), gt.typed.end(), [](const TypedAoi& l, const TypedAoi& r) {
    const bool lm = is_main_axis(l.etype), rm = is_main_axis(r.etype);
    if (lm != rm) return !lm;
    if (l.box.y != r.box.y) return l.box.y < r.box.y;
    return l.box.x < r.box.x;
  });
  int pos = 0;
  for (std::size_t i = 0; i < gt.typed.size(); ++i) {
    TypedAoi& a = gt.typed[i];
    a.position = is_main_axis(a.etype) ? pos++ : -1;
    a.flavor = Flavor::typed;
    a.aoi_id = fmt::format("{}#{:02d}", spec.trial_id, i);
  }

  // Gap-fill truth: adjacent planted organics meet at the floor midpoint.
  gt.typed_gapfill = gt.typed;
  std::vector<std::size_t> main_idx;
  for (std::size_t i = 0; i < gt.typed_gapfill.size(); ++i) {
    gt.typed_gapfill[i].flavor = Flavor::typed_gapfill;
    if (is_main_axis(gt.typed_gapfill[i].etype)) main_idx.push_back(i);
  }
  for (std::size_t k = 1; k < main_idx.size(); ++k) {
    const TypedAoi& up0 = gt.typed[main_idx[k - 1]];
    const TypedAoi& lo0 = gt.typed[main_idx[k]];
    if (up0.etype != Etype::organic || lo0.etype != Etype::organic) continue;
    if (lo0.box.y <= up0.box.y1()) continue;
    const int mid = (up0.box.y1() + lo0.box.y) / 2;
    TypedAoi& up = gt.typed_gapfill[main_idx[k - 1]];
    TypedAoi& lo = gt.typed_gapfill[main_idx[k]];
    up.box.h = mid - up.box.y;
    lo.box.h = lo.box.y1() - mid;
    lo.box.y = mid;
    up.source = AoiSource::gapfill_extension;
    lo.source = AoiSource::gapfill_extension;
  }

  auto aoi_of_card = [&](int card) -> std::size_t {
    const Box& first = segments[static_cast<std::size_t>(std::find_if(
                           segments.begin(), segments.end(),
                           [&](const Segment& s) { return s.card == static_cast<std::size_t>(card); }) -
                       segments.begin())].box;
    for (std::size_t i = 0; i < gt.typed.size(); ++i) {
      if (gt.typed[i].box == first) return i;
    }
    throw std::logic_error("planted card has no AOI");
  };
  std::optional<std::size_t> rail_aoi;
  for (std::size_t i = 0; i < gt.typed.size(); ++i) {
    if (gt.typed[i].etype == Etype::dd_right) rail_aoi = i;
  }
  std::vector<std::size_t> main_aois;
  for (std::size_t i = 0; i < gt.typed.size(); ++i) {
    if (is_main_axis(gt.typed[i].etype)) main_aois.push_back(i);
  }

  // Final click location and the AOI it must land in.
  const ClickPlan& cp = spec.click;
  std::optional<std::pair<double, double>> final_point;
  std::optional<std::size_t> final_aoi;     // attribution answer
  std::optional<std::size_t> final_gaze;    // AOI the last fixation sits on
  switch (cp.target) {
    case ClickTarget::main_axis:
      final_aoi = aoi_of_card(cp.card);
      final_point = interior_point(gt.typed[*final_aoi].box, rng);
      final_gaze = final_aoi;
      gt.status = {true, ClickReason::attributed, AttributionMode::strict, std::nullopt};
      break;
    case ClickTarget::tolerance: {
      final_aoi = aoi_of_card(cp.card);
      const Box& box = gt.typed[*final_aoi].box;
      const int my = std::min(12, (box.h - 1) / 2);
      final_point = {static_cast<double>(box.x - rng.uniform(1, 5)),
                     static_cast<double>(rng.uniform(box.y + my, box.y1() - 1 - my))};
      final_gaze = final_aoi;
      gt.status = {true, ClickReason::attributed, AttributionMode::tolerance, std::nullopt};
      break;
    }
    case ClickTarget::dd_right:
      final_point = interior_point(*rail_box, rng);
      final_gaze = rail_aoi;
      gt.status = {false, ClickReason::dd_right, AttributionMode::miss, std::nullopt};
      break;
    case ClickTarget::chrome:
      final_gaze = aoi_of_card(cp.card);
      final_point = interior_point(gt.typed[*final_gaze].box, rng);
      gt.status = {false, ClickReason::chrome_or_far, AttributionMode::miss, std::nullopt};
      break;
    case ClickTarget::far:
      final_point = {static_cast<double>(rng.uniform(1200, kPageWidth - 5)),
                     static_cast<double>(rng.uniform(0, height - 1))};
      gt.status = {false, ClickReason::chrome_or_far, AttributionMode::miss, std::nullopt};
      break;
    case ClickTarget::pathological:
      final_point = {-400.0, static_cast<double>(rng.uniform(0, height - 1))};
      gt.status = {false, ClickReason::no_click, AttributionMode::miss, std::nullopt};
      break;
    case ClickTarget::none:
      gt.status = {false, ClickReason::no_click, AttributionMode::miss, std::nullopt};
      break;
  }
  if (final_aoi) gt.status.aoi_id = gt.typed[*final_aoi].aoi_id;

  // Fixations, sequential in time, each planted strictly inside one AOI or
  // in the empty left margin.
  std::vector<std::optional<std::size_t>> fix_target;
  std::vector<std::size_t> visited;
  std::int64_t t = rng.uniform(200, 400);
  for (int i = 0; i < spec.n_fixations; ++i) {
    std::optional<std::size_t> target;
    const bool last = i + 1 == spec.n_fixations;
    if (last && final_gaze) {
      target = final_gaze;
    } else if (gt.typed.empty() || rng.chance(0.15)) {
      target = std::nullopt;
    } else if (!visited.empty() && rng.chance(0.3)) {
      target = visited[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(visited.size()) - 1))];
    } else {
      target = static_cast<std::size_t>(rng.uniform(0, static_cast<int>(gt.typed.size()) - 1));
    }
    FixationEvent f;
    if (target) {
      std::tie(f.x, f.y) = interior_point(gt.typed[*target].box, rng);
      visited.push_back(*target);
    } else {
      f.x = coord(rng, 20, kColumnX0 - 21);
      f.y = coord(rng, 0, height - 1);
    }
    // Durations are whole 150 Hz sample counts, rounded to ms.
    const int samples = rng.uniform(15, 60);
    f.start = t;
    f.end = t + (samples * 1000 + 75) / 150;
    t = f.end + rng.uniform(20, 60);
    b.fixations.push_back(f);
    fix_target.push_back(target);
  }

  // Clicks: intermediate clicks on main-axis AOIs, then the final click
  // inside the last fixation.
  std::vector<std::optional<std::size_t>> click_target;
  if (cp.target != ClickTarget::none) {
    const int n_fix = static_cast<int>(b.fixations.size());
    const int n_mid = (n_fix >= 2 && !main_aois.empty()) ? cp.n_intermediate : 0;
    std::vector<std::int64_t> times;
    for (int j = 0; j < n_mid; ++j) times.push_back(b.fixations[static_cast<std::size_t>(rng.uniform(0, n_fix - 2))].end - 5);
    std::sort(times.begin(), times.end());
    for (std::int64_t when : times) {
      const std::size_t a = main_aois[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(main_aois.size()) - 1))];
      const auto [x, y] = interior_point(gt.typed[a].box, rng);
      b.clicks.push_back({when, x, y, false});
      click_target.push_back(a);
    }
    std::int64_t when = t + 100;
    if (n_fix > 0) {
      const FixationEvent& lf = b.fixations.back();
      when = lf.end - rng.uniform(0, static_cast<int>(std::min<std::int64_t>(50, lf.duration())));
    }
    b.clicks.push_back({when, final_point->first, final_point->second, cp.flag_final});
    click_target.push_back(final_aoi);
  }

  // Cursor: a move near every fixation onset plus one event per click.
  std::vector<CursorEvent> cursor;
  for (const FixationEvent& f : b.fixations) {
    cursor.push_back({f.start, f.x + rng.uniform(-40, 40), f.y + rng.uniform(-40, 40), CursorKind::move});
  }
  for (const ClickEvent& c : b.clicks) cursor.push_back({c.t, c.x, c.y, CursorKind::click});
  std::stable_sort(cursor.begin(), cursor.end(),
                   [](const CursorEvent& l, const CursorEvent& r) { return l.t < r.t; });
  b.cursor = std::move(cursor);

  // Behavioral truth for the gap-fill flavor.
  gt.gapfill_stats.assign(gt.typed_gapfill.size(), AoiStats{});
  std::vector<std::size_t> seq;
  for (const auto& target : fix_target) {
    gt.fixation_aoi.push_back(target ? std::optional<std::string>(gt.typed[*target].aoi_id)
                                     : std::nullopt);
    if (!target) continue;
    ++gt.gapfill_stats[*target].n_fixations;
    seq.push_back(*target);
  }
  for (const auto& target : click_target) {
    gt.click_aoi.push_back(target ? std::optional<std::string>(gt.typed[*target].aoi_id)
                                  : std::nullopt);
    if (target) ++gt.gapfill_stats[*target].n_clicks;
  }
  for (std::size_t i = 0; i < gt.typed_gapfill.size(); ++i) {
    AoiStats& s = gt.gapfill_stats[i];
    s.fixated = s.n_fixations > 0;
    s.regressive = reenters(seq, i);
    const Box& box = gt.typed_gapfill[i].box;
    s.above_fold = box.y < spec.viewport_height && box.y1() > 0;
  }

  if (noise_sigma > 0.0) {
    for (std::uint8_t& px : b.screenshot.pixels) {
      const double v = std::round(px + noise_sigma * rng.normal());
      px = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

GeneratedTrial generate_trial(const LayoutSpec& spec, std::uint64_t seed, double noise_sigma) {
  Rng rng(seed);
  return generate_trial(spec, rng, noise_sigma);
}

GeneratedTrial generate_random_trial(std::uint64_t seed, const std::string& trial_id,
                                     double noise_sigma) {
  Rng rng(seed);
  const LayoutSpec spec = random_layout(rng, trial_id);
  return generate_trial(spec, rng, noise_sigma);
}

nlohmann::json ground_truth_json(const GroundTruth& gt) {
  using nlohmann::json;
  auto aois = [](const std::vector<TypedAoi>& list) {
    json arr = json::array();
    for (const TypedAoi& a : list) {
      arr.push_back({{"aoi_id", a.aoi_id},
                     {"etype", to_string(a.etype)},
                     {"position", a.position},
                     {"x", a.box.x},
                     {"y", a.box.y},
                     {"w", a.box.w},
                     {"h", a.box.h},
                     {"source", to_string(a.source)}});
    }
    return arr;
  };
  auto ids = [](const std::vector<std::optional<std::string>>& list) {
    json arr = json::array();
    for (const auto& id : list) arr.push_back(id ? json(*id) : json(nullptr));
    return arr;
  };
  json labels = json::array();
  for (Etype e : gt.doc_labels) labels.push_back(to_string(e));
  json stats = json::array();
  for (std::size_t i = 0; i < gt.gapfill_stats.size(); ++i) {
    const AoiStats& s = gt.gapfill_stats[i];
    stats.push_back({{"aoi_id", gt.typed_gapfill[i].aoi_id},
                     {"n_fixations", s.n_fixations},
                     {"fixated", s.fixated},
                     {"regressive", s.regressive},
                     {"above_fold", s.above_fold},
                     {"n_clicks", s.n_clicks}});
  }
  return {
      {"trial_id", gt.trial_id},
      {"doc_labels", labels},
      {"typed", aois(gt.typed)},
      {"typed_gapfill", aois(gt.typed_gapfill)},
      {"gapfill_stats", stats},
      {"fixation_aoi", ids(gt.fixation_aoi)},
      {"click_aoi", ids(gt.click_aoi)},
      {"status",
       {{"main_axis", gt.status.main_axis},
        {"reason", to_string(gt.status.reason)},
        {"mode", to_string(gt.status.mode)},
        {"aoi_id", gt.status.aoi_id ? json(*gt.status.aoi_id) : json(nullptr)}}},
  };
}

void write_corpus(const std::filesystem::path& out_dir, std::uint64_t seed, int n_trials,
                  double noise_sigma) {
  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < n_trials; ++i) {
    const std::string id = fmt::format("synth-{:04d}", i);
    const GeneratedTrial g =
        generate_random_trial(trial_seed(seed, static_cast<std::uint64_t>(i)), id, noise_sigma);
    const std::filesystem::path dir = out_dir / id;
    write_trial_bundle(dir, g.bundle);
    std::ofstream(dir / "ground_truth.json", std::ios::binary | std::ios::trunc)
        << ground_truth_json(g.truth).dump(2) << "\n";
  }
}

}  // namespace allserp::synth
