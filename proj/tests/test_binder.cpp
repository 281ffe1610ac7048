#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "allserp/binder.hpp"
#include "allserp/labeler.hpp"
#include "allserp/segmentation.hpp"
#include "allserp/synth.hpp"
#include "support.hpp"

namespace allserp {
namespace {

using testing::aoi;

constexpr ColumnBounds kColumn{160, 700};

EtypeLabel label(Etype e, int doc_index) { return {e, 5, doc_index, false}; }

TEST(Bind, LabelsInDocumentOrderTopToBottom) {
  const std::vector<CardSpan> spans{{100, 200}, {300, 400}, {500, 600}};
  const auto r = bind_labels(
      spans, {label(Etype::dd_top, 0), label(Etype::organic, 1), label(Etype::organic, 2)},
      kColumn);
  ASSERT_EQ(r.aois.size(), 3u);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.aois[0].etype, Etype::dd_top);
  EXPECT_EQ(r.aois[1].etype, Etype::organic);
  EXPECT_EQ(r.aois[2].etype, Etype::organic);
  EXPECT_EQ(r.aois[1].box, (Box{160, 300, 540, 100}));
  EXPECT_EQ(r.aois[2].doc_index, 2);
}

TEST(Bind, ExcessSpanBecomesUnknownWidget) {
  const std::vector<CardSpan> spans{{100, 200}, {300, 400}, {500, 600}, {700, 800}};
  const auto r = bind_labels(
      spans, {label(Etype::dd_top, 0), label(Etype::organic, 1), label(Etype::organic, 2)},
      kColumn);
  ASSERT_EQ(r.aois.size(), 4u);
  EXPECT_EQ(r.aois[3].etype, Etype::unknown_widget);
  EXPECT_EQ(r.aois[3].doc_index, -1);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Bind, ExcessLabelDroppedWithWarning) {
  const auto r = bind_labels({{100, 200}}, {label(Etype::organic, 0), label(Etype::paa, 1)},
                             kColumn);
  ASSERT_EQ(r.aois.size(), 1u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Bind, RightRailLabelsLeaveTheStream) {
  const auto r = bind_labels({{100, 200}, {300, 400}},
                             {label(Etype::organic, 0), label(Etype::dd_right, 1),
                              label(Etype::paa, 2)},
                             kColumn);
  ASSERT_EQ(r.aois.size(), 2u);
  EXPECT_EQ(r.aois[1].etype, Etype::paa);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Propagate, NativeAdIdentity) {
  const std::vector<AdRect> rects{{Etype::native_ad, {160, 100, 540, 100}}};
  const auto out = propagate_ad_identity({aoi(Etype::organic, 100, 200)}, rects);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].etype, Etype::native_ad);
  EXPECT_DOUBLE_EQ(iou(out[0].box, rects[0].box), 1.0);
  EXPECT_EQ(out[0].source, AoiSource::shipped_ad);
}

TEST(Propagate, RightRailAdIsOffAxis) {
  const std::vector<AdRect> rects{{Etype::dd_right, {780, 120, 400, 300}}};
  auto out = assign_positions(propagate_ad_identity({aoi(Etype::organic, 100, 200)}, rects));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].etype, Etype::dd_right);
  EXPECT_EQ(out[0].position, -1);
  EXPECT_EQ(out[0].box.x, 780);
  EXPECT_EQ(out[1].position, 0);
}

TEST(Propagate, UnmatchedMainAxisRectInserted) {
  const std::vector<AdRect> rects{{Etype::dd_top, {160, 20, 540, 60}}};
  const auto out = assign_positions(propagate_ad_identity({aoi(Etype::organic, 100, 200)}, rects));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].etype, Etype::dd_top);
  EXPECT_EQ(out[0].position, 0);
  EXPECT_EQ(out[1].position, 1);
}

TEST(Propagate, DoubleMatchIsCorrupt) {
  // Rects both cover more than half of the AOI; only a corrupt shipped set
  // can do that since main-axis rects may not overlap each other.
  const std::vector<AdRect> rects{{Etype::dd_top, {160, 100, 540, 100}},
                                  {Etype::native_ad, {160, 100, 540, 100}}};
  EXPECT_THROW(propagate_ad_identity({aoi(Etype::organic, 100, 200)}, rects, 0.5),
               PipelineError);
}

TEST(Propagate, BelowThresholdLeavesAoi) {
  const std::vector<AdRect> rects{{Etype::native_ad, {160, 150, 540, 100}}};
  const auto out = propagate_ad_identity({aoi(Etype::organic, 100, 200)}, rects);
  ASSERT_EQ(out.size(), 2u);  // 1/3 IoU: the rect is inserted separately
  EXPECT_EQ(out[0].etype, Etype::organic);
}

TEST(Positions, GeometryOrder) {
  const auto out = assign_positions({aoi(Etype::organic, 500, 600), aoi(Etype::dd_top, 100, 200),
                                     aoi(Etype::organic, 300, 400)});
  EXPECT_EQ(out[0].etype, Etype::dd_top);
  EXPECT_EQ(out[0].position, 0);
  EXPECT_EQ(out[1].box.y, 300);
  EXPECT_EQ(out[1].position, 1);
  EXPECT_EQ(out[2].position, 2);
}

TEST(Positions, OffAxisAreMinusOne) {
  const auto out = assign_positions({aoi(Etype::chrome, 900, 950), aoi(Etype::organic, 100, 200),
                                     aoi(Etype::related_searches, 700, 800)});
  EXPECT_EQ(out[0].position, -1);
  EXPECT_EQ(out[1].position, -1);
  EXPECT_EQ(out[2].position, 0);
}

TEST(Positions, PermutationInvariant) {
  std::vector<TypedAoi> base{aoi(Etype::dd_top, 10, 60),   aoi(Etype::organic, 100, 200),
                             aoi(Etype::paa, 220, 400),    aoi(Etype::organic, 420, 500),
                             aoi(Etype::chrome, 900, 950), aoi(Etype::dd_right, 100, 300, 760, 1180)};
  const auto expected = assign_positions(base);
  std::mt19937 gen(5);
  for (int t = 0; t < 50; ++t) {
    std::shuffle(base.begin(), base.end(), gen);
    EXPECT_EQ(assign_positions(base), expected);
  }
}

TEST(Ids, OrdinalFormat) {
  std::vector<TypedAoi> v(12);
  assign_aoi_ids(v, "t7");
  EXPECT_EQ(v[0].aoi_id, "t7#00");
  EXPECT_EQ(v[11].aoi_id, "t7#11");
}

TEST(Bind, SyntheticTrialsMatchGroundTruth) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto g = synth::generate_random_trial(seed, "bind");
    const auto seg = segment_screenshot(g.bundle.screenshot, g.bundle.ad_rects, {});
    const auto labels = label_sequence(parse_doc_cards(g.bundle.html));
    const auto bound = bind_labels(seg.spans, labels, seg.column);
    EXPECT_TRUE(bound.warnings.empty()) << "seed " << seed;
    auto aois = assign_positions(propagate_ad_identity(bound.aois, g.bundle.ad_rects));
    assign_aoi_ids(aois, g.truth.trial_id);
    ASSERT_EQ(aois.size(), g.truth.typed.size()) << "seed " << seed;
    for (std::size_t i = 0; i < aois.size(); ++i) {
      EXPECT_EQ(aois[i].etype, g.truth.typed[i].etype) << "seed " << seed << " aoi " << i;
      EXPECT_EQ(aois[i].box, g.truth.typed[i].box) << "seed " << seed << " aoi " << i;
      EXPECT_EQ(aois[i].position, g.truth.typed[i].position) << "seed " << seed << " aoi " << i;
    }
  }
}

}  // namespace
}  // namespace allserp
