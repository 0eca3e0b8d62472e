#include <gtest/gtest.h>

#include <cmath>

#include "loewner/loewner.hpp"
#include "support/fixtures.hpp"

using namespace loewner;

namespace {

SampledPath slit_trace(std::size_t n = 1024) { return drive_to_trace(fixtures::zero_driver(), n); }

}  // namespace

TEST(CutSchedule, StretchMapAndInverse) {
  CutSchedule s;
  s.cut_times = {0.5, 0.25};
  s.capacities = {0.1, 0.01};
  EXPECT_DOUBLE_EQ(s.total(), 0.11);
  EXPECT_DOUBLE_EQ(s.phi(0.2), 0.2);
  EXPECT_DOUBLE_EQ(s.phi(0.3), 0.31);
  EXPECT_DOUBLE_EQ(s.phi(0.6), 0.71);
  EXPECT_DOUBLE_EQ(s.phi_inverse(0.255), 0.25);
  EXPECT_DOUBLE_EQ(s.phi_inverse(0.31), 0.3);
  EXPECT_DOUBLE_EQ(s.phi_inverse(0.55), 0.5);
  for (double t : {0.1, 0.3, 0.45, 0.7}) EXPECT_NEAR(s.phi_inverse(s.phi(t)), t, 1e-15);
  double prev = -1.0;
  for (double t = 0.0; t <= 1.0; t += 0.01) {
    EXPECT_GT(s.phi(t), prev);
    prev = s.phi(t);
  }
}

TEST(SelectCutTimes, SlitGetsExactDyadics) {
  auto sel = select_cut_times(slit_trace(), 7, 1e-3);
  std::vector<double> expect{0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875};
  ASSERT_EQ(sel.times.size(), 7u);
  for (std::size_t k = 0; k < 7; ++k) EXPECT_DOUBLE_EQ(sel.times[k], expect[k]);
  EXPECT_TRUE(sel.warnings.empty());
}

TEST(SelectCutTimes, TouchInstantsAreShifted) {
  // a single arc reparametrised by capacity touches R at its end only; two arcs
  // touch at the join, which lies at the capacity time of the first arc
  auto g = fixtures::bouncing_arcs(2, 500);
  double touch = g.time(500);
  auto sel = select_cut_times(g, 16, 1e-3);
  EXPECT_EQ(sel.times.size(), 16u);
  for (double t : sel.times) {
    auto j = *g.knot_index(t, 0.0);
    EXPECT_GT(g[j].imag(), 1e-3);
    EXPECT_NE(t, touch);
  }
}

TEST(InsertCut, CutAtTheSlitTipExtendsTheSlit) {
  auto g = slit_trace(1000);
  const double h = 0.25;
  auto out = insert_cut(g, 1.0, h);
  EXPECT_NEAR(out.end_time(), 1.0 + h, 1e-15);
  for (std::size_t i = 0; i < out.size(); ++i)
    EXPECT_LT(std::abs(out[i] - Complex(0.0, 2.0 * std::sqrt(out.time(i)))), 2e-3) << i;
}

TEST(InsertCut, MidwayCutOnTheSlitIsCollinear) {
  auto g = slit_trace(1000);
  constexpr double s_n = 0.5, h = 0.1;
  auto out = insert_cut(g, s_n, h);
  // g_{1/2} of the slit is sqrt(z^2 + 2): the block is i 2 sqrt(s - 1/2)
  // pulled back, the tail the old tail raised by i 2 sqrt(h) and pulled back
  auto pull_back = [](double y) { return std::sqrt(y * y + 4.0 * s_n); };
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = out.time(i), y;
    if (s <= s_n)
      y = 2.0 * std::sqrt(s);
    else if (s <= s_n + h)
      y = pull_back(2.0 * std::sqrt(s - s_n));
    else
      y = pull_back(2.0 * std::sqrt(h) + 2.0 * std::sqrt(s - h - s_n));
    EXPECT_LT(std::abs(out[i].real()), 1e-6) << i;
    EXPECT_LT(std::abs(out[i].imag() - y), 2e-3) << i;
  }
}

TEST(InsertCut, SmallCapacityIsNearIdentity) {
  auto g = drive_to_trace(fixtures::sin_driver(500), 500);
  double prev = 1e9;
  for (double h : {1e-2, 1e-4, 1e-6}) {
    auto out = insert_cut(g, 0.5, h);
    // compare sample by sample, skipping the inserted block
    double d = 0.0;
    auto i0 = *g.knot_index(0.5);
    for (std::size_t j = 0; j < g.size(); ++j) {
      std::size_t k = j <= i0 ? j : j + 32;
      d = std::max(d, std::abs(out[k] - g[j]));
    }
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(InsertCut, DriverGetsAConstantBlock) {
  auto g = drive_to_trace(fixtures::sin_driver(1000), 1000);
  double prev_tail = 1e9;
  for (double h : {0.04, 0.01, 0.0025}) {
    auto out = insert_cut(g, 0.5, h);
    auto [xi, chain] = trace_to_driver(out);
    double head = 0.0, tail = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
      double s = xi.times()[k], v = xi.values()[k];
      if (s <= 0.5)
        head = std::max(head, std::abs(v - std::sin(s)));
      else if (s <= 0.5 + h)
        head = std::max(head, std::abs(v - std::sin(0.5)));
      else
        tail = std::max(tail, std::abs(v - std::sin(s - h)));
    }
    EXPECT_LT(head, 2e-3) << h;
    // the raised tail is not capacity-parametrised, so past the block the
    // driver only approaches the shifted old one, at rate sqrt(h)
    EXPECT_LT(tail, 0.7 * std::sqrt(h)) << h;
    EXPECT_LT(tail, prev_tail);
    prev_tail = tail;
  }
}

TEST(InsertCut, RequiresASampleTime) {
  EXPECT_THROW(insert_cut(slit_trace(10), 0.55, 0.1), DomainError);
  EXPECT_THROW(insert_cut(slit_trace(10), 0.5, 0.0), DomainError);
}

TEST(ChooseCapacity, FirstCutAtTheTipTakesTheInitialValue) {
  auto g = drive_to_trace(fixtures::sin_driver(1000), 1000);
  auto pc = prepare_cut(g, 1000);
  auto c = choose_capacity(pc, 1, 0.1, {});
  EXPECT_EQ(c.halvings, 0);
  EXPECT_DOUBLE_EQ(c.h, 0.1 * 0.1 / 4.0);
  EXPECT_LT(c.stage_distance, 0.05);
  EXPECT_GT(c.own_gap, 0.0);
}

TEST(ChooseCapacity, FirstInteriorCutRegression) {
  // raising the tail by 2 sqrt(h_1) = eps moves it by about 0.7 eps, above
  // the eps / 2 allowance, until h_1 has been halved twice
  auto g = drive_to_trace(fixtures::sin_driver(1000), 1000);
  auto pc = prepare_cut(g, 500);
  auto c = choose_capacity(pc, 1, 0.1, {});
  EXPECT_EQ(c.halvings, 2);
  EXPECT_DOUBLE_EQ(c.h, 0.1 * 0.1 / 16.0);
  EXPECT_LT(c.stage_distance, 0.05);
  EXPECT_GT(c.own_gap, 0.0);
}

TEST(ChooseCapacity, CutBesideAnEarlierBlockHalves) {
  auto g = drive_to_trace(fixtures::sin_driver(1000), 1000);
  auto pc1 = prepare_cut(g, 500);
  auto c1 = choose_capacity(pc1, 1, 0.1, {});
  CutBlock b;
  b.first = 500;
  b.last = 532;
  b.created = detail::points_range(c1.path, 500, 533);
  b.own_gap = c1.own_gap;
  std::vector<CutBlock> blocks{b};
  // cut one sample before the earlier block: the new lift pushes it around
  auto pc2 = prepare_cut(c1.path, 499);
  auto c2 = choose_capacity(pc2, 2, 0.1, blocks);
  EXPECT_GT(c2.halvings, 0);
  EXPECT_LT(c2.h, 0.1 * 0.1 / 16.0);
}

TEST(ChooseCapacity, RejectsStageZero) {
  auto g = slit_trace(20);
  auto pc = prepare_cut(g, 10);
  EXPECT_THROW(choose_capacity(pc, 0, 0.1, {}), DomainError);
}

TEST(ApproximateSimple, SimpleInputStaysClose) {
  auto g = drive_to_trace(fixtures::sin_driver(500), 500);
  ApproxOptions o;
  o.driver_report = false;
  auto r = approximate_simple(g, 0.5, 4, o);
  EXPECT_LT(r.report.metadata.at("halted_distance"), 0.5);
  EXPECT_GT(r.report.metadata.at("min_cross_block_distance"), 0.0);
  EXPECT_EQ(r.report.trace_distances.size(), 4u);
}

TEST(ApproximateSimple, TwoArcFixtureCertificates) {
  auto g = fixtures::bouncing_arcs(2, 500);
  const double eps = 0.1;
  auto r = approximate_simple(g, eps, 16);
  const auto& s = r.schedule;
  ASSERT_EQ(s.cut_times.size(), 16u);
  for (std::size_t n = 0; n < 16; ++n) {
    EXPECT_LT(s.stage_distance[n], eps * std::ldexp(1.0, -static_cast<int>(n + 1)));
    EXPECT_GT(s.final_gap[n], 0.5 * s.own_gap[n]);
  }
  EXPECT_GT(r.report.metadata.at("min_cross_block_distance"), 0.0);
  EXPECT_LT(r.report.metadata.at("sup_distance"), r.report.metadata.at("bound"));
  // simplicity across blocks: no sample before block k comes within
  // min_k d_{k,k} / 2 of a sample after it
  double half = r.report.metadata.at("min_half_own_gap");
  for (const auto& b : r.blocks) {
    auto A = detail::points_range(r.path, 0, b.first + 1);
    auto B = detail::points_range(r.path, b.last, r.path.size());
    EXPECT_GE(detail::set_distance(A, B), half);
    // pairwise distances inside the block kept more than half their size
    for (std::size_t x = 0; x < b.created.size(); ++x)
      for (std::size_t y = x + 1; y < b.created.size(); ++y)
        EXPECT_GT(std::abs(r.path[b.first + x] - r.path[b.first + y]),
                  0.5 * std::abs(b.created[x] - b.created[y]));
  }
  for (bool ok : r.report.entry_ok) EXPECT_TRUE(ok);
}

TEST(ApproximateSimple, StagesKeepLocalGrowth) {
  auto g = drive_to_trace(fixtures::sin_driver(500), 500);
  auto base = check_local_growth(g, 0.2);
  ASSERT_TRUE(base.passed);
  ApproxOptions o;
  o.driver_report = false;
  auto r = approximate_simple(g, 0.1, 3, o);
  EXPECT_TRUE(check_local_growth(r.path, 0.4).passed);
}

TEST(LiftOffBoundary, ZeroIsIdentity) {
  auto g = fixtures::bouncing_arcs(2, 100);
  EXPECT_EQ(lift_off_boundary(g, 0.0), g);
}

TEST(LiftOffBoundary, SlitIsRaisedAndRetimed) {
  auto g = slit_trace(100);
  const double eps = 0.04;
  auto l = lift_off_boundary(g, eps);
  for (std::size_t i = 0; i < l.size(); ++i) {
    EXPECT_EQ(l[i].real(), 0.0);
    if (l.time(i) >= eps)
      EXPECT_NEAR(l[i].imag(), g.at(l.time(i) - eps).imag() + 2.0 * std::sqrt(eps), 1e-12);
  }
}

TEST(LiftOffBoundary, InteriorIsAboveTheLift) {
  auto g = fixtures::bouncing_arcs(2, 200);
  const double eps = 0.01;
  auto l = lift_off_boundary(g, eps);
  for (std::size_t i = 0; i < l.size(); ++i)
    if (l.time(i) >= g.start_time() + eps) EXPECT_GE(l[i].imag(), 2.0 * std::sqrt(eps));
  EXPECT_THROW(lift_off_boundary(g, -1.0), DomainError);
}
