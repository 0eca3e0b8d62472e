#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "loewner/loewner.hpp"

using namespace loewner;

TEST(HcapMc, EmptySetHasZeroCapacity) {
  McOptions o;
  o.samples = 1000;
  auto e = hcap_mc(empty_region(), o);
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(HcapMc, VerticalSlitWithinThreeStandardErrors) {
  McOptions o;
  o.samples = 200000;
  o.seed = 2;
  auto e = hcap_mc(vertical_slit_region(0.0, 2.0), o);
  EXPECT_LT(std::abs(e.mean - 2.0), 3.0 * e.std_error) << e.mean << " +- " << e.std_error;
  EXPECT_FALSE(e.launch_warning);
}

TEST(HcapMc, UnitHalfDiskWithinThreeStandardErrors) {
  McOptions o;
  o.samples = 200000;
  o.seed = 3;
  auto e = hcap_mc(half_disk_region(0.0, 1.0), o);
  EXPECT_LT(std::abs(e.mean - 1.0), 3.0 * e.std_error) << e.mean << " +- " << e.std_error;
}

TEST(HcapMc, DeterministicForASeedWhateverTheThreadCount) {
  McOptions o;
  o.samples = 20000;
  o.seed = 9;
  set_thread_count(1);
  auto a = hcap_mc(vertical_slit_region(0.0, 1.0), o);
  set_thread_count(3);
  auto b = hcap_mc(vertical_slit_region(0.0, 1.0), o);
  set_thread_count(0);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(HcapMc, StandardErrorScalesLikeInverseRoot) {
  McOptions o;
  o.seed = 4;
  o.samples = 40000;
  auto a = hcap_mc(half_disk_region(0.0, 1.0), o);
  o.samples = 640000;
  auto b = hcap_mc(half_disk_region(0.0, 1.0), o);
  EXPECT_NEAR(a.std_error / b.std_error, 4.0, 0.6);
}

TEST(HcapMc, AgreesWithSeriesOnRandomChains) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> base(-0.5, 0.5), dt(0.01, 0.1);
  for (int trial = 0; trial < 5; ++trial) {
    HullChain c;
    for (int k = 0; k < 4 + 4 * trial; ++k) c.atoms.emplace_back(base(rng), dt(rng));
    McOptions o;
    o.samples = 100000;
    o.seed = 100 + static_cast<std::uint64_t>(trial);
    auto e = hcap_mc(chain_region(c), o);
    EXPECT_LT(std::abs(e.mean - hcap_series(c)), 3.0 * e.std_error + 1e-3 * hcap_series(c))
        << "trial " << trial;
  }
}

TEST(Regions, DistanceFunctions) {
  auto s = segment_region(Complex(0, 0), Complex(0, 2));
  EXPECT_NEAR(s.distance(Complex(1, 1)), 1.0, 1e-15);
  EXPECT_NEAR(s.distance(Complex(0, 3)), 1.0, 1e-15);
  EXPECT_TRUE(s.contains(Complex(0, 1)));
  auto d = half_disk_region(0.0, 1.0);
  EXPECT_NEAR(d.distance(Complex(0, 2)), 1.0, 1e-15);
  EXPECT_TRUE(d.contains(Complex(0.5, 0.5)));
  auto p = polyline_region({{Complex(0, 0), Complex(1, 1), Complex(2, 0)}});
  EXPECT_NEAR(p.distance(Complex(1, 2)), 1.0, 1e-12);
}

TEST(Superadditivity, SingleHullIsEquality) {
  std::vector<HullChain> one{HullChain{0.0, {SlitAtom(0, 1)}}};
  auto r = hcap_superadditivity_check(one);
  EXPECT_EQ(r.slack, 0.0);
  EXPECT_THROW(hcap_superadditivity_check(std::span<const HullChain>{}), DomainError);
}

TEST(Superadditivity, NestedCollinearSlits) {
  HullChain full{0.0, {SlitAtom(0, 0.1), SlitAtom(0, 0.1), SlitAtom(0, 0.1)}};
  std::vector<HullChain> nested{full.prefix(1), full.prefix(2), full.prefix(3)};
  McOptions o;
  o.samples = 200000;
  auto r = hcap_superadditivity_check(nested, o);
  EXPECT_GE(r.slack, -3.0 * r.std_error) << r.slack << " +- " << r.std_error;
}

TEST(Superadditivity, SpreadSlits) {
  HullChain full;
  for (int k = 0; k < 5; ++k) full.atoms.emplace_back(static_cast<double>(k), 0.05);
  std::vector<HullChain> nested;
  for (std::size_t k = 1; k <= 5; ++k) nested.push_back(full.prefix(k));
  McOptions o;
  o.samples = 200000;
  auto r = hcap_superadditivity_check(nested, o);
  EXPECT_GE(r.slack, -3.0 * r.std_error) << r.slack << " +- " << r.std_error;
}

TEST(Superadditivity, RejectsNonNestedInput) {
  std::vector<HullChain> bad{HullChain{0.0, {SlitAtom(0, 1)}}, HullChain{0.0, {SlitAtom(1, 1)}}};
  EXPECT_THROW(hcap_superadditivity_check(bad), DomainError);
}
