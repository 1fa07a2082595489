#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "kosrel/evaluate.hpp"
#include "kosrel/rng.hpp"

using namespace kosrel;

namespace {

TreeCode tc(const char* s) { return TreeCode::parse(s); }

std::vector<double> draw(Rng& rng, std::size_t n, double shift) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal() + shift;
  return v;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
std::vector<double> eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i][i];
  return out;
}

}  // namespace

TEST(Changes, ParseAndWrite) {
  std::istringstream in("# release\tdescriptor\ttype\n2014AA\tD000001\textension\n2015AA\tD000002\tmove\n");
  auto c = parse_changes(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0], (ChangeRecord{"2014AA", "D000001", ChangeType::extension}));
  std::ostringstream out;
  write_changes(out, c);
  std::istringstream again(out.str());
  EXPECT_EQ(parse_changes(again), c);
  std::istringstream bad("2014AA\tD1\trenamed\n");
  EXPECT_THROW(parse_changes(bad), ParseError);
}

TEST(MannWhitney, ExactSmallSample) {
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  auto r = mann_whitney(a, b);
  EXPECT_EQ(r.u_statistic, 0.0);
  EXPECT_NEAR(r.p_value, 0.1, 1e-12);
  EXPECT_EQ(r.method, TestMethod::exact);
  EXPECT_EQ(method_name(r.method), "exact");
}

TEST(MannWhitney, IdenticalSingletons) {
  std::vector<double> a{5}, b{5};
  EXPECT_EQ(mann_whitney(a, b).p_value, 1.0);
  std::vector<double> none;
  EXPECT_THROW(mann_whitney(none, b), Error);
}

TEST(MannWhitney, TiesUseNormalApproximation) {
  std::vector<double> a{1, 2, 2, 3}, b{2, 4, 5};
  auto r = mann_whitney(a, b);
  EXPECT_EQ(r.method, TestMethod::normal_approx);
  EXPECT_GE(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);
}

TEST(MannWhitney, LargeSamplesUseNormalApproximation) {
  Rng rng(61);
  auto a = draw(rng, 11, 0), b = draw(rng, 5, 0);
  EXPECT_EQ(mann_whitney(a, b).method, TestMethod::normal_approx);
}

TEST(MannWhitney, PlantedShiftIsDetected) {
  Rng rng(62);
  auto a = draw(rng, 200, 0), b = draw(rng, 200, 1);
  auto r = mann_whitney(a, b);
  EXPECT_LT(r.p_value, 0.001);
}

TEST(MannWhitneyProperties, Symmetric) {
  Rng rng(63);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = draw(rng, 1 + rng.below(25), 0.3), b = draw(rng, 1 + rng.below(25), 0);
    auto ab = mann_whitney(a, b), ba = mann_whitney(b, a);
    EXPECT_EQ(ab.u_statistic, ba.u_statistic);
    EXPECT_NEAR(ab.p_value, ba.p_value, 1e-15);
    EXPECT_GE(ab.p_value, 0.0);
    EXPECT_LE(ab.p_value, 1.0);
    if (ab.method == TestMethod::exact) EXPECT_LE(std::max(ab.n1, ab.n2), kExactThreshold);
  }
}

TEST(MannWhitneyProperties, ExactAgreesWithNormalForModerateSizes) {
  Rng rng(64);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n1 = 8 + rng.below(3), n2 = 8 + rng.below(3);
    auto a = draw(rng, n1, 0.5), b = draw(rng, n2, 0);
    auto exact = mann_whitney(a, b);
    ASSERT_EQ(exact.method, TestMethod::exact);
    // normal approximation on the same data
    const double mean = static_cast<double>(n1 * n2) / 2.0;
    const double sd = std::sqrt(static_cast<double>(n1 * n2) * static_cast<double>(n1 + n2 + 1) / 12.0);
    const double z = std::max(0.0, std::abs(exact.u_statistic - mean) - 0.5) / sd;
    EXPECT_NEAR(exact.p_value, std::erfc(z / std::sqrt(2.0)), 0.02);
  }
}

TEST(Correlation, Examples) {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(2 * v + 1);
  EXPECT_NEAR(pearson(x, y), 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, x), 1.0, 1e-15);
  std::vector<double> a{1, 2, 3}, b{3, 1, 2};
  EXPECT_NEAR(spearman(a, b), -0.5, 1e-15);
  std::vector<double> two{1, 2};
  EXPECT_THROW(pearson(two, two), Error);
  std::vector<double> flat{4, 4, 4};
  EXPECT_EQ(pearson(a, flat), 0.0);
}

TEST(CorrelationProperties, MatrixIsSymmetricPsd) {
  Rng rng(65);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.below(40);
    std::vector<std::vector<double>> cols(5, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double shared = rng.normal();
      for (auto& c : cols) c[i] = shared * rng.uniform() + rng.normal();
    }
    for (auto kind : {CorrelationKind::pearson, CorrelationKind::spearman}) {
      auto m = correlation_matrix(cols, kind);
      for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(m[i][i], 1.0);
        for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(m[i][j], m[j][i]);
      }
      if (kind == CorrelationKind::pearson)
        for (double ev : eigenvalues(m)) EXPECT_GE(ev, -1e-9);
    }
  }
}

namespace {

Hierarchy two_node_hierarchy() {
  Hierarchy::Builder b;
  b.add_mapping(tc("A01"), "DA");
  b.add_mapping(tc("B01"), "DB");
  b.add_mapping(tc("B02"), "DB");
  b.add_mapping(tc("B03"), "DC");
  return b.build();
}

}  // namespace

TEST(Cohorts, DescriptorScoresSumNodes) {
  auto h = two_node_hierarchy();
  auto d = descriptor_scores({{tc("A01"), 0.1}, {tc("B01"), 0.2}, {tc("B02"), 0.3}}, h);
  EXPECT_DOUBLE_EQ(d.at("DA"), 0.1);
  EXPECT_DOUBLE_EQ(d.at("DB"), 0.5);
  EXPECT_FALSE(d.count("DC"));
}

TEST(Cohorts, EvolutionPartition) {
  std::map<DescriptorId, double> scores;
  for (int i = 0; i < 100; ++i) scores["D" + std::to_string(i)] = i;
  std::vector<ChangeRecord> changes{{"2014AA", "D7", ChangeType::extension}};
  auto c = evolution_cohorts(scores, changes);
  EXPECT_EQ(c.test.size(), 1u);
  EXPECT_EQ(c.control.size(), 99u);
  EXPECT_FALSE(c.skipped);
  EXPECT_TRUE(evolution_cohorts(scores, {}).skipped);
}

TEST(Cohorts, RetractionAverages) {
  Hierarchy::Builder b;
  b.add_mapping(tc("A"), "DA");
  b.add_mapping(tc("B"), "DB");
  auto h = b.build();
  std::vector<Article> arts{{1, Month(2014, 1), {"DA", "DB"}, true},
                            {2, Month(2014, 1), {}, false},
                            {3, Month(2014, 1), {"DA"}, false}};
  ArticleStore store(arts);
  ArticleNodeIndex index(store, h);
  NodeValues jan{{tc("A"), 0.10}, {tc("B"), 0.07}}, feb{{tc("A"), 0.2}, {tc("B"), 0.0}};
  std::vector<ArticleId> jan_present{1, 2, 3}, feb_present{3};
  std::vector<MonthlyPresence> months{{Month(2014, 1), &jan, jan_present}, {Month(2014, 2), &feb, feb_present}};
  auto c = retraction_cohorts(store, index, h, months, 2014);
  ASSERT_EQ(c.test.size(), 1u);
  EXPECT_NEAR(c.test[0], 0.17, 1e-15);
  ASSERT_EQ(c.control.size(), 2u);
  EXPECT_EQ(c.control[0], 0.0);                 // article 2 has no annotations
  EXPECT_NEAR(c.control[1], 0.15, 1e-15);       // article 3: mean of 0.1 and 0.2
  EXPECT_TRUE(retraction_cohorts(store, index, h, months, 2015).skipped);
}
