#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "bamani/dataset.hpp"
#include "support.hpp"

using namespace bamani;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

Dataset one_column(std::vector<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
  return Dataset({"X"}, m);
}

}  // namespace

TEST(Csv, ParsesRowsInOrder) {
  const auto d = parse("A,B\n1,2\n3,4\n");
  ASSERT_EQ(d.n_obs(), 2u);
  ASSERT_EQ(d.n_features(), 2u);
  EXPECT_EQ(d.names(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(d.values()(0, 0), 1.0);
  EXPECT_EQ(d.values()(0, 1), 2.0);
  EXPECT_EQ(d.values()(1, 0), 3.0);
  EXPECT_EQ(d.values()(1, 1), 4.0);
}

TEST(Csv, ScientificNotation) {
  const auto d = parse("A\n1.5e2\n");
  EXPECT_EQ(d.values()(0, 0), 150.0);
}

TEST(Csv, CrlfAndBom) {
  const auto d = parse("\xEF\xBB\xBF" "A,B\r\n1,2\r\n");
  EXPECT_EQ(d.names(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(d.values()(0, 1), 2.0);
}

TEST(Csv, Errors) {
  EXPECT_THROW(parse("A,A\n1,2\n"), DataError);
  EXPECT_THROW(parse("A,B\n"), DataError);
  EXPECT_THROW(parse(""), DataError);
  EXPECT_THROW(parse("A,B\n1,x\n"), DataError);
  EXPECT_THROW(parse("A,B\n1,\n"), DataError);
  EXPECT_THROW(parse("A,B\n1,2,3\n"), DataError);
  EXPECT_THROW(parse("A\nnan\n"), DataError);
  EXPECT_THROW(parse("A\ninf\n"), DataError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv"), DataError);
}

TEST(Csv, NonNumericReportsLineAndColumn) {
  try {
    parse("A,B\n1,2\n3,oops\n");
    FAIL();
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("'B'"), std::string::npos) << what;
  }
}

TEST(Csv, FewObservationsWarns) {
  WarningCapture cap;
  parse("A,B\n1,2\n3,4\n");
  EXPECT_EQ(cap.messages().size(), 1u);
}

TEST(Csv, RoundTripsFifteenDigitDecimals) {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<long long> mant(-999999999999999LL, 999999999999999LL);
  std::uniform_int_distribution<int> ex(-20, 20);
  std::string text = "A,B,C\n";
  std::vector<double> expected;
  for (int r = 0; r < 300; ++r) {
    for (int c = 0; c < 3; ++c) {
      std::ostringstream cell;
      cell << mant(gen) << "e" << ex(gen);
      expected.push_back(std::stod(cell.str()));
      text += cell.str();
      text += c == 2 ? "\n" : ",";
    }
  }
  const auto d = parse(text);
  const auto again = parse(to_csv(d));
  EXPECT_EQ(d, again);
  for (std::size_t i = 0; i < expected.size(); ++i)
    EXPECT_EQ(d.values()(static_cast<Eigen::Index>(i / 3), static_cast<Eigen::Index>(i % 3)), expected[i]);
}

TEST(Dataset, RejectsNonFiniteAndDuplicates) {
  Eigen::MatrixXd m(1, 2);
  m << 1.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Dataset({"A", "B"}, m), DataError);
  m << 1.0, 2.0;
  EXPECT_THROW(Dataset({"A", "A"}, m), DataError);
  EXPECT_THROW(Dataset({"A", ""}, m), DataError);
  EXPECT_THROW(Dataset({"A"}, m), DataError);
}

TEST(ZeroFraction, Examples) {
  EXPECT_DOUBLE_EQ(zero_fraction(one_column({0, 0, 0, 1}), "X"), 0.75);
  EXPECT_EQ(zero_fraction(one_column({1, 2, 3}), "X"), 0.0);
  EXPECT_DOUBLE_EQ(zero_fraction(one_column({0, 0, 5, 0, 7, 0, 0, 0, 0, 2}), "X"), 0.7);
  EXPECT_THROW(zero_fraction(one_column({1}), "Y"), DataError);
}

TEST(ZeroFraction, InUnitInterval) {
  std::mt19937 gen(3);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(1 + t);
    for (auto& x : v) x = pick(gen) == 0 ? 0.0 : 1.0 + pick(gen);
    const double f = zero_fraction(one_column(v), "X");
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Bootstrap, SingleRowIsIdentity) {
  const auto d = parse("A,B\n1,2\n");
  EXPECT_EQ(bootstrap_resample(d, 99), d);
}

TEST(Bootstrap, Deterministic) {
  const auto d = testing_support::independent_data(3, 50, 1);
  EXPECT_EQ(bootstrap_resample(d, 5), bootstrap_resample(d, 5));
  EXPECT_FALSE(bootstrap_resample(d, 5) == bootstrap_resample(d, 6));
}

TEST(Bootstrap, RowsComeFromInput) {
  const auto d = testing_support::independent_data(3, 40, 2);
  std::set<std::vector<double>> rows;
  for (Eigen::Index r = 0; r < d.values().rows(); ++r) {
    const Eigen::VectorXd row = d.values().row(r);
    rows.insert(std::vector<double>(row.data(), row.data() + row.size()));
  }
  const auto b = bootstrap_resample(d, 11);
  ASSERT_EQ(b.n_obs(), d.n_obs());
  EXPECT_EQ(b.names(), d.names());
  for (Eigen::Index r = 0; r < b.values().rows(); ++r) {
    const Eigen::VectorXd row = b.values().row(r);
    EXPECT_TRUE(rows.count(std::vector<double>(row.data(), row.data() + row.size())));
  }
}

TEST(Bootstrap, DistinctRowFraction) {
  // 1 - (1 - 1/n)^n for n = 100
  const double oracle = 1.0 - std::pow(0.99, 100.0);
  Eigen::MatrixXd m(100, 1);
  for (int i = 0; i < 100; ++i) m(i, 0) = i;
  const Dataset d({"I"}, m);
  double total = 0.0;
  const int reps = 10000;
  for (int s = 0; s < reps; ++s) {
    const auto b = bootstrap_resample(d, static_cast<std::uint64_t>(s));
    std::set<double> distinct(b.values().data(), b.values().data() + b.values().size());
    total += static_cast<double>(distinct.size()) / 100.0;
  }
  EXPECT_NEAR(total / reps, 0.634, 0.01);
  EXPECT_NEAR(total / reps, oracle, 0.01);
}

TEST(Bootstrap, EmptyInputErrors) {
  EXPECT_THROW(bootstrap_resample(Dataset({"A"}, Eigen::MatrixXd(0, 1)), 1), DataError);
}

TEST(Standardize, Examples) {
  const auto s = standardize(one_column({1, 2, 3}));
  EXPECT_NEAR(s.values()(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(s.values()(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(s.values()(2, 0), 1.0, 1e-15);

  EXPECT_THROW(standardize(one_column({5, 5, 5})), DataError);
  const auto z = standardize(one_column({5, 5, 5}), true);
  EXPECT_EQ(z.values(), Eigen::MatrixXd::Zero(3, 1));
}

TEST(Standardize, MomentsAndIdempotence) {
  const auto d = testing_support::simulate({{"A", {}, 3.0, 2.0}, {"B", {{"A", 1.5}}, -1.0, 0.5}}, 200, 4);
  const auto s = standardize(d);
  for (Eigen::Index c = 0; c < 2; ++c) {
    const double mean = s.values().col(c).mean();
    const double var = (s.values().col(c).array() - mean).square().sum() / 199.0;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
  const auto again = standardize(s);
  EXPECT_LE((again.values() - s.values()).cwiseAbs().maxCoeff(), 1e-12);
}
