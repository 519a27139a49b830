#include <gtest/gtest.h>

#include "phdinf/error.hpp"
#include "phdinf/moments.hpp"
#include "test_util.hpp"

using namespace phdinf;
using testutil::rel_err;

TEST(Dataset, Validation) {
  EXPECT_THROW(Dataset(Vector::Zero(3), Matrix::Zero(3, 2)), Error);
  EXPECT_THROW(Dataset(Vector::Zero(4), Matrix::Zero(5, 2)), Error);
  Matrix x = testutil::gaussian(6, 2, 1);
  x(2, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Dataset(Vector::Zero(6), x), Error);
  const Dataset d(Vector::Zero(4), Matrix::Zero(4, 2));
  EXPECT_EQ(d.names(), (std::vector<std::string>{"x1", "x2"}));
}

TEST(ComputeMoments, ZeroResponse) {
  const Dataset d(Vector::Zero(20), testutil::gaussian(20, 3, 2));
  const MomentSet m = compute_moments(d);
  EXPECT_EQ(m.s_xy.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(max_abs(m.sigma_yxx_hat.matrix()), 0.0);
  EXPECT_EQ(m.residuals.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ComputeMoments, ExactLinearFit) {
  const Matrix x = testutil::gaussian(30, 3, 3);
  Vector b(3);
  b << 1.5, -2.0, 0.25;
  const MomentSet m = compute_moments(Dataset(x * b, x));
  EXPECT_LE(m.residuals.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(max_abs(m.sigma_rxx_hat.matrix()), 1e-12);
  EXPECT_LE((m.ols_slope - b).norm(), 1e-12);
}

TEST(ComputeMoments, MatchesTripleLoop) {
  const Dataset d = testutil::nonlinear_data(50, 3, 4);
  const MomentSet m = compute_moments(d);
  const testutil::Naive ref = testutil::naive_moments(d.y(), d.x());
  EXPECT_LE(max_abs(m.sigma_yxx_hat.matrix() - ref.syxx), 1e-12);
  EXPECT_LE(max_abs(m.sigma_rxx_hat.matrix() - ref.srxx), 1e-12);
  EXPECT_LE(max_abs(m.s.matrix() - ref.s), 1e-12);
  EXPECT_LE((m.s_xy - ref.s_xy).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(max_abs(m.s_inv.matrix() * m.s.matrix() - Matrix::Identity(3, 3)), 1e-12);
  EXPECT_LE(max_abs(m.s_inv_sqrt.matrix() * m.s.matrix() * m.s_inv_sqrt.matrix() - Matrix::Identity(3, 3)), 1e-12);
}

TEST(ComputeMoments, ResidualsCenteredAndOrthogonal) {
  const Dataset d = testutil::nonlinear_data(200, 5, 5);
  const MomentSet m = compute_moments(d);
  const double tol = 1e-8 * 200 * d.y().cwiseAbs().maxCoeff();
  EXPECT_LE(std::abs(m.residuals.sum()), tol);
  const Matrix centered = d.x().rowwise() - d.x().colwise().mean();
  EXPECT_LE((centered.transpose() * m.residuals).cwiseAbs().maxCoeff(), tol);
}

TEST(ComputeMoments, ResidualsAffineEquivariant) {
  const Dataset d = testutil::nonlinear_data(60, 4, 6);
  Matrix a = testutil::gaussian(4, 4, 7);
  a += 3.0 * Matrix::Identity(4, 4);
  const Eigen::RowVectorXd c = Eigen::RowVectorXd::LinSpaced(4, -5.0, 5.0);
  const Matrix x2 = (d.x() * a).rowwise() + c;
  const MomentSet m1 = compute_moments(d);
  const MomentSet m2 = compute_moments(Dataset(d.y(), x2));
  EXPECT_LE((m1.residuals - m2.residuals).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ComputeMoments, YAndRThirdMomentsConvergeUnderGaussianX) {
  std::vector<double> gaps;
  for (Index n : {500, 5000, 50000}) {
    std::vector<double> per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Matrix x = testutil::gaussian(n, 3, 1000 * seed + n);
      Vector y = x.col(0).array().square() + x.col(1).array();
      const MomentSet m = compute_moments(Dataset(y, x));
      per_seed.push_back(max_abs(m.sigma_yxx_hat.matrix() - m.sigma_rxx_hat.matrix()));
    }
    gaps.push_back(testutil::median(per_seed));
  }
  EXPECT_GT(gaps[0], gaps[1]);
  EXPECT_GT(gaps[1], gaps[2]);
}

class LooDowndate : public ::testing::TestWithParam<std::pair<Index, Index>> {};

TEST_P(LooDowndate, MatchesBruteForceRefit) {
  const auto [n, p] = GetParam();
  const Dataset d = testutil::nonlinear_data(n, p, 40 + n + p);
  const MomentSet m = compute_moments(d);
  for (Index j = 0; j < n; ++j) {
    const LooMoments loo = loo_downdate(d, m, j);
    Vector yj;
    Matrix xj;
    testutil::drop_row(d.y(), d.x(), j, yj, xj);
    const testutil::Naive ref = testutil::naive_moments(yj, xj);
    EXPECT_LE(rel_err(loo.xbar_j, ref.xbar), 1e-12);
    EXPECT_NEAR(loo.ybar_j, ref.ybar, 1e-12 * (1 + std::abs(ref.ybar)));
    EXPECT_LE(max_abs(loo.s_inv_j.matrix() * ref.s - Matrix::Identity(p, p)), 1e-9) << "j=" << j;
    EXPECT_LE(rel_err(loo.s_xy_j, ref.s_xy), 1e-9);
    EXPECT_LE(rel_err(loo.sigma_yxx_j.matrix(), ref.syxx), 1e-9) << "j=" << j;
    EXPECT_LE(rel_err(loo.sigma_rxx_j.matrix(), ref.srxx), 1e-9) << "j=" << j;
    const auto [xbar_j, ybar_j] = loo_means(d, m, j);
    EXPECT_LE(rel_err(xbar_j, ref.xbar), 1e-12);
    EXPECT_NEAR(ybar_j, ref.ybar, 1e-12 * (1 + std::abs(ref.ybar)));
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, LooDowndate,
                         ::testing::Values(std::pair<Index, Index>{30, 4}, std::pair<Index, Index>{40, 4},
                                           std::pair<Index, Index>{12, 2}, std::pair<Index, Index>{8, 6}));

TEST(LooDowndate, RemovingTheOnlyDistinctRowIsDegenerate) {
  const Index n = 6;
  Matrix x = Matrix::Constant(n, 1, 2.0);
  Vector y = Vector::Constant(n, 1.0);
  x(3, 0) = 5.0;
  y[3] = 4.0;
  const Dataset d(y, x);
  const MomentSet m = compute_moments(d);
  try {
    loo_downdate(d, m, 3);
    FAIL() << "expected DegenerateLeverage";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateLeverage);
  }
  const auto [xbar_j, ybar_j] = loo_means(d, m, 3);
  EXPECT_DOUBLE_EQ(xbar_j[0], 2.0);
  EXPECT_DOUBLE_EQ(ybar_j, 1.0);
  EXPECT_NO_THROW(loo_downdate(d, m, 0));
}

TEST(LooDowndate, RejectsBadIndex) {
  const Dataset d = testutil::nonlinear_data(10, 2, 1);
  const MomentSet m = compute_moments(d);
  EXPECT_THROW(loo_downdate(d, m, 10), Error);
  EXPECT_THROW(loo_downdate(d, m, -1), Error);
}

TEST(Mahalanobis, PointAtMeanIsZero) {
  Matrix x(5, 2);
  x << 1, 2, -1, -2, 2, -1, -2, 1, 0, 0;
  const Dataset d(Vector::LinSpaced(5, 0, 1), x);
  EXPECT_NEAR(mahalanobis(d, compute_moments(d))[4], 0.0, 1e-15);
}

TEST(Mahalanobis, EuclideanWhenCovarianceIsIdentity) {
  // Four symmetric rows plus 47 rows at the origin give S = I exactly.
  const Index n = 51;
  Matrix x = Matrix::Zero(n, 2);
  x.row(0) << 3, 4;
  x.row(1) << -3, -4;
  x.row(2) << 4, -3;
  x.row(3) << -4, 3;
  const Dataset d(testutil::gaussian(n, 1, 3).col(0), x);
  const MomentSet m = compute_moments(d);
  EXPECT_LE(max_abs(m.s.matrix() - Matrix::Identity(2, 2)), 1e-14);
  EXPECT_NEAR(mahalanobis(d, m)[0], 5.0, 1e-12);
}

TEST(Mahalanobis, MatchesQuadraticForm) {
  const Dataset d = testutil::nonlinear_data(40, 4, 9);
  const MomentSet m = compute_moments(d);
  const Vector md = mahalanobis(d, m);
  const testutil::Naive ref = testutil::naive_moments(d.y(), d.x());
  const Matrix s_inv = ref.s.fullPivLu().inverse();
  for (Index i = 0; i < d.n(); ++i) {
    const Vector dev = d.x().row(i).transpose() - ref.xbar;
    EXPECT_NEAR(md[i], std::sqrt(dev.dot(s_inv * dev)), 1e-12);
  }
}
