#include <gtest/gtest.h>

#include <cmath>

#include "fbrsim/continuation.hpp"
#include "fbrsim/esdirk.hpp"
#include "fbrsim/errors.hpp"
#include "fbrsim/newton.hpp"

using namespace fbrsim;

namespace {

SparseMatrix dense_to_sparse(const Eigen::MatrixXd& A) { return A.sparseView(0.0, 0.0); }

SparseMatrix full_pattern(const Eigen::MatrixXd& A) {
  SparseMatrix S(A.rows(), A.cols());
  std::vector<Eigen::Triplet<double>> t;
  for (int j = 0; j < A.cols(); ++j)
    for (int i = 0; i < A.rows(); ++i) t.emplace_back(i, j, A(i, j));
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

// One scalar equation in one unknown.
ParametricProblem scalar_problem(std::function<double(double, double)> F,
                                 std::function<double(double, double)> Fw,
                                 std::function<double(double, double)> Fp) {
  ParametricProblem pp;
  pp.residual = [F](const Vector& w, double p, Vector& out) {
    out.resize(1);
    out[0] = F(w[0], p);
  };
  pp.jacobian = [Fw](const Vector& w, double p, SparseMatrix& J) {
    J = full_pattern(Eigen::MatrixXd::Constant(1, 1, Fw(w[0], p)));
  };
  pp.dF_dp = [Fp](const Vector& w, double p, Vector& out) {
    out.resize(1);
    out[0] = Fp(w[0], p);
  };
  pp.x_scale = Vector::Ones(1);
  pp.f_scale = Vector::Ones(1);
  pp.p_scale = 1.0;
  return pp;
}

DaeSystem linear_decay(int n, double lambda) {
  DaeSystem s;
  s.residual = [lambda](double, const Vector& w, Vector& F) { F = -lambda * w; };
  s.jacobian = [n, lambda](double, const Vector&, SparseMatrix& J) {
    J = full_pattern(-lambda * Eigen::MatrixXd::Identity(n, n));
  };
  s.mass = Vector::Ones(n);
  s.x_scale = Vector::Ones(n);
  s.f_scale = Vector::Ones(n);
  return s;
}

}  // namespace

TEST(Newton, AffineInOneStep) {
  Eigen::MatrixXd A(3, 3);
  A << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const Vector b = Vector::LinSpaced(3, 1.0, 3.0);
  NonlinearProblem p;
  p.residual = [&](const Vector& w, Vector& F) { F = A * w - b; };
  p.jacobian = [&](const Vector&, SparseMatrix& J) { J = dense_to_sparse(A); };
  NewtonOptions o;
  o.tol = 1e-10;
  o.polish = false;
  const auto r = newton_solve(p, Vector::Zero(3), o);
  ASSERT_TRUE(r.converged()) << r.message;
  EXPECT_EQ(r.iterations, 1);
  ASSERT_FALSE(r.log.empty());
  EXPECT_EQ(r.log[0].alpha, 1.0);
  EXPECT_LT((A * r.w - b).norm(), 1e-12);
}

TEST(Newton, ScalarSquareRoot) {
  NonlinearProblem p;
  p.residual = [](const Vector& w, Vector& F) { F = Vector::Constant(1, w[0] * w[0] - 4.0); };
  p.jacobian = [](const Vector& w, SparseMatrix& J) {
    J = full_pattern(Eigen::MatrixXd::Constant(1, 1, 2.0 * w[0]));
  };
  NewtonOptions o;
  o.tol = 1e-12;
  const auto r = newton_solve(p, Vector::Constant(1, 1.0), o);
  ASSERT_TRUE(r.converged());
  EXPECT_LE(r.iterations, 8);
  EXPECT_NEAR(r.w[0], 2.0, 1e-12);

  // Quadratic tail: e_{k+1} ~ e_k^2 / (2 w*).
  std::vector<double> res;
  for (const auto& it : r.log) res.push_back(it.residual_norm);
  for (std::size_t k = 1; k + 1 < res.size(); ++k) {
    if (res[k] < 1e-2 && res[k + 1] > 1e-14) {
      EXPECT_LT(res[k + 1], 10.0 * res[k] * res[k]);
    }
  }
}

TEST(Newton, LineSearchGlobalizes) {
  // atan has a Newton cycle from |w0| > 1.39 without damping.
  NonlinearProblem p;
  p.residual = [](const Vector& w, Vector& F) { F = Vector::Constant(1, std::atan(w[0])); };
  p.jacobian = [](const Vector& w, SparseMatrix& J) {
    J = full_pattern(Eigen::MatrixXd::Constant(1, 1, 1.0 / (1.0 + w[0] * w[0])));
  };
  p.f_scale = Vector::Ones(1);
  NewtonOptions o;
  o.tol = 1e-12;
  const auto r = newton_solve(p, Vector::Constant(1, 3.0), o);
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.w[0], 0.0, 1e-12);
}

TEST(Newton, ReportsFailures) {
  NonlinearProblem p;
  p.residual = [](const Vector& w, Vector& F) { F = Vector::Constant(1, w[0] * w[0] + 1.0); };
  p.jacobian = [](const Vector& w, SparseMatrix& J) {
    J = full_pattern(Eigen::MatrixXd::Constant(1, 1, 2.0 * w[0]));
  };
  p.f_scale = Vector::Ones(1);
  const auto r = newton_solve(p, Vector::Constant(1, 0.0));
  EXPECT_FALSE(r.converged());
  EXPECT_EQ(r.status, NewtonStatus::SingularJacobian);

  NonlinearProblem q;
  q.residual = [](const Vector&, Vector&) { throw ThermoError("negative temperature"); };
  q.jacobian = [](const Vector&, SparseMatrix& J) { J = full_pattern(Eigen::MatrixXd::Ones(1, 1)); };
  q.f_scale = Vector::Ones(1);
  const auto rq = newton_solve(q, Vector::Zero(1));
  EXPECT_EQ(rq.status, NewtonStatus::EvaluationFailed);
  EXPECT_NE(rq.message.find("negative temperature"), std::string::npos);

  // Anything that is not a model-domain failure is a bug and propagates.
  q.residual = [](const Vector&, Vector&) { throw std::logic_error("boom"); };
  EXPECT_THROW(newton_solve(q, Vector::Zero(1)), std::logic_error);
}

TEST(Continuation, CircleOracle) {
  auto pp = scalar_problem([](double w, double p) { return w * w + p * p - 1.0; },
                           [](double w, double) { return 2.0 * w; },
                           [](double, double p) { return 2.0 * p; });
  ContinuationOptions o;
  o.ds0 = 0.02;
  o.ds_max = 0.05;
  o.p_min = -2.0;
  o.p_max = 2.0;
  o.max_points = 200;
  o.newton.tol = 1e-12;
  const Branch b = plac_trace(pp, Vector::Constant(1, 1.0), 0.0, o);
  ASSERT_GE(b.turning_points.size(), 2u);
  bool saw_plus = false, saw_minus = false;
  for (const auto& tp : b.turning_points) {
    saw_plus = saw_plus || std::abs(tp.p - 1.0) < 1e-3;
    saw_minus = saw_minus || std::abs(tp.p + 1.0) < 1e-3;
  }
  EXPECT_TRUE(saw_plus);
  EXPECT_TRUE(saw_minus);
  for (const auto& pt : b.points) {
    EXPECT_LT(std::abs(pt.w[0] * pt.w[0] + pt.p * pt.p - 1.0), 1e-8);
  }
  // The trace goes all the way round: both signs of w appear.
  double wmin = 1.0, wmax = -1.0;
  for (const auto& pt : b.points) {
    wmin = std::min(wmin, pt.w[0]);
    wmax = std::max(wmax, pt.w[0]);
  }
  EXPECT_LT(wmin, -0.99);
  EXPECT_GT(wmax, 0.99);
}

TEST(Continuation, CircleWithFiniteDifferenceDp) {
  auto pp = scalar_problem([](double w, double p) { return w * w + p * p - 1.0; },
                           [](double w, double) { return 2.0 * w; },
                           [](double, double p) { return 2.0 * p; });
  pp.dF_dp = nullptr;
  ContinuationOptions o;
  o.p_min = -2.0;
  o.p_max = 2.0;
  o.max_points = 200;
  o.newton.tol = 1e-12;
  const Branch b = plac_trace(pp, Vector::Constant(1, 1.0), 0.0, o);
  EXPECT_GE(b.turning_points.size(), 2u);
}

TEST(Continuation, LinearDiagonal) {
  auto pp = scalar_problem([](double w, double p) { return w - p; }, [](double, double) { return 1.0; },
                           [](double, double) { return -1.0; });
  ContinuationOptions o;
  o.p_min = -1.0;
  o.p_max = 1.0;
  o.newton.tol = 1e-13;
  const Branch b = plac_trace(pp, Vector::Constant(1, -1.0), -1.0, o);
  EXPECT_EQ(b.status, ContinuationStatus::LeftRange);
  EXPECT_TRUE(b.turning_points.empty());
  ASSERT_GT(b.points.size(), 3u);
  EXPECT_NEAR(b.points.back().p, 1.0, 1e-12);
  for (std::size_t k = 0; k < b.points.size(); ++k) {
    EXPECT_NEAR(b.points[k].w[0], b.points[k].p, 1e-12);
    if (k > 0) {
      const double dp = b.points[k].p - b.points[k - 1].p;
      EXPECT_GT(dp, 0.0);
      EXPECT_NEAR((b.points[k].w[0] - b.points[k - 1].w[0]) / dp, 1.0, 1e-9);
    }
  }
}

TEST(Continuation, BadSeedThrows) {
  auto pp = scalar_problem([](double w, double p) { return w * w + p * p + 1.0; },
                           [](double w, double) { return 2.0 * w; },
                           [](double, double p) { return 2.0 * p; });
  ContinuationOptions o;
  o.newton.max_iter = 5;
  EXPECT_THROW(plac_trace(pp, Vector::Constant(1, 1.0), 0.0, o), SolverError);
  o.ds_min = 1.0;
  o.ds_max = 0.1;
  EXPECT_THROW(o.validate(), ConfigError);
}

TEST(Continuation, ParabolaExtremum) {
  const double s[3] = {0.0, 1.0, 2.0};
  const double p[3] = {1.0, 2.0, 1.0};
  double se = 0.0, pe = 0.0;
  ASSERT_TRUE(parabola_extremum(s, p, se, pe));
  EXPECT_NEAR(se, 1.0, 1e-14);
  EXPECT_NEAR(pe, 2.0, 1e-14);
  const double q[3] = {0.0, 1.0, 2.0};
  EXPECT_FALSE(parabola_extremum(s, q, se, pe));
}

TEST(Esdirk, TableauConditions) {
  const auto t = Tableau::esdirk32();
  EXPECT_NO_THROW(t.validate());
  EXPECT_NEAR(t.gamma(), 0.4358665215084590, 1e-15);
  const auto& b = t.b;
  const auto& c = t.c;
  EXPECT_NEAR(b.sum(), 1.0, 1e-14);
  EXPECT_NEAR(b.dot(c), 0.5, 1e-14);
  EXPECT_NEAR(b.dot(c.cwiseProduct(c)), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(b.dot(t.a * c), 1.0 / 6.0, 1e-14);
  EXPECT_NEAR(t.b_hat.sum(), 1.0, 1e-14);
  EXPECT_NEAR(t.b_hat.dot(c), 0.5, 1e-14);
  for (int j = 0; j < t.stages; ++j) EXPECT_EQ(t.a(t.stages - 1, j), b[j]);
}

TEST(Esdirk, ConstantSolution) {
  DaeSystem s = linear_decay(2, 0.0);
  const Vector w0 = Vector::LinSpaced(2, 1.0, 2.0);
  const auto r = esdirk_integrate(s, w0, 0.0, 37.0);
  ASSERT_TRUE(r.success) << r.message;
  EXPECT_EQ(r.t, 37.0);
  EXPECT_LE((r.w - w0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Esdirk, ConvergenceOrder) {
  DaeSystem s = linear_decay(1, 1.0);
  std::vector<double> err;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    IntegratorOptions o;
    o.fixed_step = true;
    o.h0 = h;
    // Stage equations solved far below the truncation error.
    o.rtol = o.atol = 1e-11;
    const auto r = esdirk_integrate(s, Vector::Ones(1), 0.0, 1.0, o);
    ASSERT_TRUE(r.success) << r.message;
    err.push_back(std::abs(r.w[0] - std::exp(-1.0)));
  }
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    const double order = std::log2(err[k] / err[k + 1]);
    EXPECT_NEAR(order, 3.0, 0.2) << "between h and h/2 at level " << k;
  }
}

TEST(Esdirk, AdaptiveAccuracy) {
  DaeSystem s = linear_decay(1, 1.0);
  IntegratorOptions o;
  o.rtol = o.atol = 1e-8;
  int observed = 0;
  const auto r = esdirk_integrate(s, Vector::Ones(1), 0.0, 5.0, o, [&](double, const Vector&) { ++observed; });
  ASSERT_TRUE(r.success);
  EXPECT_NEAR(r.w[0], std::exp(-5.0), 1e-6);
  EXPECT_EQ(observed, r.stats.steps + 1);
}

TEST(Esdirk, SemiExplicitDae) {
  // y' = -y + z, 0 = z - y / 2  =>  y = exp(-t / 2)
  DaeSystem s;
  s.residual = [](double, const Vector& w, Vector& F) {
    F.resize(2);
    F[0] = -w[0] + w[1];
    F[1] = w[1] - 0.5 * w[0];
  };
  s.jacobian = [](double, const Vector&, SparseMatrix& J) {
    Eigen::MatrixXd A(2, 2);
    A << -1, 1, -0.5, 1;
    J = full_pattern(A);
  };
  s.mass = Vector(2);
  s.mass << 1, 0;
  s.x_scale = Vector::Ones(2);
  s.f_scale = Vector::Ones(2);
  IntegratorOptions o;
  o.rtol = o.atol = 1e-9;
  Vector w0(2);
  w0 << 1.0, 0.5;
  const auto r = esdirk_integrate(s, w0, 0.0, 2.0, o);
  ASSERT_TRUE(r.success) << r.message;
  EXPECT_NEAR(r.w[0], std::exp(-1.0), 1e-7);
  EXPECT_NEAR(r.w[1], 0.5 * r.w[0], 1e-12);

  Vector bad = w0;
  bad[1] = 3.0;
  EXPECT_THROW(esdirk_integrate(s, bad, 0.0, 1.0, o), SolverError);
  const auto fixed = make_consistent(s, bad, 0.0);
  ASSERT_TRUE(fixed.converged());
  EXPECT_EQ(fixed.w[0], 1.0);
  EXPECT_NEAR(fixed.w[1], 0.5, 1e-12);
}

TEST(Esdirk, SteadyDriftOfQuiescentSystem) {
  DaeSystem s = linear_decay(3, 0.0);
  EXPECT_EQ(steady_vs_dynamic_check(s, Vector::Ones(3), 100.0), 0.0);
}
