#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace rvtest;

namespace {

LPProblem random_lp(std::mt19937_64& rng, int nvars, int nrows) {
  std::uniform_real_distribution<double> du(-2.0, 2.0);
  LPProblem p;
  for (int j = 0; j < nvars; ++j)
    p.add_var("v" + std::to_string(j), -2.0 - 0.1 * j, 2.0 + 0.05 * j);
  p.objective = VectorXd(nvars);
  for (int j = 0; j < nvars; ++j) p.objective[j] = du(rng);
  for (int r = 0; r < nrows; ++r) {
    LPRow row;
    row.coeffs = VectorXd(nvars);
    for (int j = 0; j < nvars; ++j) row.coeffs[j] = du(rng);
    // keep the origin feasible so the system has an interior
    row.rel = Rel::kLe;
    row.rhs = std::abs(du(rng)) + 0.2;
    p.add_row(std::move(row));
  }
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("lp");

TEST_CASE("minimize a single bounded variable") {
  LPProblem p;
  p.add_var("x", 2.0, 5.0);
  p.objective = VectorXd::Ones(1);
  LPOutcome o = solve_lp(p);
  REQUIRE(o.status == LPStatus::kOptimal);
  CHECK(o.value == doctest::Approx(2.0));
  CHECK(o.point[0] == doctest::Approx(2.0));
}

TEST_CASE("contradictory rows are infeasible") {
  LPProblem p;
  p.add_var("x");
  p.objective = VectorXd::Zero(1);
  LPRow r1{VectorXd::Ones(1), Rel::kLe, 0.0, "le"};
  LPRow r2{VectorXd::Ones(1), Rel::kGe, 1e-3, "ge"};
  p.add_row(r1);
  p.add_row(r2);
  CHECK(solve_lp(p).status == LPStatus::kInfeasible);
}

TEST_CASE("equalities and free variables") {
  // min x + 2y  s.t. x + y = 1, x <= 2, both variables free
  // substituting y = 1 - x gives 2 - x, minimized at x = 2
  LPProblem p;
  p.add_var("x");
  p.add_var("y");
  p.objective = VectorXd(2);
  p.objective << 1.0, 2.0;
  LPRow eq{VectorXd(2), Rel::kEq, 1.0, "sum"};
  eq.coeffs << 1.0, 1.0;
  p.add_row(eq);
  LPRow cap{VectorXd(2), Rel::kLe, 2.0, "cap"};
  cap.coeffs << 1.0, 0.0;
  p.add_row(cap);
  LPOutcome o = solve_lp(p);
  REQUIRE(o.status == LPStatus::kOptimal);
  CHECK(o.value == doctest::Approx(0.0));
  CHECK(o.point[0] == doctest::Approx(2.0));
  CHECK(o.point[1] == doctest::Approx(-1.0));
}

TEST_CASE("random LPs match vertex enumeration") {
  std::mt19937_64 rng(101);
  int solved = 0;
  for (int t = 0; t < 60; ++t) {
    const int nv = 2 + static_cast<int>(rng() % 5);
    const int nr = 2 + static_cast<int>(rng() % 6);
    LPProblem p = random_lp(rng, nv, nr);
    LPOutcome o = solve_lp(p);
    VertexOpt v = vertex_enumeration_min(p);
    REQUIRE(o.status == LPStatus::kOptimal);  // origin is feasible
    REQUIRE(v.feasible);
    CHECK(o.value == doctest::Approx(v.value).epsilon(1e-6));
    CHECK(p.max_violation(o.point) <= 1e-7);
    ++solved;
  }
  CHECK(solved == 60);
}

TEST_CASE("build_lp row structure for a single unstable neuron") {
  MatrixXd w1(1, 1), w2(1, 1);
  w1 << 1.0;
  w2 << 1.0;
  Network net = make_net({w1, w2}, {VectorXd::Zero(1), VectorXd::Zero(1)});
  IntermediateBounds ib;
  ib.lower = {VectorXd::Constant(1, -1.0)};
  ib.upper = {VectorXd::Constant(1, 1.0)};
  LPProblem p = build_lp(net, SplitAssignment::all_free(net), ib, unit_box(1));

  int triangles = 0;
  bool upper_row_ok = false;
  for (const auto& r : p.rows) {
    if (r.name.rfind("tri", 0) == 0) ++triangles;
    if (r.name.rfind("tri_c", 0) == 0) {
      // g - 0.5 h <= 0.5 encodes g <= 0.5 h + 0.5
      CHECK(r.coeffs[2] == doctest::Approx(1.0));   // g
      CHECK(r.coeffs[1] == doctest::Approx(-0.5));  // h
      CHECK(r.rhs == doctest::Approx(0.5));
      upper_row_ok = true;
    }
  }
  CHECK(triangles == 3);
  CHECK(upper_row_ok);
}

TEST_CASE("build_lp on a fully split net has no triangle rows") {
  Network net = twin_relu_net();
  SplitAssignment sp = SplitAssignment::all_free(net);
  sp.set(0, 0, SplitState::kPos);
  sp.set(0, 1, SplitState::kNeg);
  IntermediateBounds ib;
  ib.lower = {VectorXd::Constant(2, -1.0)};
  ib.upper = {VectorXd::Constant(2, 1.0)};
  LPProblem p = build_lp(net, sp, ib, unit_box(1));
  for (const auto& r : p.rows) CHECK(r.name.rfind("tri", 0) != 0);
}

TEST_CASE("twin relu conflicting leaves are infeasible, agreeing leaves solve") {
  Network net = twin_relu_net();
  Box box = unit_box(1);

  auto outcome_for = [&](SplitState s1, SplitState s2) {
    SplitAssignment sp = SplitAssignment::all_free(net);
    sp.set(0, 0, s1);
    sp.set(0, 1, s2);
    auto ir = compute_intermediate_bounds(net, sp,
                                          AlphaParams::dense_default(net), box);
    REQUIRE(!ir.empty);
    return lp_bound(net, sp, ir.ibounds, box);
  };

  auto conflicting = outcome_for(SplitState::kNeg, SplitState::kPos);
  CHECK(conflicting.outcome.status == LPStatus::kInfeasible);
  auto conflicting2 = outcome_for(SplitState::kPos, SplitState::kNeg);
  CHECK(conflicting2.outcome.status == LPStatus::kInfeasible);

  auto agreeing = outcome_for(SplitState::kPos, SplitState::kPos);
  REQUIRE(agreeing.outcome.status == LPStatus::kOptimal);
  CHECK(agreeing.outcome.value == doctest::Approx(0.0).epsilon(1e-9));
  auto agreeing2 = outcome_for(SplitState::kNeg, SplitState::kNeg);
  REQUIRE(agreeing2.outcome.status == LPStatus::kOptimal);
  CHECK(agreeing2.outcome.value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lp bound is sound and the primal certificate is tight") {
  std::mt19937_64 rng(103);
  for (int t = 0; t < 6; ++t) {
    RandomNetSpec spec;
    spec.width_max = 8;
    spec.layers_min = 2;
    spec.layers_max = 3;
    Network net = random_net(rng, spec);
    Box box = unit_box(net.input_dim(), 0.5);
    SplitAssignment fr = SplitAssignment::all_free(net);
    auto ir = compute_intermediate_bounds(net, fr,
                                          AlphaParams::dense_default(net), box);
    LPProblem p = build_lp(net, fr, ir.ibounds, box);
    LPOutcome o = solve_lp(p);
    REQUIRE(o.status == LPStatus::kOptimal);
    CHECK(p.max_violation(o.point) <= 1e-7);
    MatrixXd xs = sample_box(rng, box, 2000);
    MatrixXd fx = net.forward_batch(xs);
    CHECK(o.value <= fx.row(0).minCoeff() + 1e-9);
  }
}

TEST_CASE("lp dominates fixed-slope bounds built from the same ibounds") {
  std::mt19937_64 rng(107);
  for (int t = 0; t < 10; ++t) {
    RandomNetSpec spec;
    spec.width_max = 8;
    spec.layers_min = 2;
    spec.layers_max = 3;
    Network net = random_net(rng, spec);
    Box box = unit_box(net.input_dim(), 0.5);
    SplitAssignment fr = SplitAssignment::all_free(net);
    auto ir = compute_intermediate_bounds(net, fr,
                                          AlphaParams::dense_default(net), box);
    AlphaParams base = AlphaParams::heuristic(net, fr, ir.ibounds);
    auto lo = lp_bound(net, fr, ir.ibounds, box);
    REQUIRE(lo.outcome.status == LPStatus::kOptimal);
    BoundOptions frozen;
    frozen.reuse_bounds = &ir.ibounds;
    frozen.reuse_below_layer = net.num_hidden_layers();
    for (int a = 0; a < 25; ++a) {
      AlphaParams alpha = a == 0 ? base : random_alpha(rng, base);
      auto r = compute_output_bounds(net, fr, alpha, box, frozen);
      CHECK(lo.outcome.value + 1e-6 >= r.f_lb);
    }
  }
}

TEST_CASE("lp dump grammar smoke") {
  LPProblem p;
  p.add_var("x", 0.0, 1.0);
  p.add_var("y");
  p.objective = VectorXd(2);
  p.objective << 1.0, -1.0;
  LPRow r{VectorXd(2), Rel::kLe, 0.5, "cap"};
  r.coeffs << 2.0, 1.0;
  p.add_row(r);
  const std::string text = p.dump();
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("cap:") != std::string::npos);
  CHECK(text.find("y free") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}

TEST_SUITE_END();
