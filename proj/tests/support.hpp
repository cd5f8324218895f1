#pragma once

#include <random>
#include <string>
#include <vector>

#include "reluverify/boundprop.hpp"
#include "reluverify/lp.hpp"
#include "reluverify/model.hpp"

namespace rvtest {

using namespace rv;

inline std::string fixture(const std::string& name) {
  return std::string(RV_FIXTURE_DIR) + "/" + name;
}

inline Network twin_relu_net() { return load_network(fixture("twin_relu_net.json")); }

inline Box unit_box(int dim, double r = 1.0) {
  return Box{VectorXd::Constant(dim, -r), VectorXd::Constant(dim, r)};
}

/// Single-affine-layer network y = w x + b with scalar output.
Network linear_net(const MatrixXd& w, const VectorXd& b);

/// Builds a network from explicit layer matrices.
Network make_net(const std::vector<MatrixXd>& weights,
                 const std::vector<VectorXd>& biases);

struct RandomNetSpec {
  int input_dim_min = 2, input_dim_max = 8;
  int layers_min = 2, layers_max = 4;   // affine layers
  int width_min = 3, width_max = 16;
  int output_dim = 1;
  double bias_scale = 0.5;
};

Network random_net(std::mt19937_64& rng, const RandomNetSpec& spec);

/// Uniform samples inside the box, one per column.
MatrixXd sample_box(std::mt19937_64& rng, const Box& box, int count);

/// Random slope assignment in [0,1] over the current support.
AlphaParams random_alpha(std::mt19937_64& rng, const AlphaParams& base);

/// Exact box extrema of the piecewise pattern containing x (forward pass
/// with frozen gates), for linear-region cross checks.
double affine_restriction_value(const Network& net, const VectorXd& gate_point,
                                const VectorXd& x);

/// Brute-force LP oracle: enumerates vertices of the constraint system
/// (rows + finite variable bounds) and minimizes the objective over the
/// feasible ones. Requires a bounded feasible set.
struct VertexOpt {
  bool feasible = false;
  double value = 0.0;
  VectorXd point;
};
VertexOpt vertex_enumeration_min(const LPProblem& prob, double feas_tol = 1e-7);

/// min/max of A x + b over the box corners (d <= 20).
std::pair<double, double> corner_extrema(const Eigen::RowVectorXd& a, double b,
                                         const Box& box);

}  // namespace rvtest
