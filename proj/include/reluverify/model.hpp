#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reluverify/common.hpp"

namespace rv {

/// Dense affine layer y = W x + b. Rows of `weight` are output neurons.
struct AffineLayer {
  MatrixXd weight;
  VectorXd bias;  // always materialized; zero vector when absent in the file

  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

/// Feedforward network of dense affine layers with ReLU between them.
/// The final affine layer has no activation.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<AffineLayer> layers);

  const std::vector<AffineLayer>& layers() const { return layers_; }
  const AffineLayer& layer(int i) const { return layers_[i]; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  /// Number of hidden (ReLU) layers: num_layers() - 1.
  int num_hidden_layers() const { return num_layers() - 1; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  /// Width of hidden layer i (0-based).
  int hidden_size(int i) const { return layers_[i].out_dim(); }
  int total_hidden_neurons() const;

  /// Exact forward pass. Throws DimensionError naming the layer on mismatch.
  VectorXd forward(const VectorXd& x) const;

  /// Batched forward pass, one sample per column.
  MatrixXd forward_batch(const MatrixXd& xs) const;

 private:
  void validate() const;

  std::vector<AffineLayer> layers_;
  int input_dim_ = 0;
  int output_dim_ = 0;
};

/// Verification query: prove spec_vector . f(x) + spec_offset >= 0 for all x
/// in the input region (an l_inf ball around `center` or an explicit box).
struct PropertySpec {
  std::optional<VectorXd> center;
  std::optional<double> epsilon;
  std::optional<VectorXd> lower;
  std::optional<VectorXd> upper;
  VectorXd spec_vector;
  double spec_offset = 0.0;

  Box input_box() const;
  void validate() const;
};

/// Folds the linear property into the last layer: returns a scalar-output
/// network g with g(x) = spec_vector . f(x) + spec_offset.
Network merge_property(const Network& net, const PropertySpec& prop);

Network load_network(const std::string& path);
PropertySpec load_property(const std::string& path);

Network network_from_json_text(const std::string& text,
                               const std::string& origin = "<string>");
PropertySpec property_from_json_text(const std::string& text,
                                     const std::string& origin = "<string>");

std::string network_to_json_text(const Network& net);
std::string property_to_json_text(const PropertySpec& prop);

void save_network(const Network& net, const std::string& path);
void save_property(const PropertySpec& prop, const std::string& path);

}  // namespace rv
