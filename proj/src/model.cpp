#include "reluverify/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rv {

using nlohmann::json;

Network::Network(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw SchemaError("network has no layers");
  for (auto& l : layers_) {
    if (l.bias.size() == 0) l.bias = VectorXd::Zero(l.out_dim());
  }
  input_dim_ = layers_.front().in_dim();
  output_dim_ = layers_.back().out_dim();
  validate();
}

void Network::validate() const {
  for (int i = 0; i < num_layers(); ++i) {
    const AffineLayer& l = layers_[i];
    if (l.weight.size() == 0)
      throw SchemaError("layer " + std::to_string(i) + " has empty weight");
    if (l.bias.size() != l.out_dim())
      throw SchemaError("layer " + std::to_string(i) +
                        " bias length does not match weight rows");
    if (!l.weight.allFinite() || !l.bias.allFinite())
      throw SchemaError("layer " + std::to_string(i) +
                        " contains non-finite entries");
    if (i > 0 && l.in_dim() != layers_[i - 1].out_dim())
      throw SchemaError("layer " + std::to_string(i) + " expects " +
                        std::to_string(l.in_dim()) + " inputs but layer " +
                        std::to_string(i - 1) + " outputs " +
                        std::to_string(layers_[i - 1].out_dim()));
  }
}

int Network::total_hidden_neurons() const {
  int n = 0;
  for (int i = 0; i < num_hidden_layers(); ++i) n += hidden_size(i);
  return n;
}

VectorXd Network::forward(const VectorXd& x) const {
  if (x.size() != input_dim_)
    throw DimensionError("forward: input has length " +
                         std::to_string(x.size()) + ", layer 0 expects " +
                         std::to_string(input_dim_));
  VectorXd v = x;
  for (int i = 0; i < num_layers(); ++i) {
    v = layers_[i].weight * v + layers_[i].bias;
    if (i + 1 < num_layers()) v = v.cwiseMax(0.0);
  }
  return v;
}

MatrixXd Network::forward_batch(const MatrixXd& xs) const {
  if (xs.rows() != input_dim_)
    throw DimensionError("forward_batch: inputs have " +
                         std::to_string(xs.rows()) + " rows, layer 0 expects " +
                         std::to_string(input_dim_));
  MatrixXd v = xs;
  for (int i = 0; i < num_layers(); ++i) {
    v = (layers_[i].weight * v).colwise() + layers_[i].bias;
    if (i + 1 < num_layers()) v = v.cwiseMax(0.0);
  }
  return v;
}

Box PropertySpec::input_box() const {
  validate();
  if (center) {
    VectorXd eps = VectorXd::Constant(center->size(), *epsilon);
    return Box{*center - eps, *center + eps};
  }
  return Box{*lower, *upper};
}

void PropertySpec::validate() const {
  const bool ball = center.has_value() || epsilon.has_value();
  const bool box = lower.has_value() || upper.has_value();
  if (ball == box)
    throw SchemaError(
        "property must define either center/epsilon or lower/upper");
  if (ball) {
    if (!center || !epsilon)
      throw SchemaError("property needs both center and epsilon");
    if (*epsilon < 0.0 || !std::isfinite(*epsilon))
      throw SchemaError("epsilon must be a nonnegative finite number");
    if (!center->allFinite()) throw SchemaError("center has non-finite entry");
  } else {
    if (!lower || !upper)
      throw SchemaError("property needs both lower and upper");
    Box b{*lower, *upper};
    b.validate();
  }
  if (spec_vector.size() == 0 || spec_vector.isZero(0.0))
    throw SchemaError("spec_vector must not be all-zero");
  if (!spec_vector.allFinite() || !std::isfinite(spec_offset))
    throw SchemaError("spec has non-finite entries");
}

Network merge_property(const Network& net, const PropertySpec& prop) {
  prop.validate();
  if (prop.spec_vector.size() != net.output_dim())
    throw DimensionError("spec_vector has length " +
                         std::to_string(prop.spec_vector.size()) +
                         " but network outputs " +
                         std::to_string(net.output_dim()));
  std::vector<AffineLayer> layers = net.layers();
  AffineLayer& last = layers.back();
  MatrixXd w = prop.spec_vector.transpose() * last.weight;
  VectorXd b(1);
  b[0] = prop.spec_vector.dot(last.bias) + prop.spec_offset;
  last.weight = w;
  last.bias = b;
  return Network(std::move(layers));
}

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const json::exception& e) {
    // number overflow and friends: structurally valid, semantically not
    throw SchemaError(path + ": " + e.what());
  }
  return j;
}

json parse_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  } catch (const json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
}

MatrixXd matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw SchemaError(where + ": weight must be a non-empty 2d array");
  const size_t rows = j.size();
  const size_t cols = j[0].size();
  MatrixXd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw SchemaError(where + ": ragged weight row " + std::to_string(r));
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw SchemaError(where + ": non-numeric weight entry");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

VectorXd vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array");
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw SchemaError(where + ": non-numeric entry at index " +
                        std::to_string(i));
    v[i] = j[i].get<double>();
  }
  return v;
}

Network network_from_json(const json& j, const std::string& origin) {
  if (!j.is_object() || !j.contains("layers"))
    throw SchemaError(origin + ": network file needs a \"layers\" array");
  std::vector<AffineLayer> layers;
  int idx = 0;
  for (const auto& lj : j["layers"]) {
    const std::string where = origin + ": layer " + std::to_string(idx);
    if (!lj.is_object() || !lj.contains("weight"))
      throw SchemaError(where + " needs a \"weight\" matrix");
    AffineLayer l;
    l.weight = matrix_from_json(lj["weight"], where);
    if (lj.contains("bias")) l.bias = vector_from_json(lj["bias"], where);
    layers.push_back(std::move(l));
    ++idx;
  }
  Network net(std::move(layers));
  if (j.contains("input_dim") &&
      j["input_dim"].get<int>() != net.input_dim())
    throw SchemaError(origin + ": declared input_dim " +
                      std::to_string(j["input_dim"].get<int>()) +
                      " does not match layer 0 (" +
                      std::to_string(net.input_dim()) + ")");
  return net;
}

PropertySpec property_from_json(const json& j, const std::string& origin) {
  if (!j.is_object()) throw SchemaError(origin + ": expected a JSON object");
  PropertySpec p;
  if (j.contains("center")) p.center = vector_from_json(j["center"], origin);
  if (j.contains("epsilon")) {
    if (!j["epsilon"].is_number())
      throw SchemaError(origin + ": epsilon must be a number");
    p.epsilon = j["epsilon"].get<double>();
  }
  if (j.contains("lower")) p.lower = vector_from_json(j["lower"], origin);
  if (j.contains("upper")) p.upper = vector_from_json(j["upper"], origin);
  if (!j.contains("spec_vector"))
    throw SchemaError(origin + ": property needs \"spec_vector\"");
  p.spec_vector = vector_from_json(j["spec_vector"], origin);
  if (j.contains("spec_offset")) {
    if (!j["spec_offset"].is_number())
      throw SchemaError(origin + ": spec_offset must be a number");
    p.spec_offset = j["spec_offset"].get<double>();
  }
  try {
    p.validate();
  } catch (const SchemaError& e) {
    throw SchemaError(origin + ": " + e.what());
  }
  return p;
}

json network_to_json(const Network& net) {
  json layers = json::array();
  for (const auto& l : net.layers()) {
    json w = json::array();
    for (int r = 0; r < l.weight.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < l.weight.cols(); ++c) row.push_back(l.weight(r, c));
      w.push_back(std::move(row));
    }
    json b = json::array();
    for (int i = 0; i < l.bias.size(); ++i) b.push_back(l.bias[i]);
    layers.push_back(json{{"weight", std::move(w)}, {"bias", std::move(b)}});
  }
  return json{{"input_dim", net.input_dim()},
              {"output_dim", net.output_dim()},
              {"layers", std::move(layers)}};
}

json property_to_json(const PropertySpec& prop) {
  json j;
  if (prop.center) {
    json c = json::array();
    for (int i = 0; i < prop.center->size(); ++i)
      c.push_back((*prop.center)[i]);
    j["center"] = std::move(c);
    j["epsilon"] = *prop.epsilon;
  } else {
    json lo = json::array(), hi = json::array();
    for (int i = 0; i < prop.lower->size(); ++i) {
      lo.push_back((*prop.lower)[i]);
      hi.push_back((*prop.upper)[i]);
    }
    j["lower"] = std::move(lo);
    j["upper"] = std::move(hi);
  }
  json sv = json::array();
  for (int i = 0; i < prop.spec_vector.size(); ++i)
    sv.push_back(prop.spec_vector[i]);
  j["spec_vector"] = std::move(sv);
  j["spec_offset"] = prop.spec_offset;
  return j;
}

}  // namespace

Network load_network(const std::string& path) {
  return network_from_json(parse_file(path), path);
}

PropertySpec load_property(const std::string& path) {
  return property_from_json(parse_file(path), path);
}

Network network_from_json_text(const std::string& text,
                               const std::string& origin) {
  return network_from_json(parse_text(text, origin), origin);
}

PropertySpec property_from_json_text(const std::string& text,
                                     const std::string& origin) {
  return property_from_json(parse_text(text, origin), origin);
}

std::string network_to_json_text(const Network& net) {
  return network_to_json(net).dump(2);
}

std::string property_to_json_text(const PropertySpec& prop) {
  return property_to_json(prop).dump(2);
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << network_to_json_text(net) << "\n";
}

void save_property(const PropertySpec& prop, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << property_to_json_text(prop) << "\n";
}

}  // namespace rv
