#include "reluverify/oracle.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"

namespace rv::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Affine restriction tracker: with the signs of all neurons below layer i
/// fixed, every pre-activation of layer i is an affine function of x.
struct AffineState {
  MatrixXd G;  // post-activation of the previous layer as G x + g0
  VectorXd g0;
};

struct Enumerator {
  const Network& net;
  const Box& box;
  double stop_below;
  bool early_stop;

  ExactResult result;
  LPProblem base;  // x variables with box bounds; sign rows appended/popped
  std::vector<int> x_vars;

  Enumerator(const Network& n, const Box& b, double stop, bool early)
      : net(n), box(b), stop_below(stop), early_stop(early) {
    for (int d = 0; d < net.input_dim(); ++d)
      x_vars.push_back(base.add_var("x" + std::to_string(d), box.lo[d], box.hi[d]));
    base.objective = VectorXd::Zero(net.input_dim());
  }

  bool feasible_now() {
    LPProblem p = base;
    p.objective.setZero();
    LPOutcome o = solve_lp(p);
    ++result.lp_calls;
    if (o.status == LPStatus::kNumericalFailure)
      throw Error("oracle: LP numerical failure during enumeration");
    return o.status == LPStatus::kOptimal;
  }

  /// Returns true when the search should stop (early-stop case).
  bool leaf(const AffineState& st) {
    const AffineLayer& out = net.layers().back();
    LPProblem p = base;
    p.objective = (out.weight * st.G).row(0).transpose();
    const double c0 = (out.weight * st.g0 + out.bias)[0];
    LPOutcome o = solve_lp(p);
    ++result.lp_calls;
    if (o.status == LPStatus::kInfeasible) return false;
    if (o.status == LPStatus::kNumericalFailure)
      throw Error("oracle: LP numerical failure during enumeration");
    ++result.feasible_patterns;
    const double v = o.value + c0;
    if (v < result.min_value) {
      result.min_value = v;
      result.argmin = o.point;
    }
    // early stop only on a witness the forward pass confirms
    return early_stop && v < stop_below && net.forward(o.point)[0] < stop_below;
  }

  bool descend(int layer, int neuron, AffineState st) {
    if (layer == net.num_hidden_layers()) return leaf(st);
    const AffineLayer& L = net.layer(layer);
    if (neuron == 0) {
      st.G = L.weight * st.G;
      st.g0 = L.weight * st.g0 + L.bias;
      // st now holds the pre-activations of this layer
    }
    if (neuron == L.out_dim()) {
      // apply the chosen gates to move to post-activations
      return descend(layer + 1, 0, st);
    }
    const VectorXd row = st.G.row(neuron).transpose();
    const double c = st.g0[neuron];
    for (int sign = 0; sign < 2; ++sign) {
      LPRow r;
      r.coeffs = row;
      if (sign == 0) {
        r.rel = Rel::kGe;  // h >= 0, neuron active
        r.rhs = -c;
      } else {
        r.rel = Rel::kLe;  // h <= 0, neuron inactive
        r.rhs = -c;
      }
      base.add_row(r);
      bool stop = false;
      if (feasible_now()) {
        AffineState child = st;
        if (sign == 1) {
          child.G.row(neuron).setZero();
          child.g0[neuron] = 0.0;
        }
        stop = descend(layer, neuron + 1, std::move(child));
      }
      base.rows.pop_back();
      if (stop) return true;
    }
    return false;
  }

  void run() {
    AffineState st;
    st.G = MatrixXd::Identity(net.input_dim(), net.input_dim());
    st.g0 = VectorXd::Zero(net.input_dim());
    descend(0, 0, std::move(st));
  }
};

ExactResult exact_min_impl(const Network& net, const Box& box, double stop,
                           bool early, int budget) {
  box.validate();
  if (net.output_dim() != 1)
    throw InvariantError("oracle: exact_min expects a scalar-output network");
  if (net.total_hidden_neurons() > budget)
    throw BudgetError("oracle: network has " +
                      std::to_string(net.total_hidden_neurons()) +
                      " hidden neurons, enumeration budget is " +
                      std::to_string(budget));
  Enumerator e(net, box, stop, early);
  e.run();
  return e.result;
}

}  // namespace

ExactResult exact_min(const Network& net, const Box& box, int budget) {
  return exact_min_impl(net, box, -kInf, false, budget);
}

ExactResult exact_min_early(const Network& net, const Box& box,
                            double stop_below, int budget) {
  return exact_min_impl(net, box, stop_below, true, budget);
}

OracleOutcome exact_verify(const Network& net, const PropertySpec& prop,
                           int budget) {
  const Network merged = merge_property(net, prop);
  const Box box = prop.input_box();
  OracleOutcome out;
  ExactResult er = exact_min_early(merged, box, 0.0, budget);
  out.exact_min = er.min_value;
  if (er.min_value >= 0.0) {
    out.verdict = OracleVerdict::kSafe;
    return out;
  }
  out.verdict = OracleVerdict::kUnsafe;
  out.witness = er.argmin;
  out.witness_value = merged.forward(er.argmin)[0];
  return out;
}

namespace {

struct InstanceRng {
  std::mt19937_64 eng;
  explicit InstanceRng(uint64_t seed, int index)
      : eng(seed * 0x9e3779b97f4a7c15ull + static_cast<uint64_t>(index) + 1) {}
  double uniform(double a, double b) {
    std::uniform_real_distribution<double> d(a, b);
    return d(eng);
  }
  int uniform_int(int a, int b) {
    std::uniform_int_distribution<int> d(a, b);
    return d(eng);
  }
};

Network random_network(InstanceRng& rng, const GenSpec& spec) {
  const int input_dim = rng.uniform_int(1, spec.max_input_dim);
  const int n_hidden_layers = rng.uniform_int(1, 2);
  std::vector<int> widths(n_hidden_layers);
  int budget = spec.max_total_hidden;
  for (int i = 0; i < n_hidden_layers; ++i) {
    const int remaining = n_hidden_layers - i - 1;
    const int hi = std::max(2, budget - 2 * remaining);
    widths[i] = rng.uniform_int(2, std::min(hi, budget - 2 * remaining));
    budget -= widths[i];
  }
  const int output_dim = rng.uniform_int(1, spec.max_outputs);

  std::vector<AffineLayer> layers;
  int prev = input_dim;
  for (int i = 0; i <= n_hidden_layers; ++i) {
    const int rows = i < n_hidden_layers ? widths[i] : output_dim;
    AffineLayer l;
    l.weight.resize(rows, prev);
    l.bias.resize(rows);
    const double scale = 1.0 / std::sqrt(static_cast<double>(prev));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < prev; ++c)
        l.weight(r, c) = rng.uniform(-1.0, 1.0) * scale;
      l.bias[r] = rng.uniform(-0.5, 0.5);
    }
    layers.push_back(std::move(l));
    prev = rows;
  }
  return Network(std::move(layers));
}

PropertySpec random_property(InstanceRng& rng, const Network& net) {
  PropertySpec p;
  VectorXd x0(net.input_dim());
  for (int d = 0; d < net.input_dim(); ++d) x0[d] = rng.uniform(-0.5, 0.5);
  p.center = x0;
  p.epsilon = 0.0;
  VectorXd c(net.output_dim());
  if (net.output_dim() >= 2 && rng.uniform(0.0, 1.0) < 0.5) {
    // classification-style margin between two outputs
    const int a = rng.uniform_int(0, net.output_dim() - 1);
    int b = rng.uniform_int(0, net.output_dim() - 2);
    if (b >= a) ++b;
    c.setZero();
    c[a] = 1.0;
    c[b] = -1.0;
  } else {
    for (int k = 0; k < c.size(); ++k) c[k] = rng.uniform(-1.0, 1.0);
    if (c.isZero(0.0)) c[0] = 1.0;
  }
  p.spec_vector = c;
  const double target = rng.uniform(0.2, 1.0);
  p.spec_offset = target - c.dot(net.forward(x0));
  return p;
}

}  // namespace

std::vector<Instance> gen_instances(uint64_t seed, int count,
                                    const GenSpec& spec) {
  std::vector<Instance> out;
  out.reserve(count);
  for (int index = 0; index < count; ++index) {
    const OracleVerdict target =
        index % 2 == 0 ? OracleVerdict::kSafe : OracleVerdict::kUnsafe;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 200)
        throw Error("gen_instances: could not build instance " +
                    std::to_string(index));
      InstanceRng rng(seed, index * 1000 + attempt);
      Network net = random_network(rng, spec);
      PropertySpec prop = random_property(rng, net);

      auto verdict_at = [&](double eps) {
        prop.epsilon = eps;
        return exact_verify(net, prop);
      };

      // grow until the property breaks, then bisect to the boundary
      double lo = 0.0, hi = 0.0;
      bool found_unsafe = false;
      for (double eps = 0.25; eps <= 64.0; eps *= 2.0) {
        if (verdict_at(eps).verdict == OracleVerdict::kUnsafe) {
          hi = eps;
          found_unsafe = true;
          break;
        }
        lo = eps;
      }
      if (!found_unsafe) continue;
      for (int step = 0; step < 14; ++step) {
        const double mid = 0.5 * (lo + hi);
        if (verdict_at(mid).verdict == OracleVerdict::kUnsafe) hi = mid;
        else lo = mid;
      }

      // step away from the boundary until the margin is clear
      bool done = false;
      for (double gamma : {0.01, 0.02, 0.05, 0.1, 0.2, 0.4}) {
        const double eps = target == OracleVerdict::kSafe ? lo * (1.0 - gamma)
                                                          : hi * (1.0 + gamma);
        if (eps <= 0.0) continue;
        prop.epsilon = eps;
        ExactResult full = exact_min(merge_property(net, prop), prop.input_box());
        const OracleVerdict v = full.min_value >= 0.0 ? OracleVerdict::kSafe
                                                      : OracleVerdict::kUnsafe;
        if (v != target || std::abs(full.min_value) < spec.decision_margin)
          continue;
        Instance inst;
        inst.net = net;
        inst.prop = prop;
        inst.verdict = v;
        inst.epsilon = eps;
        inst.exact_min = full.min_value;
        inst.seed = seed;
        inst.index = index;
        out.push_back(std::move(inst));
        done = true;
        break;
      }
      if (done) break;
    }
  }
  return out;
}

void save_corpus(const std::vector<Instance>& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["instances"] = nlohmann::ordered_json::array();
  for (const auto& inst : corpus) {
    const std::string net_name = "net_" + std::to_string(inst.index) + ".json";
    const std::string prop_name = "prop_" + std::to_string(inst.index) + ".json";
    save_network(inst.net, (fs::path(dir) / net_name).string());
    save_property(inst.prop, (fs::path(dir) / prop_name).string());
    manifest["instances"].push_back(
        {{"index", inst.index},
         {"net", net_name},
         {"prop", prop_name},
         {"verdict", inst.verdict == OracleVerdict::kSafe ? "SAFE" : "UNSAFE"},
         {"epsilon", inst.epsilon},
         {"exact_min", inst.exact_min},
         {"seed", inst.seed}});
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw ParseError("cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::vector<ManifestEntry> out;
  const auto dir = std::filesystem::path(path).parent_path();
  for (const auto& e : j.at("instances")) {
    ManifestEntry m;
    m.index = e.at("index").get<int>();
    m.net_path = (dir / e.at("net").get<std::string>()).string();
    m.prop_path = (dir / e.at("prop").get<std::string>()).string();
    m.verdict = e.at("verdict").get<std::string>();
    m.epsilon = e.at("epsilon").get<double>();
    m.exact_min = e.value("exact_min", 0.0);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace rv::oracle
