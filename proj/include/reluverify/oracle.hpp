#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reluverify/lp.hpp"
#include "reluverify/model.hpp"

namespace rv::oracle {

/// Enumeration refused: the network exceeds the pattern budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kMaxHiddenNeurons = 20;

/// Fixed sign (+ active / - inactive) for every hidden neuron.
struct ActivationPattern {
  std::vector<std::vector<int8_t>> signs;  // +1 or -1 per hidden neuron
};

struct ExactResult {
  double min_value = std::numeric_limits<double>::infinity();
  VectorXd argmin;
  int64_t feasible_patterns = 0;
  int64_t lp_calls = 0;
};

/// Exact global minimum of a scalar-output network over the box, by
/// depth-first enumeration of activation patterns with infeasible-prefix
/// pruning. Each pattern's affine restriction and sign constraints are
/// built from first principles (forward affine composition) and solved
/// with the shared LP solver.
ExactResult exact_min(const Network& net, const Box& box,
                      int budget = kMaxHiddenNeurons);

/// Like exact_min but stops as soon as a feasible pattern with value below
/// `stop_below` is found (the returned min_value is then just that value).
ExactResult exact_min_early(const Network& net, const Box& box,
                            double stop_below,
                            int budget = kMaxHiddenNeurons);

enum class OracleVerdict { kSafe, kUnsafe };

struct OracleOutcome {
  OracleVerdict verdict = OracleVerdict::kSafe;
  VectorXd witness;       // UNSAFE only; validated by a forward pass
  double witness_value = 0.0;
  double exact_min = std::numeric_limits<double>::infinity();
};

OracleOutcome exact_verify(const Network& net, const PropertySpec& prop,
                           int budget = kMaxHiddenNeurons);

struct GenSpec {
  int max_input_dim = 3;
  int max_total_hidden = 12;
  int max_outputs = 3;
  /// Required |exact_min| at the chosen epsilon, keeping instances clearly
  /// decidable on either side of the boundary.
  double decision_margin = 2e-4;
};

struct Instance {
  Network net;
  PropertySpec prop;
  OracleVerdict verdict = OracleVerdict::kSafe;
  double epsilon = 0.0;
  double exact_min = 0.0;
  uint64_t seed = 0;
  int index = 0;
};

/// Deterministic corpus: instance i depends only on (seed, i). Epsilon is
/// bisected against exact_verify to sit near the SAFE/UNSAFE boundary,
/// then nudged outward until the decision margin holds; even indices are
/// SAFE, odd ones UNSAFE.
std::vector<Instance> gen_instances(uint64_t seed, int count,
                                    const GenSpec& spec = {});

/// Writes net_<i>.json / prop_<i>.json plus manifest.json into dir.
void save_corpus(const std::vector<Instance>& corpus, const std::string& dir);

struct ManifestEntry {
  std::string net_path;
  std::string prop_path;
  std::string verdict;
  double epsilon = 0.0;
  double exact_min = 0.0;
  int index = 0;
};

std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace rv::oracle
