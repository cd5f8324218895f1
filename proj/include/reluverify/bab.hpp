#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "reluverify/lp.hpp"
#include "reluverify/slope_opt.hpp"

namespace rv::bab {

/// One node of the branch-and-bound search tree.
struct SubDomain {
  int64_t id = -1;
  int64_t parent_id = -1;
  SplitAssignment splits;
  double f_lb = -std::numeric_limits<double>::infinity();
  double f_ub = std::numeric_limits<double>::infinity();
  AlphaParams alpha;           // warm-start snapshot
  IntermediateBounds ibounds;  // snapshot matching f_lb
  std::vector<VectorXd> lambda;
  int depth = 0;
  bool lp_checked = false;
  /// No FREE unstable neuron is left; the domain cannot be split further.
  bool exhausted = false;
  /// Hidden layer of the split that created this domain (bound reuse hint).
  int split_layer = 0;
};

/// Unverified sub-domains ordered worst-first (smallest f_lb, then id).
class DomainSet {
 public:
  void insert(SubDomain d);
  /// Removes and returns up to n splittable domains with the smallest f_lb.
  std::vector<SubDomain> pop_worst(int n);
  bool erase(int64_t id);
  bool contains(int64_t id) const;
  SubDomain* find(int64_t id);
  void update_f_lb(int64_t id, double f_lb);

  int size() const { return static_cast<int>(by_id_.size()); }
  bool empty() const { return by_id_.empty(); }
  double min_f_lb() const;
  int splittable_count() const;
  std::vector<int64_t> ids_sorted() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [key, d] : ordered_) fn(d);
  }

 private:
  std::map<std::pair<double, int64_t>, SubDomain> ordered_;
  std::unordered_map<int64_t, double> by_id_;
};

struct NeuronRef {
  int layer = -1;
  int index = -1;
};

struct BranchScore {
  int layer;
  int index;
  double score;
};

/// Relaxation-mass branching scores |lambda| * u*(-l)/(u-l) for every FREE
/// unstable neuron of the domain, from its stored bounds and backward
/// coefficients.
std::vector<BranchScore> branch_scores(const Network& net, const SubDomain& d);

/// Argmax of branch_scores with deterministic tie-breaks: larger score,
/// then shallower layer, then smaller index.
std::optional<NeuronRef> select_branch_neuron(const Network& net,
                                              const SubDomain& d);

struct VerifierConfig {
  int batch_size = 16;
  int lp_threshold = 512;  // switch to the LP fallback when |P| exceeds it
  double timeout_seconds = 60.0;
  int thread_count = 1;
  OptimizerConfig init_opt{100, 0.1, 0.98, 10, true, false};
  OptimizerConfig node_opt{10, 0.1, 0.98, 5, true, false};
  bool disable_alpha_opt = false;
  bool force_batch_size_1 = false;
  bool disable_lp_fallback = false;
  /// Reference mode: additionally bound every node with the triangle LP.
  bool lp_bounding = false;
  uint64_t seed = 0;

  void validate() const;
  int effective_batch() const { return force_batch_size_1 ? 1 : batch_size; }
};

enum class VerdictStatus { kVerified, kFalsified, kTimeout, kIncompleteExhausted };

std::string to_string(VerdictStatus s);

struct TracePoint {
  int iteration = 0;
  double f_lb = 0.0;
  double f_ub = 0.0;
  int domains = 0;
  int64_t branches = 0;
  double elapsed_s = 0.0;
};

struct Verdict {
  VerdictStatus status = VerdictStatus::kTimeout;
  double f_lb = -std::numeric_limits<double>::infinity();
  double f_ub = std::numeric_limits<double>::infinity();
  std::optional<VectorXd> witness;
  double witness_value = 0.0;
  int64_t branches = 0;
  int64_t lp_calls = 0;
  double wall_seconds = 0.0;
  double time_bounding = 0.0;
  double time_lp = 0.0;
  double time_branching = 0.0;
  std::vector<TracePoint> trace;
};

/// Per-domain event log line, emitted when a sink is installed.
using EventSink = std::function<void(const std::string& json_line)>;

/// Complete verification of spec_vector . f(x) + spec_offset >= 0 over the
/// property's input region. Batched optimized bounding, worst-first ReLU
/// splitting, concrete-evaluation falsification, and an LP fallback that
/// certifies or prunes leaf domains (unless disabled).
Verdict verify(const Network& net, const PropertySpec& prop,
               const VerifierConfig& cfg, const EventSink& sink = nullptr);

/// Same loop on an already-merged scalar network and explicit box.
Verdict verify_merged(const Network& merged, const Box& box,
                      const VerifierConfig& cfg, const EventSink& sink = nullptr);

}  // namespace rv::bab
