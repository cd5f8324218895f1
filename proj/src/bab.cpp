#include "reluverify/bab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace rv::bab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}
}  // namespace

void DomainSet::insert(SubDomain d) {
  if (d.f_lb >= 0.0)
    throw InvariantError("domain set must not hold verified domains");
  const auto key = std::make_pair(d.f_lb, d.id);
  by_id_[d.id] = d.f_lb;
  ordered_.emplace(key, std::move(d));
}

std::vector<SubDomain> DomainSet::pop_worst(int n) {
  std::vector<SubDomain> out;
  auto it = ordered_.begin();
  while (it != ordered_.end() && static_cast<int>(out.size()) < n) {
    if (it->second.exhausted) {
      ++it;
      continue;
    }
    out.push_back(std::move(it->second));
    by_id_.erase(out.back().id);
    it = ordered_.erase(it);
  }
  return out;
}

bool DomainSet::erase(int64_t id) {
  auto f = by_id_.find(id);
  if (f == by_id_.end()) return false;
  ordered_.erase(std::make_pair(f->second, id));
  by_id_.erase(f);
  return true;
}

bool DomainSet::contains(int64_t id) const { return by_id_.count(id) > 0; }

SubDomain* DomainSet::find(int64_t id) {
  auto f = by_id_.find(id);
  if (f == by_id_.end()) return nullptr;
  auto it = ordered_.find(std::make_pair(f->second, id));
  return it == ordered_.end() ? nullptr : &it->second;
}

void DomainSet::update_f_lb(int64_t id, double f_lb) {
  auto f = by_id_.find(id);
  if (f == by_id_.end()) return;
  auto it = ordered_.find(std::make_pair(f->second, id));
  SubDomain d = std::move(it->second);
  ordered_.erase(it);
  d.f_lb = f_lb;
  f->second = f_lb;
  ordered_.emplace(std::make_pair(f_lb, id), std::move(d));
}

double DomainSet::min_f_lb() const {
  return ordered_.empty() ? kInf : ordered_.begin()->first.first;
}

int DomainSet::splittable_count() const {
  int n = 0;
  for (const auto& [k, d] : ordered_) n += !d.exhausted;
  return n;
}

std::vector<int64_t> DomainSet::ids_sorted() const {
  std::vector<int64_t> ids;
  ids.reserve(by_id_.size());
  for (const auto& [id, f] : by_id_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<BranchScore> branch_scores(const Network& net, const SubDomain& d) {
  std::vector<BranchScore> scores;
  for (int i = 0; i < net.num_hidden_layers(); ++i) {
    if (i >= d.ibounds.num_layers()) break;
    for (int j = 0; j < net.hidden_size(i); ++j) {
      if (d.splits.get(i, j) != SplitState::kFree) continue;
      const double l = d.ibounds.lower[i][j], u = d.ibounds.upper[i][j];
      if (!(l < 0.0 && u > 0.0)) continue;
      double lam = 0.0;
      if (i < static_cast<int>(d.lambda.size()) && d.lambda[i].size() > j)
        lam = d.lambda[i][j];
      scores.push_back({i, j, std::abs(lam) * u * (-l) / (u - l)});
    }
  }
  return scores;
}

std::optional<NeuronRef> select_branch_neuron(const Network& net,
                                              const SubDomain& d) {
  auto scores = branch_scores(net, d);
  if (scores.empty()) return std::nullopt;
  const BranchScore* best = &scores[0];
  for (const auto& s : scores) {
    if (s.score > best->score ||
        (s.score == best->score &&
         (s.layer < best->layer ||
          (s.layer == best->layer && s.index < best->index))))
      best = &s;
  }
  return NeuronRef{best->layer, best->index};
}

void VerifierConfig::validate() const {
  if (batch_size < 1) throw SchemaError("batch_size must be >= 1");
  if (lp_threshold < 2 * effective_batch())
    throw SchemaError("lp_threshold must be >= 2 * batch size");
  if (timeout_seconds <= 0.0) throw SchemaError("timeout must be > 0");
  if (thread_count < 1) throw SchemaError("thread_count must be >= 1");
  init_opt.validate();
  node_opt.validate();
}

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::kVerified: return "VERIFIED";
    case VerdictStatus::kFalsified: return "FALSIFIED";
    case VerdictStatus::kTimeout: return "TIMEOUT";
    case VerdictStatus::kIncompleteExhausted: return "INCOMPLETE_MODE_EXHAUSTED";
  }
  return "UNKNOWN";
}

namespace {

bool domain_exhausted(const Network& net, const SplitAssignment& splits,
                      const IntermediateBounds& ib) {
  for (int i = 0; i < net.num_hidden_layers(); ++i) {
    for (int j = 0; j < net.hidden_size(i); ++j) {
      if (splits.get(i, j) != SplitState::kFree) continue;
      if (ib.lower[i][j] < 0.0 && ib.upper[i][j] > 0.0) return false;
    }
  }
  return true;
}

struct ArchivedNode {
  int64_t parent_id = -1;
  SplitAssignment splits;
  IntermediateBounds ibounds;
  bool lp_resolved = false;
};

class Verifier {
 public:
  Verifier(const Network& net, const Box& box, const VerifierConfig& cfg,
           const EventSink& sink)
      : net_(net), box_(box), cfg_(cfg), sink_(sink),
        t0_(std::chrono::steady_clock::now()) {}

  Verdict run();

 private:
  struct ChildBound {
    bool empty = false;
    double f_lb = -kInf, f_ub = kInf;
    AlphaParams alpha;
    BoundResult bound;
  };

  double elapsed() const { return now_seconds(t0_); }
  bool timed_out() const { return elapsed() > cfg_.timeout_seconds; }

  void event(const std::string& kind, int64_t id, double f_lb, double f_ub,
             int extra = -1) {
    if (!sink_) return;
    std::ostringstream os;
    os.precision(17);
    os << "{\"event\":\"" << kind << "\",\"id\":" << id << ",\"t\":" << elapsed();
    if (std::isfinite(f_lb)) os << ",\"f_lb\":" << f_lb;
    if (std::isfinite(f_ub)) os << ",\"f_ub\":" << f_ub;
    if (extra >= 0) os << ",\"extra\":" << extra;
    os << "}";
    sink_(os.str());
  }

  /// Concrete forward evaluation; records the best upper bound and fills
  /// the verdict when a violation is found.
  void try_point(const VectorXd& x) {
    if (final_) return;
    if (!box_.contains(x, 1e-12)) return;
    const double v = net_.forward(x)[0];
    if (v < concrete_ub_) {
      concrete_ub_ = v;
      best_point_ = x;
    }
    if (v < 0.0) {
      Verdict out;
      out.status = VerdictStatus::kFalsified;
      out.witness = x;
      out.witness_value = v;
      final_ = out;
    }
  }

  double global_lb() const {
    return std::min(P_.min_f_lb(), resolved_min_);
  }

  ChildBound bound_domain(const SplitAssignment& splits,
                          const AlphaParams& warm_alpha,
                          const IntermediateBounds* parent_ib, int split_layer);

  void process_child(SubDomain&& child, ChildBound&& cb);
  void lp_apply(int64_t id, const LPBoundOutcome& out);
  void lp_backtrack(int64_t parent_id);
  void run_lp_pass(const std::vector<int64_t>& ids);
  void prune_descendants(int64_t ancestor);

  Verdict finish(VerdictStatus status) {
    Verdict out = final_.value_or(Verdict{});
    if (!final_) out.status = status;
    trace_.push_back(TracePoint{iteration_, global_lb(), concrete_ub_,
                                P_.size(), branches_, elapsed()});
    out.f_lb = global_lb();
    out.f_ub = concrete_ub_;
    out.branches = branches_;
    out.lp_calls = lp_calls_;
    out.wall_seconds = elapsed();
    out.time_bounding = time_bounding_;
    out.time_lp = time_lp_;
    out.time_branching = time_branching_;
    out.trace = std::move(trace_);
    trace_.clear();
    return out;
  }

  const Network& net_;
  Box box_;
  VerifierConfig cfg_;
  EventSink sink_;
  std::chrono::steady_clock::time_point t0_;

  DomainSet P_;
  std::unordered_map<int64_t, ArchivedNode> tree_;
  int64_t next_id_ = 0;
  int64_t branches_ = 0;
  int64_t lp_calls_ = 0;
  double resolved_min_ = kInf;
  double concrete_ub_ = kInf;
  VectorXd best_point_;
  std::optional<Verdict> final_;
  std::vector<TracePoint> trace_;
  int iteration_ = 0;
  double time_bounding_ = 0.0, time_lp_ = 0.0, time_branching_ = 0.0;
};

Verifier::ChildBound Verifier::bound_domain(const SplitAssignment& splits,
                                            const AlphaParams& warm_alpha,
                                            const IntermediateBounds* parent_ib,
                                            int split_layer) {
  BoundOptions opts;
  if (parent_ib) {
    opts.reuse_bounds = parent_ib;
    opts.reuse_below_layer = split_layer;
  }
  ChildBound cb;
  if (cfg_.disable_alpha_opt) {
    BoundOptions hopts = opts;
    hopts.heuristic_lower_slopes = true;
    BoundResult r = compute_output_bounds(net_, splits,
                                          AlphaParams::dense_default(net_),
                                          box_, hopts);
    cb.empty = r.empty;
    cb.f_lb = r.f_lb;
    cb.f_ub = r.f_ub;
    if (!r.empty) cb.alpha = AlphaParams::heuristic(net_, splits, r.ibounds);
    cb.bound = std::move(r);
  } else {
    auto ir = compute_intermediate_bounds(net_, splits, warm_alpha, box_, opts);
    if (ir.empty) {
      cb.empty = true;
      return cb;
    }
    AlphaParams alpha0 = warm_alpha.restricted(net_, splits, ir.ibounds);
    const OptimizerConfig& oc =
        parent_ib == nullptr ? cfg_.init_opt : cfg_.node_opt;
    OptimizeResult res = optimize_alpha(net_, splits, alpha0, box_, oc, opts);
    cb.empty = res.empty;
    cb.f_lb = res.f_lb;
    cb.f_ub = res.bound.f_ub;
    cb.alpha = std::move(res.alpha);
    cb.bound = std::move(res.bound);
  }
  if (!cb.empty && cfg_.lp_bounding) {
    // reference mode: tighten with the triangle LP at every node
    LPBoundOutcome lo = lp_bound(net_, splits, cb.bound.ibounds, box_);
    if (lo.outcome.status == LPStatus::kOptimal)
      cb.f_lb = std::max(cb.f_lb, lo.outcome.value);
    else if (lo.outcome.status == LPStatus::kInfeasible)
      cb.empty = true;
  }
  return cb;
}

void Verifier::process_child(SubDomain&& child, ChildBound&& cb) {
  if (final_) return;
  if (cb.empty) {
    event("empty", child.id, kInf, -kInf);
    return;
  }
  try_point(cb.bound.lower_argmin);
  if (final_) return;
  child.f_lb = cb.f_lb;
  child.f_ub = cb.f_ub;
  child.alpha = std::move(cb.alpha);
  child.ibounds = cb.bound.ibounds;
  child.lambda = cb.bound.lambda;
  tree_[child.id] = ArchivedNode{child.parent_id, child.splits, child.ibounds};
  if (child.f_lb >= 0.0) {
    resolved_min_ = std::min(resolved_min_, child.f_lb);
    event("verified", child.id, child.f_lb, child.f_ub);
    return;
  }
  child.exhausted = domain_exhausted(net_, child.splits, child.ibounds);
  event("open", child.id, child.f_lb, child.f_ub, child.exhausted ? 1 : 0);
  P_.insert(std::move(child));
}

void Verifier::prune_descendants(int64_t ancestor) {
  std::vector<int64_t> doomed;
  for (int64_t id : P_.ids_sorted()) {
    int64_t cur = id;
    while (cur >= 0) {
      if (cur == ancestor) {
        doomed.push_back(id);
        break;
      }
      auto it = tree_.find(cur);
      cur = it == tree_.end() ? -1 : it->second.parent_id;
    }
  }
  for (int64_t id : doomed) {
    P_.erase(id);
    event("pruned", id, -kInf, kInf);
  }
}

void Verifier::lp_backtrack(int64_t parent_id) {
  while (parent_id >= 0 && !final_) {
    auto it = tree_.find(parent_id);
    if (it == tree_.end() || it->second.lp_resolved) return;
    LPBoundOutcome out =
        lp_bound(net_, it->second.splits, it->second.ibounds, box_);
    ++lp_calls_;
    if (out.outcome.status == LPStatus::kOptimal) {
      try_point(out.input_point);
      if (final_) return;
      if (out.outcome.value < 0.0) return;  // parent unresolved
      resolved_min_ = std::min(resolved_min_, out.outcome.value);
    } else if (out.outcome.status == LPStatus::kNumericalFailure) {
      return;
    }
    // proved nonnegative or infeasible: the whole subtree is settled
    it->second.lp_resolved = true;
    event("lp_parent_resolved", parent_id, 0.0, kInf);
    prune_descendants(parent_id);
    parent_id = it->second.parent_id;
  }
}

void Verifier::lp_apply(int64_t id, const LPBoundOutcome& out) {
  if (final_) return;
  SubDomain* d = P_.find(id);
  if (d == nullptr) return;
  const int64_t parent = d->parent_id;
  switch (out.outcome.status) {
    case LPStatus::kNumericalFailure:
      return;  // neither verified nor pruned
    case LPStatus::kInfeasible: {
      auto it = tree_.find(id);
      if (it != tree_.end()) it->second.lp_resolved = true;
      P_.erase(id);
      event("lp_infeasible", id, -kInf, kInf);
      lp_backtrack(parent);
      return;
    }
    case LPStatus::kOptimal:
      break;
  }
  try_point(out.input_point);
  if (final_) return;
  if (out.outcome.value >= 0.0) {
    resolved_min_ = std::min(resolved_min_, out.outcome.value);
    auto it = tree_.find(id);
    if (it != tree_.end()) it->second.lp_resolved = true;
    P_.erase(id);
    event("lp_verified", id, out.outcome.value, kInf);
    lp_backtrack(parent);
    return;
  }
  d = P_.find(id);
  if (d != nullptr) {
    d->lp_checked = true;
    if (out.outcome.value > d->f_lb) P_.update_f_lb(id, out.outcome.value);
    event("lp_bounded", id, out.outcome.value, kInf);
  }
}

void Verifier::run_lp_pass(const std::vector<int64_t>& ids) {
  if (ids.empty()) return;
  const auto t = std::chrono::steady_clock::now();
  struct Item {
    int64_t id;
    SplitAssignment splits;
    IntermediateBounds ibounds;
    LPBoundOutcome out;
  };
  std::vector<Item> items;
  items.reserve(ids.size());
  for (int64_t id : ids) {
    SubDomain* d = P_.find(id);
    if (d == nullptr) continue;
    items.push_back(Item{id, d->splits, d->ibounds, {}});
  }
  parallel_for(static_cast<int>(items.size()), cfg_.thread_count, [&](int i) {
    items[i].out = lp_bound(net_, items[i].splits, items[i].ibounds, box_);
  });
  lp_calls_ += static_cast<int64_t>(items.size());
  for (auto& item : items) {
    lp_apply(item.id, item.out);
    if (final_) break;
  }
  time_lp_ += now_seconds(t);
}

Verdict Verifier::run() {
  cfg_.validate();
  if (net_.output_dim() != 1)
    throw InvariantError("verify expects a scalar-output (merged) network");

  const int n = cfg_.effective_batch();

  // root domain
  {
    const auto t = std::chrono::steady_clock::now();
    SplitAssignment free_splits = SplitAssignment::all_free(net_);
    AlphaParams warm;
    if (!cfg_.disable_alpha_opt) {
      BoundOptions boot;
      boot.heuristic_lower_slopes = true;
      auto ir = compute_intermediate_bounds(
          net_, free_splits, AlphaParams::dense_default(net_), box_, boot);
      warm = AlphaParams::heuristic(net_, free_splits, ir.ibounds);
    }
    ChildBound cb = bound_domain(free_splits, warm, nullptr, 0);
    time_bounding_ += now_seconds(t);

    try_point(0.5 * (box_.lo + box_.hi));
    SubDomain root;
    root.id = next_id_++;
    root.splits = free_splits;
    root.depth = 0;
    process_child(std::move(root), std::move(cb));
    if (final_) return finish(VerdictStatus::kFalsified);
    if (P_.empty()) return finish(VerdictStatus::kVerified);
    if (!cfg_.disable_lp_fallback) {
      SubDomain* r = P_.find(0);
      if (r != nullptr && r->exhausted) run_lp_pass({0});
      if (final_) return finish(VerdictStatus::kFalsified);
    }
  }

  while (true) {
    if (final_) return finish(VerdictStatus::kFalsified);
    if (P_.empty()) return finish(VerdictStatus::kVerified);
    if (timed_out()) return finish(VerdictStatus::kTimeout);

    trace_.push_back(TracePoint{iteration_, global_lb(), concrete_ub_,
                                P_.size(), branches_, elapsed()});

    if (P_.splittable_count() == 0) {
      if (cfg_.disable_lp_fallback)
        return finish(VerdictStatus::kIncompleteExhausted);
      // every remaining domain is a leaf the LP already left unresolved;
      // no further refinement is possible at this precision
      return finish(VerdictStatus::kTimeout);
    }

    // pick + split
    const auto tb = std::chrono::steady_clock::now();
    std::vector<SubDomain> picked = P_.pop_worst(n);
    struct Pending {
      SubDomain child;
      SplitAssignment splits;
      AlphaParams warm;
      const IntermediateBounds* parent_ib;
      int split_layer;
    };
    std::vector<Pending> pending;
    std::vector<IntermediateBounds> parent_ibs;
    parent_ibs.reserve(picked.size());
    for (auto& d : picked) {
      auto pick = select_branch_neuron(net_, d);
      if (!pick) {
        // stored bounds say exhausted; re-insert and let the LP handle it
        d.exhausted = true;
        P_.insert(std::move(d));
        continue;
      }
      parent_ibs.push_back(d.ibounds);
      event("split", d.id, d.f_lb, d.f_ub,
            pick->layer * 1000 + pick->index);
      for (int side = 0; side < 2; ++side) {
        Pending p;
        p.splits = d.splits;
        p.splits.set(pick->layer, pick->index,
                     side == 0 ? SplitState::kPos : SplitState::kNeg);
        p.child.id = next_id_++;
        p.child.parent_id = d.id;
        p.child.depth = d.depth + 1;
        p.child.splits = p.splits;
        p.child.split_layer = pick->layer;
        p.warm = d.alpha;
        p.parent_ib = &parent_ibs.back();
        p.split_layer = pick->layer;
        pending.push_back(std::move(p));
      }
      branches_ += 2;
    }
    time_branching_ += now_seconds(tb);
    if (pending.empty()) {
      ++iteration_;
      continue;
    }

    // bound the batch
    const auto tbound = std::chrono::steady_clock::now();
    std::vector<ChildBound> results(pending.size());
    parallel_for(static_cast<int>(pending.size()), cfg_.thread_count,
                 [&](int i) {
                   results[i] = bound_domain(pending[i].splits, pending[i].warm,
                                             pending[i].parent_ib,
                                             pending[i].split_layer);
                 });
    time_bounding_ += now_seconds(tbound);

    std::vector<int64_t> fresh_leaves;
    for (size_t i = 0; i < pending.size(); ++i) {
      const int64_t id = pending[i].child.id;
      process_child(std::move(pending[i].child), std::move(results[i]));
      if (final_) return finish(VerdictStatus::kFalsified);
      SubDomain* d = P_.find(id);
      if (d != nullptr && d->exhausted) fresh_leaves.push_back(id);
    }

    if (!cfg_.disable_lp_fallback) {
      // leaf domains are checked as soon as they appear
      run_lp_pass(fresh_leaves);
      if (final_) return finish(VerdictStatus::kFalsified);
      if (P_.size() > cfg_.lp_threshold) {
        std::vector<int64_t> targets;
        P_.for_each([&](const SubDomain& d) {
          if (d.exhausted && !d.lp_checked) targets.push_back(d.id);
        });
        std::vector<int64_t> ids = P_.ids_sorted();
        const int recent = std::min<int>(2 * n, static_cast<int>(ids.size()));
        for (int k = 0; k < recent; ++k) {
          const int64_t id = ids[ids.size() - 1 - k];
          SubDomain* d = P_.find(id);
          if (d != nullptr && !d->lp_checked) targets.push_back(id);
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()),
                      targets.end());
        run_lp_pass(targets);
        if (final_) return finish(VerdictStatus::kFalsified);
      }
    }
    ++iteration_;
  }
}

}  // namespace

Verdict verify_merged(const Network& merged, const Box& box,
                      const VerifierConfig& cfg, const EventSink& sink) {
  Verifier v(merged, box, cfg, sink);
  return v.run();
}

Verdict verify(const Network& net, const PropertySpec& prop,
               const VerifierConfig& cfg, const EventSink& sink) {
  const Network merged = merge_property(net, prop);
  return verify_merged(merged, prop.input_box(), cfg, sink);
}

}  // namespace rv::bab
