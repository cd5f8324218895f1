#include "reluverify/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rv::cli {

using nlohmann::ordered_json;

int exit_code_for(bab::VerdictStatus s) {
  switch (s) {
    case bab::VerdictStatus::kVerified: return kExitVerified;
    case bab::VerdictStatus::kFalsified: return kExitFalsified;
    case bab::VerdictStatus::kTimeout: return kExitTimeout;
    case bab::VerdictStatus::kIncompleteExhausted: return kExitExhausted;
  }
  return kExitUsage;
}

namespace {

ordered_json config_echo(const bab::VerifierConfig& cfg) {
  return ordered_json{{"batch_size", cfg.batch_size},
                      {"eta", cfg.lp_threshold},
                      {"timeout", cfg.timeout_seconds},
                      {"threads", cfg.thread_count},
                      {"alpha_iters_init", cfg.init_opt.iterations},
                      {"alpha_iters_node", cfg.node_opt.iterations},
                      {"lr", cfg.init_opt.step_size},
                      {"decay", cfg.init_opt.decay},
                      {"no_alpha_opt", cfg.disable_alpha_opt},
                      {"no_batch", cfg.force_batch_size_1},
                      {"no_lp", cfg.disable_lp_fallback},
                      {"lp_bounding", cfg.lp_bounding},
                      {"seed", cfg.seed}};
}

int map_error(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (dynamic_cast<const ParseError*>(&e)) return kExitParse;
  if (dynamic_cast<const DimensionError*>(&e)) return kExitDimension;
  if (dynamic_cast<const SchemaError*>(&e)) return kExitSchema;
  if (dynamic_cast<const Error*>(&e)) return kExitSchema;
  return kExitUsage;
}

}  // namespace

ordered_json report_from_verdict(const bab::Verdict& v,
                                 const bab::VerifierConfig& cfg) {
  ordered_json r;
  r["verdict"] = bab::to_string(v.status);
  r["f_lb"] = std::isfinite(v.f_lb) ? ordered_json(v.f_lb) : ordered_json(nullptr);
  r["f_ub"] = std::isfinite(v.f_ub) ? ordered_json(v.f_ub) : ordered_json(nullptr);
  if (v.witness) {
    ordered_json w = ordered_json::array();
    for (int i = 0; i < v.witness->size(); ++i) w.push_back((*v.witness)[i]);
    r["witness"] = std::move(w);
    r["witness_value"] = v.witness_value;
  } else {
    r["witness"] = nullptr;
  }
  r["branches"] = v.branches;
  r["lp_calls"] = v.lp_calls;
  const double accounted = v.time_bounding + v.time_lp + v.time_branching;
  r["timing"] = ordered_json{{"bounding", v.time_bounding},
                             {"lp", v.time_lp},
                             {"branching", v.time_branching},
                             {"other", std::max(0.0, v.wall_seconds - accounted)},
                             {"total", v.wall_seconds}};
  ordered_json trace = ordered_json::array();
  for (const auto& t : v.trace) {
    trace.push_back(ordered_json{
        {"iteration", t.iteration},
        {"f_lb", std::isfinite(t.f_lb) ? ordered_json(t.f_lb) : ordered_json(nullptr)},
        {"f_ub", std::isfinite(t.f_ub) ? ordered_json(t.f_ub) : ordered_json(nullptr)},
        {"domains", t.domains},
        {"branches", t.branches},
        {"elapsed_s", t.elapsed_s}});
  }
  r["trace"] = std::move(trace);
  r["config"] = config_echo(cfg);
  r["tool_version"] = kVersion;
  r["seed"] = cfg.seed;
  return r;
}

ordered_json strip_volatile(ordered_json report) {
  report.erase("timing");
  if (report.contains("trace")) {
    for (auto& t : report["trace"]) t.erase("elapsed_s");
  }
  return report;
}

int run_verify(const VerifyFlags& flags, std::ostream& err) {
  try {
    Network net = load_network(flags.net_path);
    PropertySpec prop = load_property(flags.prop_path);

    std::ofstream trace_out;
    bab::EventSink sink = nullptr;
    if (!flags.trace_log.empty()) {
      trace_out.open(flags.trace_log);
      if (!trace_out) throw ParseError("cannot write " + flags.trace_log);
      sink = [&trace_out](const std::string& line) { trace_out << line << "\n"; };
    }

    bab::Verdict v = bab::verify(net, prop, flags.cfg, sink);
    ordered_json report = report_from_verdict(v, flags.cfg);
    if (flags.out_path.empty()) {
      std::cout << report.dump(2) << std::endl;
    } else {
      std::ofstream out(flags.out_path);
      if (!out) throw ParseError("cannot write " + flags.out_path);
      out << report.dump(2) << "\n";
    }
    err << "verdict: " << bab::to_string(v.status);
    if (v.witness) {
      err << "  witness: [";
      for (int i = 0; i < v.witness->size(); ++i)
        err << (i ? ", " : "") << (*v.witness)[i];
      err << "]  value: " << v.witness_value;
    }
    err << "\n";
    return exit_code_for(v.status);
  } catch (const std::exception& e) {
    return map_error(e, err);
  }
}

bab::VerifierConfig config_for_mode(const std::string& mode,
                                    bab::VerifierConfig base) {
  base.disable_alpha_opt = false;
  base.force_batch_size_1 = false;
  base.lp_bounding = false;
  if (mode == "opt_batch") {
  } else if (mode == "opt_nobatch") {
    base.force_batch_size_1 = true;
  } else if (mode == "noopt") {
    base.disable_alpha_opt = true;
  } else if (mode == "lpnode") {
    base.lp_bounding = true;
  } else {
    throw SchemaError("unknown bench mode: " + mode);
  }
  return base;
}

int run_bench(const BenchFlags& flags, std::ostream& err) {
  try {
    auto manifest = oracle::load_manifest(flags.manifest_path);
    if (flags.modes.empty()) throw SchemaError("bench: no modes given");
    std::ofstream csv(flags.out_csv);
    if (!csv) throw ParseError("cannot write " + flags.out_csv);
    csv << "index,mode,verdict,expected,time_s,branches,lp_calls\n";
    csv.precision(9);

    struct Solved {
      std::string mode;
      double time;
    };
    std::vector<Solved> solved;
    for (const auto& mode : flags.modes) {
      bab::VerifierConfig cfg = config_for_mode(mode, flags.cfg);
      for (const auto& inst : manifest) {
        std::string verdict = "ERROR";
        double secs = 0.0;
        int64_t branches = 0, lp_calls = 0;
        try {
          Network net = load_network(inst.net_path);
          PropertySpec prop = load_property(inst.prop_path);
          bab::Verdict v = bab::verify(net, prop, cfg);
          verdict = bab::to_string(v.status);
          secs = v.wall_seconds;
          branches = v.branches;
          lp_calls = v.lp_calls;
          if (v.status == bab::VerdictStatus::kVerified ||
              v.status == bab::VerdictStatus::kFalsified)
            solved.push_back({mode, secs});
        } catch (const std::exception& e) {
          err << "bench: instance " << inst.index << " mode " << mode
              << " failed: " << e.what() << "\n";
        }
        csv << inst.index << "," << mode << "," << verdict << ","
            << inst.verdict << "," << secs << "," << branches << ","
            << lp_calls << "\n";
      }
    }
    if (!flags.cactus_csv.empty()) {
      std::ofstream cac(flags.cactus_csv);
      if (!cac) throw ParseError("cannot write " + flags.cactus_csv);
      cac << "mode,time_s,solved\n";
      cac.precision(9);
      for (const auto& mode : flags.modes) {
        std::vector<double> times;
        for (const auto& s : solved)
          if (s.mode == mode) times.push_back(s.time);
        std::sort(times.begin(), times.end());
        for (size_t i = 0; i < times.size(); ++i)
          cac << mode << "," << times[i] << "," << (i + 1) << "\n";
      }
    }
    return 0;
  } catch (const std::exception& e) {
    return map_error(e, err);
  }
}

int run_bounds(const BoundsFlags& flags, std::ostream& err) {
  try {
    Network net = load_network(flags.net_path);
    PropertySpec prop = load_property(flags.prop_path);
    Network merged = merge_property(net, prop);
    Box box = prop.input_box();
    SplitAssignment free_splits = SplitAssignment::all_free(merged);

    BoundOptions boot;
    boot.heuristic_lower_slopes = true;
    auto ir = compute_intermediate_bounds(
        merged, free_splits, AlphaParams::dense_default(merged), box, boot);
    if (ir.empty) throw Error("bounds: root domain reported empty");
    AlphaParams alpha0 = AlphaParams::heuristic(merged, free_splits, ir.ibounds);

    LPBoundOutcome lp_init = lp_bound(merged, free_splits, ir.ibounds, box);
    if (lp_init.outcome.status != LPStatus::kOptimal)
      throw Error("bounds: initial LP did not solve");

    OptimizerConfig cfg;
    cfg.iterations = flags.iterations;
    cfg.step_size = flags.step_size;
    cfg.decay = flags.decay;
    cfg.early_stop_no_improve = 0;
    cfg.early_stop_verified = false;
    OptimizeResult res = optimize_alpha(merged, free_splits, alpha0, box, cfg);

    LPBoundOutcome lp_opt = lp_bound(merged, free_splits, res.bound.ibounds, box);
    if (lp_opt.outcome.status != LPStatus::kOptimal)
      throw Error("bounds: optimized-bounds LP did not solve");

    std::ofstream csv(flags.out_csv);
    if (!csv) throw ParseError("cannot write " + flags.out_csv);
    csv << "iteration,f_lb,best_f_lb,lp_initial,lp_optimized\n";
    csv.precision(17);
    for (size_t i = 0; i < res.trace.size(); ++i) {
      csv << i << "," << res.trace[i] << "," << res.best_trace[i] << ","
          << lp_init.outcome.value << "," << lp_opt.outcome.value << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    return map_error(e, err);
  }
}

int run_corpus(const CorpusFlags& flags, std::ostream& err) {
  try {
    if (flags.out_dir.empty()) throw SchemaError("corpus: --out-dir required");
    auto corpus = oracle::gen_instances(flags.seed, flags.count, flags.spec);
    oracle::save_corpus(corpus, flags.out_dir);
    int safe = 0;
    for (const auto& inst : corpus)
      safe += inst.verdict == oracle::OracleVerdict::kSafe;
    err << "corpus: " << corpus.size() << " instances (" << safe << " SAFE, "
        << (corpus.size() - safe) << " UNSAFE) in " << flags.out_dir << "\n";
    return 0;
  } catch (const std::exception& e) {
    return map_error(e, err);
  }
}

}  // namespace rv::cli
