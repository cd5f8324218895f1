#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "reluverify/cli.hpp"

namespace {

void add_verifier_flags(CLI::App* cmd, rv::bab::VerifierConfig& cfg) {
  cmd->add_option("--batch-size", cfg.batch_size, "Sub-domains split per iteration");
  cmd->add_option("--eta", cfg.lp_threshold, "Domain-set size that triggers the LP fallback");
  cmd->add_option("--timeout", cfg.timeout_seconds, "Wall-clock budget in seconds");
  cmd->add_option("--threads", cfg.thread_count, "Worker pool size");
  cmd->add_option("--alpha-iters-init", cfg.init_opt.iterations,
                  "Slope-ascent iterations on the root domain");
  cmd->add_option("--alpha-iters-node", cfg.node_opt.iterations,
                  "Slope-ascent iterations per branch-and-bound node");
  cmd->add_option("--lr", cfg.init_opt.step_size, "Slope-ascent step size")
      ->each([&cfg](const std::string& s) { cfg.node_opt.step_size = std::stod(s); });
  cmd->add_option("--seed", cfg.seed, "Seed echoed into the report");
  cmd->add_flag("--no-alpha-opt", cfg.disable_alpha_opt,
                "Bound with heuristic slopes only");
  cmd->add_flag("--no-batch", cfg.force_batch_size_1, "Split one domain at a time");
  cmd->add_flag("--no-lp", cfg.disable_lp_fallback,
                "Disable the LP fallback (incomplete mode)");
  cmd->add_flag("--lp-bounding", cfg.lp_bounding,
                "Additionally bound every node with the triangle LP");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complete verifier for feedforward ReLU networks"};
  app.require_subcommand(1);

  rv::cli::VerifyFlags vf;
  CLI::App* verify = app.add_subcommand("verify", "Verify a (network, property) pair");
  verify->add_option("--net", vf.net_path, "Network JSON file")->required();
  verify->add_option("--prop", vf.prop_path, "Property JSON file")->required();
  verify->add_option("--out", vf.out_path, "Write the run report JSON here");
  verify->add_option("--trace-log", vf.trace_log, "Per-domain JSONL event log");
  add_verifier_flags(verify, vf.cfg);

  rv::cli::BenchFlags bf;
  std::string modes_csv = "opt_batch,opt_nobatch,noopt";
  CLI::App* bench = app.add_subcommand("bench", "Run a corpus under several modes");
  bench->add_option("--corpus", bf.manifest_path, "Corpus manifest JSON")->required();
  bench->add_option("--modes", modes_csv,
                    "Comma-separated: opt_batch,opt_nobatch,noopt,lpnode");
  bench->add_option("--out", bf.out_csv, "Per-instance CSV")->required();
  bench->add_option("--cactus", bf.cactus_csv, "Cumulative solved-vs-time CSV");
  add_verifier_flags(bench, bf.cfg);

  rv::cli::BoundsFlags df;
  CLI::App* bounds = app.add_subcommand(
      "bounds", "Per-iteration lower-bound trace for the root domain");
  bounds->add_option("--net", df.net_path, "Network JSON file")->required();
  bounds->add_option("--prop", df.prop_path, "Property JSON file")->required();
  bounds->add_option("--out", df.out_csv, "Trace CSV")->required();
  bounds->add_option("--iters", df.iterations, "Slope-ascent iterations");
  bounds->add_option("--lr", df.step_size, "Slope-ascent step size");

  rv::cli::CorpusFlags cf;
  CLI::App* corpus = app.add_subcommand(
      "corpus", "Generate a labeled instance corpus with the exact oracle");
  corpus->add_option("--seed", cf.seed, "Corpus seed");
  corpus->add_option("--count", cf.count, "Number of instances");
  corpus->add_option("--out-dir", cf.out_dir, "Output directory")->required();
  corpus->add_option("--max-hidden", cf.spec.max_total_hidden,
                     "Hidden-neuron budget per instance");
  corpus->add_option("--max-input-dim", cf.spec.max_input_dim, "Input dimension cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : rv::cli::kExitUsage;
  }

  if (verify->parsed()) return rv::cli::run_verify(vf);
  if (bench->parsed()) {
    bf.modes.clear();
    std::stringstream ss(modes_csv);
    std::string m;
    while (std::getline(ss, m, ',')) {
      if (!m.empty()) bf.modes.push_back(m);
    }
    return rv::cli::run_bench(bf);
  }
  if (bounds->parsed()) return rv::cli::run_bounds(df);
  if (corpus->parsed()) return rv::cli::run_corpus(cf);
  return rv::cli::kExitUsage;
}
