#pragma once

#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "reluverify/bab.hpp"
#include "reluverify/oracle.hpp"

namespace rv::cli {

// exit codes
inline constexpr int kExitVerified = 0;
inline constexpr int kExitFalsified = 1;
inline constexpr int kExitTimeout = 2;
inline constexpr int kExitExhausted = 3;
inline constexpr int kExitUsage = 10;
inline constexpr int kExitParse = 11;
inline constexpr int kExitSchema = 12;
inline constexpr int kExitDimension = 13;

int exit_code_for(bab::VerdictStatus s);

struct VerifyFlags {
  std::string net_path;
  std::string prop_path;
  std::string out_path;    // report JSON; empty prints to stdout
  std::string trace_log;   // per-domain JSONL; empty disables
  bab::VerifierConfig cfg;
};

nlohmann::ordered_json report_from_verdict(const bab::Verdict& v,
                                           const bab::VerifierConfig& cfg);

/// Copy of a run report with wall-clock dependent fields removed, for
/// byte-stable comparisons across runs.
nlohmann::ordered_json strip_volatile(nlohmann::ordered_json report);

int run_verify(const VerifyFlags& flags, std::ostream& err = std::cerr);

struct BenchFlags {
  std::string manifest_path;
  std::vector<std::string> modes;  // subset of {opt_batch, opt_nobatch, noopt, lpnode}
  std::string out_csv;
  std::string cactus_csv;  // empty disables
  bab::VerifierConfig cfg;
};

int run_bench(const BenchFlags& flags, std::ostream& err = std::cerr);

struct BoundsFlags {
  std::string net_path;
  std::string prop_path;
  std::string out_csv;
  int iterations = 200;
  double step_size = 0.1;
  double decay = 0.98;
};

int run_bounds(const BoundsFlags& flags, std::ostream& err = std::cerr);

struct CorpusFlags {
  uint64_t seed = 1;
  int count = 100;
  std::string out_dir;
  oracle::GenSpec spec;
};

int run_corpus(const CorpusFlags& flags, std::ostream& err = std::cerr);

bab::VerifierConfig config_for_mode(const std::string& mode,
                                    bab::VerifierConfig base);

}  // namespace rv::cli
