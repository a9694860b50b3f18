#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lexrag/error.hpp"

namespace lexrag::cli {

/// Process exit codes. Stable for scripting.
enum ExitCode : int {
  kOk = 0,
  kIoOrFormat = 1,
  kBackend = 2,
  kUsage = 64,
  kDataInvalid = 65,
};

int exit_code_for(ErrorKind kind);

/// Runs the command line `args` (program name excluded), writing normal
/// output to `out` and diagnostics to `err`. Returns the exit code.
///
///   index build  --dict F... --parallel F... --out DIR
///   translate    --index DIR (--text S | --input F [--output F] [--trace] [--strict])
///   evaluate     --hyp F --ref F [--metrics bleu,rouge,bertscore] [--tokenize MODE]
///   humaneval    --scores F [--per-model]
///   report       --metrics F... [--format markdown]
///
/// Every command accepts `--config PATH` (default ./lexrag.json).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexrag::cli
