#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "agreeloss/data.hpp"
#include "agreeloss/features.hpp"
#include "agreeloss/gradcheck.hpp"
#include "agreeloss/model.hpp"

namespace agreeloss {

inline constexpr const char* kVersion = "0.1.0";

namespace cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kNumericalFailure = 2,
  kGradcheckFailure = 3,
};

/// Overrides used by the test suite; defaults use the library routines.
struct Hooks {
  GradientFn gradient;
};

/// Everything needed to rerun `train` exactly, plus provenance.
struct RunManifest {
  TrainConfig train;
  FeaturizerConfig featurizer;
  std::string data_path;
  std::string val_path;  // empty if none
  InputFormat format = InputFormat::Csv;
  ColumnNames columns;
  double threshold = 0.5;
  std::string checkpoint_path;
  std::string trace_path;
  std::string started_utc;
  double elapsed_seconds = 0.0;
  double final_loss = 0.0;
  std::string version = kVersion;
};

nlohmann::json to_json(const RunManifest& m);
/// Throws InputError on missing or ill-typed fields.
RunManifest manifest_from_json(const nlohmann::json& j);

/// Run one subcommand (`train`, `eval`, `gradcheck`, `profile`, `compare`).
/// `args` excludes the program name. Never throws; returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Hooks& hooks = {});

}  // namespace cli
}  // namespace agreeloss
