#pragma once

#include <string>
#include <vector>

#include "lfi/io.hpp"
#include "lfi/pipeline.hpp"

namespace lfi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSolver = 2;

// Applies `key = value` overrides to a pipeline configuration; unknown keys
// and malformed values raise a Config error.
void apply_config(PipelineConfig& cfg, const io::KeyValues& values);

// Entry point of `lfintrinsic`; args[0] is the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace lfi::cli
