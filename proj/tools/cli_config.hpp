#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace apc::cli {

// Every field is optional so a config file and the command line can be
// layered: values present on the command line win.
struct RunConfig {
  std::optional<std::string> command;

  // Input system
  std::optional<std::string> input;
  std::optional<std::string> rhs;
  std::optional<std::string> solution;
  std::optional<std::uint64_t> rhs_seed;
  std::optional<std::uint64_t> permute_seed;
  std::optional<std::size_t> m;

  // Synthetic generation (gen)
  std::optional<std::size_t> n;
  std::optional<std::size_t> rows;
  std::optional<double> mean;
  std::optional<std::uint64_t> seed;

  // Methods and parameters
  std::optional<std::vector<std::string>> methods;
  std::optional<double> gamma;
  std::optional<double> eta;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> xi;
  std::optional<double> nu;
  std::optional<bool> optimal;
  std::optional<std::size_t> admm_grid;
  std::optional<bool> admm_dual;

  // Budget
  std::optional<double> tol;
  std::optional<std::size_t> max_iters;
  std::optional<std::size_t> iteration_cap;

  // Execution and output
  std::optional<bool> simulate;
  std::optional<bool> log_messages;
  std::optional<bool> predict_only;
  std::optional<std::vector<std::size_t>> m_sweep;
  std::optional<std::string> out;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

// Reads a JSON config file; throws apc::Error (Io or Usage) on failure.
RunConfig load_config_file(const std::string& path);

// Fields set in `over` replace those in `base`.
RunConfig merge(RunConfig base, const RunConfig& over);

// Resolves a --input value: an existing path is used as is, otherwise the
// name is looked up as <APC_FIXTURES>/<name> and <APC_FIXTURES>/<name>.mtx.
std::string resolve_input_path(const std::string& input);

}  // namespace apc::cli
