#include "cli_config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "apc/error.hpp"

namespace apc::cli {

namespace {

template <class T>
void read_field(const nlohmann::json& j, const char* key, std::optional<T>& field) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Usage, std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
void write_field(nlohmann::json& j, const char* key, const std::optional<T>& field) {
  if (field) j[key] = *field;
}

template <class T>
void overlay(std::optional<T>& base, const std::optional<T>& over) {
  if (over) base = over;
}

// Calls fn(key, field-of-each-config...) for every field in a fixed order.
template <class Fn, class... Configs>
void for_each_field(Fn&& fn, Configs&... cs) {
  fn("command", cs.command...);
  fn("input", cs.input...);
  fn("rhs", cs.rhs...);
  fn("solution", cs.solution...);
  fn("rhs_seed", cs.rhs_seed...);
  fn("permute_seed", cs.permute_seed...);
  fn("m", cs.m...);
  fn("n", cs.n...);
  fn("rows", cs.rows...);
  fn("mean", cs.mean...);
  fn("seed", cs.seed...);
  fn("methods", cs.methods...);
  fn("gamma", cs.gamma...);
  fn("eta", cs.eta...);
  fn("alpha", cs.alpha...);
  fn("beta", cs.beta...);
  fn("xi", cs.xi...);
  fn("nu", cs.nu...);
  fn("optimal", cs.optimal...);
  fn("admm_grid", cs.admm_grid...);
  fn("admm_dual", cs.admm_dual...);
  fn("tol", cs.tol...);
  fn("max_iters", cs.max_iters...);
  fn("iteration_cap", cs.iteration_cap...);
  fn("simulate", cs.simulate...);
  fn("log_messages", cs.log_messages...);
  fn("predict_only", cs.predict_only...);
  fn("m_sweep", cs.m_sweep...);
  fn("out", cs.out...);
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Usage, "config must be a JSON object");
  RunConfig c;
  for_each_field([&](const char* key, auto& field) { read_field(j, key, field); }, c);
  if (j.contains("method") && !c.methods) {
    std::optional<std::string> single;
    read_field(j, "method", single);
    if (single) c.methods = std::vector<std::string>{*single};
  }
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for_each_field([&](const char* key, const auto& field) { write_field(j, key, field); }, c);
  return j;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Usage, "config file " + path + ": " + e.what());
  }
  return config_from_json(j);
}

RunConfig merge(RunConfig base, const RunConfig& over) {
  for_each_field([](const char*, auto& field, const auto& top) { overlay(field, top); }, base, over);
  return base;
}

std::string resolve_input_path(const std::string& input) {
  namespace fs = std::filesystem;
  if (fs::exists(input)) return input;
  if (const char* dir = std::getenv("APC_FIXTURES")) {
    for (const fs::path& candidate : {fs::path(dir) / input, fs::path(dir) / (input + ".mtx")}) {
      if (fs::exists(candidate)) return candidate.string();
    }
  }
  throw Error(ErrorCode::Io, "input not found: " + input +
                                 (std::getenv("APC_FIXTURES") ? " (also searched APC_FIXTURES)" : ""));
}

}  // namespace apc::cli
