#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace infops {

// Stage names in execution order. Config sections use the same names.
const std::vector<std::string>& stage_names();

// One JSON document: top-level "seed", "output_dir", "format", "graph",
// "stages" and one optional section per stage.
class RunConfig {
 public:
  RunConfig() = default;
  explicit RunConfig(nlohmann::json doc);

  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  // Sets a dotted path such as "opinions.T"; intermediate objects are created.
  void set(std::string_view dotted, nlohmann::json value);

  const nlohmann::json& doc() const { return doc_; }
  std::uint64_t seed() const;
  std::filesystem::path output_dir() const;
  std::string format() const;
  std::vector<std::string> stages() const;

  // SHA-256 of the canonical dump with output_dir removed, so the same run
  // written to two directories carries the same hash.
  std::string hash() const;

 private:
  nlohmann::json doc_ = nlohmann::json::object();
};

// Every violated precondition, without running anything. Empty means valid.
std::vector<std::string> validate(const RunConfig& config);

struct Artifact {
  std::string path;  // relative to the output directory
  std::string stage;
  std::string sha256;
};

enum ExitCode : int { kExitOk = 0, kExitInvalid = 2, kExitStageFailed = 3 };

struct RunResult {
  int exit_code = kExitOk;
  std::vector<Artifact> artifacts;
  std::vector<std::string> violations;
  std::string failed_stage;
  std::string error;
};

// Validates, then runs the selected stages in order and writes manifest.json
// (also on stage failure, listing what was written so far).
RunResult run(const RunConfig& config, std::ostream* log = nullptr);

std::string sha256_hex(std::string_view data);

}  // namespace infops
