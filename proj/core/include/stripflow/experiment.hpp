#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stripflow/acceptance.hpp"
#include "stripflow/assembly.hpp"

namespace stripflow {

std::string library_version();

struct RunManifest {
    std::string command_line;
    std::string task;
    std::string config_digest;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string version;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, digest
    std::vector<std::pair<std::string, std::string>> outputs;  // path relative to out dir, digest
    double wall_clock_seconds = 0.0;

    std::string to_json() const;
};

struct RunContext {
    std::string command_line;
    std::optional<std::uint64_t> seed;    // overrides the config
    std::optional<unsigned> threads;
    std::filesystem::path out_dir = "out";
    std::filesystem::path base_dir = ".";  // relative input paths resolve here
};

struct ExperimentResult {
    RunManifest manifest;
    int exit_code = 0;  // 0 ok, 4 when an acceptance criterion failed
    std::vector<std::string> summary;  // human-readable lines
    std::vector<CriterionResult> acceptance;
};

/// Config document (JSON):
///   task: assemble | heat | spectrum | mc | project | exhaust | subord | acceptance
///   seed, threads: optional
///   space: {kind: treebolic | tree | path | star | file, ...}
///   discretization: {nodes_per_edge, fiber_nodes, spacing, boundary}
///   params: task parameters
/// Writes CSV outputs and manifest.json into ctx.out_dir. Schema violations
/// throw ValidationError naming the key.
ExperimentResult run_experiment(const std::string& config_json, const RunContext& ctx);

/// Space and discretization sections on their own (used by the CLI).
StripComplex space_from_config(const std::string& space_json,
                               const std::filesystem::path& base_dir = ".");
Discretization discretization_from_config(const StripComplex& sc,
                                          const std::string& discretization_json);

}  // namespace stripflow
