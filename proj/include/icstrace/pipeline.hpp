#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "icstrace/attribution.hpp"
#include "icstrace/features.hpp"
#include "icstrace/ingest.hpp"
#include "icstrace/metrics.hpp"

// End-to-end orchestration: ingest -> features -> clustering -> metrics ->
// attribution, with reproducible on-disk reports. Every output file carries
// the hash of the config that produced it.

namespace icstrace::pipeline {

struct PipelineConfig {
    std::string input_path;   // session log (required)
    std::string truth_path;   // ground-truth sidecar, optional
    std::string aux_path;     // auxiliary IP metadata, optional
    std::string seeds_path;   // seed csv, optional
    std::string out_dir = "out";
    features::FeatureConfig feature;
    cluster::KMeansOptions kmeans;
    int k = 0;                 // fixed cluster count when > 0
    int k_lo = 0, k_hi = 0;    // sweep range when both > 0 (k wins if set)
    bool svg = false;
    std::uint64_t rng_seed = 1;  // provenance only; the pipeline itself is deterministic
};

PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const PipelineConfig& config);

// FNV-1a 64 of the canonical config serialization, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

// Validity counter rows with their fixed report names.
std::vector<std::pair<std::string, std::size_t>> count_rows(const ingest::ValidityCounts& counts);

// Errors from any stage are rethrown with stage provenance in the message.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string stage_name, const std::string& what)
        : std::runtime_error("stage " + stage_name + ": " + what), stage(std::move(stage_name)) {}
};

struct EvaluationReport {
    ingest::ValidityCounts counts;
    std::size_t malformed_lines = 0;
    int chosen_k = 0;
    std::size_t seed_groups = 0;
    std::size_t iterations = 0;
    bool converged = false;
    double sse = 0.0;
    std::map<std::string, double> scores;  // metric -> value at the chosen k
    std::vector<attribution::ClusterLabel> labels;
    std::vector<std::string> written_files;  // relative to out_dir
};

// Runs the full pipeline and writes feature matrix, vocabularies, partition,
// means, metric curves (sweep mode), cluster labels, counts and run metadata
// under config.out_dir. Rerunning with an identical config byte-reproduces
// every output file.
EvaluationReport run_pipeline(const PipelineConfig& config);

} // namespace icstrace::pipeline
