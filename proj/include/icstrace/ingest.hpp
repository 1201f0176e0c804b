#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "icstrace/s7_protocol.hpp"

// Session-log data model, per-IP profile assembly, and the synthetic corpus
// generator that stands in for a honeypot dataset.

namespace icstrace::ingest {

struct RequestRecord {
    std::int64_t timestamp_ms = 0;
    s7::Bytes payload;
    s7::Validity validity;  // always recomputed from the payload, never read from a file
};

struct SessionRecord {
    std::string session_id;
    std::string source_ip;
    std::string honeypot_id;
    std::vector<RequestRecord> requests;  // chronological

    // A session is valid iff it contains at least one valid request.
    bool valid() const;
    std::size_t valid_request_count() const;
};

struct IpProfile {
    std::string source_ip;
    std::vector<SessionRecord> sessions;
    std::optional<std::string> organization_label;  // seed/ground-truth label, if known

    // An IP is valid iff it has at least one valid session.
    bool valid() const;
};

// ---------------------------------------------------------------------------
// Loading

struct LoadResult {
    std::vector<SessionRecord> sessions;
    std::vector<std::size_t> malformed_lines;  // 1-based line numbers, skipped
};

// Line-delimited JSON, one session per line:
//   {"session_id": "...", "source_ip": "...", "honeypot_id": "...",
//    "requests": [{"ts": <ms>, "payload_hex": "..."}]}
// Malformed lines are skipped and reported; throws Error{io_failure} when the
// file cannot be read.
LoadResult load_session_log(const std::filesystem::path& path);

void write_session_log(const std::filesystem::path& path,
                       const std::vector<SessionRecord>& sessions);

// Two-column CSV `ip,organization` (ground-truth sidecar and seed files).
std::vector<std::pair<std::string, std::string>> load_ip_org_csv(
    const std::filesystem::path& path);
void write_ip_org_csv(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& rows);

// ---------------------------------------------------------------------------
// Profiles and validity counters

// One profile per distinct source IP, ordered by IP; sessions ordered by
// session id. Invalid sessions are retained but flagged.
std::vector<IpProfile> assemble_ip_profiles(const std::vector<SessionRecord>& sessions);

struct ValidityCounts {
    std::size_t requests = 0;
    std::size_t valid_requests = 0;
    std::size_t sessions = 0;
    std::size_t valid_sessions = 0;
    std::size_t ips = 0;
    std::size_t valid_ips = 0;
};

ValidityCounts count_validity(const std::vector<SessionRecord>& sessions);

// ---------------------------------------------------------------------------
// Synthetic corpus generation

struct ScriptRequest {
    s7::FunctionToken token;
    std::vector<s7::ParamToken> params;
};

struct AttackScript {
    std::string name;
    std::vector<ScriptRequest> requests;
};

struct WeightedScript {
    AttackScript script;
    double weight = 1.0;
};

struct SynthOrganization {
    std::string name;
    std::vector<WeightedScript> attack_scripts;  // weights sum to 1
};

struct SynthConfig {
    std::vector<SynthOrganization> organizations;
    std::size_t ips_per_org = 10;
    std::size_t sessions_per_ip_min = 2;
    std::size_t sessions_per_ip_max = 5;
    double noise_rate = 0.0;  // probability that a generated request is corrupted
    std::uint64_t rng_seed = 1;
};

struct SynthCorpus {
    std::vector<SessionRecord> sessions;                       // sorted by (source_ip, session_id)
    std::vector<std::pair<std::string, std::string>> truth;    // ip -> organization
};

// Deterministic under rng_seed: each IP sticks to one script of its
// organization (sampled by weight), each session realizes that script as
// byte-exact serialized frames, and noise_rate of requests are corrupted.
// Throws Error{invalid_config}.
SynthCorpus generate_synthetic_corpus(const SynthConfig& config);

// The bundled demo scripts (six distinct request patterns) and the default
// benchmark-style configuration: `org_count` organizations, single-script
// except the last one, which mixes three scripts.
std::vector<AttackScript> demo_scripts();
SynthConfig make_demo_config(std::size_t org_count, std::size_t ips_per_org,
                             std::size_t sessions_min, std::size_t sessions_max,
                             double noise_rate, std::uint64_t rng_seed);

} // namespace icstrace::ingest
