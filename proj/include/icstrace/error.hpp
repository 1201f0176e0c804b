#pragma once

#include <stdexcept>
#include <string>

namespace icstrace {

// Error codes shared across the pipeline modules.
enum class errc {
    // protocol parsing
    truncated_frame,
    bad_version,
    truncated_pdu,
    bad_magic,
    empty_parameters,
    unsupported_function,
    // ingest
    io_failure,
    invalid_config,
    // features
    no_valid_sessions,
    empty_corpus,
    unknown_window,
    // clustering
    dimension_mismatch,
    empty_seed_group,
    unknown_ip,
    insufficient_samples,
    // metrics
    length_mismatch,
    empty_organization,
    single_cluster,
    degenerate_k,
    // generic misuse of a contract
    invalid_argument,
};

inline const char* to_string(errc code) {
    switch (code) {
        case errc::truncated_frame: return "truncated frame";
        case errc::bad_version: return "bad version";
        case errc::truncated_pdu: return "truncated pdu";
        case errc::bad_magic: return "bad magic";
        case errc::empty_parameters: return "empty parameters";
        case errc::unsupported_function: return "unsupported function";
        case errc::io_failure: return "io failure";
        case errc::invalid_config: return "invalid config";
        case errc::no_valid_sessions: return "no valid sessions";
        case errc::empty_corpus: return "empty corpus";
        case errc::unknown_window: return "unknown window";
        case errc::dimension_mismatch: return "dimension mismatch";
        case errc::empty_seed_group: return "empty seed group";
        case errc::unknown_ip: return "unknown ip";
        case errc::insufficient_samples: return "insufficient samples";
        case errc::length_mismatch: return "length mismatch";
        case errc::empty_organization: return "empty organization";
        case errc::single_cluster: return "single cluster";
        case errc::degenerate_k: return "degenerate k";
        case errc::invalid_argument: return "invalid argument";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace icstrace
