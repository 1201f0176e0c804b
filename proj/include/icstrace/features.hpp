#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icstrace/ingest.hpp"

// Attack-pattern vectorization: MCFC/MCP scalars plus short-sequence
// probability blocks over function-code sequences (FCS) and parameter
// sequences (PS).

namespace icstrace::features {

enum class SequenceKind { fcs, ps };

// Symbols are the FCS/PS alphabet entries plus the distinguished markers
// below; a window is the '|'-joined triple of symbols. Symbols never contain
// '|', so the joined form is unambiguous.
using Symbol = std::string;
using TokenSequence = std::vector<Symbol>;
using Window = std::string;

inline constexpr std::string_view kStartSymbol = "<S>";
inline constexpr std::string_view kEndSymbol = "<E>";
inline constexpr std::string_view kNulSymbol = "<NUL>";

struct FeatureConfig {
    std::size_t window_length = 3;  // method defaults: length-3 windows, stride 1
    std::size_t stride = 1;
    double scalar_weight = 1.0;
    double fcs_weight = 1.0;
    double ps_weight = 1.0;
};

// ---------------------------------------------------------------------------
// Scalars

// Mean count of function codes per valid session. Throws Error{no_valid_sessions}.
double mcfc(const ingest::IpProfile& profile);
// Mean count of parameter tokens per valid session.
double mcp(const ingest::IpProfile& profile);

// ---------------------------------------------------------------------------
// Sequences and windows

// One token sequence per valid session, in chronological request order. A
// session with no tokens of the kind yields an empty sequence (handled by
// augmentation).
std::vector<TokenSequence> session_sequences(const ingest::IpProfile& profile, SequenceKind kind);

// Start/end augmentation; an empty sequence becomes (S, NUL, E) so every
// valid session yields at least one window.
TokenSequence augment(const TokenSequence& seq);

// Stride-1 sliding windows over an augmented sequence; duplicates retained.
std::vector<Window> slide_windows(const TokenSequence& augmented, std::size_t window_length = 3,
                                  std::size_t stride = 1);

// All windows of a profile across its valid sessions, duplicates retained
// (the multiset feeding the frequency denominator).
std::vector<Window> profile_windows(const ingest::IpProfile& profile, SequenceKind kind,
                                    const FeatureConfig& config = {});

// ---------------------------------------------------------------------------
// Vocabulary and blocks

struct Vocabulary {
    SequenceKind kind = SequenceKind::fcs;
    std::vector<Window> entries;  // deduplicated, lexicographically ordered
    std::unordered_map<Window, std::size_t> index;

    std::size_t size() const { return entries.size(); }
};

// Global vocabulary over all valid profiles. Throws Error{empty_corpus}.
Vocabulary build_vocabulary(const std::vector<ingest::IpProfile>& profiles, SequenceKind kind,
                            const FeatureConfig& config = {});

// Window-frequency block: entry i is the multiplicity of vocab entry i over
// the profile's windows divided by the total window count; entries sum to 1.
// Throws Error{unknown_window} on a vocab/corpus mismatch.
std::vector<double> vectorize_block(const ingest::IpProfile& profile, const Vocabulary& vocab,
                                    const FeatureConfig& config = {});

// ---------------------------------------------------------------------------
// Assembly

struct FeatureVector {
    double mcfc = 0.0;  // raw means
    double mcp = 0.0;
    std::vector<double> fcs_block;
    std::vector<double> ps_block;
    std::vector<double> assembled;  // length 2 + |fcs_vocab| + |ps_vocab|
};

// Corpus-wide min/max used to scale the two scalars into [0,1]; a degenerate
// span (all equal) scales to 0 by convention.
struct ScalingContext {
    double mcfc_min = 0.0, mcfc_max = 0.0;
    double mcp_min = 0.0, mcp_max = 0.0;
};

FeatureVector assemble_vector(const ingest::IpProfile& profile, const Vocabulary& fcs_vocab,
                              const Vocabulary& ps_vocab, const ScalingContext& scaling,
                              const FeatureConfig& config = {});

struct CorpusFeatures {
    Vocabulary fcs_vocab;
    Vocabulary ps_vocab;
    ScalingContext scaling;
    std::vector<std::string> ips;  // valid profiles only, in profile order
    std::vector<FeatureVector> vectors;
};

// Full pipeline over the valid profiles of a corpus. Throws Error{empty_corpus}.
CorpusFeatures compute_corpus_features(const std::vector<ingest::IpProfile>& profiles,
                                       const FeatureConfig& config = {});

} // namespace icstrace::features
