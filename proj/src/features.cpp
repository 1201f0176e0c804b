#include "icstrace/features.hpp"

#include <algorithm>
#include <set>

namespace icstrace::features {

namespace {

// Tokens of one session's valid requests, parsed once per call site.
struct SessionTokens {
    std::vector<s7::FunctionToken> functions;
    std::vector<s7::ParamToken> params;
};

SessionTokens tokenize_session(const ingest::SessionRecord& session) {
    SessionTokens out;
    for (const auto& request : session.requests) {
        if (!request.validity.valid) continue;
        auto tokens = s7::extract_request_tokens(request.payload);
        if (tokens.function) out.functions.push_back(*tokens.function);
        out.params.insert(out.params.end(), tokens.params.begin(), tokens.params.end());
    }
    return out;
}

double mean_over_valid_sessions(const ingest::IpProfile& profile,
                                std::size_t (*count)(const SessionTokens&)) {
    double total = 0;
    std::size_t n = 0;
    for (const auto& session : profile.sessions) {
        if (!session.valid()) continue;
        total += static_cast<double>(count(tokenize_session(session)));
        ++n;
    }
    if (n == 0) throw Error(errc::no_valid_sessions, "profile " + profile.source_ip);
    return total / static_cast<double>(n);
}

} // namespace

double mcfc(const ingest::IpProfile& profile) {
    return mean_over_valid_sessions(
        profile, [](const SessionTokens& t) { return t.functions.size(); });
}

double mcp(const ingest::IpProfile& profile) {
    return mean_over_valid_sessions(profile,
                                    [](const SessionTokens& t) { return t.params.size(); });
}

std::vector<TokenSequence> session_sequences(const ingest::IpProfile& profile,
                                             SequenceKind kind) {
    std::vector<TokenSequence> sequences;
    for (const auto& session : profile.sessions) {
        if (!session.valid()) continue;
        auto tokens = tokenize_session(session);
        TokenSequence seq;
        if (kind == SequenceKind::fcs) {
            seq.reserve(tokens.functions.size());
            for (const auto& f : tokens.functions) seq.push_back(f.symbol());
        } else {
            seq.reserve(tokens.params.size());
            for (const auto& p : tokens.params) seq.push_back(p.text);
        }
        sequences.push_back(std::move(seq));
    }
    return sequences;
}

TokenSequence augment(const TokenSequence& seq) {
    TokenSequence out;
    out.reserve(seq.size() + 3);
    out.emplace_back(kStartSymbol);
    if (seq.empty()) out.emplace_back(kNulSymbol);
    out.insert(out.end(), seq.begin(), seq.end());
    out.emplace_back(kEndSymbol);
    return out;
}

std::vector<Window> slide_windows(const TokenSequence& augmented, std::size_t window_length,
                                  std::size_t stride) {
    if (window_length < 1 || stride < 1)
        throw Error(errc::invalid_argument, "window length and stride must be positive");
    std::vector<Window> windows;
    if (augmented.size() < window_length) return windows;
    for (std::size_t start = 0; start + window_length <= augmented.size(); start += stride) {
        Window w = augmented[start];
        for (std::size_t i = 1; i < window_length; ++i) {
            w.push_back('|');
            w += augmented[start + i];
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<Window> profile_windows(const ingest::IpProfile& profile, SequenceKind kind,
                                    const FeatureConfig& config) {
    std::vector<Window> windows;
    for (const auto& seq : session_sequences(profile, kind)) {
        auto session_windows = slide_windows(augment(seq), config.window_length, config.stride);
        windows.insert(windows.end(), std::make_move_iterator(session_windows.begin()),
                       std::make_move_iterator(session_windows.end()));
    }
    return windows;
}

Vocabulary build_vocabulary(const std::vector<ingest::IpProfile>& profiles, SequenceKind kind,
                            const FeatureConfig& config) {
    std::set<Window> merged;
    bool any_valid = false;
    for (const auto& profile : profiles) {
        if (!profile.valid()) continue;
        any_valid = true;
        for (auto& w : profile_windows(profile, kind, config)) merged.insert(std::move(w));
    }
    if (!any_valid) throw Error(errc::empty_corpus, "no valid profiles");
    Vocabulary vocab;
    vocab.kind = kind;
    vocab.entries.assign(merged.begin(), merged.end());
    for (std::size_t i = 0; i < vocab.entries.size(); ++i) vocab.index[vocab.entries[i]] = i;
    return vocab;
}

std::vector<double> vectorize_block(const ingest::IpProfile& profile, const Vocabulary& vocab,
                                    const FeatureConfig& config) {
    std::vector<double> block(vocab.size(), 0.0);
    auto windows = profile_windows(profile, vocab.kind, config);
    for (const auto& w : windows) {
        auto it = vocab.index.find(w);
        if (it == vocab.index.end())
            throw Error(errc::unknown_window, w + " not in vocabulary (corpus mismatch)");
        block[it->second] += 1.0;
    }
    if (!windows.empty()) {
        double denom = static_cast<double>(windows.size());
        for (auto& v : block) v /= denom;
    }
    return block;
}

namespace {

double min_max_scale(double value, double lo, double hi) {
    if (hi - lo <= 0.0) return 0.0;  // degenerate span scales to 0 by convention
    return (value - lo) / (hi - lo);
}

} // namespace

FeatureVector assemble_vector(const ingest::IpProfile& profile, const Vocabulary& fcs_vocab,
                              const Vocabulary& ps_vocab, const ScalingContext& scaling,
                              const FeatureConfig& config) {
    FeatureVector fv;
    fv.mcfc = mcfc(profile);
    fv.mcp = mcp(profile);
    fv.fcs_block = vectorize_block(profile, fcs_vocab, config);
    fv.ps_block = vectorize_block(profile, ps_vocab, config);
    fv.assembled.reserve(2 + fv.fcs_block.size() + fv.ps_block.size());
    fv.assembled.push_back(config.scalar_weight *
                           min_max_scale(fv.mcfc, scaling.mcfc_min, scaling.mcfc_max));
    fv.assembled.push_back(config.scalar_weight *
                           min_max_scale(fv.mcp, scaling.mcp_min, scaling.mcp_max));
    for (double v : fv.fcs_block) fv.assembled.push_back(config.fcs_weight * v);
    for (double v : fv.ps_block) fv.assembled.push_back(config.ps_weight * v);
    return fv;
}

CorpusFeatures compute_corpus_features(const std::vector<ingest::IpProfile>& profiles,
                                       const FeatureConfig& config) {
    CorpusFeatures out;
    out.fcs_vocab = build_vocabulary(profiles, SequenceKind::fcs, config);
    out.ps_vocab = build_vocabulary(profiles, SequenceKind::ps, config);

    std::vector<const ingest::IpProfile*> valid;
    for (const auto& profile : profiles)
        if (profile.valid()) valid.push_back(&profile);

    bool first = true;
    std::vector<std::pair<double, double>> scalars;
    scalars.reserve(valid.size());
    for (const auto* profile : valid) {
        double fc = mcfc(*profile);
        double pc = mcp(*profile);
        scalars.emplace_back(fc, pc);
        if (first) {
            out.scaling = {fc, fc, pc, pc};
            first = false;
        } else {
            out.scaling.mcfc_min = std::min(out.scaling.mcfc_min, fc);
            out.scaling.mcfc_max = std::max(out.scaling.mcfc_max, fc);
            out.scaling.mcp_min = std::min(out.scaling.mcp_min, pc);
            out.scaling.mcp_max = std::max(out.scaling.mcp_max, pc);
        }
    }

    out.ips.reserve(valid.size());
    out.vectors.reserve(valid.size());
    for (const auto* profile : valid) {
        out.ips.push_back(profile->source_ip);
        out.vectors.push_back(
            assemble_vector(*profile, out.fcs_vocab, out.ps_vocab, out.scaling, config));
    }
    return out;
}

} // namespace icstrace::features
