#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "icstrace/clustering.hpp"

// Cluster labeling from auxiliary IP metadata: static domains first, then
// dynamic domains, then geography, else Unknown.

namespace icstrace::attribution {

enum class DomainKind { none, static_domain, dynamic_domain };

struct AuxEntry {
    std::string domain;
    DomainKind kind = DomainKind::none;
    std::string country;
    std::string region;
};

struct AuxInfo {
    std::map<std::string, AuxEntry> by_ip;
    std::size_t malformed_rows = 0;
    std::size_t duplicate_rows = 0;  // duplicate ip rows, last one wins
};

// CSV `ip,domain,domain_kind,country[,region]`; empty domain forces kind
// none; rows keyed by a syntactically invalid IP are counted malformed and
// skipped. Throws Error{io_failure}.
AuxInfo load_auxiliary_map(const std::filesystem::path& path);
void write_auxiliary_map(const std::filesystem::path& path, const AuxInfo& aux);

bool looks_like_ip(const std::string& text);

// Registrable suffix used to aggregate hosts of one organization
// ("a.b.shodan.io" -> "shodan.io", "x.neu.edu.cn" -> "neu.edu.cn").
std::string registrable_suffix(std::string domain);

enum class Evidence { static_domain, dynamic_domain, geography, unlabeled };

const char* to_string(Evidence evidence);

inline constexpr const char* kUnknownLabel = "Unknown";

struct ClusterLabel {
    int cluster_index = 0;
    std::size_t ip_count = 0;
    std::string label;
    Evidence evidence = Evidence::unlabeled;
    std::size_t support_count = 0;
    double support_fraction = 0.0;  // in (0,1] for labeled clusters, 0 when unlabeled
};

struct Thresholds {
    std::size_t min_support_count = 4;  // smallest decisive support in the domain rules
    double geo_fraction = 0.5;          // fraction of the cluster located in one place
};

// One label per cluster, in cluster order. Pure and deterministic; labels may
// repeat across clusters (one organization, several attack patterns).
std::vector<ClusterLabel> label_clusters(const cluster::ClusterPartition& partition,
                                         const AuxInfo& aux, const Thresholds& thresholds = {});

} // namespace icstrace::attribution
