#pragma once

#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "icstrace/clustering.hpp"

// Evaluation suite: per-organization recall, ARI, AMI, Silhouette,
// Calinski-Harabasz, and K-sweep curve generation.

namespace icstrace::metrics {

// Sentinel returned by calinski_harabasz_score when the within-group sum of
// squares is zero (perfectly tight clusters).
inline constexpr double kMaxScore = std::numeric_limits<double>::max();

// Largest single-cluster fraction of the organization's IPs. Throws
// Error{empty_organization}; every ip must be present in the partition.
double recall_rate(const cluster::ClusterPartition& partition,
                   const std::vector<std::string>& org_ips);

// Maps arbitrary string labels onto dense integer ids (first-seen order).
std::vector<int> encode_labels(const std::vector<std::string>& labels);

// Chance-adjusted Rand index from the contingency table. Permutation
// invariant; 1.0 for identical labelings; the degenerate single-class AND
// single-cluster case is 1.0 by convention. Throws Error{length_mismatch}.
double adjusted_rand_index(const std::vector<int>& labels_true,
                           const std::vector<int>& labels_pred);

// AMI with the exact hypergeometric E[MI] and the arithmetic-mean entropy
// normalizer. Same conventions and errors as ARI.
double adjusted_mutual_information(const std::vector<int>& labels_true,
                                   const std::vector<int>& labels_pred);

// Mean silhouette over samples; singleton-cluster samples score 0. Throws
// Error{single_cluster} when fewer than two distinct clusters are present.
double silhouette_score(const std::vector<cluster::Vector>& points,
                        const std::vector<int>& assignment);

// (BSS / (k-1)) / (WSS / (N-k)) over the distinct clusters present. Throws
// Error{degenerate_k} unless 2 <= k < N.
double calinski_harabasz_score(const std::vector<cluster::Vector>& points,
                               const std::vector<int>& assignment);

struct MetricCurve {
    std::string metric_name;
    std::vector<int> k_values;   // strictly increasing
    std::vector<double> scores;  // parallel; NaN where a score is undefined
};

struct SweepOptions {
    cluster::KMeansOptions kmeans;
    // Metric names to evaluate ("silhouette", "calinski_harabasz", "ari",
    // "ami", "recall", "known_org_clusters"); empty means all applicable.
    std::set<std::string> metric_set;
};

struct SweepResult {
    std::vector<int> k_values;
    std::vector<cluster::ClusterPartition> partitions;  // parallel to k_values
    std::vector<MetricCurve> curves;

    const MetricCurve* curve(const std::string& name) const;
    // Index into k_values of the best finite silhouette score (lowest k wins
    // ties); -1 when no score is finite.
    int best_silhouette_index() const;
};

// Runs partial_seeded_kmeans for every k in [k_lo, k_hi] and evaluates
// silhouette and Calinski-Harabasz curves; when `truth` (ip -> organization)
// is non-empty, also ARI/AMI over the truth-labeled subset, one recall curve
// per organization ("recall:<org>") and the count of clusters containing
// truth-labeled IPs ("known_org_clusters"). Deterministic; k runs execute in
// parallel.
SweepResult k_sweep(const cluster::Dataset& data, const cluster::SeedSet& seeds, int k_lo,
                    int k_hi, const std::map<std::string, std::string>& truth,
                    const SweepOptions& options = {});

} // namespace icstrace::metrics
