#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "icstrace/error.hpp"

// Partial Seeded K-Means: seed-mean initialization for the l known
// organizations, distance-score farthest-point selection of the remaining
// k - l centers, then unconstrained Lloyd iterations (seed membership is not
// enforced during assignment).

namespace icstrace::cluster {

using Vector = std::vector<double>;

struct Dataset {
    std::vector<std::string> ips;   // unique keys, parallel to points
    std::vector<Vector> points;     // uniform dimensionality

    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points[0].size(); }
};

struct SeedGroup {
    std::string organization;
    std::vector<std::string> ips;  // non-empty, disjoint across groups, all present in the dataset
};

struct SeedSet {
    std::vector<SeedGroup> groups;

    std::size_t l() const { return groups.size(); }
};

// Scoring rule for picking each additional center among the unseeded samples:
//   literal — mean distance to current means plus minimum distance (as printed)
//   maxmin  — classic farthest-first (minimum distance only)
enum class InitVariant { literal, maxmin };

struct KMeansOptions {
    InitVariant init = InitVariant::literal;
    double tolerance = 1e-9;        // convergence threshold on mean displacement
    std::size_t max_iterations = 300;
};

struct ClusterPartition {
    std::size_t k = 0;
    std::vector<Vector> means;
    std::vector<std::string> ips;   // copy of the dataset keys
    std::vector<int> assignment;    // parallel to ips; cluster index in [0, k)
    std::size_t iterations = 0;
    bool converged = false;
    double sse = 0.0;
    std::vector<double> sse_history;  // one entry per iteration, non-increasing

    int cluster_of(const std::string& ip) const;  // -1 when the ip is unknown
};

// L2 norm of the difference. Throws Error{dimension_mismatch}.
double euclidean_distance(const Vector& x, const Vector& y);

// Centroid of each seed group. Throws Error{empty_seed_group} or
// Error{unknown_ip}; groups must be disjoint.
std::vector<Vector> seed_means(const Dataset& data, const SeedSet& seeds);

// Grows `known_means` to k centers by repeatedly picking the unseeded,
// not-yet-chosen sample with the best score (ties -> lowest index). Selected
// samples stay in the dataset for later assignment.
// `seeded` marks samples that belong to a seed group (excluded from
// candidacy); pass an empty mask when there are no seeds.
std::vector<Vector> farthest_point_init(const Dataset& data,
                                        const std::vector<Vector>& known_means, std::size_t k,
                                        InitVariant variant, const std::vector<bool>& seeded = {});

// Nearest-mean assignment over ALL k means, seed samples included; ties ->
// lowest cluster index.
std::vector<int> assign_step(const Dataset& data, const std::vector<Vector>& means);

struct UpdateResult {
    std::vector<Vector> means;
    bool changed = false;  // any mean displaced by more than the tolerance
};

// Replaces each non-empty cluster's mean with its member centroid; an empty
// cluster is reseeded to the sample farthest from its nearest mean (a second
// pick of the same sample is a fixed point, so repair cannot oscillate).
UpdateResult update_step(const Dataset& data, const std::vector<int>& assignment,
                         const std::vector<Vector>& means, double tolerance);

double sum_squared_error(const Dataset& data, const std::vector<int>& assignment,
                         const std::vector<Vector>& means);

// The full algorithm. Deterministic given (data order, seeds, k, options).
// Requires 1 <= k <= |data| and seeds.l() <= k.
ClusterPartition partial_seeded_kmeans(const Dataset& data, const SeedSet& seeds, std::size_t k,
                                       const KMeansOptions& options = {});

} // namespace icstrace::cluster
