#include "icstrace/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace icstrace::cluster {

int ClusterPartition::cluster_of(const std::string& ip) const {
    for (std::size_t i = 0; i < ips.size(); ++i)
        if (ips[i] == ip) return assignment[i];
    return -1;
}

double euclidean_distance(const Vector& x, const Vector& y) {
    if (x.size() != y.size())
        throw Error(errc::dimension_mismatch,
                    std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    double sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

namespace {

double squared_distance(const Vector& x, const Vector& y) {
    double sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        sum += d * d;
    }
    return sum;
}

std::unordered_map<std::string, std::size_t> index_by_ip(const Dataset& data) {
    std::unordered_map<std::string, std::size_t> map;
    map.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) map.emplace(data.ips[i], i);
    return map;
}

std::vector<bool> seeded_mask(const Dataset& data, const SeedSet& seeds) {
    auto by_ip = index_by_ip(data);
    std::vector<bool> mask(data.size(), false);
    for (const auto& group : seeds.groups) {
        for (const auto& ip : group.ips) {
            auto it = by_ip.find(ip);
            if (it == by_ip.end()) throw Error(errc::unknown_ip, ip + " not in dataset");
            if (mask[it->second])
                throw Error(errc::invalid_argument, "seed groups overlap on " + ip);
            mask[it->second] = true;
        }
    }
    return mask;
}

} // namespace

std::vector<Vector> seed_means(const Dataset& data, const SeedSet& seeds) {
    auto by_ip = index_by_ip(data);
    std::vector<Vector> means;
    means.reserve(seeds.l());
    std::unordered_set<std::string> seen;
    for (const auto& group : seeds.groups) {
        if (group.ips.empty()) throw Error(errc::empty_seed_group, group.organization);
        Vector mean(data.dim(), 0.0);
        for (const auto& ip : group.ips) {
            auto it = by_ip.find(ip);
            if (it == by_ip.end()) throw Error(errc::unknown_ip, ip + " not in dataset");
            if (!seen.insert(ip).second)
                throw Error(errc::invalid_argument, "seed groups overlap on " + ip);
            const Vector& point = data.points[it->second];
            for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += point[d];
        }
        for (auto& v : mean) v /= static_cast<double>(group.ips.size());
        means.push_back(std::move(mean));
    }
    return means;
}

std::vector<Vector> farthest_point_init(const Dataset& data,
                                        const std::vector<Vector>& known_means, std::size_t k,
                                        InitVariant variant, const std::vector<bool>& seeded) {
    if (k < known_means.size())
        throw Error(errc::invalid_argument, "k smaller than the number of known means");
    std::vector<Vector> means = known_means;

    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (seeded.empty() || !seeded[i]) candidates.push_back(i);
    if (candidates.size() < k - means.size())
        throw Error(errc::insufficient_samples,
                    "need " + std::to_string(k - means.size()) + " unseeded samples, have " +
                        std::to_string(candidates.size()));

    std::vector<bool> chosen(data.size(), false);
    while (means.size() < k) {
        std::size_t best = data.size();
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t idx : candidates) {
            if (chosen[idx]) continue;
            double score;
            if (means.empty()) {
                score = 0.0;  // no means yet: every sample ties, lowest index wins
            } else {
                double sum = 0;
                double min_d = std::numeric_limits<double>::infinity();
                for (const auto& mean : means) {
                    double d = euclidean_distance(data.points[idx], mean);
                    sum += d;
                    min_d = std::min(min_d, d);
                }
                score = variant == InitVariant::literal
                            ? sum / static_cast<double>(means.size()) + min_d
                            : min_d;
            }
            if (score > best_score) {
                best_score = score;
                best = idx;
            }
        }
        if (best == data.size())
            throw Error(errc::insufficient_samples, "ran out of candidate samples");
        chosen[best] = true;
        means.push_back(data.points[best]);
    }
    return means;
}

std::vector<int> assign_step(const Dataset& data, const std::vector<Vector>& means) {
    std::vector<int> assignment(data.size(), 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_cluster = 0;
        for (std::size_t c = 0; c < means.size(); ++c) {
            double d = squared_distance(data.points[i], means[c]);
            if (d < best) {
                best = d;
                best_cluster = static_cast<int>(c);
            }
        }
        assignment[i] = best_cluster;
    }
    return assignment;
}

UpdateResult update_step(const Dataset& data, const std::vector<int>& assignment,
                         const std::vector<Vector>& means, double tolerance) {
    std::size_t k = means.size();
    std::vector<Vector> next(k, Vector(data.dim(), 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto c = static_cast<std::size_t>(assignment[i]);
        counts[c] += 1;
        for (std::size_t d = 0; d < data.dim(); ++d) next[c][d] += data.points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) {
            for (auto& v : next[c]) v /= static_cast<double>(counts[c]);
        } else {
            next[c] = means[c];  // repaired below
        }
    }
    // Empty-cluster repair: reseed to the sample farthest from its nearest
    // mean, recomputing after each repair. A zero max distance means every
    // sample already coincides with a mean; the cluster then stays empty.
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        double best_d = 0.0;
        std::size_t best_idx = data.size();
        for (std::size_t i = 0; i < data.size(); ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& mean : next) nearest = std::min(nearest, squared_distance(data.points[i], mean));
            if (nearest > best_d) {
                best_d = nearest;
                best_idx = i;
            }
        }
        if (best_idx < data.size()) next[c] = data.points[best_idx];
    }
    bool changed = false;
    for (std::size_t c = 0; c < k; ++c) {
        if (euclidean_distance(next[c], means[c]) > tolerance) {
            changed = true;
            break;
        }
    }
    return {std::move(next), changed};
}

double sum_squared_error(const Dataset& data, const std::vector<int>& assignment,
                         const std::vector<Vector>& means) {
    double sse = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        sse += squared_distance(data.points[i], means[static_cast<std::size_t>(assignment[i])]);
    return sse;
}

ClusterPartition partial_seeded_kmeans(const Dataset& data, const SeedSet& seeds, std::size_t k,
                                       const KMeansOptions& options) {
    if (k < 1 || k > data.size())
        throw Error(errc::invalid_argument,
                    "k must be in [1, " + std::to_string(data.size()) + "]");
    if (seeds.l() > k)
        throw Error(errc::invalid_argument, "more seed groups than clusters");
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data.points[i].size() != data.dim())
            throw Error(errc::dimension_mismatch, "sample " + data.ips[i]);

    auto mask = seeded_mask(data, seeds);
    auto means = farthest_point_init(data, seed_means(data, seeds), k, options.init, mask);

    ClusterPartition partition;
    partition.k = k;
    partition.ips = data.ips;
    std::vector<int> assignment;
    for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
        assignment = assign_step(data, means);
        auto update = update_step(data, assignment, means, options.tolerance);
        means = std::move(update.means);
        partition.iterations = iter;
        partition.sse_history.push_back(sum_squared_error(data, assignment, means));
        if (!update.changed) {
            partition.converged = true;
            break;
        }
    }
    if (!partition.converged) assignment = assign_step(data, means);
    partition.means = std::move(means);
    partition.assignment = std::move(assignment);
    partition.sse = sum_squared_error(data, partition.assignment, partition.means);
    return partition;
}

} // namespace icstrace::cluster
