#include "icstrace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <unordered_map>

namespace icstrace::metrics {

double recall_rate(const cluster::ClusterPartition& partition,
                   const std::vector<std::string>& org_ips) {
    if (org_ips.empty()) throw Error(errc::empty_organization, "no ips");
    std::unordered_map<std::string, int> cluster_by_ip;
    cluster_by_ip.reserve(partition.ips.size());
    for (std::size_t i = 0; i < partition.ips.size(); ++i)
        cluster_by_ip.emplace(partition.ips[i], partition.assignment[i]);
    std::unordered_map<int, std::size_t> per_cluster;
    for (const auto& ip : org_ips) {
        auto it = cluster_by_ip.find(ip);
        if (it == cluster_by_ip.end())
            throw Error(errc::unknown_ip, ip + " not in partition");
        per_cluster[it->second] += 1;
    }
    std::size_t best = 0;
    for (const auto& [c, n] : per_cluster) best = std::max(best, n);
    return static_cast<double>(best) / static_cast<double>(org_ips.size());
}

std::vector<int> encode_labels(const std::vector<std::string>& labels) {
    std::unordered_map<std::string, int> ids;
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
        auto [it, inserted] = ids.emplace(label, static_cast<int>(ids.size()));
        out.push_back(it->second);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Contingency table

namespace {

struct Contingency {
    std::vector<std::vector<std::size_t>> counts;  // rows: true classes, cols: predicted clusters
    std::vector<std::size_t> row_sums;
    std::vector<std::size_t> col_sums;
    std::size_t total = 0;
};

Contingency build_contingency(const std::vector<int>& labels_true,
                              const std::vector<int>& labels_pred) {
    if (labels_true.size() != labels_pred.size())
        throw Error(errc::length_mismatch, std::to_string(labels_true.size()) + " vs " +
                                               std::to_string(labels_pred.size()));
    if (labels_true.size() < 2)
        throw Error(errc::length_mismatch, "need at least 2 samples");
    std::unordered_map<int, std::size_t> row_id, col_id;
    for (int v : labels_true) row_id.emplace(v, row_id.size());
    for (int v : labels_pred) col_id.emplace(v, col_id.size());
    Contingency table;
    table.counts.assign(row_id.size(), std::vector<std::size_t>(col_id.size(), 0));
    table.row_sums.assign(row_id.size(), 0);
    table.col_sums.assign(col_id.size(), 0);
    table.total = labels_true.size();
    for (std::size_t i = 0; i < labels_true.size(); ++i) {
        std::size_t r = row_id[labels_true[i]];
        std::size_t c = col_id[labels_pred[i]];
        table.counts[r][c] += 1;
        table.row_sums[r] += 1;
        table.col_sums[c] += 1;
    }
    return table;
}

double choose2(std::size_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

} // namespace

double adjusted_rand_index(const std::vector<int>& labels_true,
                           const std::vector<int>& labels_pred) {
    auto table = build_contingency(labels_true, labels_pred);
    double index = 0;
    for (const auto& row : table.counts)
        for (std::size_t n : row) index += choose2(n);
    double sum_rows = 0, sum_cols = 0;
    for (std::size_t n : table.row_sums) sum_rows += choose2(n);
    for (std::size_t n : table.col_sums) sum_cols += choose2(n);
    double pairs = choose2(table.total);
    double expected = sum_rows * sum_cols / pairs;
    double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;  // both labelings degenerate in the same way
    return (index - expected) / (max_index - expected);
}

namespace {

double entropy(const std::vector<std::size_t>& sums, std::size_t total) {
    double h = 0;
    for (std::size_t n : sums) {
        if (n == 0) continue;
        double p = static_cast<double>(n) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

double mutual_information(const Contingency& table) {
    double mi = 0;
    auto n = static_cast<double>(table.total);
    for (std::size_t r = 0; r < table.counts.size(); ++r) {
        for (std::size_t c = 0; c < table.counts[r].size(); ++c) {
            std::size_t nij = table.counts[r][c];
            if (nij == 0) continue;
            double pij = static_cast<double>(nij) / n;
            mi += pij * std::log(n * static_cast<double>(nij) /
                                 (static_cast<double>(table.row_sums[r]) *
                                  static_cast<double>(table.col_sums[c])));
        }
    }
    return mi;
}

// Exact expectation of MI under the hypergeometric model of random labelings
// with fixed marginals (log-gamma arithmetic).
double expected_mutual_information(const Contingency& table) {
    auto n = static_cast<double>(table.total);
    std::size_t total = table.total;
    auto lf = [](std::size_t v) { return std::lgamma(static_cast<double>(v) + 1.0); };
    double emi = 0;
    for (std::size_t a : table.row_sums) {
        for (std::size_t b : table.col_sums) {
            std::size_t lo = (a + b > total) ? a + b - total : 1;
            if (lo == 0) lo = 1;
            std::size_t hi = std::min(a, b);
            for (std::size_t nij = lo; nij <= hi; ++nij) {
                double term = (static_cast<double>(nij) / n) *
                              std::log(n * static_cast<double>(nij) /
                                       (static_cast<double>(a) * static_cast<double>(b)));
                double log_prob = lf(a) + lf(b) + lf(total - a) + lf(total - b) - lf(total) -
                                  lf(nij) - lf(a - nij) - lf(b - nij) - lf(total - a - b + nij);
                emi += term * std::exp(log_prob);
            }
        }
    }
    return emi;
}

} // namespace

double adjusted_mutual_information(const std::vector<int>& labels_true,
                                   const std::vector<int>& labels_pred) {
    auto table = build_contingency(labels_true, labels_pred);
    double h_true = entropy(table.row_sums, table.total);
    double h_pred = entropy(table.col_sums, table.total);
    double mi = mutual_information(table);
    double emi = expected_mutual_information(table);
    double denom = 0.5 * (h_true + h_pred) - emi;
    if (std::abs(denom) < 1e-15)
        return std::abs(mi - emi) < 1e-15 ? 1.0 : 0.0;  // both degenerate, documented convention
    return (mi - emi) / denom;
}

// ---------------------------------------------------------------------------
// Internal indices

namespace {

std::vector<int> dense_clusters(const std::vector<int>& assignment) {
    std::unordered_map<int, int> ids;
    std::vector<int> out;
    out.reserve(assignment.size());
    for (int c : assignment) {
        auto [it, inserted] = ids.emplace(c, static_cast<int>(ids.size()));
        out.push_back(it->second);
    }
    return out;
}

} // namespace

double silhouette_score(const std::vector<cluster::Vector>& points,
                        const std::vector<int>& assignment) {
    if (points.size() != assignment.size())
        throw Error(errc::length_mismatch, "points vs assignment");
    if (points.size() < 2) throw Error(errc::single_cluster, "need at least 2 samples");
    auto labels = dense_clusters(assignment);
    std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
    if (k < 2) throw Error(errc::single_cluster, "silhouette needs at least 2 clusters");
    std::size_t n = points.size();
    std::vector<std::size_t> sizes(k, 0);
    for (int c : labels) sizes[static_cast<std::size_t>(c)] += 1;

    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        auto own = static_cast<std::size_t>(labels[i]);
        if (sizes[own] == 1) continue;  // singleton: s = 0 by convention
        std::vector<double> mean_dist(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            mean_dist[static_cast<std::size_t>(labels[j])] +=
                cluster::euclidean_distance(points[i], points[j]);
        }
        double a = mean_dist[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, mean_dist[c] / static_cast<double>(sizes[c]));
        }
        double denom = std::max(a, b);
        total += denom > 0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

double calinski_harabasz_score(const std::vector<cluster::Vector>& points,
                               const std::vector<int>& assignment) {
    if (points.size() != assignment.size())
        throw Error(errc::length_mismatch, "points vs assignment");
    auto labels = dense_clusters(assignment);
    std::size_t n = points.size();
    std::size_t k = n == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    if (k < 2 || k >= n) throw Error(errc::degenerate_k, "need 2 <= k < N");
    std::size_t dim = points[0].size();

    cluster::Vector overall(dim, 0.0);
    for (const auto& p : points)
        for (std::size_t d = 0; d < dim; ++d) overall[d] += p[d];
    for (auto& v : overall) v /= static_cast<double>(n);

    std::vector<cluster::Vector> centroids(k, cluster::Vector(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto c = static_cast<std::size_t>(labels[i]);
        sizes[c] += 1;
        for (std::size_t d = 0; d < dim; ++d) centroids[c][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c)
        for (auto& v : centroids[c]) v /= static_cast<double>(sizes[c]);

    double bss = 0, wss = 0;
    for (std::size_t c = 0; c < k; ++c) {
        double d = cluster::euclidean_distance(centroids[c], overall);
        bss += static_cast<double>(sizes[c]) * d * d;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double d = cluster::euclidean_distance(points[i], centroids[static_cast<std::size_t>(labels[i])]);
        wss += d * d;
    }
    if (wss == 0.0) return kMaxScore;
    return (bss / static_cast<double>(k - 1)) / (wss / static_cast<double>(n - k));
}

// ---------------------------------------------------------------------------
// K sweep

const MetricCurve* SweepResult::curve(const std::string& name) const {
    for (const auto& c : curves)
        if (c.metric_name == name) return &c;
    return nullptr;
}

int SweepResult::best_silhouette_index() const {
    const auto* sil = curve("silhouette");
    if (!sil) return -1;
    int best = -1;
    for (std::size_t i = 0; i < sil->scores.size(); ++i) {
        if (!std::isfinite(sil->scores[i])) continue;
        if (best < 0 || sil->scores[i] > sil->scores[static_cast<std::size_t>(best)])
            best = static_cast<int>(i);
    }
    return best;
}

SweepResult k_sweep(const cluster::Dataset& data, const cluster::SeedSet& seeds, int k_lo,
                    int k_hi, const std::map<std::string, std::string>& truth,
                    const SweepOptions& options) {
    int min_k = std::max<int>(2, static_cast<int>(seeds.l()));
    if (k_lo < min_k || k_hi < k_lo || static_cast<std::size_t>(k_hi) > data.size())
        throw Error(errc::invalid_argument, "k range outside [max(2,l), N]");

    SweepResult result;
    for (int k = k_lo; k <= k_hi; ++k) result.k_values.push_back(k);

    std::vector<std::future<cluster::ClusterPartition>> futures;
    futures.reserve(result.k_values.size());
    for (int k : result.k_values) {
        futures.push_back(std::async(std::launch::async, [&, k] {
            return cluster::partial_seeded_kmeans(data, seeds, static_cast<std::size_t>(k),
                                                  options.kmeans);
        }));
    }
    for (auto& f : futures) result.partitions.push_back(f.get());

    auto wanted = [&](const std::string& name) {
        if (options.metric_set.empty()) return true;
        auto colon = name.find(':');
        return options.metric_set.count(colon == std::string::npos ? name
                                                                   : name.substr(0, colon)) > 0;
    };
    auto add_curve = [&](const std::string& name, auto score_fn) {
        if (!wanted(name)) return;
        MetricCurve curve;
        curve.metric_name = name;
        curve.k_values = result.k_values;
        curve.scores.reserve(result.partitions.size());
        for (const auto& partition : result.partitions) {
            double score;
            try {
                score = score_fn(partition);
            } catch (const Error&) {
                score = std::numeric_limits<double>::quiet_NaN();
            }
            curve.scores.push_back(score);
        }
        result.curves.push_back(std::move(curve));
    };

    add_curve("silhouette", [&](const cluster::ClusterPartition& p) {
        return silhouette_score(data.points, p.assignment);
    });
    add_curve("calinski_harabasz", [&](const cluster::ClusterPartition& p) {
        return calinski_harabasz_score(data.points, p.assignment);
    });

    if (!truth.empty()) {
        // Evaluation subset: the truth-labeled IPs present in the dataset.
        std::vector<std::size_t> subset;
        std::vector<std::string> subset_orgs;
        std::map<std::string, std::vector<std::string>> org_ips;
        for (std::size_t i = 0; i < data.size(); ++i) {
            auto it = truth.find(data.ips[i]);
            if (it == truth.end()) continue;
            subset.push_back(i);
            subset_orgs.push_back(it->second);
            org_ips[it->second].push_back(data.ips[i]);
        }
        if (!subset.empty()) {
            auto labels_true = encode_labels(subset_orgs);
            add_curve("ari", [&](const cluster::ClusterPartition& p) {
                std::vector<int> pred;
                pred.reserve(subset.size());
                for (std::size_t i : subset) pred.push_back(p.assignment[i]);
                return adjusted_rand_index(labels_true, pred);
            });
            add_curve("ami", [&](const cluster::ClusterPartition& p) {
                std::vector<int> pred;
                pred.reserve(subset.size());
                for (std::size_t i : subset) pred.push_back(p.assignment[i]);
                return adjusted_mutual_information(labels_true, pred);
            });
            for (const auto& [org, ips] : org_ips) {
                add_curve("recall:" + org, [&ips = ips](const cluster::ClusterPartition& p) {
                    return recall_rate(p, ips);
                });
            }
            add_curve("known_org_clusters", [&](const cluster::ClusterPartition& p) {
                std::set<int> clusters;
                for (std::size_t i : subset) clusters.insert(p.assignment[i]);
                return static_cast<double>(clusters.size());
            });
        }
    }
    return result;
}

} // namespace icstrace::metrics
