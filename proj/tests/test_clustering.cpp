#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "icstrace/clustering.hpp"
#include "icstrace/rng.hpp"
#include "oracles.hpp"

using namespace icstrace;
using cluster::Dataset;
using cluster::SeedSet;
using cluster::Vector;

namespace {

Dataset make_dataset(const std::vector<Vector>& points) {
    Dataset data;
    data.points = points;
    for (std::size_t i = 0; i < points.size(); ++i) data.ips.push_back("ip" + std::to_string(i));
    return data;
}

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t dim, double span = 10.0) {
    std::vector<Vector> points;
    for (std::size_t i = 0; i < n; ++i) {
        Vector p(dim);
        for (auto& v : p) v = rng.unit() * span;
        points.push_back(std::move(p));
    }
    return make_dataset(points);
}

} // namespace

TEST_SUITE("distance") {
    TEST_CASE("examples") {
        CHECK(cluster::euclidean_distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
        CHECK(cluster::euclidean_distance({1.5, -2}, {1.5, -2}) == 0.0);
    }

    TEST_CASE("matches the componentwise oracle") {
        Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            std::size_t dim = 1 + rng.bounded(6);
            Vector x(dim), y(dim);
            for (auto& v : x) v = rng.unit() * 20 - 10;
            for (auto& v : y) v = rng.unit() * 20 - 10;
            CHECK(cluster::euclidean_distance(x, y) ==
                  doctest::Approx(oracles::naive_distance(x, y)).epsilon(1e-12));
        }
    }

    TEST_CASE("dimension mismatch") {
        CHECK_THROWS_AS(cluster::euclidean_distance({1, 2}, {1, 2, 3}), Error);
    }
}

TEST_SUITE("seed means") {
    TEST_CASE("centroid of each group") {
        auto data = make_dataset({{0, 0}, {2, 2}, {5, 5}});
        SeedSet seeds{{{"orgA", {"ip0", "ip1"}}}};
        auto means = cluster::seed_means(data, seeds);
        REQUIRE(means.size() == 1);
        CHECK(means[0] == Vector{1, 1});
    }

    TEST_CASE("singleton group") {
        auto data = make_dataset({{5}});
        SeedSet seeds{{{"orgA", {"ip0"}}}};
        CHECK(cluster::seed_means(data, seeds)[0] == Vector{5});
    }

    TEST_CASE("three points match the arithmetic-mean oracle") {
        auto data = make_dataset({{1, 7}, {4, -2}, {10, 3}});
        SeedSet seeds{{{"orgA", {"ip0", "ip1", "ip2"}}}};
        auto mean = cluster::seed_means(data, seeds)[0];
        auto expect = oracles::naive_mean({{1, 7}, {4, -2}, {10, 3}});
        CHECK(mean[0] == doctest::Approx(expect[0]));
        CHECK(mean[1] == doctest::Approx(expect[1]));
    }

    TEST_CASE("rejects bad groups") {
        auto data = make_dataset({{0}, {1}});
        CHECK_THROWS_AS(cluster::seed_means(data, SeedSet{{{"orgA", {}}}}), Error);
        CHECK_THROWS_AS(cluster::seed_means(data, SeedSet{{{"orgA", {"nope"}}}}), Error);
        CHECK_THROWS_AS(
            cluster::seed_means(data, SeedSet{{{"a", {"ip0"}}, {"b", {"ip0"}}}}), Error);
    }
}

TEST_SUITE("farthest point init") {
    TEST_CASE("mean-plus-min score picks the far point") {
        auto data = make_dataset({{0}, {1}, {10}, {11}});
        auto means = cluster::farthest_point_init(data, {{0.5}}, 2, cluster::InitVariant::literal);
        REQUIRE(means.size() == 2);
        // exhaustive score check: 11 scores 10.5+10.5=21, the best
        CHECK(means[1] == Vector{11});
    }

    TEST_CASE("agrees with exhaustive score evaluation on random data") {
        Rng rng(23);
        for (int trial = 0; trial < 100; ++trial) {
            auto data = random_dataset(rng, 2 + rng.bounded(7), 1 + rng.bounded(2));
            Vector known(data.dim());
            for (auto& v : known) v = rng.unit() * 10;
            auto means =
                cluster::farthest_point_init(data, {known}, 2, cluster::InitVariant::literal);
            double best_score = -1;
            std::size_t best = 0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                double d = oracles::naive_distance(data.points[i], known);
                double score = d + d;  // one known mean: mean == min
                if (score > best_score) {
                    best_score = score;
                    best = i;
                }
            }
            CHECK(means[1] == data.points[best]);
        }
    }

    TEST_CASE("l == k returns the known means unchanged") {
        auto data = make_dataset({{0}, {1}, {10}});
        std::vector<Vector> known{{0.5}, {10.0}};
        auto means = cluster::farthest_point_init(data, known, 2, cluster::InitVariant::literal);
        CHECK(means == known);
    }

    TEST_CASE("score ties resolve to the lowest index") {
        auto data = make_dataset({{0}, {-7}, {7}});
        auto means = cluster::farthest_point_init(data, {{0}}, 2, cluster::InitVariant::literal);
        CHECK(means[1] == Vector{-7});
    }

    TEST_CASE("insufficient unseeded samples") {
        auto data = make_dataset({{0}, {1}});
        std::vector<bool> seeded{true, false};
        CHECK_THROWS_AS(
            cluster::farthest_point_init(data, {{0.0}}, 3, cluster::InitVariant::literal, seeded),
            Error);
    }

    TEST_CASE("maxmin variant uses the minimum distance only") {
        // literal picks 11 (score 21 beats 19); maxmin also picks 11; a case
        // where they differ: two known means pulling the average.
        auto data = make_dataset({{0}, {6}, {-5}});
        std::vector<Vector> known{{0}, {-6}};
        auto literal =
            cluster::farthest_point_init(data, known, 3, cluster::InitVariant::literal);
        auto maxmin = cluster::farthest_point_init(data, known, 3, cluster::InitVariant::maxmin);
        // literal: 6 scores (6+12)/2+6=15, -5 scores (5+1)/2+1=4 -> picks 6
        CHECK(literal[2] == Vector{6});
        CHECK(maxmin[2] == Vector{6});  // min distances: 6 vs 1
    }
}

TEST_SUITE("assign and update") {
    TEST_CASE("tie goes to the lowest cluster index") {
        auto data = make_dataset({{3.5}});
        auto assignment = cluster::assign_step(data, {{2.0}, {5.0}});
        CHECK(assignment == std::vector<int>{0});
    }

    TEST_CASE("coincident samples all land in cluster 0") {
        auto data = make_dataset({{1}, {1}, {1}});
        auto assignment = cluster::assign_step(data, {{1.0}, {1.0}, {1.0}});
        CHECK(assignment == std::vector<int>{0, 0, 0});
    }

    TEST_CASE("update moves means to member centroids") {
        auto data = make_dataset({{0, 0}, {2, 0}});
        auto update = cluster::update_step(data, {0, 0}, {{5, 5}, {100, 100}}, 1e-9);
        CHECK(update.means[0] == Vector{1, 0});
        CHECK(update.changed);
    }

    TEST_CASE("fixed point reports no change") {
        auto data = make_dataset({{0}, {2}});
        auto update = cluster::update_step(data, {0, 1}, {{0.0}, {2.0}}, 1e-9);
        CHECK_FALSE(update.changed);
    }

    TEST_CASE("empty cluster reseeds to the farthest sample") {
        auto data = make_dataset({{0}, {1}, {10}});
        auto update = cluster::update_step(data, {0, 0, 0}, {{0.5}, {100.0}}, 1e-9);
        CHECK(update.means[1] == Vector{10});
    }

    TEST_CASE("repair strictly reduces the max point-to-mean distance") {
        Rng rng(31);
        for (int trial = 0; trial < 50; ++trial) {
            auto data = random_dataset(rng, 4 + rng.bounded(5), 1);
            // All samples assigned to cluster 0 leaves cluster 1 empty.
            std::vector<int> assignment(data.size(), 0);
            Vector far{1000.0};
            auto before = cluster::update_step(data, assignment, {{0.0}, far}, 1e-9);
            auto max_near = [&](const std::vector<Vector>& means) {
                double worst = 0;
                for (const auto& p : data.points) {
                    double nearest = std::numeric_limits<double>::infinity();
                    for (const auto& m : means)
                        nearest = std::min(nearest, oracles::naive_distance(p, m));
                    worst = std::max(worst, nearest);
                }
                return worst;
            };
            double centroid_only = max_near({before.means[0], far});
            double repaired = max_near(before.means);
            CHECK(repaired < centroid_only);
        }
    }
}

TEST_SUITE("partial seeded kmeans") {
    TEST_CASE("separated groups recover the seeded partition") {
        auto data = make_dataset({{0}, {1}, {10}, {11}});
        SeedSet seeds{{{"orgA", {"ip0", "ip1"}}}};
        auto partition = cluster::partial_seeded_kmeans(data, seeds, 2);
        CHECK(partition.converged);
        CHECK(partition.assignment[0] == partition.assignment[1]);
        CHECK(partition.assignment[2] == partition.assignment[3]);
        CHECK(partition.assignment[0] != partition.assignment[2]);
        // brute force confirms this is the SSE-optimal 2-partition
        CHECK(partition.sse ==
              doctest::Approx(oracles::brute_force_optimal_sse(data.points, 2)));
    }

    TEST_CASE("l=0 k=1 is the global centroid") {
        auto data = make_dataset({{0, 0}, {4, 0}, {2, 6}});
        auto partition = cluster::partial_seeded_kmeans(data, {}, 1);
        CHECK(partition.converged);
        CHECK(partition.means[0][0] == doctest::Approx(2.0));
        CHECK(partition.means[0][1] == doctest::Approx(2.0));
    }

    TEST_CASE("k equal to the sample count isolates every sample") {
        auto data = make_dataset({{0}, {3}, {7}, {20}});
        auto partition = cluster::partial_seeded_kmeans(data, {}, 4);
        std::set<int> clusters(partition.assignment.begin(), partition.assignment.end());
        CHECK(clusters.size() == 4);
        CHECK(partition.sse == doctest::Approx(0.0));
    }

    TEST_CASE("seed samples may leave their seed cluster") {
        auto data = make_dataset({{0}, {10}, {10.1}});
        SeedSet seeds{{{"orgA", {"ip0", "ip1"}}}};  // seed mean 5.0
        auto partition = cluster::partial_seeded_kmeans(data, seeds, 2);
        CHECK(partition.assignment[1] == partition.assignment[2]);
        CHECK(partition.assignment[0] != partition.assignment[1]);
    }

    TEST_CASE("sse history is non-increasing") {
        Rng rng(13);
        for (int trial = 0; trial < 100; ++trial) {
            auto data = random_dataset(rng, 3 + rng.bounded(6), 1 + rng.bounded(2));
            std::size_t k = 1 + rng.bounded(std::min<std::size_t>(4, data.size()));
            auto partition = cluster::partial_seeded_kmeans(data, {}, k);
            for (std::size_t i = 1; i < partition.sse_history.size(); ++i)
                CHECK(partition.sse_history[i] <= partition.sse_history[i - 1] + 1e-12);
            CHECK(partition.converged);
        }
    }

    TEST_CASE("deterministic") {
        Rng rng(29);
        auto data = random_dataset(rng, 8, 2);
        SeedSet seeds{{{"orgA", {"ip0", "ip3"}}}};
        auto a = cluster::partial_seeded_kmeans(data, seeds, 3);
        auto b = cluster::partial_seeded_kmeans(data, seeds, 3);
        CHECK(a.assignment == b.assignment);
        CHECK(a.means == b.means);
        CHECK(a.iterations == b.iterations);
    }

    TEST_CASE("seeded reduction: l == k initializes at the seed means") {
        auto data = make_dataset({{0}, {2}, {10}, {12}});
        SeedSet seeds{{{"a", {"ip0", "ip1"}}, {"b", {"ip2", "ip3"}}}};
        auto init = cluster::farthest_point_init(data, cluster::seed_means(data, seeds), 2,
                                                 cluster::InitVariant::literal);
        CHECK(init == std::vector<Vector>{{1.0}, {11.0}});
        auto partition = cluster::partial_seeded_kmeans(data, seeds, 2);
        CHECK(partition.converged);
        CHECK(partition.iterations == 1);
    }

    TEST_CASE("converged sse is never better than brute force") {
        Rng rng(37);
        for (int trial = 0; trial < 60; ++trial) {
            auto data = random_dataset(rng, 2 + rng.bounded(7), 1 + rng.bounded(2));
            int k = 1 + static_cast<int>(rng.bounded(std::min<std::size_t>(3, data.size())));
            auto partition = cluster::partial_seeded_kmeans(data, {}, k);
            double optimal = oracles::brute_force_optimal_sse(data.points, k);
            CHECK(partition.sse >= optimal - 1e-9);
        }
    }

    TEST_CASE("argument validation") {
        auto data = make_dataset({{0}, {1}});
        CHECK_THROWS_AS(cluster::partial_seeded_kmeans(data, {}, 0), Error);
        CHECK_THROWS_AS(cluster::partial_seeded_kmeans(data, {}, 3), Error);
        SeedSet seeds{{{"a", {"ip0"}}, {"b", {"ip1"}}}};
        CHECK_THROWS_AS(cluster::partial_seeded_kmeans(data, seeds, 1), Error);
    }
}
