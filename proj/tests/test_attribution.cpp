#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "icstrace/attribution.hpp"
#include "temp_dir.hpp"

#include <unistd.h>

using namespace icstrace;
using attribution::AuxEntry;
using attribution::AuxInfo;
using attribution::DomainKind;
using attribution::Evidence;

namespace {

cluster::ClusterPartition partition_of(std::size_t k, const std::vector<int>& assignment) {
    cluster::ClusterPartition partition;
    partition.k = k;
    partition.assignment = assignment;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        partition.ips.push_back("10.0.0." + std::to_string(i + 1));
    return partition;
}

AuxEntry entry(const std::string& domain, DomainKind kind, const std::string& country = "") {
    AuxEntry e;
    e.domain = domain;
    e.kind = kind;
    e.country = country;
    return e;
}

} // namespace

TEST_SUITE("aux map file") {
    TEST_CASE("rows parse, duplicates counted, malformed skipped") {
        TempDir dir("aux");
        {
            std::ofstream out(dir.file("aux.csv"));
            out << "ip,domain,domain_kind,country\n";
            out << "1.2.3.4,scan.shodan.io,static,US\n";
            out << "1.2.3.5,,none,DE\n";
            out << "not-an-ip,foo.example,static,US\n";
            out << "1.2.3.4,census.shodan.io,static,US\n";
            out << "1.2.3.6,node7.amazonaws.com,dynamic,\n";
        }
        auto aux = attribution::load_auxiliary_map(dir.file("aux.csv"));
        CHECK(aux.by_ip.size() == 3);
        CHECK(aux.malformed_rows == 1);
        CHECK(aux.duplicate_rows == 1);
        CHECK(aux.by_ip.at("1.2.3.4").domain == "census.shodan.io");  // last wins
        CHECK(aux.by_ip.at("1.2.3.5").kind == DomainKind::none);
        CHECK(aux.by_ip.at("1.2.3.5").country == "DE");
        CHECK(aux.by_ip.at("1.2.3.6").kind == DomainKind::dynamic_domain);
    }

    TEST_CASE("empty domain forces kind none") {
        TempDir dir("aux2");
        {
            std::ofstream out(dir.file("aux.csv"));
            out << "9.9.9.9,,static,CN\n";
        }
        auto aux = attribution::load_auxiliary_map(dir.file("aux.csv"));
        CHECK(aux.by_ip.at("9.9.9.9").kind == DomainKind::none);
    }

    TEST_CASE("write/load round trip") {
        AuxInfo aux;
        aux.by_ip["1.1.1.1"] = entry("a.b.test", DomainKind::static_domain, "US");
        aux.by_ip["2.2.2.2"] = entry("", DomainKind::none, "CN");
        TempDir dir("aux3");
        attribution::write_auxiliary_map(dir.file("aux.csv"), aux);
        auto loaded = attribution::load_auxiliary_map(dir.file("aux.csv"));
        CHECK(loaded.by_ip.size() == 2);
        CHECK(loaded.by_ip.at("1.1.1.1").domain == "a.b.test");
        CHECK(loaded.by_ip.at("2.2.2.2").country == "CN");
    }
}

TEST_SUITE("registrable suffix") {
    TEST_CASE("common shapes") {
        CHECK(attribution::registrable_suffix("a.b.shodan.io") == "shodan.io");
        CHECK(attribution::registrable_suffix("Scan.Shodan.IO") == "shodan.io");
        CHECK(attribution::registrable_suffix("x.neu.edu.cn") == "neu.edu.cn");
        CHECK(attribution::registrable_suffix("members.linode.com") == "linode.com");
        CHECK(attribution::registrable_suffix("binaryedge.ninja") == "binaryedge.ninja");
        CHECK(attribution::registrable_suffix("plcscan.org") == "plcscan.org");
        CHECK(attribution::registrable_suffix("localhost") == "localhost");
    }
}

TEST_SUITE("cluster labeling") {
    TEST_CASE("static domain majority labels the cluster") {
        // 8-ip cluster, 5 of them under one static suffix
        auto partition = partition_of(1, std::vector<int>(8, 0));
        AuxInfo aux;
        for (int i = 1; i <= 5; ++i)
            aux.by_ip["10.0.0." + std::to_string(i)] =
                entry("h" + std::to_string(i) + ".shodan.io", DomainKind::static_domain);
        auto labels = attribution::label_clusters(partition, aux);
        REQUIRE(labels.size() == 1);
        CHECK(labels[0].label == "shodan.io");
        CHECK(labels[0].evidence == Evidence::static_domain);
        CHECK(labels[0].support_count == 5);
        CHECK(labels[0].support_fraction == doctest::Approx(5.0 / 8.0));
    }

    TEST_CASE("dynamic domain is the second choice") {
        auto partition = partition_of(1, std::vector<int>(6, 0));
        AuxInfo aux;
        aux.by_ip["10.0.0.1"] = entry("only.one.test", DomainKind::static_domain);
        for (int i = 2; i <= 6; ++i)
            aux.by_ip["10.0.0." + std::to_string(i)] =
                entry("n" + std::to_string(i) + ".amazonaws.com", DomainKind::dynamic_domain);
        auto labels = attribution::label_clusters(partition, aux);
        CHECK(labels[0].label == "amazonaws.com");
        CHECK(labels[0].evidence == Evidence::dynamic_domain);
    }

    TEST_CASE("geography labels when domains are missing") {
        // 20 ips, 17 located in China, no domains
        auto partition = partition_of(1, std::vector<int>(20, 0));
        AuxInfo aux;
        for (int i = 1; i <= 17; ++i)
            aux.by_ip["10.0.0." + std::to_string(i)] = entry("", DomainKind::none, "China");
        auto labels = attribution::label_clusters(partition, aux);
        CHECK(labels[0].label == "China Org");
        CHECK(labels[0].evidence == Evidence::geography);
        CHECK(labels[0].support_count == 17);
    }

    TEST_CASE("region backs up a missing country") {
        auto partition = partition_of(1, std::vector<int>(4, 0));
        AuxInfo aux;
        for (int i = 1; i <= 3; ++i) {
            AuxEntry e;
            e.region = "Europe";
            aux.by_ip["10.0.0." + std::to_string(i)] = e;
        }
        auto labels = attribution::label_clusters(partition, aux);
        CHECK(labels[0].label == "Europe Org");
    }

    TEST_CASE("no auxiliary coverage stays Unknown") {
        auto partition = partition_of(2, {0, 0, 1});
        auto labels = attribution::label_clusters(partition, {});
        REQUIRE(labels.size() == 2);
        for (const auto& label : labels) {
            CHECK(label.label == attribution::kUnknownLabel);
            CHECK(label.evidence == Evidence::unlabeled);
            CHECK(label.support_count == 0);
        }
    }

    TEST_CASE("support below the threshold falls through") {
        auto partition = partition_of(1, std::vector<int>(10, 0));
        AuxInfo aux;
        for (int i = 1; i <= 3; ++i)  // 3 < min_support_count 4
            aux.by_ip["10.0.0." + std::to_string(i)] =
                entry("x.plcscan.org", DomainKind::static_domain, "China");
        for (int i = 4; i <= 9; ++i)
            aux.by_ip["10.0.0." + std::to_string(i)] = entry("", DomainKind::none, "China");
        auto labels = attribution::label_clusters(partition, aux);
        CHECK(labels[0].evidence == Evidence::geography);
        CHECK(labels[0].label == "China Org");

        attribution::Thresholds loose;
        loose.min_support_count = 3;
        labels = attribution::label_clusters(partition, aux, loose);
        CHECK(labels[0].evidence == Evidence::static_domain);
        CHECK(labels[0].label == "plcscan.org");
    }

    TEST_CASE("two clusters may share one label") {
        auto partition = partition_of(2, {0, 0, 0, 0, 1, 1, 1, 1});
        AuxInfo aux;
        for (int i = 1; i <= 8; ++i)
            aux.by_ip["10.0.0." + std::to_string(i)] =
                entry("h.neu.edu.cn", DomainKind::static_domain);
        auto labels = attribution::label_clusters(partition, aux);
        CHECK(labels[0].label == "neu.edu.cn");
        CHECK(labels[1].label == "neu.edu.cn");
    }

    TEST_CASE("deterministic") {
        auto partition = partition_of(2, {0, 1, 0, 1, 0, 1});
        AuxInfo aux;
        for (int i = 1; i <= 6; ++i)
            aux.by_ip["10.0.0." + std::to_string(i)] =
                entry("h.example.net", DomainKind::static_domain, "US");
        auto a = attribution::label_clusters(partition, aux);
        auto b = attribution::label_clusters(partition, aux);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].label == b[i].label);
            CHECK(a[i].support_count == b[i].support_count);
        }
    }
}

TEST_SUITE("ip syntax") {
    TEST_CASE("accepts plausible addresses") {
        CHECK(attribution::looks_like_ip("1.2.3.4"));
        CHECK(attribution::looks_like_ip("255.255.255.255"));
        CHECK(attribution::looks_like_ip("fe80::1"));
        CHECK_FALSE(attribution::looks_like_ip("1.2.3"));
        CHECK_FALSE(attribution::looks_like_ip("1.2.3.256"));
        CHECK_FALSE(attribution::looks_like_ip("example.com"));
        CHECK_FALSE(attribution::looks_like_ip(""));
    }
}
