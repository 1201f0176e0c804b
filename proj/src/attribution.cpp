#include "icstrace/attribution.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

namespace icstrace::attribution {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream stream(line);
    std::string field;
    while (std::getline(stream, field, ',')) fields.push_back(trim(field));
    return fields;
}

// Two-label public suffixes under which a third label is the registrable name.
constexpr std::array<std::string_view, 14> kMultiPartSuffixes = {
    "edu.cn", "com.cn", "net.cn", "org.cn", "gov.cn", "ac.cn", "co.uk",
    "ac.uk",  "org.uk", "com.au", "edu.au", "co.jp",  "ac.jp", "co.kr",
};

} // namespace

bool looks_like_ip(const std::string& text) {
    // IPv4 dotted quad
    int parts = 0;
    std::size_t i = 0;
    bool ipv4 = true;
    while (i < text.size() && ipv4) {
        std::size_t start = i;
        long value = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            value = value * 10 + (text[i] - '0');
            ++i;
        }
        if (i == start || value > 255 || i - start > 3) {
            ipv4 = false;
            break;
        }
        ++parts;
        if (i < text.size()) {
            if (text[i] != '.') {
                ipv4 = false;
                break;
            }
            ++i;
        }
    }
    if (ipv4 && parts == 4 && i == text.size()) return true;
    // IPv6: hex digits and at least one colon
    if (text.find(':') == std::string::npos) return false;
    return std::all_of(text.begin(), text.end(), [](char c) {
        return std::isxdigit(static_cast<unsigned char>(c)) || c == ':';
    });
}

std::string registrable_suffix(std::string domain) {
    std::transform(domain.begin(), domain.end(), domain.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    while (!domain.empty() && domain.back() == '.') domain.pop_back();
    std::vector<std::string> labels;
    std::size_t pos = 0;
    while (pos <= domain.size()) {
        auto dot = domain.find('.', pos);
        if (dot == std::string::npos) {
            labels.push_back(domain.substr(pos));
            break;
        }
        labels.push_back(domain.substr(pos, dot - pos));
        pos = dot + 1;
    }
    if (labels.size() <= 2) return domain;
    std::string last_two = labels[labels.size() - 2] + "." + labels.back();
    std::size_t take = 2;
    if (std::find(kMultiPartSuffixes.begin(), kMultiPartSuffixes.end(), last_two) !=
        kMultiPartSuffixes.end())
        take = 3;
    if (labels.size() <= take) return domain;
    std::string out = labels[labels.size() - take];
    for (std::size_t i = labels.size() - take + 1; i < labels.size(); ++i)
        out += "." + labels[i];
    return out;
}

AuxInfo load_auxiliary_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open " + path.string());
    AuxInfo aux;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv(line);
        if (first && !fields.empty() && fields[0] == "ip") {
            first = false;
            continue;  // header row
        }
        first = false;
        if (fields.size() < 2 || !looks_like_ip(fields[0])) {
            aux.malformed_rows += 1;
            continue;
        }
        AuxEntry entry;
        entry.domain = fields[1];
        if (fields.size() > 2) {
            if (fields[2] == "static") entry.kind = DomainKind::static_domain;
            else if (fields[2] == "dynamic") entry.kind = DomainKind::dynamic_domain;
        }
        if (entry.domain.empty()) entry.kind = DomainKind::none;
        if (fields.size() > 3) entry.country = fields[3];
        if (fields.size() > 4) entry.region = fields[4];
        auto [it, inserted] = aux.by_ip.insert_or_assign(fields[0], std::move(entry));
        if (!inserted) aux.duplicate_rows += 1;
    }
    return aux;
}

void write_auxiliary_map(const std::filesystem::path& path, const AuxInfo& aux) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io_failure, "cannot open " + path.string());
    out << "ip,domain,domain_kind,country,region\n";
    for (const auto& [ip, entry] : aux.by_ip) {
        const char* kind = entry.kind == DomainKind::static_domain    ? "static"
                           : entry.kind == DomainKind::dynamic_domain ? "dynamic"
                                                                      : "none";
        out << ip << ',' << entry.domain << ',' << kind << ',' << entry.country << ','
            << entry.region << '\n';
    }
}

const char* to_string(Evidence evidence) {
    switch (evidence) {
        case Evidence::static_domain: return "static_domain";
        case Evidence::dynamic_domain: return "dynamic_domain";
        case Evidence::geography: return "geography";
        case Evidence::unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

namespace {

// Most common value with its count; ties resolved to the lexicographically
// smallest value for determinism.
std::pair<std::string, std::size_t> most_common(const std::map<std::string, std::size_t>& counts) {
    std::pair<std::string, std::size_t> best{{}, 0};
    for (const auto& [value, count] : counts) {
        if (count > best.second) best = {value, count};
    }
    return best;
}

} // namespace

std::vector<ClusterLabel> label_clusters(const cluster::ClusterPartition& partition,
                                         const AuxInfo& aux, const Thresholds& thresholds) {
    std::vector<std::vector<std::size_t>> members(partition.k);
    for (std::size_t i = 0; i < partition.ips.size(); ++i)
        members[static_cast<std::size_t>(partition.assignment[i])].push_back(i);

    std::vector<ClusterLabel> labels;
    labels.reserve(partition.k);
    for (std::size_t c = 0; c < partition.k; ++c) {
        ClusterLabel label;
        label.cluster_index = static_cast<int>(c);
        label.ip_count = members[c].size();
        label.label = kUnknownLabel;

        std::map<std::string, std::size_t> static_suffixes, dynamic_suffixes, geos;
        for (std::size_t i : members[c]) {
            auto it = aux.by_ip.find(partition.ips[i]);
            if (it == aux.by_ip.end()) continue;
            const AuxEntry& entry = it->second;
            if (entry.kind == DomainKind::static_domain && !entry.domain.empty())
                static_suffixes[registrable_suffix(entry.domain)] += 1;
            else if (entry.kind == DomainKind::dynamic_domain && !entry.domain.empty())
                dynamic_suffixes[registrable_suffix(entry.domain)] += 1;
            // Geographic label: country when known, otherwise the region.
            const std::string& geo = entry.country.empty() ? entry.region : entry.country;
            if (!geo.empty()) geos[geo] += 1;
        }

        auto [static_top, static_count] = most_common(static_suffixes);
        auto [dynamic_top, dynamic_count] = most_common(dynamic_suffixes);
        auto [geo_top, geo_count] = most_common(geos);
        double size = static_cast<double>(std::max<std::size_t>(label.ip_count, 1));
        if (static_count >= thresholds.min_support_count) {
            label.label = static_top;
            label.evidence = Evidence::static_domain;
            label.support_count = static_count;
        } else if (dynamic_count >= thresholds.min_support_count) {
            label.label = dynamic_top;
            label.evidence = Evidence::dynamic_domain;
            label.support_count = dynamic_count;
        } else if (geo_count > 0 &&
                   static_cast<double>(geo_count) / size >= thresholds.geo_fraction) {
            label.label = geo_top + " Org";
            label.evidence = Evidence::geography;
            label.support_count = geo_count;
        }
        label.support_fraction = label.evidence == Evidence::unlabeled
                                     ? 0.0
                                     : static_cast<double>(label.support_count) / size;
        labels.push_back(std::move(label));
    }
    return labels;
}

} // namespace icstrace::attribution
