#include "icstrace/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "icstrace/hex.hpp"
#include "icstrace/rng.hpp"

namespace icstrace::ingest {

using nlohmann::json;

bool SessionRecord::valid() const { return valid_request_count() > 0; }

std::size_t SessionRecord::valid_request_count() const {
    return static_cast<std::size_t>(
        std::count_if(requests.begin(), requests.end(),
                      [](const RequestRecord& r) { return r.validity.valid; }));
}

bool IpProfile::valid() const {
    return std::any_of(sessions.begin(), sessions.end(),
                       [](const SessionRecord& s) { return s.valid(); });
}

// ---------------------------------------------------------------------------
// Session log I/O

namespace {

std::optional<SessionRecord> parse_session_line(const std::string& line) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    if (!j.contains("session_id") || !j["session_id"].is_string()) return std::nullopt;
    if (!j.contains("source_ip") || !j["source_ip"].is_string()) return std::nullopt;
    if (!j.contains("requests") || !j["requests"].is_array()) return std::nullopt;

    SessionRecord session;
    session.session_id = j["session_id"].get<std::string>();
    session.source_ip = j["source_ip"].get<std::string>();
    if (j.contains("honeypot_id") && j["honeypot_id"].is_string())
        session.honeypot_id = j["honeypot_id"].get<std::string>();
    for (const auto& rj : j["requests"]) {
        if (!rj.is_object() || !rj.contains("ts") || !rj["ts"].is_number_integer() ||
            !rj.contains("payload_hex") || !rj["payload_hex"].is_string())
            return std::nullopt;
        auto bytes = hex_decode(rj["payload_hex"].get<std::string>());
        if (!bytes) return std::nullopt;
        RequestRecord record;
        record.timestamp_ms = rj["ts"].get<std::int64_t>();
        record.payload = std::move(*bytes);
        record.validity = s7::classify_payload(record.payload);
        session.requests.push_back(std::move(record));
    }
    // Enforce the chronological-order invariant; stable to keep ties in file order.
    std::stable_sort(session.requests.begin(), session.requests.end(),
                     [](const RequestRecord& a, const RequestRecord& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                     });
    return session;
}

} // namespace

LoadResult load_session_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open " + path.string());
    LoadResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto session = parse_session_line(line);
        if (session) {
            result.sessions.push_back(std::move(*session));
        } else {
            result.malformed_lines.push_back(line_no);
        }
    }
    if (in.bad()) throw Error(errc::io_failure, "read error on " + path.string());
    return result;
}

void write_session_log(const std::filesystem::path& path,
                       const std::vector<SessionRecord>& sessions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io_failure, "cannot open " + path.string());
    for (const auto& session : sessions) {
        json requests = json::array();
        for (const auto& r : session.requests) {
            requests.push_back({{"ts", r.timestamp_ms}, {"payload_hex", hex_encode(r.payload)}});
        }
        json j{{"session_id", session.session_id},
               {"source_ip", session.source_ip},
               {"honeypot_id", session.honeypot_id},
               {"requests", std::move(requests)}};
        out << j.dump() << '\n';
    }
    if (!out) throw Error(errc::io_failure, "write error on " + path.string());
}

std::vector<std::pair<std::string, std::string>> load_ip_org_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open " + path.string());
    std::vector<std::pair<std::string, std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (first && line == "ip,organization") {
            first = false;
            continue;
        }
        first = false;
        auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        rows.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    return rows;
}

void write_ip_org_csv(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io_failure, "cannot open " + path.string());
    out << "ip,organization\n";
    for (const auto& [ip, org] : rows) out << ip << ',' << org << '\n';
}

// ---------------------------------------------------------------------------
// Profiles and counters

std::vector<IpProfile> assemble_ip_profiles(const std::vector<SessionRecord>& sessions) {
    std::map<std::string, IpProfile> by_ip;
    for (const auto& session : sessions) {
        auto& profile = by_ip[session.source_ip];
        profile.source_ip = session.source_ip;
        profile.sessions.push_back(session);
    }
    std::vector<IpProfile> profiles;
    profiles.reserve(by_ip.size());
    for (auto& [ip, profile] : by_ip) {
        std::sort(profile.sessions.begin(), profile.sessions.end(),
                  [](const SessionRecord& a, const SessionRecord& b) {
                      return a.session_id < b.session_id;
                  });
        profiles.push_back(std::move(profile));
    }
    return profiles;
}

ValidityCounts count_validity(const std::vector<SessionRecord>& sessions) {
    ValidityCounts counts;
    std::map<std::string, bool> ip_valid;
    for (const auto& session : sessions) {
        counts.sessions += 1;
        counts.requests += session.requests.size();
        counts.valid_requests += session.valid_request_count();
        bool v = session.valid();
        if (v) counts.valid_sessions += 1;
        ip_valid[session.source_ip] = ip_valid[session.source_ip] || v;
    }
    counts.ips = ip_valid.size();
    counts.valid_ips = static_cast<std::size_t>(
        std::count_if(ip_valid.begin(), ip_valid.end(), [](auto& kv) { return kv.second; }));
    return counts;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

void validate_config(const SynthConfig& config) {
    if (config.organizations.empty())
        throw Error(errc::invalid_config, "no organizations");
    if (config.ips_per_org == 0) throw Error(errc::invalid_config, "ips_per_org must be positive");
    if (config.sessions_per_ip_min == 0 || config.sessions_per_ip_min > config.sessions_per_ip_max)
        throw Error(errc::invalid_config, "bad sessions_per_ip range");
    if (config.noise_rate < 0.0 || config.noise_rate > 1.0)
        throw Error(errc::invalid_config, "noise_rate outside [0,1]");
    for (const auto& org : config.organizations) {
        if (org.attack_scripts.empty())
            throw Error(errc::invalid_config, "organization " + org.name + " has no scripts");
        double total = 0;
        for (const auto& ws : org.attack_scripts) {
            if (ws.weight < 0) throw Error(errc::invalid_config, "negative script weight");
            if (ws.script.requests.empty())
                throw Error(errc::invalid_config, "script " + ws.script.name + " is empty");
            total += ws.weight;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw Error(errc::invalid_config,
                        "script weights of " + org.name + " sum to " + std::to_string(total));
    }
}

const AttackScript& pick_script(const SynthOrganization& org, Rng& rng) {
    double roll = rng.unit();
    double acc = 0;
    for (const auto& ws : org.attack_scripts) {
        acc += ws.weight;
        if (roll < acc) return ws.script;
    }
    return org.attack_scripts.back().script;
}

// Every corruption variant yields a payload that classify_payload rejects.
s7::Bytes corrupt_payload(const s7::Bytes& payload, Rng& rng) {
    s7::Bytes bytes = payload;
    switch (rng.bounded(4)) {
        case 0:
            bytes[0] = 0x04;  // bad TPKT version
            break;
        case 1:
            bytes[7] = 0x31;  // bad S7 magic
            break;
        case 2:
            bytes.resize(3);  // truncated below the TPKT header
            break;
        default: {
            bytes.assign(4 + rng.bounded(16), 0);
            bytes[0] = 0xDE;  // not a TPKT version byte
            for (std::size_t i = 1; i < bytes.size(); ++i)
                bytes[i] = static_cast<std::uint8_t>(rng.bounded(256));
            break;
        }
    }
    return bytes;
}

} // namespace

SynthCorpus generate_synthetic_corpus(const SynthConfig& config) {
    validate_config(config);
    Rng rng(config.rng_seed);
    SynthCorpus corpus;
    const std::int64_t base_ts = 1577836800000;  // 2020-01-01T00:00:00Z
    std::size_t ip_serial = 0;

    for (std::size_t org_idx = 0; org_idx < config.organizations.size(); ++org_idx) {
        const auto& org = config.organizations[org_idx];
        for (std::size_t i = 0; i < config.ips_per_org; ++i) {
            ++ip_serial;
            char ip_buf[32];
            std::snprintf(ip_buf, sizeof ip_buf, "10.%zu.%zu.%zu", org_idx + 1, i / 250,
                          1 + i % 250);
            std::string ip = ip_buf;
            corpus.truth.emplace_back(ip, org.name);

            const AttackScript& script = pick_script(org, rng);
            std::size_t n_sessions =
                rng.range(config.sessions_per_ip_min, config.sessions_per_ip_max);
            std::int64_t ts = base_ts + static_cast<std::int64_t>(rng.bounded(86400000));
            for (std::size_t s = 0; s < n_sessions; ++s) {
                SessionRecord session;
                char sid[32];
                std::snprintf(sid, sizeof sid, "s%06zu-%03zu", ip_serial, s);
                session.session_id = sid;
                session.source_ip = ip;
                char hp[8];
                std::snprintf(hp, sizeof hp, "hp%02llu",
                              static_cast<unsigned long long>(1 + rng.bounded(13)));
                session.honeypot_id = hp;
                ts += 60000 + static_cast<std::int64_t>(rng.bounded(3600000));
                for (const auto& req : script.requests) {
                    RequestRecord record;
                    record.timestamp_ms = ts;
                    ts += 20 + static_cast<std::int64_t>(rng.bounded(2000));
                    auto payload = s7::serialize_request(req.token, req.params);
                    if (config.noise_rate > 0 && rng.unit() < config.noise_rate)
                        payload = corrupt_payload(payload, rng);
                    record.payload = std::move(payload);
                    record.validity = s7::classify_payload(record.payload);
                    session.requests.push_back(std::move(record));
                }
                corpus.sessions.push_back(std::move(session));
            }
        }
    }
    std::sort(corpus.sessions.begin(), corpus.sessions.end(),
              [](const SessionRecord& a, const SessionRecord& b) {
                  return std::tie(a.source_ip, a.session_id) < std::tie(b.source_ip, b.session_id);
              });
    std::sort(corpus.truth.begin(), corpus.truth.end());
    return corpus;
}

// ---------------------------------------------------------------------------
// Demo scripts

namespace {

ScriptRequest setup_request() {
    return {s7::FunctionToken{0xf0, {}, {}, true},
            {s7::param_token("PDUREF:00"), s7::param_token("MAXAMQ_CALLER:0001"),
             s7::param_token("MAXAMQ_CALLEE:0001"), s7::param_token("PDU_SIZE:01e0")}};
}

ScriptRequest system_request(std::uint8_t group, std::uint8_t sub,
                             std::vector<s7::ParamToken> detail = {}) {
    std::vector<s7::ParamToken> params{s7::param_token("GRP:" + std::to_string(group)),
                                       s7::param_token("SUB:" + std::to_string(sub))};
    params.insert(params.end(), detail.begin(), detail.end());
    return {s7::FunctionToken{0x00, group, sub, true}, std::move(params)};
}

} // namespace

std::vector<AttackScript> demo_scripts() {
    std::vector<AttackScript> scripts;

    scripts.push_back({"recon_szl",
                       {setup_request(),
                        system_request(4, 1, {s7::param_token("SZL:0011")}),
                        system_request(4, 1, {s7::param_token("SZL:001c")})}});

    scripts.push_back({"survey_clock",
                       {setup_request(),
                        system_request(4, 1, {s7::param_token("SZL:0011")}),
                        system_request(7, 1),
                        system_request(4, 1, {s7::param_token("SZL:0131")})}});

    scripts.push_back({"block_walk",
                       {setup_request(),
                        system_request(3, 1),
                        system_request(3, 2, {s7::param_token("BLKTYPE:0B")}),
                        system_request(3, 3, {s7::param_token("BLKTYPE:0B")}),
                        system_request(7, 1)}});

    scripts.push_back({"data_read",
                       {setup_request(),
                        {s7::FunctionToken{0x04, {}, {}, true},
                         {s7::param_token("XPORT:02"), s7::param_token("AREA:84")}},
                        {s7::FunctionToken{0x04, {}, {}, true},
                         {s7::param_token("XPORT:02"), s7::param_token("AREA:83")}},
                        {s7::FunctionToken{0x04, {}, {}, true},
                         {s7::param_token("XPORT:01"), s7::param_token("AREA:81")}}}});

    scripts.push_back({"control_cycle",
                       {setup_request(),
                        {s7::FunctionToken{0x29, {}, {}, true}, {s7::param_token("PI:P_PROGRAM")}},
                        {s7::FunctionToken{0x28, {}, {}, true},
                         {s7::param_token("ARG:C"), s7::param_token("PI:P_PROGRAM")}}}});

    scripts.push_back({"password_clock",
                       {setup_request(),
                        system_request(5, 1, {s7::param_token("PWD:1")}),
                        system_request(7, 2, {s7::param_token("CLK:01")}),
                        system_request(7, 4)}});

    return scripts;
}

SynthConfig make_demo_config(std::size_t org_count, std::size_t ips_per_org,
                             std::size_t sessions_min, std::size_t sessions_max,
                             double noise_rate, std::uint64_t rng_seed) {
    if (org_count == 0) throw Error(errc::invalid_config, "need at least one organization");
    auto scripts = demo_scripts();
    SynthConfig config;
    config.ips_per_org = ips_per_org;
    config.sessions_per_ip_min = sessions_min;
    config.sessions_per_ip_max = sessions_max;
    config.noise_rate = noise_rate;
    config.rng_seed = rng_seed;
    for (std::size_t i = 0; i < org_count; ++i) {
        SynthOrganization org;
        char name[32];
        std::snprintf(name, sizeof name, "org%02zu", i + 1);
        org.name = name;
        bool multi = (i + 1 == org_count) && org_count >= 2;
        if (multi) {
            // The last organization mixes three attack patterns.
            for (std::size_t s = 3; s < 6; ++s)
                org.attack_scripts.push_back({scripts[s % scripts.size()], 1.0 / 3.0});
        } else {
            org.attack_scripts.push_back({scripts[i % scripts.size()], 1.0});
        }
        config.organizations.push_back(std::move(org));
    }
    return config;
}

} // namespace icstrace::ingest
