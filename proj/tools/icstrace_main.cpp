// icstrace: S7comm attack-traffic attribution pipeline.
//
// Subcommands:
//   synth   generate a labeled synthetic corpus (session log + sidecars)
//   run     run the full pipeline at a fixed K or over a K range
//   sweep   run the pipeline over a K range (alias for run with a range)
//   report  print Table-style validity counters for a session log
//
// Set ICSTRACE_LOG=debug|info|warn|error for verbosity.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "icstrace/attribution.hpp"
#include "icstrace/ingest.hpp"
#include "icstrace/pipeline.hpp"
#include "icstrace/rng.hpp"

namespace {

using namespace icstrace;

struct KSpec {
    int k = 0;
    int lo = 0, hi = 0;
};

// "--k 20" or "--k 2..30"
bool parse_k_spec(const std::string& text, KSpec& out) {
    auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            out.k = std::stoi(text);
            return out.k > 0;
        }
        out.lo = std::stoi(text.substr(0, dots));
        out.hi = std::stoi(text.substr(dots + 2));
        return out.lo > 0 && out.hi >= out.lo;
    } catch (const std::exception&) {
        return false;
    }
}

int fail(const std::string& stage, const std::string& message) {
    nlohmann::json j{{"error", message}, {"stage", stage}};
    std::cerr << j.dump() << '\n';
    return 1;
}

void print_counts(const ingest::ValidityCounts& counts) {
    std::cout << "item,count\n";
    for (const auto& [name, value] : pipeline::count_rows(counts))
        std::cout << name << ',' << value << '\n';
}

int cmd_synth(const std::string& out_dir, std::size_t orgs, std::size_t ips_per_org,
              std::size_t sessions_min, std::size_t sessions_max, double noise,
              std::uint64_t seed) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto config = ingest::make_demo_config(orgs, ips_per_org, sessions_min, sessions_max, noise, seed);
    auto corpus = ingest::generate_synthetic_corpus(config);
    ingest::write_session_log(fs::path(out_dir) / "sessions.jsonl", corpus.sessions);
    ingest::write_ip_org_csv(fs::path(out_dir) / "truth.csv", corpus.truth);

    // Seeds: a fixed fraction of the first two organizations' IPs.
    std::vector<std::pair<std::string, std::string>> seeds;
    std::map<std::string, std::vector<std::string>> by_org;
    for (const auto& [ip, org] : corpus.truth) by_org[org].push_back(ip);
    std::size_t seeded_orgs = 0;
    for (const auto& org : config.organizations) {
        if (seeded_orgs == 2) break;
        const auto& ips = by_org[org.name];
        std::size_t take = std::max<std::size_t>(1, ips.size() * 2 / 5);
        for (std::size_t i = 0; i < take; ++i) seeds.emplace_back(ips[i], org.name);
        ++seeded_orgs;
    }
    ingest::write_ip_org_csv(fs::path(out_dir) / "seeds.csv", seeds);

    // Auxiliary map: per-organization static domains, a dynamic pool, and a
    // rotating country; coverage is partial, as reverse DNS would be.
    static const char* countries[] = {"China", "United States", "Germany", "Russia",
                                      "Japan", "Singapore", "Korea"};
    attribution::AuxInfo aux;
    Rng rng(seed ^ 0xa5a5a5a5ull);
    std::size_t org_idx = 0;
    for (const auto& org : config.organizations) {
        std::size_t host_n = 0;
        for (const auto& ip : by_org[org.name]) {
            attribution::AuxEntry entry;
            double roll = rng.unit();
            if (roll < 0.30) {
                entry.domain = "h" + std::to_string(++host_n) + ".org" +
                               std::to_string(org_idx + 1) + ".test";
                entry.kind = attribution::DomainKind::static_domain;
            } else if (roll < 0.40) {
                entry.domain = "d" + std::to_string(++host_n) + ".pool" +
                               std::to_string(org_idx + 1) + "-dyn.test";
                entry.kind = attribution::DomainKind::dynamic_domain;
            }
            if (rng.unit() < 0.8)
                entry.country = countries[org_idx % (sizeof countries / sizeof *countries)];
            if (entry.kind != attribution::DomainKind::none || !entry.country.empty())
                aux.by_ip.emplace(ip, std::move(entry));
        }
        ++org_idx;
    }
    attribution::write_auxiliary_map(fs::path(out_dir) / "aux.csv", aux);

    // A ready-to-run pipeline config pointing at the generated files.
    pipeline::PipelineConfig pc;
    pc.input_path = (fs::path(out_dir) / "sessions.jsonl").string();
    pc.truth_path = (fs::path(out_dir) / "truth.csv").string();
    pc.seeds_path = (fs::path(out_dir) / "seeds.csv").string();
    pc.aux_path = (fs::path(out_dir) / "aux.csv").string();
    pc.out_dir = (fs::path(out_dir) / "out").string();
    pc.k_lo = 2;
    pc.k_hi = 30;
    pc.rng_seed = seed;
    pipeline::save_config(fs::path(out_dir) / "run.json", pc);

    auto counts = ingest::count_validity(corpus.sessions);
    std::cout << "wrote " << out_dir << "/sessions.jsonl truth.csv seeds.csv aux.csv run.json\n";
    print_counts(counts);
    return 0;
}

int run_and_report(const pipeline::PipelineConfig& config) {
    auto report = pipeline::run_pipeline(config);
    print_counts(report.counts);
    std::cout << "k," << report.chosen_k << '\n';
    std::cout << "iterations," << report.iterations << '\n';
    std::cout << "converged," << (report.converged ? "true" : "false") << '\n';
    for (const auto& [name, value] : report.scores) std::cout << name << ',' << value << '\n';
    for (const auto& label : report.labels) {
        std::cout << "cluster_" << label.cluster_index << ',' << label.label << ','
                  << attribution::to_string(label.evidence) << ',' << label.support_count << '\n';
    }
    std::cout << "out," << config.out_dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"S7comm attack-pattern clustering and IP attribution pipeline"};
    app.require_subcommand(1);

    // ---- synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    std::string synth_out = "corpus";
    std::size_t orgs = 4, ips_per_org = 25, sessions_min = 3, sessions_max = 8;
    double noise = 0.0;
    std::uint64_t seed = 1;
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--orgs", orgs, "number of organizations (last one mixes 3 scripts)");
    synth->add_option("--ips-per-org", ips_per_org, "IP addresses per organization");
    synth->add_option("--sessions-min", sessions_min, "minimum sessions per IP");
    synth->add_option("--sessions-max", sessions_max, "maximum sessions per IP");
    synth->add_option("--noise", noise, "probability of a corrupted request");
    synth->add_option("--rng-seed,--seed", seed, "generator seed");

    // ---- run / sweep
    pipeline::PipelineConfig base;
    std::string config_path, k_text, init_text;
    auto add_pipeline_flags = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "pipeline config JSON");
        cmd->add_option("--input", base.input_path, "session log (jsonl)");
        cmd->add_option("--truth", base.truth_path, "ground-truth csv ip,organization");
        cmd->add_option("--aux", base.aux_path, "auxiliary map csv");
        cmd->add_option("--seeds", base.seeds_path, "seed csv ip,organization");
        cmd->add_option("--k", k_text, "cluster count N or range A..B");
        cmd->add_option("--init", init_text, "initialization variant: literal|maxmin")
            ->check(CLI::IsMember({"literal", "maxmin"}));
        cmd->add_option("--out", base.out_dir, "output directory");
        cmd->add_flag("--svg", base.svg, "emit static SVG curve plots");
        cmd->add_option("--rng-seed", base.rng_seed, "seed recorded in run metadata");
    };
    auto* run = app.add_subcommand("run", "run the full pipeline");
    add_pipeline_flags(run);
    auto* sweep = app.add_subcommand("sweep", "run the pipeline over a K range");
    add_pipeline_flags(sweep);

    // ---- report
    auto* report_cmd = app.add_subcommand("report", "print validity counters for a session log");
    std::string report_input;
    report_cmd->add_option("--input", report_input, "session log (jsonl)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(synth_out, orgs, ips_per_org, sessions_min, sessions_max, noise, seed);

        if (report_cmd->parsed()) {
            auto loaded = ingest::load_session_log(report_input);
            if (!loaded.malformed_lines.empty())
                std::cerr << "skipped " << loaded.malformed_lines.size() << " malformed lines\n";
            print_counts(ingest::count_validity(loaded.sessions));
            return 0;
        }

        CLI::App* cmd = run->parsed() ? run : sweep;
        pipeline::PipelineConfig config;
        if (!config_path.empty()) config = pipeline::load_config(config_path);
        // Flags win over the config file.
        auto given = [&](const char* name) { return cmd->count(name) > 0; };
        if (given("--input")) config.input_path = base.input_path;
        if (given("--truth")) config.truth_path = base.truth_path;
        if (given("--aux")) config.aux_path = base.aux_path;
        if (given("--seeds")) config.seeds_path = base.seeds_path;
        if (given("--out")) config.out_dir = base.out_dir;
        if (given("--svg")) config.svg = base.svg;
        if (given("--rng-seed")) config.rng_seed = base.rng_seed;
        if (given("--init"))
            config.kmeans.init = init_text == "maxmin" ? cluster::InitVariant::maxmin
                                                       : cluster::InitVariant::literal;
        if (given("--k")) {
            KSpec spec;
            if (!parse_k_spec(k_text, spec)) return fail("config", "bad --k value: " + k_text);
            config.k = spec.k;
            config.k_lo = spec.lo;
            config.k_hi = spec.hi;
        }
        if (sweep->parsed() && config.k_lo <= 0)
            return fail("config", "sweep needs --k A..B (or a config k_range)");
        if (sweep->parsed()) config.k = 0;
        return run_and_report(config);
    } catch (const pipeline::StageError& e) {
        return fail(e.stage, e.what());
    } catch (const std::exception& e) {
        return fail("cli", e.what());
    }
}
