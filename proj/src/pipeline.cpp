#include "icstrace/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "icstrace/log.hpp"

namespace icstrace::pipeline {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json config_to_json(const PipelineConfig& c) {
    return json{
        {"input", c.input_path},
        {"truth", c.truth_path},
        {"aux", c.aux_path},
        {"seeds", c.seeds_path},
        {"out", c.out_dir},
        {"features",
         {{"window_length", c.feature.window_length},
          {"stride", c.feature.stride},
          {"scalar_weight", c.feature.scalar_weight},
          {"fcs_weight", c.feature.fcs_weight},
          {"ps_weight", c.feature.ps_weight}}},
        {"clustering",
         {{"init", c.kmeans.init == cluster::InitVariant::literal ? "literal" : "maxmin"},
          {"tolerance", c.kmeans.tolerance},
          {"max_iterations", c.kmeans.max_iterations}}},
        {"k", c.k},
        {"k_range", {c.k_lo, c.k_hi}},
        {"svg", c.svg},
        {"rng_seed", c.rng_seed},
    };
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    c.input_path = j.value("input", "");
    c.truth_path = j.value("truth", "");
    c.aux_path = j.value("aux", "");
    c.seeds_path = j.value("seeds", "");
    c.out_dir = j.value("out", "out");
    if (j.contains("features")) {
        const auto& f = j["features"];
        c.feature.window_length = f.value("window_length", std::size_t{3});
        c.feature.stride = f.value("stride", std::size_t{1});
        c.feature.scalar_weight = f.value("scalar_weight", 1.0);
        c.feature.fcs_weight = f.value("fcs_weight", 1.0);
        c.feature.ps_weight = f.value("ps_weight", 1.0);
    }
    if (j.contains("clustering")) {
        const auto& cl = j["clustering"];
        c.kmeans.init = cl.value("init", "literal") == std::string("maxmin")
                            ? cluster::InitVariant::maxmin
                            : cluster::InitVariant::literal;
        c.kmeans.tolerance = cl.value("tolerance", 1e-9);
        c.kmeans.max_iterations = cl.value("max_iterations", std::size_t{300});
    }
    c.k = j.value("k", 0);
    if (j.contains("k_range") && j["k_range"].is_array() && j["k_range"].size() == 2) {
        c.k_lo = j["k_range"][0].get<int>();
        c.k_hi = j["k_range"][1].get<int>();
    }
    c.svg = j.value("svg", false);
    c.rng_seed = j.value("rng_seed", std::uint64_t{1});
    return c;
}

} // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open " + path.string());
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw Error(errc::invalid_config, "bad JSON in " + path.string());
    return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const PipelineConfig& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io_failure, "cannot open " + path.string());
    out << config_to_json(config).dump(2) << '\n';
}

std::string config_hash(const PipelineConfig& config) {
    std::string dump = config_to_json(config).dump();
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::vector<std::pair<std::string, std::size_t>> count_rows(const ingest::ValidityCounts& c) {
    return {{"Request", c.requests},         {"Valid request", c.valid_requests},
            {"Session", c.sessions},         {"Valid session", c.valid_sessions},
            {"IP address", c.ips},           {"Valid IP address", c.valid_ips}};
}

// ---------------------------------------------------------------------------
// Writers

namespace {

class OutputWriter {
public:
    OutputWriter(const std::filesystem::path& dir, std::string hash,
                 std::vector<std::string>& manifest)
        : dir_(dir), hash_(std::move(hash)), manifest_(manifest) {}

    std::ofstream open(const std::string& name, bool with_hash_comment = true) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw Error(errc::io_failure, "cannot open " + (dir_ / name).string());
        if (with_hash_comment) out << "# config_hash=" << hash_ << '\n';
        manifest_.push_back(name);
        return out;
    }

    const std::string& hash() const { return hash_; }

private:
    std::filesystem::path dir_;
    std::string hash_;
    std::vector<std::string>& manifest_;
};

void write_counts(OutputWriter& w, const ingest::ValidityCounts& counts) {
    auto out = w.open("counts.csv");
    out << "item,count\n";
    for (const auto& [name, value] : count_rows(counts)) out << name << ',' << value << '\n';
}

void write_features(OutputWriter& w, const features::CorpusFeatures& feats) {
    auto out = w.open("features.csv");
    out << "ip,mcfc,mcp";
    for (std::size_t i = 0; i < feats.fcs_vocab.size(); ++i) out << ",f_" << i;
    for (std::size_t i = 0; i < feats.ps_vocab.size(); ++i) out << ",p_" << i;
    out << '\n';
    for (std::size_t r = 0; r < feats.ips.size(); ++r) {
        out << feats.ips[r];
        for (double v : feats.vectors[r].assembled) out << ',' << fmt_double(v);
        out << '\n';
    }
}

void write_vocab(OutputWriter& w, const std::string& name, const features::Vocabulary& vocab) {
    auto out = w.open(name);
    for (std::size_t i = 0; i < vocab.entries.size(); ++i)
        out << i << '\t' << vocab.entries[i] << '\n';
}

void write_partition(OutputWriter& w, const cluster::ClusterPartition& partition) {
    auto out = w.open("partition.csv");
    out << "ip,cluster\n";
    for (std::size_t i = 0; i < partition.ips.size(); ++i)
        out << partition.ips[i] << ',' << partition.assignment[i] << '\n';
}

void write_means(OutputWriter& w, const cluster::ClusterPartition& partition) {
    auto out = w.open("means.csv");
    out << "cluster";
    std::size_t dim = partition.means.empty() ? 0 : partition.means[0].size();
    for (std::size_t d = 0; d < dim; ++d) out << ",c" << d;
    out << '\n';
    for (std::size_t c = 0; c < partition.means.size(); ++c) {
        out << c;
        for (double v : partition.means[c]) out << ',' << fmt_double(v);
        out << '\n';
    }
}

void write_curve(OutputWriter& w, const metrics::MetricCurve& curve) {
    std::string name = curve.metric_name;
    std::replace(name.begin(), name.end(), ':', '_');
    auto out = w.open("curve_" + name + ".csv");
    out << "k,score\n";
    for (std::size_t i = 0; i < curve.k_values.size(); ++i)
        out << curve.k_values[i] << ',' << fmt_double(curve.scores[i]) << '\n';
}

void write_labels(OutputWriter& w, const std::vector<attribution::ClusterLabel>& labels) {
    auto out = w.open("labels.csv");
    out << "cluster,ip_count,label,evidence,support_count,support_fraction\n";
    for (const auto& label : labels) {
        out << label.cluster_index << ',' << label.ip_count << ',' << label.label << ','
            << attribution::to_string(label.evidence) << ',' << label.support_count << ','
            << fmt_double(label.support_fraction) << '\n';
    }
}

void write_curve_svg(OutputWriter& w, const metrics::MetricCurve& curve) {
    std::string name = curve.metric_name;
    std::replace(name.begin(), name.end(), ':', '_');
    auto out = w.open("curve_" + name + ".svg", /*with_hash_comment=*/false);

    const double width = 640, height = 360;
    const double ml = 60, mr = 20, mt = 32, mb = 40;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double s : curve.scores) {
        if (!std::isfinite(s)) continue;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (!std::isfinite(lo)) { lo = 0; hi = 1; }
    if (hi - lo < 1e-12) { hi = lo + 1; }
    double k_lo = curve.k_values.front(), k_hi = curve.k_values.back();
    if (k_hi - k_lo < 1) k_hi = k_lo + 1;
    auto x_of = [&](double k) { return ml + (k - k_lo) / (k_hi - k_lo) * (width - ml - mr); };
    auto y_of = [&](double s) { return height - mb - (s - lo) / (hi - lo) * (height - mt - mb); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<!-- config_hash=" << w.hash() << " -->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << ml << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
        << curve.metric_name << " vs K</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml << "\" y=\"" << height - mb + 16
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << curve.k_values.front()
        << "</text>\n";
    out << "<text x=\"" << width - mr - 16 << "\" y=\"" << height - mb + 16
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << curve.k_values.back()
        << "</text>\n";
    out << "<text x=\"4\" y=\"" << y_of(lo) << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt_double(lo).substr(0, 8) << "</text>\n";
    out << "<text x=\"4\" y=\"" << y_of(hi) << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt_double(hi).substr(0, 8) << "</text>\n";
    out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < curve.k_values.size(); ++i) {
        if (!std::isfinite(curve.scores[i])) continue;
        if (!first) out << ' ';
        out << fmt_double(x_of(curve.k_values[i])) << ',' << fmt_double(y_of(curve.scores[i]));
        first = false;
    }
    out << "\"/>\n</svg>\n";
}

} // namespace

// ---------------------------------------------------------------------------
// Orchestration

namespace {

template <typename F>
auto run_stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

cluster::SeedSet load_seed_set(const std::string& path, const cluster::Dataset& data) {
    cluster::SeedSet seeds;
    if (path.empty()) return seeds;
    std::set<std::string> dataset_ips(data.ips.begin(), data.ips.end());
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& [ip, org] : ingest::load_ip_org_csv(path)) {
        if (!dataset_ips.count(ip)) {
            log_warn("seed ip " + ip + " is not a valid dataset ip, dropped");
            continue;
        }
        groups[org].push_back(ip);
    }
    for (auto& [org, ips] : groups) seeds.groups.push_back({org, std::move(ips)});
    return seeds;
}

} // namespace

EvaluationReport run_pipeline(const PipelineConfig& config) {
    EvaluationReport report;
    if (config.input_path.empty())
        throw StageError("config", "input session log is required");
    bool sweep_mode = config.k <= 0;
    if (sweep_mode && (config.k_lo <= 0 || config.k_hi < config.k_lo))
        throw StageError("config", "need k or a valid k range");

    std::filesystem::create_directories(config.out_dir);
    OutputWriter writer(config.out_dir, config_hash(config), report.written_files);

    // ingest
    auto loaded = run_stage("ingest", [&] { return ingest::load_session_log(config.input_path); });
    report.malformed_lines = loaded.malformed_lines.size();
    if (report.malformed_lines > 0)
        log_warn(std::to_string(report.malformed_lines) + " malformed log lines skipped");
    report.counts = ingest::count_validity(loaded.sessions);
    write_counts(writer, report.counts);

    auto profiles =
        run_stage("ingest", [&] { return ingest::assemble_ip_profiles(loaded.sessions); });
    std::map<std::string, std::string> truth;
    if (!config.truth_path.empty()) {
        for (auto& [ip, org] : ingest::load_ip_org_csv(config.truth_path)) truth[ip] = org;
        for (auto& profile : profiles) {
            auto it = truth.find(profile.source_ip);
            if (it != truth.end()) profile.organization_label = it->second;
        }
    }

    // features
    auto feats = run_stage("features",
                           [&] { return features::compute_corpus_features(profiles, config.feature); });
    write_features(writer, feats);
    write_vocab(writer, "vocab_fcs.txt", feats.fcs_vocab);
    write_vocab(writer, "vocab_ps.txt", feats.ps_vocab);
    log_info("features: " + std::to_string(feats.ips.size()) + " valid ips, " +
             std::to_string(feats.fcs_vocab.size()) + " fcs windows, " +
             std::to_string(feats.ps_vocab.size()) + " ps windows");

    cluster::Dataset data;
    data.ips = feats.ips;
    data.points.reserve(feats.vectors.size());
    for (const auto& fv : feats.vectors) data.points.push_back(fv.assembled);

    auto seeds =
        run_stage("clustering", [&] { return load_seed_set(config.seeds_path, data); });
    report.seed_groups = seeds.l();

    // clustering (single k or sweep)
    cluster::ClusterPartition partition;
    if (sweep_mode) {
        auto sweep = run_stage("clustering", [&] {
            metrics::SweepOptions opts;
            opts.kmeans = config.kmeans;
            return metrics::k_sweep(data, seeds, config.k_lo, config.k_hi, truth, opts);
        });
        for (const auto& curve : sweep.curves) {
            write_curve(writer, curve);
            if (config.svg) write_curve_svg(writer, curve);
        }
        int best = sweep.best_silhouette_index();
        if (best < 0) best = 0;  // no finite silhouette anywhere: fall back to the lowest k
        report.chosen_k = sweep.k_values[static_cast<std::size_t>(best)];
        partition = sweep.partitions[static_cast<std::size_t>(best)];
        log_info("sweep: silhouette-optimal k = " + std::to_string(report.chosen_k));
    } else {
        partition = run_stage("clustering", [&] {
            return cluster::partial_seeded_kmeans(data, seeds,
                                                  static_cast<std::size_t>(config.k),
                                                  config.kmeans);
        });
        report.chosen_k = config.k;
    }
    write_partition(writer, partition);
    write_means(writer, partition);
    report.iterations = partition.iterations;
    report.converged = partition.converged;
    report.sse = partition.sse;

    // metrics at the chosen k
    run_stage("metrics", [&] {
        try {
            report.scores["silhouette"] = metrics::silhouette_score(data.points, partition.assignment);
        } catch (const Error&) {}
        try {
            report.scores["calinski_harabasz"] =
                metrics::calinski_harabasz_score(data.points, partition.assignment);
        } catch (const Error&) {}
        if (!truth.empty()) {
            std::vector<std::string> orgs;
            std::vector<int> pred;
            std::map<std::string, std::vector<std::string>> org_ips;
            for (std::size_t i = 0; i < data.size(); ++i) {
                auto it = truth.find(data.ips[i]);
                if (it == truth.end()) continue;
                orgs.push_back(it->second);
                pred.push_back(partition.assignment[i]);
                org_ips[it->second].push_back(data.ips[i]);
            }
            if (orgs.size() >= 2) {
                auto labels_true = metrics::encode_labels(orgs);
                report.scores["ari"] = metrics::adjusted_rand_index(labels_true, pred);
                report.scores["ami"] = metrics::adjusted_mutual_information(labels_true, pred);
                std::set<int> clusters(pred.begin(), pred.end());
                report.scores["known_org_clusters"] = static_cast<double>(clusters.size());
                for (const auto& [org, ips] : org_ips)
                    report.scores["recall:" + org] = metrics::recall_rate(partition, ips);
            }
        }
        return 0;
    });
    {
        auto out = writer.open("metrics.json", /*with_hash_comment=*/false);
        json j{{"config_hash", writer.hash()}, {"k", report.chosen_k}, {"scores", json::object()}};
        for (const auto& [name, value] : report.scores)
            j["scores"][name] = std::isnan(value) ? json() : json(value);
        out << j.dump(2) << '\n';
    }

    // attribution
    if (!config.aux_path.empty()) {
        auto aux = run_stage("attribution",
                             [&] { return attribution::load_auxiliary_map(config.aux_path); });
        if (aux.malformed_rows > 0)
            log_warn(std::to_string(aux.malformed_rows) + " malformed aux rows skipped");
        report.labels = attribution::label_clusters(partition, aux);
        write_labels(writer, report.labels);
    }

    // run metadata
    {
        auto out = writer.open("run_meta.json", /*with_hash_comment=*/false);
        json j{{"config_hash", writer.hash()},
               {"config", config_to_json(config)},
               {"k", report.chosen_k},
               {"seed_groups", report.seed_groups},
               {"iterations", report.iterations},
               {"converged", report.converged},
               {"sse", report.sse},
               {"malformed_lines", report.malformed_lines},
               {"counts", json::object()},
               {"files", report.written_files}};
        for (const auto& [name, value] : count_rows(report.counts)) j["counts"][name] = value;
        out << j.dump(2) << '\n';
    }
    return report;
}

} // namespace icstrace::pipeline
