#include "senmfk/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

#include "senmfk/analyze.hpp"
#include "senmfk/errors.hpp"
#include "senmfk/factorize.hpp"
#include "senmfk/hash.hpp"
#include "senmfk/ingest.hpp"
#include "senmfk/matrices.hpp"
#include "senmfk/model_select.hpp"
#include "senmfk/textprep.hpp"
#include "senmfk/tsne.hpp"

namespace senmfk {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
    filter.validate();
    if (phrase_min_count < 1) throw ConfigError("phrase_min_count must be >= 1");
    if (phrase_passes != 1 && phrase_passes != 2) throw ConfigError("phrase_passes must be 1 or 2");
    if (min_df < 1) throw ConfigError("min_df must be >= 1");
    if (max_df_fraction <= 0.0 || max_df_fraction > 1.0) {
        throw ConfigError("max_df_fraction must lie in (0, 1]");
    }
    if (window < 1) throw ConfigError("window must be >= 1");
    if (shift < 1.0) throw ConfigError("shift must be >= 1");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (k_min < 2 || k_max < k_min) throw ConfigError("need 2 <= k_min <= k_max");
    if (n_perturbations < 2) throw ConfigError("n_perturbations must be >= 2");
    if (noise_epsilon <= 0.0 || noise_epsilon >= 1.0) {
        throw ConfigError("noise_epsilon must lie in (0, 1)");
    }
    if (stability_threshold < -1.0 || stability_threshold > 1.0) {
        throw ConfigError("stability_threshold must lie in [-1, 1]");
    }
    if (screen_max_iter < 1 || max_iter < 1) throw ConfigError("iteration caps must be >= 1");
    if (screen_tol <= 0.0 || tol <= 0.0) throw ConfigError("tolerances must be > 0");
    if (top_n < 1) throw ConfigError("top_n must be >= 1");
    if (cluster_min < 2 || cluster_max < cluster_min) {
        throw ConfigError("need 2 <= cluster_min <= cluster_max");
    }
    if (cluster_restarts < 1) throw ConfigError("cluster_restarts must be >= 1");
    if (silhouette_sample_cap < 2) throw ConfigError("silhouette_sample_cap must be >= 2");
    if (perplexity <= 0.0) throw ConfigError("perplexity must be > 0");
    if (tsne_iterations < 1) throw ConfigError("tsne_iterations must be >= 1");
    if (n_workers < 0) throw ConfigError("n_workers must be >= 0");
}

namespace {

json config_to_json(const RunConfig& c) {
    json j;
    j["input_path"] = c.input_path;
    j["required_category"] = c.filter.required_category;
    j["require_doi"] = c.filter.require_doi;
    j["year_min"] = c.filter.year_min;
    j["year_max"] = c.filter.year_max;
    j["stopwords_path"] = c.stopwords_path;
    j["phrase_min_count"] = c.phrase_min_count;
    j["phrase_threshold"] = c.phrase_threshold;
    j["phrase_delta"] = c.phrase_delta;
    j["phrase_passes"] = c.phrase_passes;
    j["min_df"] = c.min_df;
    j["max_df_fraction"] = c.max_df_fraction;
    j["window"] = c.window;
    j["shift"] = c.shift;
    j["sppmi_diagonal"] = c.sppmi_diagonal;
    j["lambda"] = c.lambda;
    j["k_min"] = c.k_min;
    j["k_max"] = c.k_max;
    j["n_perturbations"] = c.n_perturbations;
    j["noise_epsilon"] = c.noise_epsilon;
    j["stability_threshold"] = c.stability_threshold;
    j["screen_max_iter"] = c.screen_max_iter;
    j["screen_tol"] = c.screen_tol;
    j["max_iter"] = c.max_iter;
    j["tol"] = c.tol;
    j["top_n"] = c.top_n;
    j["cluster_min"] = c.cluster_min;
    j["cluster_max"] = c.cluster_max;
    j["cluster_restarts"] = c.cluster_restarts;
    j["silhouette_sample_cap"] = c.silhouette_sample_cap;
    j["labels_path"] = c.labels_path;
    j["perplexity"] = c.perplexity;
    j["tsne_iterations"] = c.tsne_iterations;
    j["seed"] = c.seed;
    j["n_workers"] = c.n_workers;
    return j;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.input_path = j.value("input_path", c.input_path);
    c.filter.required_category = j.value("required_category", c.filter.required_category);
    c.filter.require_doi = j.value("require_doi", c.filter.require_doi);
    c.filter.year_min = j.value("year_min", c.filter.year_min);
    c.filter.year_max = j.value("year_max", c.filter.year_max);
    c.stopwords_path = j.value("stopwords_path", c.stopwords_path);
    c.phrase_min_count = j.value("phrase_min_count", c.phrase_min_count);
    c.phrase_threshold = j.value("phrase_threshold", c.phrase_threshold);
    c.phrase_delta = j.value("phrase_delta", c.phrase_delta);
    c.phrase_passes = j.value("phrase_passes", c.phrase_passes);
    c.min_df = j.value("min_df", c.min_df);
    c.max_df_fraction = j.value("max_df_fraction", c.max_df_fraction);
    c.window = j.value("window", c.window);
    c.shift = j.value("shift", c.shift);
    c.sppmi_diagonal = j.value("sppmi_diagonal", c.sppmi_diagonal);
    c.lambda = j.value("lambda", c.lambda);
    c.k_min = j.value("k_min", c.k_min);
    c.k_max = j.value("k_max", c.k_max);
    c.n_perturbations = j.value("n_perturbations", c.n_perturbations);
    c.noise_epsilon = j.value("noise_epsilon", c.noise_epsilon);
    c.stability_threshold = j.value("stability_threshold", c.stability_threshold);
    c.screen_max_iter = j.value("screen_max_iter", c.screen_max_iter);
    c.screen_tol = j.value("screen_tol", c.screen_tol);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.tol = j.value("tol", c.tol);
    c.top_n = j.value("top_n", c.top_n);
    c.cluster_min = j.value("cluster_min", c.cluster_min);
    c.cluster_max = j.value("cluster_max", c.cluster_max);
    c.cluster_restarts = j.value("cluster_restarts", c.cluster_restarts);
    c.silhouette_sample_cap = j.value("silhouette_sample_cap", c.silhouette_sample_cap);
    c.labels_path = j.value("labels_path", c.labels_path);
    c.perplexity = j.value("perplexity", c.perplexity);
    c.tsne_iterations = j.value("tsne_iterations", c.tsne_iterations);
    c.seed = j.value("seed", c.seed);
    c.n_workers = j.value("n_workers", c.n_workers);
    return c;
}

// Artifact filenames within a run directory.
constexpr const char* kDocuments = "documents.jsonl";
constexpr const char* kTokens = "tokens.jsonl";
constexpr const char* kVocab = "vocab.tsv";
constexpr const char* kPhrases = "phrases.tsv";
constexpr const char* kTfidf = "tfidf.sptx";
constexpr const char* kSppmi = "sppmi.sptx";
constexpr const char* kStability = "stability.csv";
constexpr const char* kModel = "model.txt";
constexpr const char* kTopics = "topics.txt";
constexpr const char* kDominance = "dominance.csv";
constexpr const char* kClusters = "clusters.csv";
constexpr const char* kEmbedding = "embedding.csv";
constexpr const char* kScatter = "scatter.svg";
constexpr const char* kManifest = "manifest.json";
constexpr const char* kConfig = "config.json";

std::vector<std::string> stage_outputs(Stage s) {
    switch (s) {
        case Stage::Ingest: return {kDocuments};
        case Stage::Preprocess: return {kTokens, kVocab, kPhrases};
        case Stage::Matrices: return {kTfidf, kSppmi};
        case Stage::SelectK: return {kStability, kModel};
        case Stage::Analyze: return {kTopics, kDominance, kClusters};
        case Stage::Project: return {kEmbedding, kScatter};
    }
    throw ConfigError("unknown stage");
}

std::vector<std::string> stage_inputs(Stage s) {
    switch (s) {
        case Stage::Ingest: return {};
        case Stage::Preprocess: return {kDocuments};
        case Stage::Matrices: return {kTokens, kVocab};
        case Stage::SelectK: return {kTfidf, kSppmi};
        case Stage::Analyze: return {kModel, kVocab, kTokens};
        case Stage::Project: return {kModel, kClusters, kTokens};
    }
    throw ConfigError("unknown stage");
}

// The stage's reproducibility-relevant parameter subset; compared verbatim on
// resume, so worker counts and paths stay out.
json stage_params(Stage s, const RunConfig& c) {
    json p;
    switch (s) {
        case Stage::Ingest:
            p["required_category"] = c.filter.required_category;
            p["require_doi"] = c.filter.require_doi;
            p["year_min"] = c.filter.year_min;
            p["year_max"] = c.filter.year_max;
            break;
        case Stage::Preprocess:
            p["stopwords"] = c.stopwords_path.empty() ? "builtin" : "file";
            p["phrase_min_count"] = c.phrase_min_count;
            p["phrase_threshold"] = c.phrase_threshold;
            p["phrase_delta"] = c.phrase_delta;
            p["phrase_passes"] = c.phrase_passes;
            p["min_df"] = c.min_df;
            p["max_df_fraction"] = c.max_df_fraction;
            break;
        case Stage::Matrices:
            p["window"] = c.window;
            p["shift"] = c.shift;
            p["sppmi_diagonal"] = c.sppmi_diagonal;
            break;
        case Stage::SelectK:
            p["lambda"] = c.lambda;
            p["k_min"] = c.k_min;
            p["k_max"] = c.k_max;
            p["n_perturbations"] = c.n_perturbations;
            p["noise_epsilon"] = c.noise_epsilon;
            p["stability_threshold"] = c.stability_threshold;
            p["screen_max_iter"] = c.screen_max_iter;
            p["screen_tol"] = c.screen_tol;
            p["max_iter"] = c.max_iter;
            p["tol"] = c.tol;
            p["seed"] = c.seed;
            break;
        case Stage::Analyze:
            p["top_n"] = c.top_n;
            p["cluster_min"] = c.cluster_min;
            p["cluster_max"] = c.cluster_max;
            p["cluster_restarts"] = c.cluster_restarts;
            p["silhouette_sample_cap"] = c.silhouette_sample_cap;
            p["seed"] = c.seed;
            break;
        case Stage::Project:
            p["perplexity"] = c.perplexity;
            p["tsne_iterations"] = c.tsne_iterations;
            p["seed"] = c.seed;
            break;
    }
    return p;
}

struct Manifest {
    json root;

    static Manifest load_or_empty(const fs::path& dir) {
        Manifest m;
        m.root = json::object();
        m.root["artifacts"] = json::object();
        m.root["stages"] = json::object();
        const fs::path p = dir / kManifest;
        if (fs::exists(p)) {
            std::ifstream in(p);
            if (!in) throw IoError("cannot open manifest: " + p.string());
            json got = json::parse(in, nullptr, false);
            if (got.is_discarded() || !got.is_object()) {
                throw IoError("malformed manifest: " + p.string());
            }
            if (got.contains("artifacts")) m.root["artifacts"] = got["artifacts"];
            if (got.contains("stages")) m.root["stages"] = got["stages"];
        }
        return m;
    }

    void save(const fs::path& dir) const {
        const fs::path p = dir / kManifest;
        std::ofstream out(p);
        if (!out) throw IoError("cannot write manifest: " + p.string());
        out << root.dump(2) << '\n';
        if (!out) throw IoError("write failed: " + p.string());
    }

    void record(const std::string& stage, json params, json inputs, json outputs, json info) {
        json entry;
        entry["params"] = std::move(params);
        entry["inputs"] = std::move(inputs);
        entry["outputs"] = outputs;
        if (!info.is_null()) entry["info"] = std::move(info);
        root["stages"][stage] = std::move(entry);
        for (auto& [name, hash] : outputs.items()) {
            root["artifacts"][name] = hash;
        }
    }
};

json hash_artifacts(const fs::path& dir, const std::vector<std::string>& names) {
    json out = json::object();
    for (const auto& name : names) {
        out[name] = sha256_file((dir / name).string());
    }
    return out;
}

// Stage executors. Each reads its inputs from the run directory, writes its
// outputs there, and records a manifest entry.

void exec_ingest(const RunConfig& cfg, const fs::path& dir, Manifest* m) {
    IngestStats stats;
    std::vector<Document> docs = load_corpus(cfg.input_path, &stats);
    std::vector<Document> kept = filter_corpus(docs, cfg.filter);
    save_corpus(kept, (dir / kDocuments).string());

    json inputs = json::object();
    inputs["input"] = sha256_file(cfg.input_path);
    json info;
    info["records_loaded"] = stats.loaded;
    info["records_skipped"] = stats.skipped_total();
    info["skipped_bad_json"] = stats.skipped_bad_json;
    info["skipped_missing_field"] = stats.skipped_missing_field;
    info["skipped_empty_text"] = stats.skipped_empty_text;
    info["skipped_bad_year"] = stats.skipped_bad_year;
    info["skipped_duplicate_id"] = stats.skipped_duplicate_id;
    info["documents_kept"] = kept.size();
    m->record(stage_name(Stage::Ingest), stage_params(Stage::Ingest, cfg), std::move(inputs),
              hash_artifacts(dir, stage_outputs(Stage::Ingest)), std::move(info));
}

void exec_preprocess(const RunConfig& cfg, const fs::path& dir, Manifest* m) {
    std::vector<Document> docs = load_corpus((dir / kDocuments).string());
    std::unordered_set<std::string> stopwords =
        cfg.stopwords_path.empty() ? default_stopwords() : load_stopwords(cfg.stopwords_path);

    std::vector<TokenizedDoc> tokenized;
    tokenized.reserve(docs.size());
    for (const auto& d : docs) {
        tokenized.push_back({d.id, tokenize(d.text, stopwords)});
    }
    const PhraseModel pm = learn_phrases(tokenized, cfg.phrase_min_count, cfg.phrase_threshold,
                                         cfg.phrase_delta, cfg.phrase_passes);
    std::vector<TokenizedDoc> merged = apply_phrases(tokenized, pm);
    const Vocabulary vocab = build_vocabulary(merged, cfg.min_df, cfg.max_df_fraction);

    // Documents with no in-vocabulary tokens would produce all-zero TF-IDF
    // columns downstream; drop them here, counted.
    std::vector<TokenizedDoc> kept;
    kept.reserve(merged.size());
    std::int64_t dropped = 0;
    for (auto& d : merged) {
        const bool any = std::any_of(d.tokens.begin(), d.tokens.end(), [&](const std::string& t) {
            return vocab.index_of(t) >= 0;
        });
        if (any) {
            kept.push_back(std::move(d));
        } else {
            ++dropped;
        }
    }
    if (kept.empty()) {
        throw EmptyCorpusError("no document retains an in-vocabulary token");
    }

    save_tokens(kept, (dir / kTokens).string());
    save_vocabulary(vocab, (dir / kVocab).string());
    save_phrases(pm, (dir / kPhrases).string());

    json inputs = hash_artifacts(dir, stage_inputs(Stage::Preprocess));
    if (!cfg.stopwords_path.empty()) {
        inputs["stopwords"] = sha256_file(cfg.stopwords_path);
    }
    json info;
    info["documents_in"] = docs.size();
    info["documents_out"] = kept.size();
    info["documents_dropped_no_vocab"] = dropped;
    info["vocabulary_size"] = vocab.size();
    info["phrases_accepted"] = pm.accepted.size();
    m->record(stage_name(Stage::Preprocess), stage_params(Stage::Preprocess, cfg),
              std::move(inputs), hash_artifacts(dir, stage_outputs(Stage::Preprocess)),
              std::move(info));
}

void exec_matrices(const RunConfig& cfg, const fs::path& dir, Manifest* m) {
    const std::vector<TokenizedDoc> docs = load_tokens((dir / kTokens).string());
    const Vocabulary vocab = load_vocabulary((dir / kVocab).string());
    const TfidfMatrix x = build_tfidf(docs, vocab);
    const SparseMatrix c = build_cooccurrence(docs, vocab, cfg.window, cfg.sppmi_diagonal);
    const SppmiMatrix sm = build_sppmi(c, cfg.shift, cfg.window);
    save_sparse(x.X, (dir / kTfidf).string());
    save_sparse(sm.M, (dir / kSppmi).string());

    json info;
    info["F"] = x.X.rows();
    info["N"] = x.X.cols();
    info["tfidf_nnz"] = x.X.nonZeros();
    info["sppmi_nnz"] = sm.M.nonZeros();
    m->record(stage_name(Stage::Matrices), stage_params(Stage::Matrices, cfg),
              hash_artifacts(dir, stage_inputs(Stage::Matrices)),
              hash_artifacts(dir, stage_outputs(Stage::Matrices)), std::move(info));
}

void exec_select_k(const RunConfig& cfg, const fs::path& dir, Manifest* m) {
    TfidfMatrix x;
    x.X = load_sparse((dir / kTfidf).string());
    x.n_docs = static_cast<int>(x.X.cols());
    SppmiMatrix sm;
    sm.M = load_sparse((dir / kSppmi).string());
    sm.window = cfg.window;
    sm.shift = cfg.shift;

    std::vector<int> k_range;
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) k_range.push_back(k);
    PerturbationConfig pcfg;
    pcfg.n_perturbations = cfg.n_perturbations;
    pcfg.noise_epsilon = cfg.noise_epsilon;
    pcfg.seed = cfg.seed;
    SelectKOptions opts;
    opts.stability_threshold = cfg.stability_threshold;
    opts.screen_max_iter = cfg.screen_max_iter;
    opts.screen_tol = cfg.screen_tol;
    opts.final_max_iter = cfg.max_iter;
    opts.final_tol = cfg.tol;
    opts.n_workers = resolve_workers(cfg);

    const SelectKResult res = select_k(x, sm, cfg.lambda, k_range, pcfg, opts);
    save_stability(res.profile, (dir / kStability).string());
    save_model(res.model, (dir / kModel).string());

    json info;
    info["k_selected"] = res.k_selected;
    info["below_threshold"] = res.below_threshold;
    m->record(stage_name(Stage::SelectK), stage_params(Stage::SelectK, cfg),
              hash_artifacts(dir, stage_inputs(Stage::SelectK)),
              hash_artifacts(dir, stage_outputs(Stage::SelectK)), std::move(info));
}

void exec_analyze(const RunConfig& cfg, const fs::path& dir, Manifest* m) {
    const FactorModel model = load_model((dir / kModel).string());
    const Vocabulary vocab = load_vocabulary((dir / kVocab).string());
    const std::vector<TokenizedDoc> docs = load_tokens((dir / kTokens).string());
    std::vector<std::string> doc_ids;
    doc_ids.reserve(docs.size());
    for (const auto& d : docs) doc_ids.push_back(d.doc_id);

    std::map<int, std::string> labels;
    if (!cfg.labels_path.empty()) labels = load_topic_labels(cfg.labels_path);

    const std::vector<TopicReport> reports = topic_report(model, vocab, cfg.top_n, labels);
    const DominanceDistribution dom = dominance_distribution(model);
    ClusterOptions copts;
    copts.c_min = cfg.cluster_min;
    copts.c_max = cfg.cluster_max;
    copts.stability_threshold = cfg.stability_threshold;
    copts.restarts = cfg.cluster_restarts;
    copts.seed = cfg.seed;
    copts.silhouette_sample_cap = cfg.silhouette_sample_cap;
    const DocumentClusterAssignment assign = cluster_documents(model, copts);

    save_topic_reports(reports, (dir / kTopics).string());
    save_dominance(dom, (dir / kDominance).string());
    save_clusters(assign, doc_ids, (dir / kClusters).string());

    json inputs = hash_artifacts(dir, stage_inputs(Stage::Analyze));
    if (!cfg.labels_path.empty()) inputs["labels"] = sha256_file(cfg.labels_path);
    json info;
    info["n_clusters"] = assign.n_clusters;
    info["cluster_below_threshold"] = assign.below_threshold;
    info["degenerate"] = assign.degenerate;
    m->record(stage_name(Stage::Analyze), stage_params(Stage::Analyze, cfg), std::move(inputs),
              hash_artifacts(dir, stage_outputs(Stage::Analyze)), std::move(info));
}

// clusters.csv reader (doc_id,cluster), returning labels in file order.
std::vector<int> load_cluster_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cluster file: " + path);
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("doc_id,", 0) == 0) continue;
        const size_t comma = line.rfind(',');
        if (comma == std::string::npos) continue;
        labels.push_back(std::stoi(line.substr(comma + 1)));
    }
    return labels;
}

void exec_project(const RunConfig& cfg, const fs::path& dir, Manifest* m) {
    const FactorModel model = load_model((dir / kModel).string());
    const std::vector<TokenizedDoc> docs = load_tokens((dir / kTokens).string());
    std::vector<std::string> doc_ids;
    doc_ids.reserve(docs.size());
    for (const auto& d : docs) doc_ids.push_back(d.doc_id);
    const std::vector<int> labels = load_cluster_labels((dir / kClusters).string());
    if (labels.size() != doc_ids.size()) {
        throw StaleArtifactError("cluster file does not match token file");
    }

    // Points: L1-normalized H columns (the same mixture representation the
    // clustering used), one row per document.
    Eigen::MatrixXd points(model.H.cols(), model.H.rows());
    for (int d = 0; d < model.H.cols(); ++d) {
        Eigen::VectorXd col = model.H.col(d);
        const double sum = col.sum();
        if (sum > 0.0) col /= sum;
        points.row(d) = col.transpose();
    }

    TsneOptions topts;
    topts.perplexity = cfg.perplexity;
    topts.iterations = cfg.tsne_iterations;
    topts.seed = cfg.seed;
    const Embedding2D emb = tsne_project(points, topts);
    save_embedding(emb, doc_ids, labels, (dir / kEmbedding).string());
    save_scatter_svg(emb, labels, (dir / kScatter).string());

    json info;
    info["final_kl"] = emb.final_kl;
    m->record(stage_name(Stage::Project), stage_params(Stage::Project, cfg),
              hash_artifacts(dir, stage_inputs(Stage::Project)),
              hash_artifacts(dir, stage_outputs(Stage::Project)), std::move(info));
}

void exec_stage(Stage s, const RunConfig& cfg, const fs::path& dir, Manifest* m,
                std::ostream* log) {
    if (log != nullptr) *log << "[" << stage_name(s) << "] running\n";
    switch (s) {
        case Stage::Ingest: exec_ingest(cfg, dir, m); break;
        case Stage::Preprocess: exec_preprocess(cfg, dir, m); break;
        case Stage::Matrices: exec_matrices(cfg, dir, m); break;
        case Stage::SelectK: exec_select_k(cfg, dir, m); break;
        case Stage::Analyze: exec_analyze(cfg, dir, m); break;
        case Stage::Project: exec_project(cfg, dir, m); break;
    }
    m->save(dir);
}

// Confirms an artifact file equals the manifest's current (latest-writer)
// hash for it.
void verify_artifact(const fs::path& file, const std::string& name, const Manifest& m) {
    const json& artifacts = m.root["artifacts"];
    if (!artifacts.contains(name)) {
        throw StaleArtifactError("manifest lacks artifact hash: " + name);
    }
    if (!fs::exists(file)) {
        throw StaleArtifactError("artifact missing: " + name);
    }
    if (sha256_file(file.string()) != artifacts[name].get<std::string>()) {
        throw StaleArtifactError("artifact hash mismatch: " + name);
    }
}

// Verifies one completed upstream stage: entry present, parameters equal,
// recorded input hashes still valid, output files matching the manifest.
void verify_stage(Stage s, const RunConfig& cfg, const fs::path& dir, const Manifest& m) {
    const std::string name = stage_name(s);
    const json& stages = m.root["stages"];
    if (!stages.contains(name)) {
        // The model artifact may come from a fixed-k fit instead of select-k.
        if (s == Stage::SelectK && stages.contains("fit")) {
            verify_artifact(dir / kModel, kModel, m);
            return;
        }
        throw StaleArtifactError("stage has not run: " + name);
    }
    const json& entry = stages[name];
    if (entry["params"] != stage_params(s, cfg)) {
        throw StaleArtifactError("parameters changed for completed stage: " + name);
    }
    // Inputs the stage consumed must still hash the same (catches upstream
    // artifacts rebuilt since, and out-of-band edits to external files).
    for (const auto& [key, hash] : entry["inputs"].items()) {
        fs::path file;
        if (key == "input") {
            file = cfg.input_path;
        } else if (key == "stopwords") {
            if (cfg.stopwords_path.empty()) {
                throw StaleArtifactError("stage used a stopword file no longer configured");
            }
            file = cfg.stopwords_path;
        } else if (key == "labels") {
            if (cfg.labels_path.empty()) {
                throw StaleArtifactError("stage used a label file no longer configured");
            }
            file = cfg.labels_path;
        } else {
            file = dir / key;
        }
        if (!fs::exists(file)) {
            throw StaleArtifactError("stage input missing: " + key);
        }
        if (sha256_file(file.string()) != hash.get<std::string>()) {
            throw StaleArtifactError("stage input changed since stage ran: " + key);
        }
    }
    // Outputs must match the manifest's current hash (a later fixed-k fit
    // legitimately supersedes the model artifact).
    for (const auto& out : stage_outputs(s)) {
        verify_artifact(dir / out, out, m);
    }
}

void verify_upstream(Stage from, const RunConfig& cfg, const fs::path& dir, const Manifest& m) {
    for (Stage s : stage_chain()) {
        if (s == from) break;
        verify_stage(s, cfg, dir, m);
    }
}

}  // namespace

const std::vector<Stage>& stage_chain() {
    static const std::vector<Stage> kChain = {Stage::Ingest,  Stage::Preprocess,
                                              Stage::Matrices, Stage::SelectK,
                                              Stage::Analyze, Stage::Project};
    return kChain;
}

std::string stage_name(Stage s) {
    switch (s) {
        case Stage::Ingest: return "ingest";
        case Stage::Preprocess: return "preprocess";
        case Stage::Matrices: return "matrices";
        case Stage::SelectK: return "select-k";
        case Stage::Analyze: return "analyze";
        case Stage::Project: return "project";
    }
    throw ConfigError("unknown stage");
}

Stage stage_from_name(const std::string& name) {
    for (Stage s : stage_chain()) {
        if (stage_name(s) == name) return s;
    }
    throw ConfigError("unknown stage name: " + name);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("config is not a JSON object: " + path);
    }
    return config_from_json(j);
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config: " + path);
    out << config_to_json(cfg).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

int resolve_workers(const RunConfig& cfg) {
    if (cfg.n_workers > 0) return cfg.n_workers;
    if (const char* env = std::getenv("SENMFK_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void run_pipeline(const RunConfig& cfg, const fs::path& run_dir, std::ostream* log) {
    cfg.validate();
    if (!fs::exists(cfg.input_path)) {
        throw IoError("input path does not exist: " + cfg.input_path);
    }
    fs::create_directories(run_dir);
    save_config(cfg, (run_dir / kConfig).string());
    Manifest m = Manifest::load_or_empty(run_dir);
    // A full run starts a fresh hash chain.
    m.root["artifacts"] = json::object();
    m.root["stages"] = json::object();
    for (Stage s : stage_chain()) {
        exec_stage(s, cfg, run_dir, &m, log);
    }
}

void resume_pipeline(const fs::path& run_dir, Stage from, std::ostream* log) {
    const RunConfig cfg = load_config((run_dir / kConfig).string());
    cfg.validate();
    Manifest m = Manifest::load_or_empty(run_dir);
    verify_upstream(from, cfg, run_dir, m);
    bool hit = false;
    for (Stage s : stage_chain()) {
        if (s == from) hit = true;
        if (hit) exec_stage(s, cfg, run_dir, &m, log);
    }
}

void run_single_stage(const RunConfig& cfg, const fs::path& run_dir, Stage s, std::ostream* log) {
    cfg.validate();
    fs::create_directories(run_dir);
    save_config(cfg, (run_dir / kConfig).string());
    Manifest m = Manifest::load_or_empty(run_dir);
    verify_upstream(s, cfg, run_dir, m);
    exec_stage(s, cfg, run_dir, &m, log);
}

void run_fit(const RunConfig& cfg, const fs::path& run_dir, int k, std::ostream* log) {
    cfg.validate();
    if (k < 1) throw ConfigError("k must be >= 1");
    Manifest m = Manifest::load_or_empty(run_dir);
    verify_upstream(Stage::SelectK, cfg, run_dir, m);
    if (log != nullptr) *log << "[fit] running (k=" << k << ")\n";

    TfidfMatrix x;
    x.X = load_sparse((run_dir / kTfidf).string());
    x.n_docs = static_cast<int>(x.X.cols());
    SppmiMatrix sm;
    sm.M = load_sparse((run_dir / kSppmi).string());
    sm.window = cfg.window;
    sm.shift = cfg.shift;
    const AugmentedMatrix a = concatenate(x, sm, cfg.lambda);
    FitOptions fo;
    fo.max_iter = cfg.max_iter;
    fo.tol = cfg.tol;
    fo.seed = cfg.seed;
    const FactorModel model = nmf_fit(a, k, fo);
    save_model(model, (run_dir / kModel).string());

    json params;
    params["lambda"] = cfg.lambda;
    params["k"] = k;
    params["seed"] = cfg.seed;
    params["max_iter"] = cfg.max_iter;
    params["tol"] = cfg.tol;
    json info;
    info["iterations"] = model.iterations;
    info["converged"] = model.converged;
    json outputs = json::object();
    outputs[kModel] = sha256_file((run_dir / kModel).string());
    m.record("fit", std::move(params), hash_artifacts(run_dir, stage_inputs(Stage::SelectK)),
             std::move(outputs), std::move(info));
    m.save(run_dir);
}

}  // namespace senmfk
