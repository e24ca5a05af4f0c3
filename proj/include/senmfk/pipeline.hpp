#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "senmfk/document.hpp"

namespace senmfk {

// Every knob of the end-to-end workflow. A persisted RunConfig plus the input
// files fully determines every output byte.
struct RunConfig {
    // ingest
    std::string input_path;
    CorpusFilter filter;
    // preprocess
    std::string stopwords_path;  // empty -> built-in list
    std::int64_t phrase_min_count = 20;
    double phrase_threshold = 10.0;
    double phrase_delta = 5.0;
    int phrase_passes = 2;
    std::int64_t min_df = 5;
    double max_df_fraction = 0.7;
    // matrices
    int window = 5;
    double shift = 1.0;
    bool sppmi_diagonal = true;
    // factorization & selection
    double lambda = 1.0;
    int k_min = 2;
    int k_max = 8;
    int n_perturbations = 20;
    double noise_epsilon = 0.03;
    double stability_threshold = 0.75;
    int screen_max_iter = 200;
    double screen_tol = 1e-4;
    int max_iter = 500;
    double tol = 1e-5;
    // analyze
    int top_n = 20;
    int cluster_min = 2;
    int cluster_max = 20;
    int cluster_restarts = 4;
    int silhouette_sample_cap = 2000;
    std::string labels_path;  // empty -> no topic labels
    // project
    double perplexity = 30.0;
    int tsne_iterations = 1000;
    // global
    std::uint64_t seed = 42;
    int n_workers = 0;  // 0 -> $SENMFK_WORKERS, else hardware concurrency

    void validate() const;
};

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

// Pipeline stages in execution order. `fit` (fixed-k factorization) sits
// outside the chain as an alternative producer of the model artifact.
enum class Stage { Ingest, Preprocess, Matrices, SelectK, Analyze, Project };

const std::vector<Stage>& stage_chain();
std::string stage_name(Stage s);
Stage stage_from_name(const std::string& name);  // ConfigError on unknown name

// Executes the full chain in run_dir: writes config.json, each stage's
// artifacts, and manifest.json (per-stage parameters plus input/output
// SHA-256 hashes — the staleness chain for resume). `log` receives one line
// per stage; pass nullptr for silence.
void run_pipeline(const RunConfig& cfg, const std::filesystem::path& run_dir,
                  std::ostream* log = nullptr);

// Re-executes from `from` onward, reusing upstream artifacts after verifying
// their recorded parameters match the run directory's config and their
// hashes match the manifest (StaleArtifactError otherwise).
void resume_pipeline(const std::filesystem::path& run_dir, Stage from,
                     std::ostream* log = nullptr);

// Runs a single stage in run_dir (upstream must verify, as in resume).
void run_single_stage(const RunConfig& cfg, const std::filesystem::path& run_dir, Stage s,
                      std::ostream* log = nullptr);

// Fixed-k factorization of the stored matrices into the model artifact
// (the stage-chain alternative to automatic selection).
void run_fit(const RunConfig& cfg, const std::filesystem::path& run_dir, int k,
             std::ostream* log = nullptr);

// Worker-count resolution: explicit config value, else $SENMFK_WORKERS, else
// hardware concurrency (at least 1).
int resolve_workers(const RunConfig& cfg);

}  // namespace senmfk
