#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "senmfk/errors.hpp"
#include "senmfk/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using senmfk::RunConfig;
using senmfk::Stage;

// CLI override state: only flags the user actually passed are applied on top
// of the config file.
struct Overrides {
    std::optional<std::string> input;
    std::optional<std::string> category;
    std::optional<bool> require_doi;
    std::optional<std::string> years;  // "min:max"
    std::optional<std::string> stopwords;
    std::optional<std::int64_t> min_count;
    std::optional<double> threshold;
    std::optional<double> delta;
    std::optional<int> passes;
    std::optional<std::int64_t> min_df;
    std::optional<double> max_df;
    std::optional<int> window;
    std::optional<double> shift;
    std::optional<double> lambda;
    std::optional<int> k_min;
    std::optional<int> k_max;
    std::optional<int> perturbations;
    std::optional<double> epsilon;
    std::optional<double> stability_threshold;
    std::optional<int> max_iter;
    std::optional<double> tol;
    std::optional<int> top_n;
    std::optional<std::string> cluster_range;  // "min:max"
    std::optional<std::string> labels;
    std::optional<double> perplexity;
    std::optional<int> iterations;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

std::pair<int, int> parse_range(const std::string& s, const char* what) {
    const size_t colon = s.find(':');
    if (colon == std::string::npos) {
        throw senmfk::ConfigError(std::string(what) + " must look like <min>:<max>");
    }
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
}

void apply(const Overrides& o, RunConfig* cfg) {
    if (o.input) cfg->input_path = *o.input;
    if (o.category) cfg->filter.required_category = *o.category;
    if (o.require_doi) cfg->filter.require_doi = *o.require_doi;
    if (o.years) {
        const auto [lo, hi] = parse_range(*o.years, "--years");
        cfg->filter.year_min = lo;
        cfg->filter.year_max = hi;
    }
    if (o.stopwords) cfg->stopwords_path = *o.stopwords;
    if (o.min_count) cfg->phrase_min_count = *o.min_count;
    if (o.threshold) cfg->phrase_threshold = *o.threshold;
    if (o.delta) cfg->phrase_delta = *o.delta;
    if (o.passes) cfg->phrase_passes = *o.passes;
    if (o.min_df) cfg->min_df = *o.min_df;
    if (o.max_df) cfg->max_df_fraction = *o.max_df;
    if (o.window) cfg->window = *o.window;
    if (o.shift) cfg->shift = *o.shift;
    if (o.lambda) cfg->lambda = *o.lambda;
    if (o.k_min) cfg->k_min = *o.k_min;
    if (o.k_max) cfg->k_max = *o.k_max;
    if (o.perturbations) cfg->n_perturbations = *o.perturbations;
    if (o.epsilon) cfg->noise_epsilon = *o.epsilon;
    if (o.stability_threshold) cfg->stability_threshold = *o.stability_threshold;
    if (o.max_iter) cfg->max_iter = *o.max_iter;
    if (o.tol) cfg->tol = *o.tol;
    if (o.top_n) cfg->top_n = *o.top_n;
    if (o.cluster_range) {
        const auto [lo, hi] = parse_range(*o.cluster_range, "--cluster-range");
        cfg->cluster_min = lo;
        cfg->cluster_max = hi;
    }
    if (o.labels) cfg->labels_path = *o.labels;
    if (o.perplexity) cfg->perplexity = *o.perplexity;
    if (o.iterations) cfg->tsne_iterations = *o.iterations;
    if (o.seed) cfg->seed = *o.seed;
    if (o.workers) cfg->n_workers = *o.workers;
}

// Loads run_dir/config.json if present, else the --config file, else
// defaults; CLI overrides win.
RunConfig effective_config(const std::string& config_path, const fs::path& run_dir,
                           const Overrides& o, bool prefer_run_dir) {
    RunConfig cfg;
    const fs::path stored = run_dir / "config.json";
    if (!config_path.empty()) {
        cfg = senmfk::load_config(config_path);
    } else if (prefer_run_dir && fs::exists(stored)) {
        cfg = senmfk::load_config(stored.string());
    }
    apply(o, &cfg);
    return cfg;
}

template <typename T>
void add_opt(CLI::App* cmd, const std::string& flag, std::optional<T>& slot,
             const std::string& help) {
    cmd->add_option_function<T>(
        flag, [&slot](const T& v) { slot = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "senmfk — semantic topic modeling: coupled NMF of TF-IDF and SPPMI matrices with "
        "automatic topic-count selection, topic/dominance/cluster reports, and a 2-D map"};
    app.require_subcommand(1);

    std::string config_path;
    std::string run_dir = "run";
    app.add_option("--config", config_path, "JSON config file (defaults applied for absent keys)")
        ->envname("SENMFK_CONFIG");
    app.add_option("--run-dir", run_dir, "run directory holding artifacts and manifest");

    Overrides o;
    auto add_common = [&](CLI::App* cmd) {
        cmd->fallthrough();  // let --run-dir/--config appear after the subcommand
        add_opt<std::uint64_t>(cmd, "--seed", o.seed, "base random seed");
        add_opt<int>(cmd, "--workers", o.workers,
                     "parallel worker count (default: $SENMFK_WORKERS or hardware)");
    };

    CLI::App* c_ingest = app.add_subcommand("ingest", "load and filter the corpus dump");
    add_opt<std::string>(c_ingest, "--input", o.input, "line-delimited corpus dump");
    add_opt<std::string>(c_ingest, "--category", o.category, "required category");
    c_ingest->add_option_function<bool>(
        "--require-doi", [&](const bool& v) { o.require_doi = v; },
        "keep only documents with a DOI");
    add_opt<std::string>(c_ingest, "--years", o.years, "inclusive year range <min>:<max>");
    add_common(c_ingest);

    CLI::App* c_pre = app.add_subcommand("preprocess",
                                         "tokenize, learn and apply phrases, build vocabulary");
    add_opt<std::string>(c_pre, "--stopwords", o.stopwords,
                         "stopword file (one per line; default: built-in list)");
    add_opt<std::int64_t>(c_pre, "--min-count", o.min_count, "minimum phrase pair count");
    add_opt<double>(c_pre, "--threshold", o.threshold, "minimum phrase score");
    add_opt<double>(c_pre, "--delta", o.delta, "phrase score discount");
    add_opt<int>(c_pre, "--passes", o.passes, "phrase passes (1 = bigrams, 2 = +trigrams)");
    add_opt<std::int64_t>(c_pre, "--min-df", o.min_df, "minimum document frequency");
    add_opt<double>(c_pre, "--max-df", o.max_df, "maximum document-frequency fraction");
    add_common(c_pre);

    CLI::App* c_mat = app.add_subcommand("matrices", "build the TF-IDF and SPPMI matrices");
    add_opt<int>(c_mat, "--window", o.window, "co-occurrence half-window");
    add_opt<double>(c_mat, "--shift", o.shift, "SPPMI shift s (>= 1)");
    add_common(c_mat);

    CLI::App* c_fit = app.add_subcommand("fit", "factorize at a fixed k");
    int fit_k = 0;
    c_fit->add_option("--k", fit_k, "latent dimension")->required();
    add_opt<double>(c_fit, "--lambda", o.lambda, "coupling weight");
    add_opt<int>(c_fit, "--max-iter", o.max_iter, "iteration cap");
    add_opt<double>(c_fit, "--tol", o.tol, "relative-decrease stop tolerance");
    add_common(c_fit);

    CLI::App* c_sel = app.add_subcommand("select-k", "choose the topic count by stability");
    add_opt<double>(c_sel, "--lambda", o.lambda, "coupling weight");
    add_opt<int>(c_sel, "--k-min", o.k_min, "smallest candidate k");
    add_opt<int>(c_sel, "--k-max", o.k_max, "largest candidate k");
    add_opt<int>(c_sel, "--perturbations", o.perturbations, "ensemble size per k");
    add_opt<double>(c_sel, "--epsilon", o.epsilon, "multiplicative noise half-width");
    add_opt<double>(c_sel, "--stability-threshold", o.stability_threshold,
                    "minimum cluster silhouette for a stable k");
    add_opt<int>(c_sel, "--max-iter", o.max_iter, "final-fit iteration cap");
    add_opt<double>(c_sel, "--tol", o.tol, "final-fit stop tolerance");
    add_common(c_sel);

    CLI::App* c_ana = app.add_subcommand("analyze",
                                         "topic reports, dominance table, document clusters");
    add_opt<int>(c_ana, "--top-n", o.top_n, "terms per topic report");
    add_opt<std::string>(c_ana, "--cluster-range", o.cluster_range,
                         "candidate cluster counts <min>:<max>");
    add_opt<std::string>(c_ana, "--labels", o.labels, "topic label file (index<TAB>label)");
    add_common(c_ana);

    CLI::App* c_proj = app.add_subcommand("project", "t-SNE 2-D projection of the documents");
    add_opt<double>(c_proj, "--perplexity", o.perplexity, "t-SNE perplexity");
    add_opt<int>(c_proj, "--iterations", o.iterations, "t-SNE iterations");
    add_common(c_proj);

    CLI::App* c_run = app.add_subcommand("run", "execute the full pipeline");
    add_opt<std::string>(c_run, "--input", o.input, "line-delimited corpus dump");
    add_opt<std::string>(c_run, "--category", o.category, "required category");
    add_opt<std::string>(c_run, "--years", o.years, "inclusive year range <min>:<max>");
    add_opt<double>(c_run, "--lambda", o.lambda, "coupling weight");
    add_opt<int>(c_run, "--k-min", o.k_min, "smallest candidate k");
    add_opt<int>(c_run, "--k-max", o.k_max, "largest candidate k");
    add_common(c_run);

    CLI::App* c_res = app.add_subcommand("resume", "recompute from a stage onward");
    c_res->fallthrough();
    std::string from_stage;
    c_res->add_option("--from", from_stage,
                      "stage to restart at (ingest, preprocess, matrices, select-k, analyze, "
                      "project)")
        ->required();

    try {
        app.parse(argc, argv);
        const fs::path dir(run_dir);
        if (c_run->parsed()) {
            senmfk::run_pipeline(effective_config(config_path, dir, o, false), dir, &std::cout);
        } else if (c_res->parsed()) {
            senmfk::resume_pipeline(dir, senmfk::stage_from_name(from_stage), &std::cout);
        } else if (c_fit->parsed()) {
            senmfk::run_fit(effective_config(config_path, dir, o, true), dir, fit_k, &std::cout);
        } else {
            Stage s = Stage::Ingest;
            if (c_ingest->parsed()) s = Stage::Ingest;
            else if (c_pre->parsed()) s = Stage::Preprocess;
            else if (c_mat->parsed()) s = Stage::Matrices;
            else if (c_sel->parsed()) s = Stage::SelectK;
            else if (c_ana->parsed()) s = Stage::Analyze;
            else if (c_proj->parsed()) s = Stage::Project;
            senmfk::run_single_stage(effective_config(config_path, dir, o, true), dir, s,
                                     &std::cout);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const senmfk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
