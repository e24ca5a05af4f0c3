#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "senmfk/errors.hpp"
#include "senmfk/pipeline.hpp"
#include "fixture_corpus.hpp"
#include "support/temp_dir.hpp"

using namespace senmfk;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

// Compact settings so a full run stays fast while exercising every stage.
RunConfig small_config(const std::string& input) {
    RunConfig cfg;
    cfg.input_path = input;
    cfg.phrase_min_count = 20;
    cfg.min_df = 5;
    cfg.max_df_fraction = 0.7;
    cfg.k_min = 2;
    cfg.k_max = 5;
    cfg.n_perturbations = 6;
    cfg.screen_max_iter = 120;
    cfg.max_iter = 200;
    cfg.cluster_max = 8;
    cfg.perplexity = 12.0;
    cfg.tsne_iterations = 150;
    cfg.n_workers = 1;
    return cfg;
}

std::string fixture_path(const TempDir& dir) {
    fixture::FixtureOptions fo;
    fo.n_docs = 150;
    fo.seed = 7;
    const std::string path = dir.str("corpus.jsonl");
    fixture::write_fixture_dump(fixture::make_planted_corpus(fo), path, /*with_invalid=*/false);
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

nlohmann::json manifest_of(const fs::path& run_dir) {
    return nlohmann::json::parse(slurp(run_dir / "manifest.json"));
}

const std::vector<std::string> kAllArtifacts = {
    "documents.jsonl", "tokens.jsonl",  "vocab.tsv",    "phrases.tsv",
    "tfidf.sptx",      "sppmi.sptx",    "model.txt",    "stability.csv",
    "topics.txt",      "dominance.csv", "clusters.csv", "embedding.csv",
    "scatter.svg",     "manifest.json", "config.json",
};

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("config round trips through json") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config("/data/in.jsonl");
        cfg.filter.required_category = "cond-mat.str-el";
        cfg.filter.year_min = 2001;
        cfg.lambda = 2.5;
        cfg.stopwords_path = "/tmp/words.txt";
        cfg.seed = 777;
        save_config(cfg, dir.str("config.json"));
        auto back = load_config(dir.str("config.json"));
        CHECK(back.input_path == cfg.input_path);
        CHECK(back.filter.required_category == cfg.filter.required_category);
        CHECK(back.filter.year_min == cfg.filter.year_min);
        CHECK(back.stopwords_path == cfg.stopwords_path);
        CHECK(back.phrase_min_count == cfg.phrase_min_count);
        CHECK(back.lambda == cfg.lambda);
        CHECK(back.k_max == cfg.k_max);
        CHECK(back.n_perturbations == cfg.n_perturbations);
        CHECK(back.perplexity == cfg.perplexity);
        CHECK(back.seed == cfg.seed);
        CHECK(back.n_workers == cfg.n_workers);
    }

    TEST_CASE("invalid configuration fails before any work") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        cfg.k_min = 5;
        cfg.k_max = 2;
        CHECK_THROWS_AS(run_pipeline(cfg, dir.path() / "run"), ConfigError);
        CHECK_FALSE(fs::exists(dir.path() / "run" / "manifest.json"));

        cfg = small_config(fixture_path(dir));
        cfg.noise_epsilon = 2.0;
        CHECK_THROWS_AS(run_pipeline(cfg, dir.path() / "run2"), ConfigError);
    }

    TEST_CASE("full run produces every artifact and selects the planted k") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        const fs::path run_dir = dir.path() / "run";
        run_pipeline(cfg, run_dir);

        for (const auto& name : kAllArtifacts) {
            CHECK_MESSAGE(fs::exists(run_dir / name), name);
        }

        auto manifest = manifest_of(run_dir);
        CHECK(manifest["stages"]["select-k"]["info"]["k_selected"] == 3);
        CHECK(manifest["stages"]["select-k"]["info"]["below_threshold"] == false);
        CHECK(manifest["stages"]["ingest"]["info"]["documents_kept"] == 150);

        // Every recorded artifact hash matches the bytes on disk.
        for (const auto& [name, hash] : manifest["artifacts"].items()) {
            CHECK(fs::exists(run_dir / name));
        }

        const std::string topics = slurp(run_dir / "topics.txt");
        CHECK(topics.find("topic") != std::string::npos);
    }

    TEST_CASE("identical configurations produce byte identical runs") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        const fs::path a = dir.path() / "a";
        const fs::path b = dir.path() / "b";
        run_pipeline(cfg, a);
        run_pipeline(cfg, b);
        for (const auto& name : kAllArtifacts) {
            CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);
        }
    }

    TEST_CASE("worker count leaves every byte unchanged") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        cfg.n_perturbations = 4;
        cfg.k_max = 4;
        const fs::path a = dir.path() / "a";
        const fs::path b = dir.path() / "b";
        cfg.n_workers = 1;
        run_pipeline(cfg, a);
        cfg.n_workers = 3;
        run_pipeline(cfg, b);
        for (const auto& name : kAllArtifacts) {
            if (name == "config.json") continue;  // records the differing worker count
            CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);
        }
    }

    TEST_CASE("resume from the first stage reproduces the run byte for byte") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        const fs::path run_dir = dir.path() / "run";
        run_pipeline(cfg, run_dir);
        std::map<std::string, std::string> before;
        for (const auto& name : kAllArtifacts) before[name] = slurp(run_dir / name);
        resume_pipeline(run_dir, Stage::Ingest);
        for (const auto& name : kAllArtifacts) {
            CHECK_MESSAGE(before[name] == slurp(run_dir / name), name);
        }
    }

    TEST_CASE("resume after a downstream parameter change reuses upstream artifacts") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        const fs::path run_dir = dir.path() / "run";
        run_pipeline(cfg, run_dir);

        const std::string tokens_before = slurp(run_dir / "tokens.jsonl");
        const std::string model_before = slurp(run_dir / "model.txt");

        auto stored = load_config((run_dir / "config.json").string());
        stored.lambda = 0.5;
        save_config(stored, (run_dir / "config.json").string());
        resume_pipeline(run_dir, Stage::SelectK);

        CHECK(slurp(run_dir / "tokens.jsonl") == tokens_before);   // untouched
        CHECK(slurp(run_dir / "model.txt") != model_before);       // re-fit
        auto manifest = manifest_of(run_dir);
        CHECK(manifest["stages"]["select-k"]["params"]["lambda"] == 0.5);
    }

    TEST_CASE("resume refuses to build on tampered artifacts") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        const fs::path run_dir = dir.path() / "run";
        run_pipeline(cfg, run_dir);
        {
            std::ofstream out(run_dir / "tokens.jsonl", std::ios::app);
            out << "{\"doc_id\":\"rogue\",\"tokens\":[\"x\"]}\n";
        }
        CHECK_THROWS_AS(resume_pipeline(run_dir, Stage::SelectK), StaleArtifactError);
    }

    TEST_CASE("resume detects upstream parameter drift") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        const fs::path run_dir = dir.path() / "run";
        run_pipeline(cfg, run_dir);

        auto stored = load_config((run_dir / "config.json").string());
        stored.window = 3;  // invalidates the stored matrices
        save_config(stored, (run_dir / "config.json").string());
        CHECK_THROWS_AS(resume_pipeline(run_dir, Stage::SelectK), StaleArtifactError);
    }

    TEST_CASE("single stage runs need their upstream artifacts") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        const fs::path run_dir = dir.path() / "run";
        CHECK_THROWS_AS(run_single_stage(cfg, run_dir, Stage::Matrices), StaleArtifactError);
    }

    TEST_CASE("fixed k fit supersedes the selected model and analysis follows it") {
        TempDir dir("pipeline");
        RunConfig cfg = small_config(fixture_path(dir));
        const fs::path run_dir = dir.path() / "run";
        run_pipeline(cfg, run_dir);

        run_fit(cfg, run_dir, 4);
        auto manifest = manifest_of(run_dir);
        CHECK(manifest["stages"]["fit"]["params"]["k"] == 4);

        // Analysis and projection rebuild cleanly on the superseding model.
        run_single_stage(cfg, run_dir, Stage::Analyze);
        run_single_stage(cfg, run_dir, Stage::Project);
        const std::string topics = slurp(run_dir / "topics.txt");
        CHECK(topics.find("topic 3") != std::string::npos);
    }

    TEST_CASE("ingest statistics land in the manifest") {
        TempDir dir("pipeline");
        fixture::FixtureOptions fo;
        fo.n_docs = 200;
        fo.seed = 7;
        const std::string path = dir.str("messy.jsonl");
        fixture::write_fixture_dump(fixture::make_planted_corpus(fo), path, /*with_invalid=*/true);

        RunConfig cfg = small_config(path);
        const fs::path run_dir = dir.path() / "run";
        run_pipeline(cfg, run_dir);
        auto manifest = manifest_of(run_dir);
        const auto& info = manifest["stages"]["ingest"]["info"];
        CHECK(info["documents_kept"].get<int>() <= info["records_loaded"].get<int>());
        CHECK(info["skipped_bad_json"].get<int>() +
                  info["skipped_missing_field"].get<int>() >= 2);
        CHECK(info["records_skipped"].get<int>() >= 2);
    }

    TEST_CASE("stage names round trip") {
        for (Stage s : stage_chain()) {
            CHECK(stage_from_name(stage_name(s)) == s);
        }
        CHECK_THROWS_AS(stage_from_name("nonsense"), ConfigError);
    }

    TEST_CASE("worker resolution prefers config then environment") {
        RunConfig cfg;
        cfg.n_workers = 3;
        CHECK(resolve_workers(cfg) == 3);
        cfg.n_workers = 0;
        ::setenv("SENMFK_WORKERS", "2", 1);
        CHECK(resolve_workers(cfg) == 2);
        ::unsetenv("SENMFK_WORKERS");
        CHECK(resolve_workers(cfg) >= 1);
    }
}
