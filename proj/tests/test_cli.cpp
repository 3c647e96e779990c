#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "socsig/cli.hpp"
#include "socsig/corpus.hpp"

using namespace socsig;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("socsig_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run({}).code == cli::kValidation);
    CHECK(run({"frobnicate"}).code == cli::kValidation);
    const auto r = run({"segment", "--bogus"});
    CHECK(r.code == cli::kValidation);
    CHECK(run({"segment", "--window-s", "-3"}).code == cli::kValidation);
    CHECK(run({"--version"}).code == cli::kOk);
    CHECK(run({"--version"}).out.find(cli::kVersion) != std::string::npos);
    CHECK(run({"pipeline", "--help"}).code == cli::kOk);
}

TEST_CASE("missing inputs are validation errors") {
    const auto dir = fresh("missing");
    auto r = run({"segment", "--out", dir.string()});
    CHECK(r.code == cli::kValidation);
    CHECK(r.err.find("--corpus") != std::string::npos);
    r = run({"segment", "--corpus", (dir / "nope.jsonl").string(), "--out", dir.string()});
    CHECK(r.code == cli::kValidation);
    CHECK(r.err.find("nope.jsonl") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("synth then each command") {
    const auto data = fresh("data");
    const auto out = fresh("out");
    auto r = run({"synth", "--n-coded", "12", "--n-uncoded", "8", "--corruption-rate", "0.1", "--plant",
                  "provider_warmth=0.3", "--seed", "3", "--out", data.string()});
    REQUIRE(r.code == cli::kOk);
    CHECK(fs::exists(data / "corpus.jsonl"));
    CHECK(fs::exists(data / "references" / "c0001.txt"));
    CHECK(fs::exists(data / "run_manifest_synth.json"));
    CHECK(run({"synth", "--plant", "provider_sadness=0.1", "--out", data.string() + "_x"}).code == cli::kValidation);
    fs::remove_all(data.string() + "_x");

    const auto corpus = (data / "corpus.jsonl").string();
    const auto ratings = (data / "ratings.csv").string();
    const auto refs = (data / "references").string();
    const auto o = out.string();
    CHECK(run({"segment", "--corpus", corpus, "--out", o}).code == cli::kOk);
    CHECK(run({"asr-eval", "--corpus", corpus, "--references", refs, "--out", o}).code == cli::kOk);
    CHECK(run({"label", "--corpus", corpus, "--ratings", ratings, "--out", o}).code == cli::kOk);
    CHECK(run({"train", "--corpus", corpus, "--ratings", ratings, "--out", o}).code == cli::kOk);
    CHECK(run({"predict", "--corpus", corpus, "--models", (out / "models").string(), "--out", o}).code == cli::kOk);
    const auto preds = (out / "predictions.jsonl").string();
    CHECK(run({"evaluate", "--corpus", corpus, "--ratings", ratings, "--out", o, "--k", "3"}).code == cli::kOk);
    CHECK(run({"fairness", "--corpus", corpus, "--predictions", preds, "--references", refs, "--n-boot", "200",
               "--out", o})
              .code == cli::kOk);
    CHECK(run({"disparity", "--corpus", corpus, "--predictions", preds, "--out", o}).code == cli::kOk);
    CHECK(run({"report", "--out", o}).code == cli::kOk);
    for (const auto* name : {"segments.csv", "asr_eval.csv", "labels.csv", "predictions.jsonl", "evaluation.csv",
                             "fairness.csv", "disparity.csv", "report.md", "run_manifest_report.json"}) {
        CHECK_MESSAGE(fs::exists(out / name), name);
    }
    const auto manifest = nlohmann::json::parse(read_file(out / "run_manifest_disparity.json"));
    CHECK(manifest["version"] == cli::kVersion);
    CHECK(manifest["inputs"]["corpus"]["sha256"] == cli::digest(data / "corpus.jsonl"));
    CHECK(manifest["outputs"].contains("disparity.csv"));

    // Models and an external file together are refused.
    CHECK(run({"predict", "--corpus", corpus, "--models", (out / "models").string(), "--predictions", preds, "--out",
               o})
              .code == cli::kValidation);
    fs::remove_all(data);
    fs::remove_all(out);
}

TEST_CASE("pipeline output directory from the environment") {
    const auto data = fresh("envdata");
    REQUIRE(run({"synth", "--n-coded", "8", "--n-uncoded", "4", "--out", data.string()}).code == cli::kOk);
    const auto out = fresh("envout");
    ::setenv(cli::kOutEnv, out.string().c_str(), 1);
    const auto r = run({"pipeline", "--corpus", (data / "corpus.jsonl").string(), "--ratings",
                        (data / "ratings.csv").string(), "--k", "2", "--n-boot", "100"});
    ::unsetenv(cli::kOutEnv);
    CHECK(r.code == cli::kOk);
    CHECK(fs::exists(out / "report.md"));
    CHECK(fs::exists(out / "run_manifest_pipeline.json"));
    fs::remove_all(data);
    fs::remove_all(out);
}

TEST_CASE("digest") {
    const auto dir = fresh("digest");
    fs::create_directories(dir / "sub");
    { std::ofstream(dir / "a.txt") << "abc"; }
    CHECK(cli::digest(dir / "a.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto before = cli::digest(dir);
    { std::ofstream(dir / "sub" / "b.txt") << "x"; }
    CHECK(cli::digest(dir) != before);
    fs::remove_all(dir);
}
