#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "socsig/corpus.hpp"
#include "socsig/error.hpp"
#include "socsig/report.hpp"

using namespace socsig;

namespace {

const std::filesystem::path kData = SOCSIG_TEST_DATA;

}  // namespace

TEST_CASE("report matches the golden file") {
    std::ostringstream out;
    report::write_report(out, kData / "report");
    CHECK(out.str() == read_file(kData / "report" / "expected.md"));
}

TEST_CASE("missing artifacts are named") {
    std::ostringstream out;
    report::write_report(out, kData / "report_partial");
    const auto text = out.str();
    CHECK(text.find("21 of 21") == std::string::npos);
    CHECK(text.find("Artifact `evaluation.csv` not found.") != std::string::npos);
    CHECK(text.find("Artifact `asr_eval.csv` not found.") != std::string::npos);
    CHECK(text.find("Artifact `fairness.csv` not found.") != std::string::npos);
    CHECK(text.find("Artifact `disparity.csv` not found.") != std::string::npos);
    CHECK(text.find("| hurriedness | ") != std::string::npos);

    std::ostringstream empty;
    report::write_report(empty, kData / "does_not_exist");
    CHECK(empty.str().find("Artifact `labels.csv` not found.") != std::string::npos);
}

TEST_CASE("malformed artifacts are rejected") {
    const auto dir = std::filesystem::temp_directory_path() / "socsig_report_bad";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "evaluation.csv") << "metric,per_signal_mean\naccuracy,0.9\n";
    std::ostringstream out;
    CHECK_THROWS_AS(report::write_report(out, dir), ValidationError);
    std::ofstream(dir / "evaluation.csv", std::ios::trunc)
        << "metric,per_signal_mean,per_signal_sd,pooled_mean,pooled_sd,n_signals,n_cells\naccuracy,high,0,0,0,1,1\n";
    CHECK_THROWS_AS(report::write_report(out, dir), ValidationError);
    std::filesystem::remove_all(dir);
}
