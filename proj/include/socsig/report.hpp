#pragma once

#include <filesystem>
#include <iosfwd>

namespace socsig::report {

// Combined Markdown over the artifacts found in `dir`: signal catalog with
// label status, cross-validated performance, transcript error rates by
// group, parity differences and group-difference tests. Sections whose
// artifact is missing say so instead of failing.
void write_report(std::ostream& out, const std::filesystem::path& dir);

}  // namespace socsig::report
