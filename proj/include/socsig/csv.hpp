#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace socsig::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: quoted fields may contain commas, CRLF and doubled quotes.
// Each returned row carries the 1-based physical line number it started on.
struct Record {
    std::size_t line = 0;
    Row fields;
};

std::vector<Record> parse(std::string_view content);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

void write_row(std::ostream& os, const Row& row);

}  // namespace socsig::csv
