#include "socsig/csv.hpp"

#include <ostream>

#include "socsig/error.hpp"

namespace socsig::csv {

std::vector<Record> parse(std::string_view content) {
    std::vector<Record> records;
    Record current;
    std::string field;
    std::size_t line = 1;
    current.line = line;
    bool in_quotes = false;
    bool field_started = false;
    bool was_quoted = false;

    const auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
        was_quoted = false;
    };
    const auto end_record = [&] {
        end_field();
        // A blank physical line is not a record.
        if (!(current.fields.size() == 1 && current.fields[0].empty())) {
            records.push_back(std::move(current));
        }
        current = Record{};
        current.line = line;
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field_started) {
                throw ValidationError("csv line " + std::to_string(line) + ": stray quote inside unquoted field");
            }
            in_quotes = true;
            field_started = true;
            was_quoted = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            ++line;
            end_record();
            break;
        default:
            if (was_quoted) {
                throw ValidationError("csv line " + std::to_string(line) + ": text after closing quote");
            }
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw ValidationError("csv line " + std::to_string(current.line) + ": unterminated quoted field");
    }
    if (field_started || !current.fields.empty()) end_record();
    return records;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& os, const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        os << escape(row[i]);
    }
    os << '\n';
}

}  // namespace socsig::csv
