#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flowae/error.hpp"

namespace flowae::csv {

using Row = std::vector<std::string>;

// RFC-4180 reader: quoted fields may contain the delimiter, doubled quotes and
// line breaks. Accepts LF or CRLF line endings. A trailing newline does not
// produce an empty record.
class Reader {
public:
    explicit Reader(std::istream& in, char delimiter = ',') : in_(in), delim_(delimiter) {}

    bool next(Row& row) {
        row.clear();
        if (in_.peek() == std::char_traits<char>::eof()) return false;
        std::string field;
        bool quoted = false;
        bool field_started = false;
        for (;;) {
            const int c = in_.get();
            if (c == std::char_traits<char>::eof()) {
                if (quoted) throw Error(ErrorKind::Io, "unterminated quoted field at record " + std::to_string(line_));
                row.push_back(std::move(field));
                ++line_;
                return true;
            }
            const char ch = static_cast<char>(c);
            if (quoted) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push_back(ch);
                }
                continue;
            }
            if (ch == '"' && !field_started) {
                quoted = true;
                field_started = true;
            } else if (ch == delim_) {
                row.push_back(std::move(field));
                field.clear();
                field_started = false;
            } else if (ch == '\r' && in_.peek() == '\n') {
                // handled by the '\n' branch
            } else if (ch == '\n') {
                row.push_back(std::move(field));
                ++line_;
                return true;
            } else {
                field.push_back(ch);
                field_started = true;
            }
        }
    }

    std::size_t records_read() const noexcept { return line_; }

private:
    std::istream& in_;
    char delim_;
    std::size_t line_ = 0;
};

inline std::string escape(std::string_view field, char delimiter = ',') {
    const bool needs_quotes = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

// Shortest round-trip decimal form; integral values keep a ".0" suffix.
inline std::string format_number(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    std::string out(buf, end);
    if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
    return out;
}

inline void write_row(std::ostream& out, const Row& row, char delimiter = ',') {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << delimiter;
        out << escape(row[i], delimiter);
    }
    out << '\n';
}

}  // namespace flowae::csv
