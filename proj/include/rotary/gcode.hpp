#pragma once

// Line-oriented lexer, parser and sanitizer for the GRBL G-code dialect.
//
// Every parsed line keeps its exact text and terminator, so serializing an
// untouched program reproduces the input byte for byte. Edits (axis
// stripping, feed rewrites) operate on word spans inside that text and
// re-parse the result, leaving surrounding spacing and comments alone.

#include <algorithm>
#include <charconv>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "rotary/common.hpp"

namespace rotary::gcode {

enum class CommentStyle { paren, semicolon };

struct Comment {
    CommentStyle style = CommentStyle::paren;
    std::string text;  // inner text, delimiters excluded
};

struct Word {
    char letter = 'G';     // always uppercase
    std::string number;    // numeric text exactly as written
    double value = 0.0;
    std::string source;    // full token as written, e.g. "z-1.20"
    std::size_t column = 0;  // 0-based offset of the token in the line

    std::string text() const { return source.empty() ? letter + number : source; }
    bool is(char l, double code) const { return letter == l && value == code; }
};

enum class LineKind { motion, modal, comment_only, blank, other };

inline const char* to_string(LineKind kind) {
    switch (kind) {
    case LineKind::motion: return "motion";
    case LineKind::modal: return "modal";
    case LineKind::comment_only: return "comment_only";
    case LineKind::blank: return "blank";
    case LineKind::other: return "other";
    }
    return "other";
}

struct GcodeLine {
    std::string text;         // line content without terminator
    std::string eol = "\n";   // "\n", "\r\n", or "" for an unterminated last line
    std::size_t number = 0;   // 1-based source line; 0 for synthesized lines
    std::vector<Word> words;
    std::vector<Comment> comments;
    LineKind kind = LineKind::blank;
    bool delimiter = false;   // '%' tape marker

    const Word* find(char letter) const {
        for (const auto& w : words)
            if (w.letter == letter) return &w;
        return nullptr;
    }
    bool has(char letter) const { return find(letter) != nullptr; }
    bool has_command(char letter, double code) const {
        return std::any_of(words.begin(), words.end(),
                           [&](const Word& w) { return w.is(letter, code); });
    }
};

struct GcodeProgram {
    std::vector<GcodeLine> lines;
    std::string source_name;
};

inline bool is_axis_letter(char c) {
    return c == 'X' || c == 'Y' || c == 'Z' || c == 'A' || c == 'B' || c == 'C';
}

inline bool is_motion_word(const Word& w) {
    return w.letter == 'G' && (w.value == 0 || w.value == 1 || w.value == 2 || w.value == 3);
}

namespace detail {

inline bool is_blank_char(char c) { return c == ' ' || c == '\t'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }

inline LineKind classify(const GcodeLine& line) {
    if (line.words.empty()) {
        if (line.delimiter) return LineKind::other;
        return line.comments.empty() ? LineKind::blank : LineKind::comment_only;
    }
    bool modal = false;
    for (const auto& w : line.words) {
        if (is_motion_word(w) || is_axis_letter(w.letter)) return LineKind::motion;
        if (w.letter == 'G' || w.letter == 'M' || w.letter == 'F' || w.letter == 'S' ||
            w.letter == 'T')
            modal = true;
    }
    return modal ? LineKind::modal : LineKind::other;
}

} // namespace detail

/// Parses a single line (no terminator). Throws ParseError with 1-based
/// columns for letters without a number, unterminated or nested
/// parenthesized comments, and characters outside the dialect.
inline GcodeLine parse_line(std::string_view text, std::size_t number, std::string eol = "\n") {
    using namespace detail;
    GcodeLine line;
    line.text = std::string(text);
    line.eol = std::move(eol);
    line.number = number;
    const std::size_t report_line = number == 0 ? 1 : number;

    std::size_t i = 0;
    bool seen_token = false;
    while (i < text.size()) {
        const char c = text[i];
        if (is_blank_char(c)) {
            ++i;
            continue;
        }
        if (c == '(') {
            std::size_t j = i + 1;
            while (j < text.size() && text[j] != ')') {
                if (text[j] == '(')
                    throw ParseError(report_line, j + 1, "nested comment");
                ++j;
            }
            if (j == text.size())
                throw ParseError(report_line, i + 1, "unterminated comment");
            line.comments.push_back({CommentStyle::paren, std::string(text.substr(i + 1, j - i - 1))});
            i = j + 1;
            seen_token = true;
            continue;
        }
        if (c == ';') {
            line.comments.push_back({CommentStyle::semicolon, std::string(text.substr(i + 1))});
            break;
        }
        if (c == '%' && !seen_token) {
            line.delimiter = true;
            seen_token = true;
            ++i;
            continue;
        }
        if (c == ')')
            throw ParseError(report_line, i + 1, "unbalanced ')'");
        if (is_alpha(c)) {
            const std::size_t start = i;
            std::size_t j = i + 1;
            if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
            std::size_t digits = 0;
            while (j < text.size() && is_digit(text[j])) ++j, ++digits;
            if (j < text.size() && text[j] == '.') {
                ++j;
                while (j < text.size() && is_digit(text[j])) ++j, ++digits;
            }
            const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            if (digits == 0)
                throw ParseError(report_line, start + 1,
                                 std::string("malformed word '") + upper + "' (letter without number)");
            Word w;
            w.letter = upper;
            w.number = std::string(text.substr(start + 1, j - start - 1));
            w.source = std::string(text.substr(start, j - start));
            w.column = start;
            std::string_view num = w.number;
            if (!num.empty() && num.front() == '+') num.remove_prefix(1);
            auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), w.value);
            if (ec != std::errc() || ptr != num.data() + num.size())
                throw ParseError(report_line, start + 2, "invalid number '" + w.number + "'");
            line.words.push_back(std::move(w));
            i = j;
            seen_token = true;
            continue;
        }
        throw ParseError(report_line, i + 1,
                         std::string("unexpected character '") + c + "'");
    }
    line.kind = classify(line);
    return line;
}

/// Splits on LF, recognising CRLF per line. A trailing terminator does not
/// start an extra line.
inline GcodeProgram parse_program(std::string_view text, std::string source_name = {}) {
    GcodeProgram program;
    program.source_name = std::move(source_name);
    std::size_t pos = 0;
    std::size_t number = 1;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view body;
        std::string eol;
        if (nl == std::string_view::npos) {
            body = text.substr(pos);
            pos = text.size();
        } else {
            body = text.substr(pos, nl - pos);
            eol = "\n";
            pos = nl + 1;
        }
        if (!body.empty() && body.back() == '\r' && !eol.empty()) {
            body.remove_suffix(1);
            eol = "\r\n";
        }
        program.lines.push_back(parse_line(body, number++, std::move(eol)));
    }
    return program;
}

inline std::string serialize(const GcodeLine& line) { return line.text + line.eol; }

inline std::string serialize(const GcodeProgram& program) {
    std::string out;
    for (const auto& line : program.lines) {
        out += line.text;
        out += line.eol;
    }
    return out;
}

/// A synthesized LF-terminated line.
inline GcodeLine make_line(std::string_view text) { return parse_line(text, 0, "\n"); }

/// Removes the words at `indices` from the line text, taking the blank run
/// that separated each one from its predecessor (or successor, at the start
/// of the line) with it.
inline GcodeLine erase_words(const GcodeLine& line, std::vector<std::size_t> indices) {
    std::sort(indices.rbegin(), indices.rend());
    std::string text = line.text;
    for (std::size_t idx : indices) {
        const Word& w = line.words.at(idx);
        std::size_t begin = w.column;
        std::size_t end = w.column + w.source.size();
        std::size_t lead = begin;
        while (lead > 0 && detail::is_blank_char(text[lead - 1])) --lead;
        if (lead > 0) {
            begin = lead;
        } else {
            while (end < text.size() && detail::is_blank_char(text[end])) ++end;
        }
        text.erase(begin, end - begin);
    }
    return parse_line(text, line.number, line.eol);
}

/// Replaces one word's token with `replacement` (e.g. "F975.0000").
inline GcodeLine replace_word(const GcodeLine& line, std::size_t index, std::string_view replacement) {
    const Word& w = line.words.at(index);
    std::string text = line.text;
    text.replace(w.column, w.source.size(), replacement);
    return parse_line(text, line.number, line.eol);
}

/// Removes every word with `axis` from the program. Lines left holding only
/// G0/G1/N words are dropped, or reduced to their comments if they carry any.
inline GcodeProgram strip_axis(const GcodeProgram& program, char axis) {
    axis = static_cast<char>(std::toupper(static_cast<unsigned char>(axis)));
    if (axis != 'X' && axis != 'Y' && axis != 'Z')
        throw DomainError("axis", std::string("cannot strip axis '") + axis + "'; expected X, Y or Z");

    GcodeProgram out;
    out.source_name = program.source_name;
    out.lines.reserve(program.lines.size());
    for (const auto& line : program.lines) {
        if (!line.has(axis)) {
            out.lines.push_back(line);
            continue;
        }
        std::vector<std::size_t> doomed;
        bool bare = true;
        for (std::size_t i = 0; i < line.words.size(); ++i) {
            const Word& w = line.words[i];
            if (w.letter == axis) {
                doomed.push_back(i);
            } else if (!(w.is('G', 0) || w.is('G', 1) || w.letter == 'N')) {
                bare = false;
            }
        }
        if (bare) {
            if (line.comments.empty()) continue;
            std::vector<std::size_t> all(line.words.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            out.lines.push_back(erase_words(line, std::move(all)));
        } else {
            out.lines.push_back(erase_words(line, std::move(doomed)));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metadata

enum class Provenance { comment, fallback, user };

inline const char* to_string(Provenance p) {
    switch (p) {
    case Provenance::comment: return "comment";
    case Provenance::fallback: return "fallback";
    case Provenance::user: return "user";
    }
    return "fallback";
}

inline constexpr double kFallbackToolDiameter = 3.175;  // mm, 1/8" end mill
inline constexpr double kFallbackFeedrate = 1000.0;     // mm/min

struct ToolMetadata {
    double tool_diameter = kFallbackToolDiameter;
    double feedrate = kFallbackFeedrate;
    std::optional<double> spindle_speed;  // first S word, if any
    Provenance diameter_source = Provenance::fallback;
    Provenance feedrate_source = Provenance::fallback;
};

/// Tool diameter from the first comment matching "D=<n>", "DIA <n>" or
/// "Ø<n>" (case-insensitive); feedrate from the first positive F word.
inline ToolMetadata extract_metadata(const GcodeProgram& program) {
    static const std::regex diameter_re(
        R"((?:^|[^A-Z0-9_])(?:D\s*=\s*|DIA(?:METER|\.)?\s*[:=]?\s*|\xC3\x98\s*|\xC3\xB8\s*)\+?(\d+(?:\.\d*)?|\.\d+))",
        std::regex::icase | std::regex::ECMAScript);

    ToolMetadata meta;
    bool have_diameter = false;
    bool have_feed = false;
    for (const auto& line : program.lines) {
        if (!have_diameter) {
            for (const auto& c : line.comments) {
                auto begin = std::sregex_iterator(c.text.begin(), c.text.end(), diameter_re);
                for (auto it = begin; it != std::sregex_iterator(); ++it) {
                    double d = std::stod((*it)[1].str());
                    if (d > 0) {
                        meta.tool_diameter = d;
                        meta.diameter_source = Provenance::comment;
                        have_diameter = true;
                        break;
                    }
                }
                if (have_diameter) break;
            }
        }
        for (const auto& w : line.words) {
            if (!have_feed && w.letter == 'F' && w.value > 0) {
                meta.feedrate = w.value;
                meta.feedrate_source = Provenance::comment;
                have_feed = true;
            }
            if (!meta.spindle_speed && w.letter == 'S' && w.value > 0) meta.spindle_speed = w.value;
        }
    }
    return meta;
}

// ---------------------------------------------------------------------------
// Planarity validation

enum class Severity { warning, fatal };

struct Finding {
    Severity severity = Severity::warning;
    std::size_t line = 0;  // 1-based source line, 0 for program-wide findings
    std::string message;

    std::string describe() const {
        return line == 0 ? message : message + " at line " + std::to_string(line);
    }
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool empty() const { return findings.empty(); }
    bool has_fatal() const {
        return std::any_of(findings.begin(), findings.end(),
                           [](const Finding& f) { return f.severity == Severity::fatal; });
    }
    std::vector<Finding> of(Severity s) const {
        std::vector<Finding> out;
        for (const auto& f : findings)
            if (f.severity == s) out.push_back(f);
        return out;
    }
};

/// Checks that a program is a linear, absolute, metric XZ toolpath. Fatal:
/// arcs, Y words, rotary axis words, canned cycles, G91, G20. Warnings:
/// missing G21/G90 and machine-coordinate moves that also move Y.
inline ValidationReport validate_planar(const GcodeProgram& program) {
    ValidationReport report;
    bool saw_units = false;
    bool saw_absolute = false;
    auto fatal = [&](std::size_t n, std::string msg) {
        report.findings.push_back({Severity::fatal, n, std::move(msg)});
    };
    for (const auto& line : program.lines) {
        const std::size_t n = line.number;
        for (const auto& w : line.words) {
            if (w.letter == 'G') {
                if (w.value == 2 || w.value == 3) fatal(n, "arc motion unsupported");
                else if (w.value == 91) fatal(n, "incremental positioning (G91) unsupported");
                else if (w.value == 20) fatal(n, "inch units (G20) unsupported");
                else if (w.value == 73 || w.value == 76 || (w.value >= 81 && w.value <= 89))
                    fatal(n, "canned cycle G" + w.number + " unsupported");
                else if (w.value == 21) saw_units = true;
                else if (w.value == 90) saw_absolute = true;
                else if (w.value == 28 || w.value == 30 || w.value == 53)
                    report.findings.push_back(
                        {Severity::warning, n, "machine-coordinate move G" + w.number + " may also move the Y axis"});
            } else if (w.letter == 'Y') {
                fatal(n, "Y word present (Y is reserved for rotary indexing)");
            } else if (w.letter == 'A' || w.letter == 'B' || w.letter == 'C') {
                fatal(n, std::string("rotary axis word ") + w.letter + " unsupported");
            }
        }
    }
    if (!saw_units)
        report.findings.push_back({Severity::warning, 0, "units not stated (no G21); millimetres assumed"});
    if (!saw_absolute)
        report.findings.push_back({Severity::warning, 0, "positioning mode not stated (no G90); absolute assumed"});
    return report;
}

} // namespace rotary::gcode
