#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rtlmut {

// Files are byte sequences split on line feeds; terminators stay attached to
// their line so that join(split(x)) == x for any input.
std::vector<std::string> split_lines_keep_ends(std::string_view text);

// Line content without its trailing "\n" (a trailing "\r" is kept; it is
// part of the byte-exact content).
std::string_view strip_eol(std::string_view line);

// Number of lines in a text, counting a trailing fragment without "\n".
// Empty text has 0 lines.
int count_lines(std::string_view text);

// 1-based inclusive line slice, without terminator on the last line iff the
// source lacks one there.
std::string slice_lines(std::string_view text, int start_line, int end_line);

// Whitespace normalization used for structural comparison of code blocks:
// per line, leading/trailing whitespace stripped and internal runs collapsed
// to a single space; lines joined with "\n".
std::string normalize_block(std::string_view text);

std::string trim(std::string_view s);

bool starts_with_word(std::string_view line, std::string_view word);

// Split into words on non-identifier characters (keeps [A-Za-z0-9_$]).
std::vector<std::string> identifier_tokens(std::string_view line);

std::string replace_all(std::string text, std::string_view from, std::string_view to);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace rtlmut
