#include "rtlmut/text.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "rtlmut/errors.hpp"

namespace rtlmut {

std::vector<std::string> split_lines_keep_ends(std::string_view text) {
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(pos));
      break;
    }
    lines.emplace_back(text.substr(pos, nl - pos + 1));
    pos = nl + 1;
  }
  return lines;
}

std::string_view strip_eol(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  return line;
}

int count_lines(std::string_view text) {
  if (text.empty()) return 0;
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  if (text.back() != '\n') ++n;
  return n;
}

std::string slice_lines(std::string_view text, int start_line, int end_line) {
  auto lines = split_lines_keep_ends(text);
  std::string out;
  for (int i = start_line; i <= end_line; ++i) {
    if (i < 1 || i > static_cast<int>(lines.size())) break;
    out += lines[i - 1];
  }
  return out;
}

std::string normalize_block(std::string_view text) {
  std::string out;
  auto lines = split_lines_keep_ends(text);
  for (size_t li = 0; li < lines.size(); ++li) {
    std::string_view line = strip_eol(lines[li]);
    std::string norm;
    bool in_ws = true;  // swallows leading whitespace
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        in_ws = true;
      } else {
        if (in_ws && !norm.empty()) norm += ' ';
        in_ws = false;
        norm += c;
      }
    }
    if (li > 0) out += '\n';
    out += norm;
  }
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool starts_with_word(std::string_view line, std::string_view word) {
  size_t b = 0;
  while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
  if (line.size() - b < word.size()) return false;
  if (line.compare(b, word.size(), word) != 0) return false;
  size_t after = b + word.size();
  if (after < line.size()) {
    char c = line[after];
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$') return false;
  }
  return true;
}

std::vector<std::string> identifier_tokens(std::string_view line) {
  std::vector<std::string> toks;
  std::string cur;
  for (char c : line) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      cur += c;
    } else if (!cur.empty()) {
      toks.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) toks.push_back(cur);
  return toks;
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  if (from.empty()) return text;
  size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace rtlmut
