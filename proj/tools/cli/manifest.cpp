#include "manifest.hpp"

#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "channel_file.hpp"

namespace statecap::cli {

namespace {

bool needs_quoting(const std::string& arg) {
  if (arg.empty()) return true;
  for (char c : arg) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '\\' || c == '#') {
      return true;
    }
  }
  return false;
}

}  // namespace

std::string quote_command(const std::vector<std::string>& argv) {
  std::string out;
  for (size_t i = 0; i < argv.size(); ++i) {
    if (i) out.push_back(' ');
    const std::string& a = argv[i];
    if (!needs_quoting(a)) {
      out += a;
      continue;
    }
    out.push_back('"');
    for (char c : a) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('"');
  }
  return out;
}

std::vector<std::string> split_command(const std::string& line) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::string tok;
    if (line[i] == '"') {
      ++i;
      bool closed = false;
      while (i < line.size()) {
        char c = line[i++];
        if (c == '\\' && i < line.size()) {
          tok.push_back(line[i++]);
        } else if (c == '"') {
          closed = true;
          break;
        } else {
          tok.push_back(c);
        }
      }
      if (!closed) throw ParseError("manifest command: unterminated quote");
    } else {
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) {
        tok.push_back(line[i++]);
      }
    }
    out.push_back(std::move(tok));
  }
  return out;
}

void write_manifest(std::ostream& out, const RunManifest& m) {
  out << "# statecap " << m.tool_version << "\n";
  out << "# schema: " << m.schema << "\n";
  out << "# command: " << quote_command(m.command) << "\n";
  out << "# seed: " << m.seed << "\n";
  if (!m.config.empty()) out << "# config: " << m.config << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", m.duration_s);
  out << "# duration_s: " << buf << "\n";
}

std::optional<RunManifest> read_manifest(std::istream& in) {
  RunManifest m;
  bool have_header = false;
  std::string line;
  while (in.peek() == '#' && std::getline(in, line)) {
    std::string body = line.size() > 1 && line[1] == ' ' ? line.substr(2) : line.substr(1);
    auto starts = [&](const char* prefix) {
      return body.rfind(prefix, 0) == 0;
    };
    auto rest = [&](const char* prefix) {
      return body.substr(std::string(prefix).size());
    };
    if (starts("statecap ")) {
      m.tool_version = rest("statecap ");
      have_header = true;
    } else if (starts("schema: ")) {
      m.schema = rest("schema: ");
    } else if (starts("command: ")) {
      m.command = split_command(rest("command: "));
    } else if (starts("seed: ")) {
      m.seed = std::stoull(rest("seed: "));
    } else if (starts("config: ")) {
      m.config = rest("config: ");
    } else if (starts("duration_s: ")) {
      m.duration_s = std::stod(rest("duration_s: "));
    }
  }
  if (!have_header || m.command.empty()) return std::nullopt;
  return m;
}

}  // namespace statecap::cli
