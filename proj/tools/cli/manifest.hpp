#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace statecap::cli {

/// Provenance header written as a '#' comment block at the top of every
/// output document. Re-running the recorded command reproduces the
/// document's data rows byte for byte (the comment block itself may differ,
/// e.g. in duration).
struct RunManifest {
  std::string tool_version;
  std::string schema;                // e.g. "region/v1"
  std::vector<std::string> command;  // argv, command[0] = "statecap"
  std::uint64_t seed = 0;
  std::string config;                // effective option echo, human readable
  double duration_s = 0.0;
};

void write_manifest(std::ostream& out, const RunManifest& m);

/// Reads the manifest block from the head of a previously written document.
/// Returns nullopt when the stream does not start with one.
std::optional<RunManifest> read_manifest(std::istream& in);

/// Joins argv into one shell-style line, quoting arguments that need it.
std::string quote_command(const std::vector<std::string>& argv);

/// Inverse of quote_command. Throws ParseError on unterminated quotes.
std::vector<std::string> split_command(const std::string& line);

}  // namespace statecap::cli
