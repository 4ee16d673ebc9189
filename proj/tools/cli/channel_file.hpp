#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "statecap/channel.hpp"
#include "statecap/error.hpp"

namespace statecap::cli {

/// A channel file failed to parse: syntax, missing or duplicate fields,
/// wrong table shapes. Messages carry "path:line:" prefixes where a line
/// is known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

enum class Model { kSingle, kBc, kRelay, kMac };

const char* to_string(Model m);

/// A parsed channel specification file.
struct ChannelFile {
  Model model = Model::kSingle;
  std::string name;
  std::variant<std::monostate, channel::StateChannel, channel::BroadcastStateChannel,
               channel::RelayStateChannel, channel::MacStateChannel>
      ch;

  const channel::StateChannel& single() const {
    return std::get<channel::StateChannel>(ch);
  }
  const channel::BroadcastStateChannel& bc() const {
    return std::get<channel::BroadcastStateChannel>(ch);
  }
  const channel::RelayStateChannel& relay() const {
    return std::get<channel::RelayStateChannel>(ch);
  }
  const channel::MacStateChannel& mac() const {
    return std::get<channel::MacStateChannel>(ch);
  }
};

/// Parses and validates a channel file. Throws ParseError for syntax and
/// shape problems, ValidationError for bad probabilities (negative entries,
/// rows off 1 by more than 1e-9). Rows off by at most 1e-9 are renormalized;
/// rows already within 1e-14 are kept bit for bit so canonical dumps
/// round-trip exactly.
ChannelFile load_channel_file(const std::string& path);
ChannelFile parse_channel_text(std::istream& in, const std::string& diag_path);

/// Canonical serialization: fixed key order, probabilities as shortest
/// exact round-trip decimals. Reloading a canonical dump reproduces the
/// probability tables bit for bit.
void dump_canonical(std::ostream& out, const ChannelFile& f);

}  // namespace statecap::cli
