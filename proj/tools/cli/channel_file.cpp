#include "channel_file.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

namespace statecap::cli {

namespace {

// Rows whose sum is off 1 by more than kRejectTol are rejected; rows off by
// more than kKeepTol are renormalized; anything closer is kept bit for bit
// (a reloaded canonical dump sums to 1 within a few ulp and must not drift).
constexpr double kRejectTol = 1e-9;
constexpr double kKeepTol = 1e-14;

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct Located {
  std::string value;
  int line = 0;
};

struct RawFile {
  std::string path;
  std::map<std::string, Located> scalars;
  std::vector<Located> kernel_rows;
};

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
  std::ostringstream os;
  os << path;
  if (line > 0) os << ":" << line;
  os << ": " << msg;
  throw ParseError(os.str());
}

double parse_double(const RawFile& raw, int line, const std::string& tok) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  double v = 0.0;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v)) {
    fail(raw.path, line, "invalid number '" + tok + "'");
  }
  return v;
}

std::vector<double> parse_double_list(const RawFile& raw, const Located& loc) {
  std::vector<double> out;
  std::istringstream is(loc.value);
  std::string tok;
  while (is >> tok) out.push_back(parse_double(raw, loc.line, tok));
  if (out.empty()) fail(raw.path, loc.line, "expected a list of numbers");
  return out;
}

int parse_size(const RawFile& raw, const std::string& key) {
  auto it = raw.scalars.find(key);
  if (it == raw.scalars.end()) fail(raw.path, 0, "missing required key '" + key + "'");
  const Located& loc = it->second;
  int v = 0;
  const char* b = loc.value.data();
  const char* e = b + loc.value.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || v < 1 || v > channel::kStrategyCap) {
    fail(raw.path, loc.line, key + " must be an integer in [1, " +
                                 std::to_string(channel::kStrategyCap) + "]");
  }
  return v;
}

// Validates one probability row in place. `what` names the row for
// diagnostics, e.g. "kernel row (x=1, s=0)".
void check_row(const std::string& path, std::vector<double>& row, const std::string& what) {
  double sum = 0.0;
  for (double v : row) {
    if (v < 0.0) {
      throw ValidationError(path + ": negative probability in " + what);
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRejectTol) {
    std::ostringstream os;
    os << path << ": non-stochastic row: " << what << " sums to " << sum;
    throw ValidationError(os.str());
  }
  if (std::abs(sum - 1.0) > kKeepTol) {
    for (double& v : row) v /= sum;
  }
}

RawFile read_raw(std::istream& in, const std::string& path) {
  RawFile raw;
  raw.path = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(path, lineno, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(path, lineno, "empty key");
    if (key == "kernel") {
      raw.kernel_rows.push_back({value, lineno});
      continue;
    }
    auto [it, inserted] = raw.scalars.emplace(key, Located{value, lineno});
    if (!inserted) {
      fail(path, lineno,
           "duplicate key '" + key + "' (first at line " + std::to_string(it->second.line) + ")");
    }
  }
  return raw;
}

// Collects all kernel rows into one flat table, checking count and width.
// `row_label` renders row index -> human-readable indices.
template <typename RowLabel>
std::vector<double> build_kernel(const RawFile& raw, size_t rows, size_t cols,
                                 RowLabel row_label) {
  if (raw.kernel_rows.size() != rows) {
    fail(raw.path, 0,
         "expected " + std::to_string(rows) + " kernel rows, found " +
             std::to_string(raw.kernel_rows.size()));
  }
  std::vector<double> flat;
  flat.reserve(rows * cols);
  for (size_t r = 0; r < rows; ++r) {
    std::vector<double> row = parse_double_list(raw, raw.kernel_rows[r]);
    if (row.size() != cols) {
      fail(raw.path, raw.kernel_rows[r].line,
           "kernel row " + row_label(r) + " has " + std::to_string(row.size()) +
               " entries, expected " + std::to_string(cols));
    }
    check_row(raw.path, row, "kernel row " + row_label(r));
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return flat;
}

prob::Pmf build_state_pmf(const RawFile& raw, int s_size) {
  auto it = raw.scalars.find("state_pmf");
  if (it == raw.scalars.end()) fail(raw.path, 0, "missing required key 'state_pmf'");
  std::vector<double> p = parse_double_list(raw, it->second);
  if (static_cast<int>(p.size()) != s_size) {
    fail(raw.path, it->second.line,
         "state_pmf has " + std::to_string(p.size()) + " entries, expected " +
             std::to_string(s_size));
  }
  check_row(raw.path, p, "state_pmf");
  return prob::Pmf(std::move(p));
}

void append_prob(std::string& line, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  line.push_back(' ');
  line.append(buf, p);
}

void dump_rows(std::ostream& out, const std::vector<double>& flat, size_t rows, size_t cols) {
  for (size_t r = 0; r < rows; ++r) {
    std::string line = "kernel =";
    for (size_t c = 0; c < cols; ++c) append_prob(line, flat[r * cols + c]);
    out << line << "\n";
  }
}

}  // namespace

const char* to_string(Model m) {
  switch (m) {
    case Model::kSingle: return "single";
    case Model::kBc: return "bc";
    case Model::kRelay: return "relay";
    case Model::kMac: return "mac";
  }
  return "?";
}

ChannelFile parse_channel_text(std::istream& in, const std::string& diag_path) {
  RawFile raw = read_raw(in, diag_path);

  ChannelFile out;
  auto mit = raw.scalars.find("model");
  if (mit == raw.scalars.end()) fail(diag_path, 0, "missing required key 'model'");
  const std::string& mv = mit->second.value;
  if (mv == "single") out.model = Model::kSingle;
  else if (mv == "bc") out.model = Model::kBc;
  else if (mv == "relay") out.model = Model::kRelay;
  else if (mv == "mac") out.model = Model::kMac;
  else fail(diag_path, mit->second.line, "model must be one of single, bc, relay, mac");

  if (auto it = raw.scalars.find("name"); it != raw.scalars.end()) out.name = it->second.value;

  switch (out.model) {
    case Model::kSingle: {
      int nx = parse_size(raw, "x_size");
      int ns = parse_size(raw, "s_size");
      int ny = parse_size(raw, "y_size");
      auto label = [&](size_t r) {
        return "(x=" + std::to_string(r / ns) + ", s=" + std::to_string(r % ns) + ")";
      };
      auto k = build_kernel(raw, static_cast<size_t>(nx) * ns, ny, label);
      out.ch = channel::StateChannel(nx, ns, ny, std::move(k), build_state_pmf(raw, ns));
      break;
    }
    case Model::kBc: {
      int nx = parse_size(raw, "x_size");
      int ns = parse_size(raw, "s_size");
      int ny1 = parse_size(raw, "y1_size");
      int ny2 = parse_size(raw, "y2_size");
      auto label = [&](size_t r) {
        return "(x=" + std::to_string(r / ns) + ", s=" + std::to_string(r % ns) + ")";
      };
      auto k = build_kernel(raw, static_cast<size_t>(nx) * ns,
                            static_cast<size_t>(ny1) * ny2, label);
      out.ch = channel::BroadcastStateChannel(nx, ns, ny1, ny2, std::move(k),
                                              build_state_pmf(raw, ns));
      break;
    }
    case Model::kRelay: {
      int nx = parse_size(raw, "x_size");
      int nx1 = parse_size(raw, "x1_size");
      int ns = parse_size(raw, "s_size");
      int ny = parse_size(raw, "y_size");
      int ny1 = parse_size(raw, "y1_size");
      auto label = [&](size_t r) {
        size_t s = r % ns;
        size_t x1 = (r / ns) % nx1;
        size_t x = r / ns / nx1;
        return "(x=" + std::to_string(x) + ", x1=" + std::to_string(x1) +
               ", s=" + std::to_string(s) + ")";
      };
      auto k = build_kernel(raw, static_cast<size_t>(nx) * nx1 * ns,
                            static_cast<size_t>(ny) * ny1, label);
      out.ch = channel::RelayStateChannel(nx, nx1, ns, ny, ny1, std::move(k),
                                          build_state_pmf(raw, ns));
      break;
    }
    case Model::kMac: {
      int n1 = parse_size(raw, "x1_size");
      int n2 = parse_size(raw, "x2_size");
      int ns = parse_size(raw, "s_size");
      int ny = parse_size(raw, "y_size");
      auto label = [&](size_t r) {
        size_t s = r % ns;
        size_t x2 = (r / ns) % n2;
        size_t x1 = r / ns / n2;
        return "(x1=" + std::to_string(x1) + ", x2=" + std::to_string(x2) +
               ", s=" + std::to_string(s) + ")";
      };
      auto k = build_kernel(raw, static_cast<size_t>(n1) * n2 * ns, ny, label);
      out.ch = channel::MacStateChannel(n1, n2, ns, ny, std::move(k),
                                        build_state_pmf(raw, ns));
      break;
    }
  }
  return out;
}

ChannelFile load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return parse_channel_text(in, path);
}

void dump_canonical(std::ostream& out, const ChannelFile& f) {
  out << "model = " << to_string(f.model) << "\n";
  if (!f.name.empty()) out << "name = " << f.name << "\n";

  auto pmf_line = [&](const prob::Pmf& p) {
    std::string line = "state_pmf =";
    for (double v : p.probs()) append_prob(line, v);
    out << line << "\n";
  };

  switch (f.model) {
    case Model::kSingle: {
      const auto& c = f.single();
      out << "x_size = " << c.x_size() << "\n";
      out << "s_size = " << c.s_size() << "\n";
      out << "y_size = " << c.y_size() << "\n";
      pmf_line(c.state_pmf());
      dump_rows(out, c.kernel(), static_cast<size_t>(c.x_size()) * c.s_size(), c.y_size());
      break;
    }
    case Model::kBc: {
      const auto& c = f.bc();
      out << "x_size = " << c.x_size() << "\n";
      out << "s_size = " << c.s_size() << "\n";
      out << "y1_size = " << c.y1_size() << "\n";
      out << "y2_size = " << c.y2_size() << "\n";
      pmf_line(c.state_pmf());
      dump_rows(out, c.kernel(), static_cast<size_t>(c.x_size()) * c.s_size(),
                static_cast<size_t>(c.y1_size()) * c.y2_size());
      break;
    }
    case Model::kRelay: {
      const auto& c = f.relay();
      out << "x_size = " << c.x_size() << "\n";
      out << "x1_size = " << c.x1_size() << "\n";
      out << "s_size = " << c.s_size() << "\n";
      out << "y_size = " << c.y_size() << "\n";
      out << "y1_size = " << c.y1_size() << "\n";
      pmf_line(c.state_pmf());
      dump_rows(out, c.kernel(), static_cast<size_t>(c.x_size()) * c.x1_size() * c.s_size(),
                static_cast<size_t>(c.y_size()) * c.y1_size());
      break;
    }
    case Model::kMac: {
      const auto& c = f.mac();
      out << "x1_size = " << c.x1_size() << "\n";
      out << "x2_size = " << c.x2_size() << "\n";
      out << "s_size = " << c.s_size() << "\n";
      out << "y_size = " << c.y_size() << "\n";
      pmf_line(c.state_pmf());
      dump_rows(out, c.kernel(), static_cast<size_t>(c.x1_size()) * c.x2_size() * c.s_size(),
                c.y_size());
      break;
    }
  }
}

}  // namespace statecap::cli
