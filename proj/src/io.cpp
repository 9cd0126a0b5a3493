#include "rlogse/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rlogse/errors.hpp"

namespace rlogse {

namespace {

constexpr std::string_view kSnapshotMagic = "rlogse-snapshot";
constexpr std::string_view kSnapshotFormat = "complex-f64-le";

void append_le_f64(std::string& out, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  if constexpr (std::endian::native != std::endian::little) {
    std::uint64_t swapped = 0;
    for (int i = 0; i < 8; ++i) {
      swapped = (swapped << 8) | ((bits >> (8 * i)) & 0xffULL);
    }
    bits = swapped;
  }
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.append(buf, 8);
}

double read_le_f64(const std::byte* p) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native != std::endian::little) {
    std::uint64_t swapped = 0;
    for (int i = 0; i < 8; ++i) {
      swapped = (swapped << 8) | ((bits >> (8 * i)) & 0xffULL);
    }
    bits = swapped;
  }
  return std::bit_cast<double>(bits);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_real_token(std::string_view token, std::string_view what) {
  const std::string text(token);
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE) {
    std::ostringstream os;
    os << what << ": expected a real number, got '" << text << "'";
    throw ConfigError(os.str());
  }
  return value;
}

long parse_int_token(std::string_view token, std::string_view what) {
  const std::string text(token);
  errno = 0;
  char* end = nullptr;
  const long value = std::strtol(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE) {
    std::ostringstream os;
    os << what << ": expected an integer, got '" << text << "'";
    throw ConfigError(os.str());
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const std::byte b : bytes) {
    h ^= std::to_integer<std::uint64_t>(b);
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text) {
  return fnv1a64(std::as_bytes(std::span{text.data(), text.size()}));
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string encode_snapshot(const ComplexField& field, const SnapshotMeta& meta) {
  const Grid& g = field.grid();
  std::string out;
  out.reserve(512 + 16 * field.size());
  auto line = [&out](const std::string& s) {
    out += s;
    out += '\n';
  };
  line(std::string(kSnapshotMagic));
  line("version 1");
  line("dims " + std::to_string(g.dims()));
  line("nodes " + std::to_string(g.nx()) + " " + std::to_string(g.ny()));
  line("xbounds " + format_real(g.x_lo()) + " " + format_real(g.x_hi()));
  line("ybounds " + format_real(g.y_lo()) + " " + format_real(g.y_hi()));
  line("t " + format_real(meta.t));
  line("lambda " + format_real(meta.lambda));
  line("epsilon " + format_real(meta.epsilon));
  line("tau " + format_real(meta.tau));
  line("sweeps " + std::to_string(meta.sweeps));
  line("layout row-major");
  line("format " + std::string(kSnapshotFormat));
  for (const Complex z : field.values()) {
    append_le_f64(out, z.real());
    append_le_f64(out, z.imag());
  }
  return out;
}

namespace {

struct HeaderReader {
  std::span<const std::byte> bytes;
  std::size_t pos = 0;
  int lineno = 0;

  std::string next_line() {
    ++lineno;
    std::string line;
    while (pos < bytes.size()) {
      const char c = static_cast<char>(std::to_integer<unsigned char>(bytes[pos]));
      ++pos;
      if (c == '\n') return line;
      line += c;
    }
    throw IoError("snapshot: truncated header at line " + std::to_string(lineno));
  }

  // Returns the value part of a "key value..." line, checking the key.
  std::string expect(std::string_view key) {
    const std::string line = next_line();
    if (line.size() < key.size() || std::string_view(line).substr(0, key.size()) != key ||
        (line.size() > key.size() && line[key.size()] != ' ')) {
      throw IoError("snapshot: header line " + std::to_string(lineno) + " should start with '" +
                    std::string(key) + "', got '" + line + "'");
    }
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
  }
};

}  // namespace

namespace {

Snapshot decode_snapshot_impl(std::span<const std::byte> bytes) {
  HeaderReader r{bytes};
  if (r.next_line() != kSnapshotMagic) {
    throw IoError("snapshot: bad magic string");
  }
  if (r.expect("version") != "1") {
    throw IoError("snapshot: unsupported version");
  }
  const long dims = parse_int_token(r.expect("dims"), "snapshot dims");
  // Keep each line alive past split_ws: the split yields views into it.
  const std::string nodes_line = r.expect("nodes");
  const auto nodes = split_ws(nodes_line);
  if (nodes.size() != 2) throw IoError("snapshot: nodes line needs two counts");
  const long nx = parse_int_token(nodes[0], "snapshot nodes");
  const long ny = parse_int_token(nodes[1], "snapshot nodes");
  const std::string xb_line = r.expect("xbounds");
  const std::string yb_line = r.expect("ybounds");
  const auto xb = split_ws(xb_line);
  const auto yb = split_ws(yb_line);
  if (xb.size() != 2 || yb.size() != 2) {
    throw IoError("snapshot: bounds lines need two reals");
  }
  const double x_lo = parse_real_token(xb[0], "snapshot xbounds");
  const double x_hi = parse_real_token(xb[1], "snapshot xbounds");
  const double y_lo = parse_real_token(yb[0], "snapshot ybounds");
  const double y_hi = parse_real_token(yb[1], "snapshot ybounds");
  SnapshotMeta meta;
  meta.t = parse_real_token(r.expect("t"), "snapshot t");
  meta.lambda = parse_real_token(r.expect("lambda"), "snapshot lambda");
  meta.epsilon = parse_real_token(r.expect("epsilon"), "snapshot epsilon");
  meta.tau = parse_real_token(r.expect("tau"), "snapshot tau");
  meta.sweeps = static_cast<int>(parse_int_token(r.expect("sweeps"), "snapshot sweeps"));
  if (r.expect("layout") != "row-major") {
    throw IoError("snapshot: unsupported layout");
  }
  if (r.expect("format") != kSnapshotFormat) {
    throw IoError("snapshot: unsupported value format");
  }

  Grid grid = [&] {
    try {
      if (dims == 1) {
        if (ny != 1 || y_lo != 0.0 || y_hi != 1.0) {
          throw IoError("snapshot: inconsistent y axis for a 1-D field");
        }
        return Grid::make_1d(x_lo, x_hi, nx);
      }
      if (dims == 2) {
        return Grid::make_2d(x_lo, x_hi, nx, y_lo, y_hi, ny);
      }
      throw IoError("snapshot: dims must be 1 or 2");
    } catch (const ConfigError& e) {
      throw IoError(std::string("snapshot: invalid grid: ") + e.what());
    }
  }();

  const std::size_t expected = 16 * grid.size();
  if (bytes.size() - r.pos != expected) {
    throw IoError("snapshot: payload size mismatch (expected " + std::to_string(expected) +
                  " bytes, got " + std::to_string(bytes.size() - r.pos) + ")");
  }
  ComplexField field(grid);
  auto vals = field.values();
  const std::byte* p = bytes.data() + r.pos;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double re = read_le_f64(p);
    const double im = read_le_f64(p + 8);
    vals[i] = {re, im};
    p += 16;
  }
  return {std::move(field), meta};
}

}  // namespace

Snapshot decode_snapshot(std::span<const std::byte> bytes) {
  try {
    return decode_snapshot_impl(bytes);
  } catch (const ConfigError& e) {
    // The shared token parsers flag bad numbers as configuration problems;
    // inside a snapshot they mean the file is damaged.
    throw IoError(std::string("snapshot: ") + e.what());
  }
}

void write_snapshot(const std::filesystem::path& path, const ComplexField& field,
                    const SnapshotMeta& meta) {
  write_text_file(path, encode_snapshot(field, meta));
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  const std::vector<std::byte> bytes = read_binary_file(path);
  return decode_snapshot(bytes);
}

std::string encode_convergence_csv(std::span<const ConvergenceRow> rows) {
  std::string out = "tau,l2_error,order\n";
  for (const ConvergenceRow& row : rows) {
    out += format_real(row.tau);
    out += ',';
    out += format_real(row.l2_error);
    out += ',';
    if (row.order) out += format_real(*row.order);
    out += '\n';
  }
  return out;
}

std::string encode_residuals_csv(std::span<const StepRecord> records) {
  std::string out = "step,t,e_mass,e_energy,beta1,beta2,newton_iters\n";
  for (const StepRecord& r : records) {
    out += std::to_string(r.step);
    out += ',';
    out += format_real(r.t);
    out += ',';
    out += format_real(r.e_mass);
    out += ',';
    out += format_real(r.e_energy);
    out += ',';
    out += format_real(r.beta1);
    out += ',';
    out += format_real(r.beta2);
    out += ',';
    out += std::to_string(r.newton_iters);
    out += '\n';
  }
  return out;
}

bool ConfigMap::has(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return true;
  }
  return false;
}

std::optional<std::string> ConfigMap::get(std::string_view key) const {
  std::optional<std::string> found;
  for (const auto& [k, v] : entries) {
    if (k != key) continue;
    if (found) {
      throw ConfigError("key '" + std::string(key) + "' appears more than once");
    }
    found = v;
  }
  return found;
}

std::vector<std::string> ConfigMap::get_all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries) {
    if (k == key) out.push_back(v);
  }
  return out;
}

ConfigMap parse_config_text(std::string_view text,
                            std::span<const std::string_view> repeatable) {
  ConfigMap map;
  std::size_t start = 0;
  int lineno = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("configuration line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + std::string(line) + "'");
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    if (key.empty() ||
        !std::ranges::all_of(key, [](char c) {
          return std::islower(static_cast<unsigned char>(c)) ||
                 std::isdigit(static_cast<unsigned char>(c)) || c == '_';
        })) {
      throw ConfigError("configuration line " + std::to_string(lineno) +
                        ": malformed key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError("configuration key '" + key + "' has an empty value");
    }
    const bool repeat_ok =
        std::ranges::find(repeatable, std::string_view(key)) != repeatable.end();
    if (!repeat_ok && map.has(key)) {
      throw ConfigError("duplicate configuration key '" + key + "'");
    }
    map.entries.emplace_back(key, value);
  }
  return map;
}

ConfigMap read_config_file(const std::filesystem::path& path,
                           std::span<const std::string_view> repeatable) {
  return parse_config_text(read_text_file(path), repeatable);
}

double config_real(const ConfigMap& map, std::string_view key) {
  const auto v = map.get(key);
  if (!v) throw ConfigError("missing required key '" + std::string(key) + "'");
  return parse_real_token(*v, "key '" + std::string(key) + "'");
}

long config_int(const ConfigMap& map, std::string_view key) {
  const auto v = map.get(key);
  if (!v) throw ConfigError("missing required key '" + std::string(key) + "'");
  return parse_int_token(*v, "key '" + std::string(key) + "'");
}

bool config_bool(const ConfigMap& map, std::string_view key) {
  const auto v = map.get(key);
  if (!v) throw ConfigError("missing required key '" + std::string(key) + "'");
  if (*v == "true") return true;
  if (*v == "false") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true or false, got '" + *v + "'");
}

std::vector<double> config_real_list(const ConfigMap& map, std::string_view key) {
  const auto v = map.get(key);
  if (!v) throw ConfigError("missing required key '" + std::string(key) + "'");
  return parse_real_list(*v, "key '" + std::string(key) + "'");
}

std::vector<double> parse_real_list(std::string_view text, std::string_view what) {
  const auto tokens = split_ws(text);
  if (tokens.empty()) {
    throw ConfigError(std::string(what) + ": expected at least one real number");
  }
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const std::string_view t : tokens) {
    out.push_back(parse_real_token(t, what));
  }
  return out;
}

std::string encode_manifest(std::string_view parameter_echo,
                            std::span<const Artifact> artifacts) {
  std::string out{parameter_echo};
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += "# artifacts\n";
  for (const Artifact& a : artifacts) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016" PRIx64, a.fnv1a);
    out += "# file ";
    out += a.name;
    out += " fnv1a64 ";
    out += hex;
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.flush();
  if (!f) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream os;
  os << f.rdbuf();
  if (!f && !f.eof()) {
    throw IoError("failed reading '" + path.string() + "'");
  }
  return std::move(os).str();
}

std::vector<std::byte> read_binary_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<std::byte> bytes(text.size());
  std::memcpy(bytes.data(), text.data(), text.size());
  return bytes;
}

}  // namespace rlogse
