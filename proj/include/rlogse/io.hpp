#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlogse/experiments.hpp"
#include "rlogse/field.hpp"
#include "rlogse/grid.hpp"

namespace rlogse {

// FNV-1a 64-bit content hash used in run manifests.
std::uint64_t fnv1a64(std::span<const std::byte> bytes);
std::uint64_t fnv1a64(std::string_view text);

// Shortest round-trippable decimal form (17 significant digits).
std::string format_real(double x);

// ---------------------------------------------------------------------------
// Field snapshots: a 13-line text header followed by row-major little-endian
// binary (re, im) float64 pairs. Round-trips bitwise.
// ---------------------------------------------------------------------------

struct SnapshotMeta {
  double t = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  double tau = 0.0;
  int sweeps = 0;
};

std::string encode_snapshot(const ComplexField& field, const SnapshotMeta& meta);

struct Snapshot {
  ComplexField field;
  SnapshotMeta meta;
};

Snapshot decode_snapshot(std::span<const std::byte> bytes);

void write_snapshot(const std::filesystem::path& path, const ComplexField& field,
                    const SnapshotMeta& meta);
Snapshot read_snapshot(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// CSV artifacts. All reals are printed with 17 significant digits; both
// encoders are deterministic byte-for-byte.
// ---------------------------------------------------------------------------

// Header "tau,l2_error,order"; the order column is blank when absent.
std::string encode_convergence_csv(std::span<const ConvergenceRow> rows);

// Header "step,t,e_mass,e_energy,beta1,beta2,newton_iters".
std::string encode_residuals_csv(std::span<const StepRecord> records);

// ---------------------------------------------------------------------------
// Run-configuration text: flat `key = value` lines, '#' comments, blank
// lines ignored. Values are typed on access. Duplicate keys are rejected
// except for keys registered as repeatable (e.g. "gausson").
// ---------------------------------------------------------------------------

struct ConfigMap {
  std::vector<std::pair<std::string, std::string>> entries;  // in file order

  bool has(std::string_view key) const;
  // Single-valued access; throws ConfigError if the key repeats.
  std::optional<std::string> get(std::string_view key) const;
  std::vector<std::string> get_all(std::string_view key) const;
};

ConfigMap parse_config_text(std::string_view text,
                            std::span<const std::string_view> repeatable = {});
ConfigMap read_config_file(const std::filesystem::path& path,
                           std::span<const std::string_view> repeatable = {});

// Typed views of one entry; all throw ConfigError naming the key.
double config_real(const ConfigMap& map, std::string_view key);
long config_int(const ConfigMap& map, std::string_view key);
bool config_bool(const ConfigMap& map, std::string_view key);
std::vector<double> config_real_list(const ConfigMap& map, std::string_view key);

// Whitespace-separated real numbers; `what` labels errors (usually a key).
std::vector<double> parse_real_list(std::string_view text, std::string_view what);

// ---------------------------------------------------------------------------
// Run manifest: the resolved parameter echo (itself valid configuration
// text) followed by one comment line per artifact with its content hash.
// ---------------------------------------------------------------------------

std::string encode_manifest(std::string_view parameter_echo,
                            std::span<const Artifact> artifacts);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);
std::vector<std::byte> read_binary_file(const std::filesystem::path& path);

}  // namespace rlogse
