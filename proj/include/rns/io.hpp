#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rns {

// key=value configuration. Blank lines and text after '#' are ignored.
class Config {
 public:
  static Config parse(const std::string& text);  // throws ConfigError naming the line
  static Config load(const std::string& file);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& def) const;
  double num(const std::string& key, double def) const;
  long integer(const std::string& key, long def) const;
  std::uint64_t seed(const std::string& key, std::uint64_t def) const;
  bool flag(const std::string& key, bool def) const;
  std::vector<double> list(const std::string& key, const std::vector<double>& def) const;

  // Sorted key=value lines; parse(canonical()) reproduces the same config.
  std::string canonical() const;
  std::string hash() const;  // FNV-1a of canonical(), 16 hex digits
  const std::map<std::string, std::string>& items() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(const std::string& s);

// Output directory: the argument if set, else $RNS_OUT, else the working directory.
std::string output_root(const std::string& dir);

struct Check {
  std::string name;
  double value = 0.0, tolerance = 0.0;
  bool pass = false;
};

// Writes <dir>/<name>_checks.csv (name,value,tolerance,pass).
void write_checks_csv(const std::string& file, const std::vector<Check>& checks);

// manifest.json: subcommand, config hash and text, seed, library versions, start time, outputs, checks.
void write_manifest(const std::string& file, const std::string& subcommand, const Config& cfg, std::uint64_t seed,
                    const std::vector<std::string>& outputs, const std::vector<Check>& checks);

std::string library_versions();

}  // namespace rns
