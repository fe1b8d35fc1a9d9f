#include "rns/io.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace rns {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(no) + ": empty key");
    if (c.has(key)) throw ConfigError("line " + std::to_string(no) + ": duplicate key '" + key + "'");
    c.kv_[key] = value;
  }
  return c;
}

Config Config::load(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::str(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double Config::num(const std::string& key, double def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  // fractions such as 1/512 are accepted
  const auto slash = v.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const double a = std::stod(v.substr(0, slash)), b = std::stod(v.substr(slash + 1));
      return a / b;
    }
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: " + v);
  }
}

long Config::integer(const std::string& key, long def) const {
  const double x = num(key, static_cast<double>(def));
  if (x != std::floor(x)) throw ConfigError("key '" + key + "': not an integer");
  return static_cast<long>(x);
}

std::uint64_t Config::seed(const std::string& key, std::uint64_t def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not an unsigned integer");
  }
}

bool Config::flag(const std::string& key, bool def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': not a boolean");
}

std::vector<double> Config::list(const std::string& key, const std::vector<double>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  Config tmp;
  while (std::getline(ss, item, ',')) {
    tmp.kv_[key] = trim(item);
    out.push_back(tmp.num(key, 0.0));
  }
  return out;
}

std::string Config::canonical() const {
  std::string s;
  for (const auto& [k, v] : kv_) s += k + "=" + v + "\n";
  return s;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string Config::hash() const {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << fnv1a(canonical());
  return o.str();
}

std::string output_root(const std::string& dir) {
  if (!dir.empty()) return dir;
  if (const char* e = std::getenv("RNS_OUT")) return e;
  return ".";
}

void write_checks_csv(const std::string& file, const std::vector<Check>& checks) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out.precision(12);
  out << "name,value,tolerance,pass\n";
  for (const auto& c : checks) out << c.name << "," << c.value << "," << c.tolerance << "," << (c.pass ? 1 : 0) << "\n";
}

std::string library_versions() {
  std::ostringstream o;
  o << "fftw " << fftw_version << "; eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
    << EIGEN_MINOR_VERSION << "; boost " << BOOST_VERSION / 100000 << "." << BOOST_VERSION / 100 % 1000 << "."
    << BOOST_VERSION % 100;
  return o.str();
}

void write_manifest(const std::string& file, const std::string& subcommand, const Config& cfg, std::uint64_t seed,
                    const std::vector<std::string>& outputs, const std::vector<Check>& checks) {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["config_hash"] = cfg.hash();
  j["config"] = cfg.canonical();
  j["seed"] = seed;
  j["versions"] = library_versions();
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["started"] = buf;
  j["outputs"] = outputs;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  bool all = true;
  for (const auto& c : checks) {
    cs.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    all = all && c.pass;
  }
  j["checks"] = cs;
  j["pass"] = all;
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << j.dump(2) << "\n";
}

}  // namespace rns
