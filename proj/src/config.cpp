#include "navstack/config.hpp"

#include <fstream>
#include <sstream>

namespace navstack {

namespace {

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string s = strip(line);
    if (s.empty()) continue;
    std::size_t colon = s.find(':');
    if (colon == std::string::npos) {
      throw Error("config line " + std::to_string(lineno) + ": missing ':'");
    }
    std::string key = strip(s.substr(0, colon));
    std::string value = strip(s.substr(colon + 1));
    if (key.empty()) {
      throw Error("config line " + std::to_string(lineno) + ": empty key");
    }
    if (key == "remap") {
      std::istringstream pair(value);
      std::string from, to, extra;
      if (!(pair >> from >> to) || (pair >> extra)) {
        throw Error("config line " + std::to_string(lineno) +
                    ": remap wants exactly '<from> <to>'");
      }
      cfg.remaps_.emplace_back(from, to);
      continue;
    }
    if (value.empty()) {
      throw Error("config line " + std::to_string(lineno) + ": empty value for '" +
                  key + "'");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " [" + path + "]");
  }
}

std::string ConfigFile::get_string(const std::string& key,
                                   const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("config key '" + key + "': '" + it->second + "' is not a number");
  }
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw Error("");
    return v;
  } catch (...) {
    throw Error("config key '" + key + "': '" + it->second + "' is not an integer");
  }
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw Error("config key '" + key + "': '" + it->second + "' is not a boolean");
}

}  // namespace navstack
