#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "navstack/messages.hpp"

namespace navstack {

// Flat launcher configuration: one `section.key: value` pair per line, plus
// `remap: <from> <to>` lines. '#' starts a comment; blank lines are ignored.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::vector<std::pair<std::string, std::string>>& remaps() const {
    return remaps_;
  }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, std::string>> remaps_;
};

}  // namespace navstack
