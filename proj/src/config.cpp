#include "ddkl/config.hpp"

#include <fstream>
#include <stdexcept>

namespace ddkl {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(lineno) + " is not key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
    }
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

void validate_keys(const std::map<std::string, std::string>& cfg,
                   const std::map<std::string, std::string>& allowed_with_help) {
  for (const auto& [key, value] : cfg) {
    (void)value;
    if (!allowed_with_help.count(key)) {
      throw std::runtime_error("config: unknown key '" + key + "'");
    }
  }
}

}  // namespace ddkl
