#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "phenosample/error.hpp"

namespace phenosample::detail {

using json = nlohmann::ordered_json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

// Calls `fn(object, line_number)` for every non-blank line. Parse failures and
// exceptions thrown by `fn` are rethrown as DecodeError carrying the line.
inline void for_each_json_line(const std::filesystem::path& path,
                               const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json value;
    try {
      value = json::parse(line);
    } catch (const json::exception& e) {
      throw DecodeError(path.string() + ": malformed JSON: " + e.what(), number);
    }
    try {
      fn(value, number);
    } catch (const ValidationError&) {
      throw;
    } catch (const DecodeError&) {
      throw;
    } catch (const json::exception& e) {
      throw DecodeError(path.string() + ": " + e.what(), number);
    }
  }
}

inline std::string dump_line(const json& j) { return j.dump() + "\n"; }

}  // namespace phenosample::detail
