#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rmdim::app {

using Json = nlohmann::json;

/// 17 significant digits; non-finite values print as nan / inf / -inf.
std::string format_double(double v);

/// Sorted keys, floats at 17 significant digits, non-finite floats as null.
std::string dump_json(const Json& j, int indent = 2);

std::uint64_t fnv1a64(std::string_view bytes);

/// Object view that records which keys were read; finish() rejects the rest.
class Reader {
 public:
  Reader(const Json& j, std::string path);

  const std::string& path() const noexcept { return path_; }
  std::string path_of(std::string_view key) const;
  bool has(std::string_view key) const;

  const Json& at(std::string_view key) const;
  const Json* find(std::string_view key) const;
  Reader child(std::string_view key) const;
  std::optional<Reader> child_opt(std::string_view key) const;

  template <class T>
  T get(std::string_view key) const {
    return convert<T>(at(key), path_of(key));
  }
  template <class T>
  T get_or(std::string_view key, T fallback) const {
    const Json* j = find(key);
    return j ? convert<T>(*j, path_of(key)) : fallback;
  }

  template <class T>
  static T convert(const Json& j, const std::string& path);

  void finish() const;

 private:
  const Json* j_;
  std::string path_;
  mutable std::set<std::string, std::less<>> used_;
};

[[noreturn]] void type_mismatch(const std::string& path, std::string_view expected);

template <class T>
T Reader::convert(const Json& j, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) type_mismatch(path, "a boolean");
    return j.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) type_mismatch(path, "an integer");
    if constexpr (std::is_unsigned_v<T>)
      if (j.is_number_integer() && !j.is_number_unsigned()) type_mismatch(path, "a nonnegative integer");
    return j.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) type_mismatch(path, "a number");
    return j.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) type_mismatch(path, "a string");
    return j.get<std::string>();
  } else {
    // std::vector<U>
    if (!j.is_array()) type_mismatch(path, "an array");
    T out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(convert<typename T::value_type>(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }
}

/// CSV with a fixed header; cells are preformatted strings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "true" : "false"; }
inline std::string cell(std::string_view v) { return std::string(v); }
inline std::string cell(const char* v) { return v; }

}  // namespace rmdim::app
