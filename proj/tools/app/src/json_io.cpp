#include "rmdim/app/json_io.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rmdim/error.hpp"

namespace rmdim::app {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

namespace {

void emit(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + Json(it.key()).dump() + (indent > 0 ? ": " : ":");
        emit(it.value(), indent, depth + 1, out);
      }
      out += nl + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      out += nl;
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) {
          out += ",";
          out += nl;
        }
        out += pad;
        emit(j[i], indent, depth + 1, out);
      }
      out += nl + close_pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default: out += j.dump(); return;
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  emit(j, indent, 0, out);
  out += "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Reader::Reader(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) type_mismatch(path_, "an object");
}

std::string Reader::path_of(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

bool Reader::has(std::string_view key) const { return j_->contains(key); }

const Json* Reader::find(std::string_view key) const {
  auto it = j_->find(key);
  if (it == j_->end()) return nullptr;
  used_.emplace(key);
  return &*it;
}

const Json& Reader::at(std::string_view key) const {
  const Json* j = find(key);
  if (!j) throw ConfigError("required key is missing", path_of(key));
  return *j;
}

Reader Reader::child(std::string_view key) const { return Reader(at(key), path_of(key)); }

std::optional<Reader> Reader::child_opt(std::string_view key) const {
  const Json* j = find(key);
  if (!j) return std::nullopt;
  return Reader(*j, path_of(key));
}

void Reader::finish() const {
  for (auto it = j_->begin(); it != j_->end(); ++it)
    if (!used_.count(it.key())) throw ConfigError("unknown key", path_of(it.key()));
}

void type_mismatch(const std::string& path, std::string_view expected) {
  throw ConfigError("expected " + std::string(expected), path);
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw InputError("csv row has the wrong number of cells");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      const bool quote = r[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out += r[i];
        continue;
      }
      out += '"';
      for (char c : r[i]) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

}  // namespace rmdim::app
