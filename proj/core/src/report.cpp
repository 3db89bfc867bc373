#include "ytm/report.hpp"

#include <cmath>
#include <cstdio>

namespace ytm::report {

Node& Node::set(const std::string& key, Node value) {
  if (!is_object()) value_ = Object{};
  std::get<Object>(value_).emplace_back(key, std::move(value));
  return *this;
}

Node& Node::push(Node value) {
  if (!is_array()) value_ = Array{};
  std::get<Array>(value_).push_back(std::move(value));
  return *this;
}

namespace {

void escape_to(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void number_to(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += v > 0 ? "\"inf\"" : (v < 0 ? "\"-inf\"" : "\"nan\"");
    return;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void indent_to(std::string& out, int depth) {
  out += '\n';
  for (int i = 0; i < 2 * depth; ++i) out += ' ';
}

}  // namespace

void Node::dump_to(std::string& out, bool pretty, int depth) const {
  if (std::holds_alternative<std::nullptr_t>(value_)) {
    out += "null";
  } else if (std::holds_alternative<bool>(value_)) {
    out += std::get<bool>(value_) ? "true" : "false";
  } else if (std::holds_alternative<std::int64_t>(value_)) {
    out += std::to_string(std::get<std::int64_t>(value_));
  } else if (std::holds_alternative<double>(value_)) {
    number_to(out, std::get<double>(value_));
  } else if (std::holds_alternative<std::string>(value_)) {
    escape_to(out, std::get<std::string>(value_));
  } else if (std::holds_alternative<Array>(value_)) {
    const auto& arr = std::get<Array>(value_);
    if (arr.empty()) {
      out += "[]";
      return;
    }
    out += '[';
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (i) out += ',';
      if (pretty) indent_to(out, depth + 1);
      arr[i].dump_to(out, pretty, depth + 1);
    }
    if (pretty) indent_to(out, depth);
    out += ']';
  } else {
    const auto& obj = std::get<Object>(value_);
    if (obj.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    for (std::size_t i = 0; i < obj.size(); ++i) {
      if (i) out += ',';
      if (pretty) indent_to(out, depth + 1);
      escape_to(out, obj[i].first);
      out += pretty ? ": " : ":";
      obj[i].second.dump_to(out, pretty, depth + 1);
    }
    if (pretty) indent_to(out, depth);
    out += '}';
  }
}

std::string Node::dump(bool pretty) const {
  std::string out;
  dump_to(out, pretty, 0);
  if (pretty) out += '\n';
  return out;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace ytm::report
