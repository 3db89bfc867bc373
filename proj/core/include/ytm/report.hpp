#ifndef YTM_REPORT_HPP
#define YTM_REPORT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ytm::report {

// Small ordered JSON tree for machine-readable reports.  Keys keep their
// insertion order and floating-point values are printed with 17 significant
// digits, so identical inputs yield byte-identical output.
class Node {
 public:
  using Array = std::vector<Node>;
  using Object = std::vector<std::pair<std::string, Node>>;

  Node() : value_(nullptr) {}
  Node(std::nullptr_t) : value_(nullptr) {}
  Node(bool b) : value_(b) {}
  Node(int v) : value_(static_cast<std::int64_t>(v)) {}
  Node(std::int64_t v) : value_(v) {}
  Node(std::uint64_t v) : value_(static_cast<std::int64_t>(v)) {}
  Node(double v) : value_(v) {}
  Node(const char* s) : value_(std::string(s)) {}
  Node(std::string s) : value_(std::move(s)) {}

  static Node object() {
    Node n;
    n.value_ = Object{};
    return n;
  }
  static Node array() {
    Node n;
    n.value_ = Array{};
    return n;
  }

  Node& set(const std::string& key, Node value);
  Node& push(Node value);

  bool is_object() const { return std::holds_alternative<Object>(value_); }
  bool is_array() const { return std::holds_alternative<Array>(value_); }

  // Compact JSON; with pretty = true a two-space indented rendering.
  std::string dump(bool pretty = false) const;

 private:
  void dump_to(std::string& out, bool pretty, int depth) const;
  std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array,
               Object>
      value_;
};

// FNV-1a 64-bit digest, hex-encoded; used to fingerprint input files.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace ytm::report

#endif
