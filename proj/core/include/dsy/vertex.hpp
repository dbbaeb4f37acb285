#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dsy {

// Address of a vertex in a rooted ordered tree, stored as the sequence of
// child indices from the root (the root itself has an empty path). Child
// indices start at 1; the binary tree uses only 1 and 2, the
// countable-offspring tree allows any index >= 1.
//
// VertexId is an ordinary value type: copyable, hashable by content, and
// ordered lexicographically so that addresses can key deterministic RNG
// streams independently of exploration order.
class VertexId {
 public:
  VertexId() = default;
  explicit VertexId(std::vector<std::uint32_t> path) : path_(std::move(path)) {}

  static VertexId root() { return VertexId{}; }

  // Address of the k-th child, k >= 1.
  VertexId child(std::uint32_t k) const;

  // Address with the last index dropped; parent of the root is the root.
  VertexId parent() const;

  std::size_t depth() const { return path_.size(); }
  bool is_root() const { return path_.empty(); }

  // True iff every index is 1 or 2 (vertex of the binary tree).
  bool is_binary() const;

  // [root, v|1, ..., v] in root-to-leaf order; depth()+1 elements.
  std::vector<VertexId> prefixes() const;

  std::span<const std::uint32_t> path() const { return path_; }

  // Dotted rendering, e.g. "1.2.2"; the root renders as "".
  std::string to_string() const;

  auto operator<=>(const VertexId&) const = default;

 private:
  std::vector<std::uint32_t> path_;
};

}  // namespace dsy
