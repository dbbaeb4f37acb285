#include "dsy/vertex.hpp"

namespace dsy {

VertexId VertexId::child(std::uint32_t k) const {
  std::vector<std::uint32_t> p = path_;
  p.push_back(k);
  return VertexId{std::move(p)};
}

VertexId VertexId::parent() const {
  if (path_.empty()) return *this;
  std::vector<std::uint32_t> p(path_.begin(), path_.end() - 1);
  return VertexId{std::move(p)};
}

bool VertexId::is_binary() const {
  for (auto k : path_)
    if (k != 1 && k != 2) return false;
  return true;
}

std::vector<VertexId> VertexId::prefixes() const {
  std::vector<VertexId> out;
  out.reserve(path_.size() + 1);
  std::vector<std::uint32_t> p;
  out.emplace_back(p);
  for (auto k : path_) {
    p.push_back(k);
    out.emplace_back(p);
  }
  return out;
}

std::string VertexId::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < path_.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(path_[i]);
  }
  return s;
}

}  // namespace dsy
