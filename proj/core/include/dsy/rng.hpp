#pragma once

#include <cmath>
#include <cstdint>

#include "dsy/vertex.hpp"

namespace dsy {

// Counter-based keyed RNG. Every vertex of the (implicit) tree owns one
// 64-bit key derived from (seed, trial, address); each purpose a vertex
// draws randomness for gets its own substream, so adding a draw for one
// purpose never shifts the variates of another. This is what makes
// simulations bit-reproducible independently of exploration order and
// thread count.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ (b * 0xd6e8feb86659fd93ULL));
}

// Stream purposes, one substream per vertex per purpose.
enum class Draw : std::uint64_t {
  holding = 1,    // the mean-one exponential T_v
  state = 2,      // the child's Markov state, drawn with the child's key
  offspring = 3,  // Galton-Watson offspring count
  pair_u = 4,     // joint child weights (iterated-map kernels)
  initial = 5,    // stationary draw for the root state
};

inline std::uint64_t trial_key(std::uint64_t seed, std::uint64_t trial) {
  return mix64(seed, trial);
}

// Key of a vertex: fold the child indices into the trial key.
inline std::uint64_t vertex_key(std::uint64_t tkey, const VertexId& v) {
  std::uint64_t k = tkey;
  for (auto idx : v.path()) k = mix64(k, idx);
  return k;
}

inline std::uint64_t child_key(std::uint64_t parent_key, std::uint32_t idx) {
  return mix64(parent_key, idx);
}

// One substream: a deterministic sequence of u64s for (key, purpose).
class CounterStream {
 public:
  CounterStream(std::uint64_t key, Draw purpose)
      : base_(mix64(key, 0x5851f42d4c957f2dULL ^ static_cast<std::uint64_t>(purpose))) {}

  std::uint64_t next_u64() { return mix64(base_, ++n_); }

  // Uniform on (0,1), never returning an exact endpoint.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Mean-one exponential.
  double next_exp() { return -std::log(next_unit()); }

 private:
  std::uint64_t base_;
  std::uint64_t n_ = 0;
};

}  // namespace dsy
