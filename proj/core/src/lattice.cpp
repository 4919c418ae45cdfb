#include "rydcycle/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "rydcycle/errors.hpp"

namespace rydcycle {

Boundary parse_boundary(std::string_view text) {
  if (text == "open") return Boundary::Open;
  if (text == "periodic") return Boundary::Periodic;
  throw ConfigError("boundary must be 'open' or 'periodic', got '" + std::string(text) + "'");
}

std::string_view to_string(Boundary b) {
  return b == Boundary::Open ? "open" : "periodic";
}

Lattice::Lattice(int edge, Boundary boundary) : edge_(edge), boundary_(boundary) {
  if (edge < 1) throw ConfigError("lattice edge length must be >= 1");
}

Site Lattice::site(std::size_t l) const {
  return {static_cast<int>(l / edge_), static_cast<int>(l % edge_)};
}

std::size_t Lattice::index(int i, int j) const {
  return static_cast<std::size_t>(i) * edge_ + j;
}

double Lattice::distance(std::size_t l, std::size_t k) const {
  const Site a = site(l);
  const Site b = site(k);
  int di = std::abs(a.i - b.i);
  int dj = std::abs(a.j - b.j);
  if (boundary_ == Boundary::Periodic) {
    di = std::min(di, edge_ - di);
    dj = std::min(dj, edge_ - dj);
  }
  return std::hypot(static_cast<double>(di), static_cast<double>(dj));
}

}  // namespace rydcycle
