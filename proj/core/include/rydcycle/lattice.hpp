#pragma once

#include <cstddef>
#include <string_view>

namespace rydcycle {

enum class Boundary { Open, Periodic };

Boundary parse_boundary(std::string_view text);
std::string_view to_string(Boundary b);

struct Site {
  int i = 0;
  int j = 0;
};

/// Square lattice of edge L with unit spacing; site l sits at (l / L, l % L).
class Lattice {
 public:
  explicit Lattice(int edge, Boundary boundary = Boundary::Open);

  int edge() const { return edge_; }
  Boundary boundary() const { return boundary_; }
  std::size_t size() const { return static_cast<std::size_t>(edge_) * edge_; }

  Site site(std::size_t l) const;
  std::size_t index(int i, int j) const;

  /// Euclidean distance, minimum image under periodic boundary.
  double distance(std::size_t l, std::size_t k) const;

 private:
  int edge_;
  Boundary boundary_;
};

}  // namespace rydcycle
