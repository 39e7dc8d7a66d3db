#ifndef ELASTIC_LATTICE_HPP
#define ELASTIC_LATTICE_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace elastic {

using Vertex = std::int64_t;
using Coords = std::vector<std::int64_t>;

enum class Norm { euclidean, linf };

Norm parse_norm(const std::string& name);
std::string to_string(Norm norm);

/// Periodic d-dimensional cube of edge L. Vertex ids are row-major over the
/// coordinates, first axis most significant.
class Lattice {
 public:
  Lattice(int dim, std::int64_t edge);

  int dim() const { return dim_; }
  std::int64_t edge() const { return edge_; }
  std::int64_t size() const { return size_; }

  bool contains(Vertex v) const { return v >= 0 && v < size_; }

  Coords coords(Vertex v) const;
  Vertex vertex(std::span<const std::int64_t> coords) const;

  /// Coordinate of v along one axis, without materializing the vector.
  std::int64_t coord(Vertex v, int axis) const;

  /// Adds a displacement and wraps around the torus.
  Vertex translate(Vertex v, std::span<const std::int64_t> shift) const;

  /// Moves one coordinate by +/-1.
  Vertex step(Vertex v, int axis, int direction) const;

  /// Wraps a single-axis difference into (-L/2, L/2].
  std::int64_t min_image(std::int64_t delta) const;

  bool operator==(const Lattice&) const = default;

 private:
  void check(Vertex v) const;

  int dim_;
  std::int64_t edge_;
  std::int64_t size_;
  std::vector<std::int64_t> stride_;
};

/// Minimal-image coordinate difference b - a, each component in (-L/2, L/2].
Coords torus_displacement(Vertex a, Vertex b, const Lattice& lat);

double displacement_norm(std::span<const std::int64_t> disp, Norm norm);

double min_image_distance(Vertex a, Vertex b, const Lattice& lat,
                          Norm norm = Norm::euclidean);

/// Partition of a lattice into congruent sub-cubes of edge ell_bar.
/// Box ids are row-major over box coordinates, like vertex ids.
class Dissection {
 public:
  Dissection(Lattice parent, std::int64_t box_edge);

  const Lattice& lattice() const { return parent_; }
  /// The torus of boxes: edge L / ell_bar, same dimension.
  const Lattice& box_lattice() const { return boxes_; }

  std::int64_t box_edge() const { return box_edge_; }
  std::int64_t box_volume() const { return box_volume_; }
  std::int64_t box_count() const { return boxes_.size(); }
  std::int64_t boxes_per_side() const { return boxes_.edge(); }

  std::int64_t box_of(Vertex v) const;
  /// Vertices of box b in increasing id order.
  std::vector<Vertex> box_vertices(std::int64_t box) const;

 private:
  Lattice parent_;
  std::int64_t box_edge_;
  std::int64_t box_volume_;
  Lattice boxes_;
};

inline std::int64_t box_of(Vertex v, const Dissection& dis) { return dis.box_of(v); }

}  // namespace elastic

#endif  // ELASTIC_LATTICE_HPP
