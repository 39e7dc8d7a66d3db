#include "elastic/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "elastic/errors.hpp"

namespace elastic {

Norm parse_norm(const std::string& name) {
  if (name == "euclidean") return Norm::euclidean;
  if (name == "linf") return Norm::linf;
  throw DomainError("unknown norm '" + name + "' (expected euclidean or linf)");
}

std::string to_string(Norm norm) { return norm == Norm::linf ? "linf" : "euclidean"; }

Lattice::Lattice(int dim, std::int64_t edge) : dim_(dim), edge_(edge), size_(1) {
  if (dim < 1) throw DomainError("lattice dimension must be positive");
  if (edge < 1) throw DomainError("lattice edge must be positive");
  stride_.assign(static_cast<std::size_t>(dim), 1);
  for (int axis = dim - 1; axis >= 0; --axis) {
    stride_[static_cast<std::size_t>(axis)] = size_;
    if (size_ > (std::int64_t{1} << 40) / edge) throw DomainError("lattice too large");
    size_ *= edge;
  }
}

void Lattice::check(Vertex v) const {
  if (!contains(v)) {
    throw DomainError("vertex id " + std::to_string(v) + " outside [0, " +
                      std::to_string(size_) + ")");
  }
}

Coords Lattice::coords(Vertex v) const {
  check(v);
  Coords out(static_cast<std::size_t>(dim_));
  for (int axis = 0; axis < dim_; ++axis) out[static_cast<std::size_t>(axis)] = coord(v, axis);
  return out;
}

std::int64_t Lattice::coord(Vertex v, int axis) const {
  return (v / stride_[static_cast<std::size_t>(axis)]) % edge_;
}

Vertex Lattice::vertex(std::span<const std::int64_t> c) const {
  if (c.size() != static_cast<std::size_t>(dim_)) throw DomainError("coordinate arity mismatch");
  Vertex v = 0;
  for (int axis = 0; axis < dim_; ++axis) {
    auto x = c[static_cast<std::size_t>(axis)];
    if (x < 0 || x >= edge_) throw DomainError("coordinate out of range");
    v += x * stride_[static_cast<std::size_t>(axis)];
  }
  return v;
}

Vertex Lattice::translate(Vertex v, std::span<const std::int64_t> shift) const {
  check(v);
  Vertex out = 0;
  for (int axis = 0; axis < dim_; ++axis) {
    auto x = coord(v, axis) + shift[static_cast<std::size_t>(axis)];
    x %= edge_;
    if (x < 0) x += edge_;
    out += x * stride_[static_cast<std::size_t>(axis)];
  }
  return out;
}

Vertex Lattice::step(Vertex v, int axis, int direction) const {
  auto x = coord(v, axis);
  auto y = x + direction;
  if (y < 0) y += edge_;
  if (y >= edge_) y -= edge_;
  return v + (y - x) * stride_[static_cast<std::size_t>(axis)];
}

std::int64_t Lattice::min_image(std::int64_t delta) const {
  delta %= edge_;
  if (delta < 0) delta += edge_;
  // (-L/2, L/2]: for even L the antipode stays positive.
  if (2 * delta > edge_) delta -= edge_;
  return delta;
}

Coords torus_displacement(Vertex a, Vertex b, const Lattice& lat) {
  if (!lat.contains(a) || !lat.contains(b)) throw DomainError("invalid vertex id");
  Coords out(static_cast<std::size_t>(lat.dim()));
  for (int axis = 0; axis < lat.dim(); ++axis) {
    out[static_cast<std::size_t>(axis)] = lat.min_image(lat.coord(b, axis) - lat.coord(a, axis));
  }
  return out;
}

double displacement_norm(std::span<const std::int64_t> disp, Norm norm) {
  if (norm == Norm::linf) {
    std::int64_t m = 0;
    for (auto x : disp) m = std::max(m, std::abs(x));
    return static_cast<double>(m);
  }
  double s = 0.0;
  for (auto x : disp) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

double min_image_distance(Vertex a, Vertex b, const Lattice& lat, Norm norm) {
  auto disp = torus_displacement(a, b, lat);
  return displacement_norm(disp, norm);
}

namespace {

std::int64_t checked_box_edge(const Lattice& parent, std::int64_t box_edge) {
  if (box_edge < 1) throw DomainError("box edge must be positive");
  if (parent.edge() % box_edge != 0) {
    throw DomainError("box edge " + std::to_string(box_edge) + " does not divide L = " +
                      std::to_string(parent.edge()));
  }
  return box_edge;
}

}  // namespace

Dissection::Dissection(Lattice parent, std::int64_t box_edge)
    : parent_(parent),
      box_edge_(checked_box_edge(parent, box_edge)),
      box_volume_(1),
      boxes_(parent.dim(), parent.edge() / box_edge) {
  for (int axis = 0; axis < parent_.dim(); ++axis) box_volume_ *= box_edge_;
}

std::int64_t Dissection::box_of(Vertex v) const {
  if (!parent_.contains(v)) throw DomainError("invalid vertex id");
  std::int64_t box = 0;
  for (int axis = 0; axis < parent_.dim(); ++axis) {
    box = box * boxes_.edge() + parent_.coord(v, axis) / box_edge_;
  }
  return box;
}

std::vector<Vertex> Dissection::box_vertices(std::int64_t box) const {
  auto corner = boxes_.coords(box);
  for (auto& x : corner) x *= box_edge_;
  std::vector<Vertex> out;
  out.reserve(static_cast<std::size_t>(box_volume_));
  Coords at(corner.size());
  for (std::int64_t k = 0; k < box_volume_; ++k) {
    auto rem = k;
    for (int axis = parent_.dim() - 1; axis >= 0; --axis) {
      auto a = static_cast<std::size_t>(axis);
      at[a] = corner[a] + rem % box_edge_;
      rem /= box_edge_;
    }
    out.push_back(parent_.vertex(at));
  }
  return out;
}

}  // namespace elastic
