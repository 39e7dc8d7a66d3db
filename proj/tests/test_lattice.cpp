#include "doctest.h"

#include <cmath>
#include <vector>

#include "elastic/lattice.hpp"

using namespace elastic;

TEST_CASE("vertex ids are row-major with the first axis most significant") {
  Lattice lat(2, 4);
  CHECK(lat.size() == 16);
  const std::vector<std::int64_t> c{1, 3};
  CHECK(lat.vertex(c) == 7);
  CHECK(lat.coords(7) == Coords{1, 3});
  for (Vertex v = 0; v < lat.size(); ++v) CHECK(lat.vertex(lat.coords(v)) == v);
}

TEST_CASE("translation and steps wrap around the torus") {
  Lattice lat(1, 5);
  const std::vector<std::int64_t> shift{-2};
  CHECK(lat.translate(1, shift) == 4);
  CHECK(lat.step(4, 0, 1) == 0);
  CHECK(lat.step(0, 0, -1) == 4);
}

TEST_CASE("minimal image distance") {
  Lattice lat(2, 6);
  CHECK(lat.min_image(5) == -1);
  CHECK(lat.min_image(3) == 3);
  CHECK(lat.min_image(-3) == 3);
  const std::vector<std::int64_t> a{0, 0};
  const std::vector<std::int64_t> b{5, 3};
  CHECK(min_image_distance(lat.vertex(a), lat.vertex(b), lat, Norm::euclidean) == doctest::Approx(std::sqrt(10.0)));
  CHECK(min_image_distance(lat.vertex(a), lat.vertex(b), lat, Norm::linf) == 3.0);
}

TEST_CASE("invalid input is rejected") {
  CHECK_THROWS(Lattice(0, 4));
  CHECK_THROWS(Lattice(1, 0));
  Lattice lat(1, 4);
  CHECK_THROWS(lat.coords(4));
  CHECK_THROWS(Dissection(lat, 3));
  CHECK_THROWS(parse_norm("taxicab"));
}

TEST_CASE("dissection boxes") {
  Dissection dis(Lattice(2, 4), 2);
  CHECK(dis.box_volume() == 4);
  CHECK(dis.box_count() == 4);
  CHECK(dis.box_of(0) == 0);
  CHECK(dis.box_of(3) == 1);
  CHECK(dis.box_of(15) == 3);
  CHECK(dis.box_vertices(1) == std::vector<Vertex>{2, 3, 6, 7});
}
