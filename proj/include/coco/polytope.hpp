#pragma once

// Exact routines for sets given by finitely many halfspaces.

#include "coco/geometry.hpp"

#include <vector>

namespace coco::polytope {

// Nearest point of {z : a_i . z <= b_i} to x, by the dual active-set method
// of Goldfarb and Idnani specialised to an identity Hessian. Exact up to
// rounding. Throws EmptySetError if the faces are inconsistent.
Vector project(std::span<const Halfspace> faces, const Vector& x);

bool satisfies(std::span<const Halfspace> faces, const Vector& x, double tol);

// max u . z over the faces, by the simplex method. Vertex enumeration
// (d <= 3) is kept as a slow reference. Throws UnboundedError / EmptySetError.
double support(std::span<const Halfspace> faces, const Vector& u);
double support_vertex_enumeration(std::span<const Halfspace> faces, const Vector& u);
double support_simplex(std::span<const Halfspace> faces, const Vector& u);

std::vector<Halfspace> box_faces(const Box& box);

// d = 2 only: vertices of the polygon in counter-clockwise order. The
// polygon must be bounded.
std::vector<Vector> polygon_vertices(std::span<const Halfspace> faces);

// d = 2 only: faces that carry an edge, with the polygon they bound.
struct PrunedPolygon {
  std::vector<Halfspace> faces;
  PolygonCache polygon;
};
PrunedPolygon build_polygon(std::span<const Halfspace> faces);
// Clips an already pruned polygon by further faces; O(size) per face.
PrunedPolygon add_faces(std::span<const Halfspace> faces, const PolygonCache& polygon,
                        std::span<const Halfspace> extra);

// d = 2 only: drops every face that does not carry an edge of the polygon.
std::vector<Halfspace> prune_redundant_2d(std::span<const Halfspace> faces);

}  // namespace coco::polytope
