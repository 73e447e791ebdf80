#pragma once

// Procedural test surfaces with known geometry (closed-form principal
// directions or Euler characteristic).

#include "neurcross/mesh.hpp"
#include "neurcross/quad_metrics.hpp"

#include <cstdint>
#include <vector>

namespace neurcross::shapes {

TriMesh icosahedron(double radius = 1.0);
/// Loop-style 1-to-4 subdivisions of the icosahedron projected to the sphere
/// (20 * 4^level faces).
TriMesh icosphere(int level, double radius = 1.0);
/// Sphere with radial perturbation r = radius * (1 + amplitude * sin(k phi) sin(k theta)).
TriMesh bumpy_sphere(int level, double radius, double amplitude, int frequency);

/// Torus around the z axis, staggered triangulation (rows offset by half a
/// cell) so no edge family follows a principal direction.
TriMesh torus(double major, double minor, int n_major, int n_minor);
/// Open tube of radius r around the z axis, z in [-h/2, h/2], staggered rows.
TriMesh cylinder(double radius, double height, int n_around, int n_along);
/// Flat grid in the z = 0 plane, [0,nx] x [0,ny] scaled by `cell`.
TriMesh flat_grid(int nx, int ny, double cell = 1.0);
/// Closed genus-2 surface: boundary of a voxel plate with two square holes,
/// triangulated and smoothed.
TriMesh genus2(int smoothing_iterations = 8);

/// 1-to-4 midpoint subdivision, keeping vertex positions (no smoothing).
TriMesh subdivide_midpoint(const TriMesh& mesh);
/// Cyclically rotates each face's vertex list by a seeded random amount.
/// Orientation is preserved; only the first edge (and hence mu) changes.
TriMesh shuffle_face_starts(const TriMesh& mesh, std::uint64_t seed);

using QuadSoup = QuadMesh;

QuadSoup quad_grid(int nx, int ny, double cell = 1.0);
QuadSoup quad_cube(double side = 1.0);
/// Cube-sphere: each cube face split into n x n quads, projected to radius.
QuadSoup quad_sphere(int n, double radius = 1.0);
/// Splits every quad along its (0,2) diagonal.
TriMesh triangulate(const QuadSoup& quads);

} // namespace neurcross::shapes
