#pragma once

#include <filesystem>

#include "nmr/mesh/mesh.hpp"

namespace nmr::mesh {

/// Writes binary little-endian PLY: x,y,z,nx,ny,nz as float32, red,green,blue
/// as uint8, then any features as float32 properties feat_0..feat_{k-1}, and
/// faces as uchar-count / int32-index lists.  Normals are computed when the
/// mesh has none; missing colors are written as mid grey.
void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Reads PLY (ascii or binary little-endian) with the properties above
/// (normals, colors and features optional) or OBJ (v / f records, 1-based or
/// negative indices, polygons fan-triangulated).  Format is picked from the
/// extension.  Throws MeshError with a line or byte-offset diagnostic.
TriangleMesh load_mesh(const std::filesystem::path& path);
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace nmr::mesh
