#pragma once

#include <filesystem>

#include "trisdf/geometry.hpp"

namespace trisdf {

// ASCII OBJ subset: `v x y z` and triangular `f` records (1-indexed;
// `a/b/c` vertex references accepted, quads rejected). ASCII PLY with
// double vertex properties and uchar-counted triangle faces.
// `save_mesh` / `load_mesh` pick the format from the extension.

void save_mesh_obj(const std::filesystem::path& path, const TriangleMesh& mesh);
void save_mesh_ply(const std::filesystem::path& path, const TriangleMesh& mesh);
void save_mesh(const std::filesystem::path& path, const TriangleMesh& mesh);

TriangleMesh load_mesh_obj(const std::filesystem::path& path);
TriangleMesh load_mesh_ply(const std::filesystem::path& path);
TriangleMesh load_mesh(const std::filesystem::path& path);

}  // namespace trisdf
