#include "trisdf/mesh_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace trisdf {

namespace {

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot open for writing: " + tmp.string());
    out << text;
    if (!out) throw RuntimeError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_coord(real v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", double(v));
  return buf;
}

// leading integer of an OBJ face token like "12", "12/3" or "12//4"
int face_vertex_index(const std::string& token, const std::filesystem::path& path) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr == token.data())
    throw InputError("bad face index '" + token + "' in " + path.string());
  return value;
}

}  // namespace

void save_mesh_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::string out;
  out.reserve(32 * mesh.vertices.size() + 16 * mesh.faces.size() + 64);
  for (const Vec3& v : mesh.vertices)
    out += "v " + format_coord(v.x) + " " + format_coord(v.y) + " " + format_coord(v.z) + "\n";
  for (const auto& f : mesh.faces)
    out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " +
           std::to_string(f[2] + 1) + "\n";
  write_text_atomic(path, out);
}

void save_mesh_ply(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  out += "element face " + std::to_string(mesh.faces.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : mesh.vertices)
    out += format_coord(v.x) + " " + format_coord(v.y) + " " + format_coord(v.z) + "\n";
  for (const auto& f : mesh.faces)
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " +
           std::to_string(f[2]) + "\n";
  write_text_atomic(path, out);
}

void save_mesh(const std::filesystem::path& path, const TriangleMesh& mesh) {
  const auto ext = path.extension().string();
  if (ext == ".obj")
    save_mesh_obj(path, mesh);
  else if (ext == ".ply")
    save_mesh_ply(path, mesh);
  else
    throw InputError("unsupported mesh extension '" + ext + "' (use .obj or .ply)");
}

TriangleMesh load_mesh_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh: " + path.string());
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) throw InputError("bad vertex line in " + path.string());
      mesh.vertices.push_back({real(x), real(y), real(z)});
    } else if (tag == "f") {
      std::vector<int> indices;
      std::string token;
      while (ss >> token) indices.push_back(face_vertex_index(token, path));
      if (indices.size() != 3)
        throw InputError("only triangular faces are supported (got " +
                         std::to_string(indices.size()) + " vertices) in " + path.string());
      std::array<int, 3> face;
      for (int i = 0; i < 3; ++i) {
        int idx = indices[i];
        // negative indices are relative to the current vertex count
        if (idx < 0) idx = static_cast<int>(mesh.vertices.size()) + idx + 1;
        face[i] = idx - 1;
      }
      mesh.faces.push_back(face);
    }
    // other tags (vn, vt, comments, groups) are ignored
  }
  validate_mesh(mesh);
  return mesh;
}

TriangleMesh load_mesh_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "ply") throw InputError("not a PLY file: " + path.string());

  std::size_t n_vertices = 0, n_faces = 0;
  bool ascii = false;
  std::string current_element;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = (fmt == "ascii");
    } else if (tag == "element") {
      std::size_t count;
      ss >> current_element >> count;
      if (current_element == "vertex") n_vertices = count;
      if (current_element == "face") n_faces = count;
    } else if (tag == "end_header") {
      break;
    }
  }
  if (!ascii) throw InputError("only ASCII PLY is supported: " + path.string());

  TriangleMesh mesh;
  mesh.vertices.reserve(n_vertices);
  for (std::size_t i = 0; i < n_vertices; ++i) {
    double x, y, z;
    if (!(in >> x >> y >> z)) throw InputError("truncated PLY vertices: " + path.string());
    mesh.vertices.push_back({real(x), real(y), real(z)});
  }
  mesh.faces.reserve(n_faces);
  for (std::size_t i = 0; i < n_faces; ++i) {
    int count;
    if (!(in >> count)) throw InputError("truncated PLY faces: " + path.string());
    if (count != 3) throw InputError("only triangular PLY faces are supported: " + path.string());
    std::array<int, 3> face;
    if (!(in >> face[0] >> face[1] >> face[2]))
      throw InputError("truncated PLY face: " + path.string());
    mesh.faces.push_back(face);
  }
  validate_mesh(mesh);
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".obj") return load_mesh_obj(path);
  if (ext == ".ply") return load_mesh_ply(path);
  throw InputError("unsupported mesh extension '" + ext + "' (use .obj or .ply)");
}

}  // namespace trisdf
