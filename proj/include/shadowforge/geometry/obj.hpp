/* Copyright 2026 The ShadowForge Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */
#pragma once

// Wavefront OBJ subset: `v x y z`, `vt u v`, `f a b c` or `f a/at b/bt c/ct`
// (a trailing /n normal index is accepted and ignored). Indices are 1-based;
// negative indices count back from the end as in the OBJ format.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "shadowforge/core/image_io.hpp"
#include "shadowforge/geometry/mesh.hpp"

namespace shadowforge {

namespace detail {

inline double parse_double(std::string_view tok, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError("bad number '" + std::string(tok) + "'", line);
  return v;
}

inline int parse_index(std::string_view tok, int count, int line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError("bad index '" + std::string(tok) + "'", line);
  if (v == 0) throw ParseError("index 0 is invalid (OBJ indices are 1-based)", line);
  const int idx = v > 0 ? v - 1 : count + v;
  if (idx < 0 || idx >= count)
    throw ParseError("index " + std::to_string(v) + " out of range (" + std::to_string(count) + " defined)", line);
  return idx;
}

}  // namespace detail

inline TriMesh parse_obj(std::istream& in) {
  TriMesh mesh;
  std::string line;
  int lineno = 0;
  int faces_with_uv = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (tag == "v") {
      if (toks.size() < 3) throw ParseError("vertex needs 3 coordinates", lineno);
      mesh.vertices.push_back({detail::parse_double(toks[0], lineno), detail::parse_double(toks[1], lineno),
                               detail::parse_double(toks[2], lineno)});
    } else if (tag == "vt") {
      if (toks.size() < 2) throw ParseError("texture coordinate needs 2 values", lineno);
      mesh.uvs.push_back({detail::parse_double(toks[0], lineno), detail::parse_double(toks[1], lineno)});
    } else if (tag == "f") {
      if (toks.size() != 3) throw ParseError("only triangular faces are supported", lineno);
      Face f{}, ft{};
      int with_uv = 0;
      for (int k = 0; k < 3; ++k) {
        std::string_view tok = toks[k];
        const auto s1 = tok.find('/');
        f[k] = detail::parse_index(tok.substr(0, s1), static_cast<int>(mesh.vertices.size()), lineno);
        if (s1 != std::string_view::npos) {
          auto rest = tok.substr(s1 + 1);
          auto uvtok = rest.substr(0, rest.find('/'));
          if (!uvtok.empty()) {
            ft[k] = detail::parse_index(uvtok, static_cast<int>(mesh.uvs.size()), lineno);
            ++with_uv;
          }
        }
      }
      if (with_uv != 0 && with_uv != 3) throw ParseError("face mixes corners with and without uv", lineno);
      mesh.faces.push_back(f);
      if (with_uv == 3) {
        mesh.uv_faces.push_back(ft);
        ++faces_with_uv;
      }
    }
    // vn, o, g, s, usemtl, mtllib and others are ignored.
  }
  if (faces_with_uv != 0 && faces_with_uv != static_cast<int>(mesh.faces.size()))
    throw ParseError("some faces have uvs and others do not", lineno);
  if (mesh.faces.empty()) throw ParseError("no faces", lineno);
  try {
    validate(mesh);
  } catch (const DomainError& e) {
    throw AssetError(e.what());
  }
  return mesh;
}

inline TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AssetError("asset not found: " + path.string());
  return parse_obj(in);
}

inline std::string format_obj(const TriMesh& mesh) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& v : mesh.vertices) os << "v " << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.uvs) os << "vt " << t.x << " " << t.y << "\n";
  for (size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    os << "f";
    for (int k = 0; k < 3; ++k) {
      os << " " << f[k] + 1;
      if (mesh.has_uvs()) os << "/" << mesh.uv_faces[i][k] + 1;
    }
    os << "\n";
  }
  return os.str();
}

inline void save_obj(const std::filesystem::path& path, const TriMesh& mesh) { write_file_bytes(path, format_obj(mesh)); }

}  // namespace shadowforge
