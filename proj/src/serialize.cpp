#include "modloc/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace modloc {

using nlohmann::json;

std::string subspace_to_json(const real_subspace_t& h) {
  json basis = json::array();
  for (index_t c = 0; c < h.dim(); ++c) {
    json col = json::array();
    for (index_t r = 0; r < h.ambient_dim; ++r)
      col.push_back({h.basis(r, c).real(), h.basis(r, c).imag()});
    basis.push_back(std::move(col));
  }
  json out = {
      {"ambient_dim", h.ambient_dim},
      {"basis", std::move(basis)},
      {"tol", {{"abs_tol", h.tol.abs_tol_per_dim}, {"rank_tol", h.tol.rank_tol_rel}}},
  };
  return out.dump(2);
}

real_subspace_t subspace_from_json(const std::string& text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::exception& e) {
    fail(errc::io_error, std::string("subspace_from_json: ") + e.what());
  }
  real_subspace_t h;
  try {
    h.ambient_dim = in.at("ambient_dim").get<index_t>();
    h.tol.abs_tol_per_dim = in.at("tol").at("abs_tol").get<scalar_t>();
    h.tol.rank_tol_rel = in.at("tol").at("rank_tol").get<scalar_t>();
    const json& basis = in.at("basis");
    h.basis = cmat_t(h.ambient_dim, static_cast<index_t>(basis.size()));
    for (index_t c = 0; c < h.dim(); ++c) {
      const json& col = basis.at(c);
      require(static_cast<index_t>(col.size()) == h.ambient_dim, errc::io_error,
              "subspace_from_json: column length mismatch");
      for (index_t r = 0; r < h.ambient_dim; ++r)
        h.basis(r, c) = complex_t(col.at(r).at(0).get<scalar_t>(),
                                  col.at(r).at(1).get<scalar_t>());
    }
  } catch (const json::exception& e) {
    fail(errc::io_error, std::string("subspace_from_json: ") + e.what());
  }
  // stored bases are orthonormal; verify instead of silently re-orthonormalizing
  if (h.dim() > 0) {
    rmat_t rb = realify_columns(h.basis);
    rmat_t gram = rb.transpose() * rb;
    require((gram - rmat_t::Identity(h.dim(), h.dim())).cwiseAbs().maxCoeff() < 1e-8,
            errc::io_error, "subspace_from_json: stored basis is not orthonormal");
  }
  return h;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::io_error, "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), errc::io_error, "cannot open for writing: " + path);
  out << text;
  require(out.good(), errc::io_error, "write failed: " + path);
}

void save_subspace(const std::string& path, const real_subspace_t& h) {
  write_text_file(path, subspace_to_json(h));
}

real_subspace_t load_subspace(const std::string& path) {
  return subspace_from_json(read_text_file(path));
}

void write_complex_binary(const std::string& path, const cvec_t& v) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), errc::io_error, "cannot open for writing: " + path);
  std::uint64_t n = static_cast<std::uint64_t>(v.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (index_t i = 0; i < v.size(); ++i) {
    scalar_t re = v(i).real(), im = v(i).imag();
    out.write(reinterpret_cast<const char*>(&re), sizeof(re));
    out.write(reinterpret_cast<const char*>(&im), sizeof(im));
  }
  require(out.good(), errc::io_error, "write failed: " + path);
}

cvec_t read_complex_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::io_error, "cannot open for reading: " + path);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  require(in.good(), errc::io_error, "truncated file: " + path);
  cvec_t v(static_cast<index_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    scalar_t re = 0, im = 0;
    in.read(reinterpret_cast<char*>(&re), sizeof(re));
    in.read(reinterpret_cast<char*>(&im), sizeof(im));
    require(in.good(), errc::io_error, "truncated file: " + path);
    v(static_cast<index_t>(i)) = complex_t(re, im);
  }
  return v;
}

}  // namespace modloc
